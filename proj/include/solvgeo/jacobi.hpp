#pragma once

// Polar volume density of exp at the origin from the matrix Jacobi equation in the
// left-invariant frame. Columns of J are the Jacobi fields with J(0) = 0, DJ(0) = e_k for an
// oriented orthonormal basis e_1..e_N of v-perp; with P = DJ,
//   J' = P - Omega J,   P' = -Omega P - K(u) J,
// where Omega_{mk} = sum_i u^i Gamma^m_{ik} and K(u) J = R(J, u) u. The density is
// det[u | J], the N-volume the fields span orthogonally to the geodesic.

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "solvgeo/geodesics.hpp"
#include "solvgeo/metric.hpp"
#include "solvgeo/ode.hpp"

namespace solvgeo {

namespace detail {

// Determinant of an n x n row-major matrix by partial pivoting (copy is consumed).
inline double determinant(std::vector<double> A, std::size_t n) {
  double det = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r * n + c]) > std::abs(A[piv * n + c])) piv = r;
    if (A[piv * n + c] == 0.0) return 0.0;
    if (piv != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(A[c * n + k], A[piv * n + k]);
      det = -det;
    }
    det *= A[c * n + c];
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = A[r * n + c] / A[c * n + c];
      for (std::size_t k = c; k < n; ++k) A[r * n + k] -= f * A[c * n + k];
    }
  }
  return det;
}

// Orthonormal e_1..e_N completing the unit vector v, oriented so det[v | e] = +1.
// Returned column-major: e[k * n + m] is component m of e_k.
inline std::vector<double> complete_basis(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<double> basis(n * n, 0.0);
  for (std::size_t m = 0; m < n; ++m) basis[m] = v[m];
  std::size_t filled = 1;
  for (std::size_t cand = 0; cand < n && filled < n; ++cand) {
    std::vector<double> w(n, 0.0);
    w[cand] = 1.0;
    for (std::size_t k = 0; k < filled; ++k) {
      double d = 0.0;
      for (std::size_t m = 0; m < n; ++m) d += basis[k * n + m] * w[m];
      for (std::size_t m = 0; m < n; ++m) w[m] -= d * basis[k * n + m];
    }
    double nw = 0.0;
    for (double c : w) nw += c * c;
    nw = std::sqrt(nw);
    if (nw < 1e-8) continue;
    for (std::size_t m = 0; m < n; ++m) basis[filled * n + m] = w[m] / nw;
    ++filled;
  }
  // det of [v | e] in row-major equals det of the column-major array read row-major.
  if (determinant(basis, n) < 0.0)
    for (std::size_t m = 0; m < n; ++m) basis[(n - 1) * n + m] = -basis[(n - 1) * n + m];
  return std::vector<double>(basis.begin() + static_cast<std::ptrdiff_t>(n), basis.end());
}

}  // namespace detail

// Integrates the geodesic along a unit frame vector at the origin together with its Jacobi
// fields. State layout: z, z', J (n x N, row-major), P (n x N), then `extra` slots left to the caller.
class JacobiFlow {
 public:
  JacobiFlow(const MetricParams& p, std::span<const double> v, std::size_t extra = 0)
      : p_(&p), N_(p.horizontal_dim()), n_(N_ + 1), extra_(extra), R_(p), K_(n_ * n_), u_(n_) {
    require_dim(v.size(), n_, "JacobiFlow direction");
    C_.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(N_));
    v_.assign(v.begin(), v.end());
  }

  std::size_t state_size() const { return 2 + 2 * n_ * N_ + extra_; }
  std::size_t extra_offset() const { return 2 + 2 * n_ * N_; }

  std::vector<double> initial_state() const {
    std::vector<double> y(state_size(), 0.0);
    y[1] = v_[N_];
    const auto e = detail::complete_basis(v_);
    const std::size_t P0 = 2 + n_ * N_;
    for (std::size_t k = 0; k < N_; ++k)
      for (std::size_t m = 0; m < n_; ++m) y[P0 + m * N_ + k] = e[k * n_ + m];
    return y;
  }

  // Frame velocity at height z with vertical speed zdot.
  void frame_velocity(double z, double zdot, std::span<double> u) const {
    for (std::size_t i = 0; i < N_; ++i) u[i] = C_[i] * std::exp(p_->rate(i) * z);
    u[N_] = zdot;
  }

  // det[u | J] at the given state.
  double density(std::span<const double> y) const {
    std::vector<double> M(n_ * n_);
    std::vector<double> u(n_);
    frame_velocity(y[0], y[1], u);
    for (std::size_t m = 0; m < n_; ++m) {
      M[m * n_] = u[m];
      for (std::size_t k = 0; k < N_; ++k) M[m * n_ + k + 1] = y[2 + m * N_ + k];
    }
    return detail::determinant(std::move(M), n_);
  }

  // Fills dy for everything but the extra slots.
  void operator()(double, std::span<const double> y, std::span<double> dy) {
    const std::size_t N = N_, n = n_;
    const double z = y[0];
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double a = p_->rate(i);
      acc += a * C_[i] * C_[i] * std::exp(2.0 * a * z);
    }
    dy[0] = y[1];
    dy[1] = -acc;
    frame_velocity(z, y[1], u_);
    R_.jacobi_operator(u_, K_);

    const std::size_t J0 = 2, P0 = 2 + n * N;
    // Omega is nonzero only in row/column N: Omega_{N,k} = a_k u_k, Omega_{k,N} = -a_k u_k.
    for (std::size_t k = 0; k < N; ++k) {
      double omJ_h = 0.0, omP_h = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        const double w = p_->rate(i) * u_[i];
        omJ_h += w * y[J0 + i * N + k];
        omP_h += w * y[P0 + i * N + k];
      }
      const double Jh = y[J0 + N * N + k], Ph = y[P0 + N * N + k];
      for (std::size_t m = 0; m < n; ++m) {
        double omJ, omP;
        if (m < N) {
          const double w = -p_->rate(m) * u_[m];
          omJ = w * Jh;
          omP = w * Ph;
        } else {
          omJ = omJ_h;
          omP = omP_h;
        }
        double KJ = 0.0;
        for (std::size_t q = 0; q < n; ++q) KJ += K_[m * n + q] * y[J0 + q * N + k];
        dy[J0 + m * N + k] = y[P0 + m * N + k] - omJ;
        dy[P0 + m * N + k] = -omP - KJ;
      }
    }
  }

  void check_range(double z, double s) const {
    for (double a : p_->rates()) {
      if (std::abs(a * z) > kExponentGuard) {
        throw IntegrationError(IntegrationError::Kind::range, "jacobi: |a_i x_{N+1}| exceeds exponent guard", s);
      }
    }
  }

 private:
  const MetricParams* p_;
  std::size_t N_, n_, extra_;
  CurvatureTensor R_;
  std::vector<double> K_, u_, C_, v_;
};

// Polar volume density at arc length t along the unit frame vector v at the origin.
inline double jacobi_volume_density(const MetricParams& p, std::span<const double> v, double t,
                                    const IntegratorConfig& cfg = {}) {
  require_dim(v.size(), p.dim(), "jacobi_volume_density");
  double nv = 0.0;
  for (double c : v) nv += c * c;
  if (std::abs(std::sqrt(nv) - 1.0) > 1e-9) throw std::invalid_argument("jacobi_volume_density: |v| must be 1");
  if (t < 0.0) throw std::invalid_argument("jacobi_volume_density: t must be >= 0");
  cfg.validate();
  JacobiFlow flow(p, v);
  auto y = flow.initial_state();
  DormandPrince dp(y.size());
  dp.integrate(flow, 0.0, t, y, cfg, [&](const StepView& sv) {
    flow.check_range(sv.y1[0], sv.t1);
    return true;
  });
  return flow.density(y);
}

}  // namespace solvgeo
