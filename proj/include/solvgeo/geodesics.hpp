#pragma once

// Geodesic flow of g_a in the reduced form
//   x_i' = C_i exp(2 a_i z),   z'' = -sum_i a_i C_i^2 exp(2 a_i z),
// with the first integrals C_i = x_i' exp(-2 a_i z) held fixed, so the integrated state is
// (x_1, ..., x_N, z, z').

#include <cmath>
#include <ostream>
#include <span>
#include <vector>

#include "solvgeo/csv.hpp"
#include "solvgeo/metric.hpp"
#include "solvgeo/ode.hpp"

namespace solvgeo {

// |a_i z| beyond this aborts integration instead of overflowing exp().
inline constexpr double kExponentGuard = 300.0;

struct GeodesicState {
  double s = 0.0;
  Point x;
  std::vector<double> xdot;
  std::vector<double> C;

  double speed_squared(const MetricParams& p) const { return metric_inner(p, x, xdot, xdot); }

  // First integrals recomputed from the current velocity.
  std::vector<double> integrals(const MetricParams& p) const {
    std::vector<double> c(p.horizontal_dim());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = xdot[i] * std::exp(-2.0 * p.rate(i) * x.height());
    return c;
  }
};

// Right-hand side of the reduced system; C is borrowed and must outlive the flow.
class GeodesicFlow {
 public:
  GeodesicFlow(const MetricParams& p, std::span<const double> C) : p_(&p), C_(C) {
    require_dim(C.size(), p.horizontal_dim(), "GeodesicFlow constants");
  }

  std::size_t state_size() const { return p_->horizontal_dim() + 2; }

  void operator()(double /*s*/, std::span<const double> y, std::span<double> dy) const {
    const std::size_t N = p_->horizontal_dim();
    const double z = y[N];
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double a = p_->rate(i);
      const double e = std::exp(2.0 * a * z);
      dy[i] = C_[i] * e;
      acc += a * C_[i] * C_[i] * e;
    }
    dy[N] = y[N + 1];
    dy[N + 1] = -acc;
  }

  // Squared speed z'^2 + sum C_i^2 e^{2 a_i z}, conserved by the exact flow.
  double energy(std::span<const double> y) const {
    const std::size_t N = p_->horizontal_dim();
    double v = y[N + 1] * y[N + 1];
    for (std::size_t i = 0; i < N; ++i) v += C_[i] * C_[i] * std::exp(2.0 * p_->rate(i) * y[N]);
    return v;
  }

  // One Newton step of (z, z') along the energy gradient back onto the level set E = target.
  bool project(std::span<double> y, double target) const {
    const std::size_t N = p_->horizontal_dim();
    const double z = y[N], zd = y[N + 1];
    double V = 0.0, dV = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double e = C_[i] * C_[i] * std::exp(2.0 * p_->rate(i) * z);
      V += e;
      dV += 2.0 * p_->rate(i) * e;
    }
    const double g = zd * zd + V - target;
    const double gz = dV, gd = 2.0 * zd;
    const double nn = gz * gz + gd * gd;
    if (g == 0.0 || !(nn > 1e-300)) return false;
    y[N] -= g * gz / nn;
    y[N + 1] -= g * gd / nn;
    return true;
  }

  void check_range(double z, double s) const {
    for (double a : p_->rates()) {
      if (std::abs(a * z) > kExponentGuard) {
        throw IntegrationError(IntegrationError::Kind::range, "geodesic: |a_i x_{N+1}| exceeds exponent guard", s);
      }
    }
  }

 private:
  const MetricParams* p_;
  std::span<const double> C_;
};

struct GeodesicDerivative {
  std::vector<double> xdot;  // N+1 coordinate velocities
  double zddot = 0.0;        // acceleration of x_{N+1}
};

// Evaluates the geodesic equations at a state whose constants are taken from state.C.
inline GeodesicDerivative geodesic_rhs(const MetricParams& p, const GeodesicState& state) {
  require_dim(state.x.dim(), p.dim(), "geodesic_rhs point");
  require_dim(state.xdot.size(), p.dim(), "geodesic_rhs velocity");
  require_dim(state.C.size(), p.horizontal_dim(), "geodesic_rhs constants");
  const std::size_t N = p.horizontal_dim();
  GeodesicFlow flow(p, state.C);
  std::vector<double> y(N + 2), dy(N + 2);
  for (std::size_t i = 0; i <= N; ++i) y[i] = state.x[i];
  y[N + 1] = state.xdot[N];
  flow(state.s, y, dy);
  GeodesicDerivative d;
  d.xdot.assign(dy.begin(), dy.begin() + static_cast<std::ptrdiff_t>(N + 1));
  d.zddot = dy[N + 1];
  return d;
}

namespace detail {

inline GeodesicState state_from_reduced(const MetricParams& p, std::span<const double> C, std::span<const double> y,
                                        double s) {
  const std::size_t N = p.horizontal_dim();
  GeodesicState st;
  st.s = s;
  st.x = Point(std::vector<double>(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(N + 1)));
  st.C.assign(C.begin(), C.end());
  st.xdot.resize(N + 1);
  const double z = y[N];
  for (std::size_t i = 0; i < N; ++i) st.xdot[i] = C[i] * std::exp(2.0 * p.rate(i) * z);
  st.xdot[N] = y[N + 1];
  return st;
}

inline std::vector<double> initial_reduced(const MetricParams& p, std::span<const double> v) {
  const std::size_t N = p.horizontal_dim();
  std::vector<double> y(N + 2, 0.0);
  y[N + 1] = v[N];
  return y;
}

}  // namespace detail

// gamma(t) for gamma(0) = 0, gamma'(0) = v. The returned state's s is the arc length t |v|.
inline GeodesicState exp_map(const MetricParams& p, const Tangent& v, double t, const IntegratorConfig& cfg = {}) {
  require_dim(v.dim(), p.dim(), "exp_map");
  for (double c : v.base().x) {
    if (c != 0.0) throw std::invalid_argument("exp_map: tangent vector must be based at the origin");
  }
  if (t < 0.0) throw std::invalid_argument("exp_map: t must be >= 0");
  cfg.validate();
  const std::size_t N = p.horizontal_dim();
  std::vector<double> C(v.coord().begin(), v.coord().begin() + static_cast<std::ptrdiff_t>(N));
  std::vector<double> y = detail::initial_reduced(p, v.coord());
  GeodesicFlow flow(p, C);
  const double E0 = flow.energy(y);
  DormandPrince dp(y.size());
  dp.integrate(
      flow, 0.0, t, y, cfg,
      [&](const StepView& sv) {
        flow.check_range(sv.y1[N], sv.t1);
        return true;
      },
      [&](std::span<double> yy) { return flow.project(yy, E0); });
  const double speed = std::sqrt(metric_inner(p, v.base(), v.coord(), v.coord()));
  return detail::state_from_reduced(p, C, y, t * speed);
}

// Samples of the geodesic from the origin along the unit vector v at arc lengths 0, step, 2 step, ...,
// plus the endpoint when length is not a multiple of step.
inline std::vector<GeodesicState> trace(const MetricParams& p, const Tangent& v, double length, double step,
                                        const IntegratorConfig& cfg = {}) {
  if (!(step > 0.0)) throw std::invalid_argument("trace: step must be > 0");
  if (length < 0.0) throw std::invalid_argument("trace: length must be >= 0");
  require_dim(v.dim(), p.dim(), "trace");
  cfg.validate();
  const std::size_t N = p.horizontal_dim();
  std::vector<double> C(v.coord().begin(), v.coord().begin() + static_cast<std::ptrdiff_t>(N));
  std::vector<double> y = detail::initial_reduced(p, v.coord());

  std::vector<GeodesicState> out;
  out.push_back(detail::state_from_reduced(p, C, y, 0.0));
  if (length == 0.0) return out;

  GeodesicFlow flow(p, C);
  const double E0 = flow.energy(y);
  DormandPrince dp(y.size());
  std::vector<double> buf(y.size());
  std::size_t k = 1;
  const double eps = 1e-12 * length;
  dp.integrate(
      flow, 0.0, length, y, cfg,
      [&](const StepView& sv) {
        flow.check_range(sv.y1[N], sv.t1);
        while (k * step <= sv.t1 + eps && k * step < length - eps) {
          const double s = k * step;
          sv.interpolate(s, buf);
          flow.project(buf, E0);
          out.push_back(detail::state_from_reduced(p, C, buf, s));
          ++k;
        }
        return true;
      },
      [&](std::span<double> yy) { return flow.project(yy, E0); });
  out.push_back(detail::state_from_reduced(p, C, y, length));
  return out;
}

// Integrates from the origin along v (which must have v_i = 0) and reports whether |x_i| stays
// below tol on every accepted step.
inline bool totally_geodesic_check(const MetricParams& p, std::size_t i, const Tangent& v, double t,
                                   const IntegratorConfig& cfg = {}, double tol = 1e-10) {
  if (i >= p.horizontal_dim()) throw std::invalid_argument("totally_geodesic_check: index must be horizontal");
  if (v.coord()[i] != 0.0) throw std::invalid_argument("totally_geodesic_check: v_i must be 0");
  const std::size_t N = p.horizontal_dim();
  std::vector<double> C(v.coord().begin(), v.coord().begin() + static_cast<std::ptrdiff_t>(N));
  std::vector<double> y = detail::initial_reduced(p, v.coord());
  GeodesicFlow flow(p, C);
  const double E0 = flow.energy(y);
  DormandPrince dp(y.size());
  bool ok = true;
  dp.integrate(
      flow, 0.0, t, y, cfg,
      [&](const StepView& sv) {
        flow.check_range(sv.y1[N], sv.t1);
        if (std::abs(sv.y1[i]) > tol) ok = false;
        return ok;
      },
      [&](std::span<double> yy) { return flow.project(yy, E0); });
  return ok;
}

// CSV rows: s, x_1..x_{N+1}, xdot_1..xdot_{N+1}, speed_error, where speed_error is
// |g(xdot, xdot) - g(v, v)| relative to the initial squared speed.
inline void write_trace_csv(std::ostream& os, const MetricParams& p, const std::vector<GeodesicState>& states) {
  const std::size_t n = p.dim();
  std::vector<std::string> header{"s"};
  for (std::size_t i = 1; i <= n; ++i) header.push_back("x" + std::to_string(i));
  for (std::size_t i = 1; i <= n; ++i) header.push_back("xdot" + std::to_string(i));
  header.push_back("speed_error");
  csv::write_row(os, header);
  const double s0 = states.empty() ? 1.0 : states.front().speed_squared(p);
  for (const auto& st : states) {
    std::vector<std::string> row;
    row.push_back(csv::number(st.s));
    for (double v : st.x.x) row.push_back(csv::number(v));
    for (double v : st.xdot) row.push_back(csv::number(v));
    row.push_back(csv::number(std::abs(st.speed_squared(p) - s0)));
    csv::write_row(os, row);
  }
}

}  // namespace solvgeo
