#pragma once

// Pointwise geometry of g_a = sum_i exp(-2 a_i x_{N+1}) dx_i^2 + dx_{N+1}^2 on R^{N+1}.
//
// Everything curvature-related is evaluated at the origin in the orthonormal
// left-invariant frame E_i = exp(a_i x_{N+1}) d/dx_i, E_{N+1} = d/dx_{N+1}. The space is
// homogeneous, so the frame components are the same at every point.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace solvgeo {

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(want) +
                         ", got " + std::to_string(got));
  }
}

// The rate vector a of g_a together with the scalars derived from it.
class MetricParams {
 public:
  explicit MetricParams(std::vector<double> a) : a_(std::move(a)) {
    if (a_.empty()) throw std::invalid_argument("MetricParams: need at least one rate");
    for (double v : a_) {
      if (!std::isfinite(v)) throw std::invalid_argument("MetricParams: non-finite rate");
    }
    max_ = *std::max_element(a_.begin(), a_.end());
    min_ = *std::min_element(a_.begin(), a_.end());
    for (double v : a_) {
      if (v > 0) pos_sum_ += v;
      if (v < 0) neg_sum_ -= v;
      trace_ += v;
    }
  }

  std::span<const double> rates() const { return a_; }
  const std::vector<double>& rate_vector() const { return a_; }
  double rate(std::size_t i) const { return a_[i]; }

  // N, the number of horizontal coordinates.
  std::size_t horizontal_dim() const { return a_.size(); }
  // N + 1, the manifold dimension.
  std::size_t dim() const { return a_.size() + 1; }

  double max_rate() const { return max_; }
  double min_rate() const { return min_; }
  double positive_sum() const { return pos_sum_; }
  double negative_sum() const { return neg_sum_; }
  double trace() const { return trace_; }

  bool has_zero_rate() const {
    return std::any_of(a_.begin(), a_.end(), [](double v) { return v == 0.0; });
  }
  // All rates nonzero and of one sign: negative curvature, exp is a global diffeomorphism.
  bool hadamard() const { return (min_ > 0.0) || (max_ < 0.0); }
  bool unimodular() const { return trace_ == 0.0; }
  // No rates of opposite signs: curvature <= 0, so exp is still a diffeomorphism and
  // geodesics from the origin are unique even with zero rates present.
  bool one_signed() const { return min_ >= 0.0 || max_ <= 0.0; }

  // Recompute every derived scalar from the raw vector and compare with the cache.
  bool consistent() const {
    MetricParams fresh(a_);
    return fresh.max_ == max_ && fresh.min_ == min_ && fresh.pos_sum_ == pos_sum_ &&
           fresh.neg_sum_ == neg_sum_ && pos_sum_ >= 0 && neg_sum_ >= 0;
  }

  // FNV-1a over the bit patterns of the rates.
  std::uint64_t digest() const {
    std::uint64_t h = 1469598103934665603ULL;
    for (double v : a_) {
      std::uint64_t bits;
      static_assert(sizeof(bits) == sizeof(v));
      std::memcpy(&bits, &v, sizeof(v));
      for (int k = 0; k < 8; ++k) {
        h ^= (bits >> (8 * k)) & 0xffU;
        h *= 1099511628211ULL;
      }
    }
    return h;
  }

 private:
  std::vector<double> a_;
  double max_ = 0, min_ = 0, pos_sum_ = 0, neg_sum_ = 0, trace_ = 0;
};

struct Point {
  std::vector<double> x;

  Point() = default;
  explicit Point(std::vector<double> coords) : x(std::move(coords)) {
    for (double v : x) {
      if (!std::isfinite(v)) throw std::invalid_argument("Point: non-finite coordinate");
    }
  }
  static Point origin(std::size_t dim) { return Point(std::vector<double>(dim, 0.0)); }

  std::size_t dim() const { return x.size(); }
  double height() const { return x.back(); }
  double operator[](std::size_t i) const { return x[i]; }
};

// A tangent vector carried in both coordinate (d/dx_i) and frame (E_i) components.
class Tangent {
 public:
  static Tangent from_coord(const MetricParams& p, Point base, std::vector<double> coord) {
    require_dim(base.dim(), p.dim(), "Tangent base");
    require_dim(coord.size(), p.dim(), "Tangent coord");
    std::vector<double> frame(coord.size());
    const double z = base.height();
    for (std::size_t i = 0; i < p.horizontal_dim(); ++i) frame[i] = std::exp(-p.rate(i) * z) * coord[i];
    frame.back() = coord.back();
    return Tangent(std::move(base), std::move(coord), std::move(frame));
  }

  static Tangent from_frame(const MetricParams& p, Point base, std::vector<double> frame) {
    require_dim(base.dim(), p.dim(), "Tangent base");
    require_dim(frame.size(), p.dim(), "Tangent frame");
    std::vector<double> coord(frame.size());
    const double z = base.height();
    for (std::size_t i = 0; i < p.horizontal_dim(); ++i) coord[i] = std::exp(p.rate(i) * z) * frame[i];
    coord.back() = frame.back();
    return Tangent(std::move(base), std::move(coord), std::move(frame));
  }

  const Point& base() const { return base_; }
  std::span<const double> coord() const { return coord_; }
  std::span<const double> frame() const { return frame_; }
  std::size_t dim() const { return coord_.size(); }

 private:
  Tangent(Point base, std::vector<double> coord, std::vector<double> frame)
      : base_(std::move(base)), coord_(std::move(coord)), frame_(std::move(frame)) {}

  Point base_;
  std::vector<double> coord_;
  std::vector<double> frame_;
};

inline double metric_inner(const MetricParams& p, const Point& pt, std::span<const double> v,
                           std::span<const double> w) {
  require_dim(pt.dim(), p.dim(), "metric_inner point");
  require_dim(v.size(), p.dim(), "metric_inner v");
  require_dim(w.size(), p.dim(), "metric_inner w");
  const double z = pt.height();
  double s = v.back() * w.back();
  for (std::size_t i = 0; i < p.horizontal_dim(); ++i) s += std::exp(-2.0 * p.rate(i) * z) * v[i] * w[i];
  return s;
}

inline double metric_inner(const MetricParams& p, const Point& pt, const Tangent& v, const Tangent& w) {
  return metric_inner(p, pt, v.coord(), w.coord());
}

// Riemannian volume element relative to dx_1 ... dx_{N+1}.
inline double volume_density(const MetricParams& p, const Point& pt) {
  require_dim(pt.dim(), p.dim(), "volume_density");
  return std::exp(-p.trace() * pt.height());
}

// Dense rank-3 table Gamma^k_{ij}, with nabla_{E_i} E_j = sum_k Gamma^k_{ij} E_k.
class ConnectionTable {
 public:
  explicit ConnectionTable(const MetricParams& p) : n_(p.dim()), g_(n_ * n_ * n_, 0.0) {
    const std::size_t h = n_ - 1;
    for (std::size_t i = 0; i < h; ++i) {
      at(h, i, i) = p.rate(i);   // nabla_{E_i} E_i = a_i E_{N+1}
      at(i, i, h) = -p.rate(i);  // nabla_{E_i} E_{N+1} = -a_i E_i
    }
  }

  std::size_t dim() const { return n_; }
  // Gamma^k_{ij}
  double operator()(std::size_t k, std::size_t i, std::size_t j) const { return g_[(k * n_ + i) * n_ + j]; }

 private:
  double& at(std::size_t k, std::size_t i, std::size_t j) { return g_[(k * n_ + i) * n_ + j]; }

  std::size_t n_;
  std::vector<double> g_;
};

// Constant frame components R_{abcd} = <R(E_a,E_b)E_c, E_d> with
// R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z.
class CurvatureTensor {
 public:
  explicit CurvatureTensor(const MetricParams& p) : n_(p.dim()), r_(n_ * n_ * n_ * n_, 0.0) {
    const ConnectionTable G(p);
    for (std::size_t a = 0; a < n_; ++a)
      for (std::size_t b = 0; b < n_; ++b)
        for (std::size_t c = 0; c < n_; ++c)
          for (std::size_t e = 0; e < n_; ++e) {
            double s = 0.0;
            for (std::size_t d = 0; d < n_; ++d) {
              s += G(d, b, c) * G(e, a, d) - G(d, a, c) * G(e, b, d) - (G(d, a, b) - G(d, b, a)) * G(e, d, c);
            }
            r_[idx(a, b, c, e)] = s;
          }
  }

  std::size_t dim() const { return n_; }
  double component(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const { return r_[idx(a, b, c, d)]; }

  double operator()(std::span<const double> X, std::span<const double> Y, std::span<const double> Z,
                    std::span<const double> W) const {
    require_dim(X.size(), n_, "curvature X");
    require_dim(Y.size(), n_, "curvature Y");
    require_dim(Z.size(), n_, "curvature Z");
    require_dim(W.size(), n_, "curvature W");
    double s = 0.0;
    for (std::size_t a = 0; a < n_; ++a) {
      if (X[a] == 0.0) continue;
      for (std::size_t b = 0; b < n_; ++b) {
        if (Y[b] == 0.0) continue;
        for (std::size_t c = 0; c < n_; ++c) {
          if (Z[c] == 0.0) continue;
          const double xyz = X[a] * Y[b] * Z[c];
          for (std::size_t d = 0; d < n_; ++d) s += r_[idx(a, b, c, d)] * xyz * W[d];
        }
      }
    }
    return s;
  }

  // Frame components of the vector R(X,Y)Z.
  std::vector<double> apply(std::span<const double> X, std::span<const double> Y, std::span<const double> Z) const {
    std::vector<double> out(n_, 0.0);
    for (std::size_t a = 0; a < n_; ++a)
      for (std::size_t b = 0; b < n_; ++b)
        for (std::size_t c = 0; c < n_; ++c) {
          const double xyz = X[a] * Y[b] * Z[c];
          if (xyz == 0.0) continue;
          for (std::size_t d = 0; d < n_; ++d) out[d] += r_[idx(a, b, c, d)] * xyz;
        }
    return out;
  }

  // Matrix K with (K J)_d = <R(J,u)u, E_d>, row-major n x n; used by the Jacobi equation.
  void jacobi_operator(std::span<const double> u, std::span<double> K) const {
    std::fill(K.begin(), K.end(), 0.0);
    for (std::size_t a = 0; a < n_; ++a)
      for (std::size_t b = 0; b < n_; ++b) {
        if (u[b] == 0.0) continue;
        for (std::size_t c = 0; c < n_; ++c) {
          const double uu = u[b] * u[c];
          if (uu == 0.0) continue;
          for (std::size_t d = 0; d < n_; ++d) K[d * n_ + a] += r_[idx(a, b, c, d)] * uu;
        }
      }
  }

 private:
  std::size_t idx(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const {
    return ((a * n_ + b) * n_ + c) * n_ + d;
  }

  std::size_t n_;
  std::vector<double> r_;
};

inline double curvature_tensor(const MetricParams& p, std::span<const double> X, std::span<const double> Y,
                               std::span<const double> Z, std::span<const double> W) {
  return CurvatureTensor(p)(X, Y, Z, W);
}

class DegeneratePlaneError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace detail {

inline double dot(std::span<const double> u, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

// Gram-Schmidt on (P, Q); throws when the pair is numerically parallel.
inline std::pair<std::vector<double>, std::vector<double>> orthonormalize(std::span<const double> P,
                                                                           std::span<const double> Q) {
  const double np = std::sqrt(dot(P, P));
  const double nq = std::sqrt(dot(Q, Q));
  if (np == 0.0 || nq == 0.0) throw DegeneratePlaneError("sectional_curvature: zero vector");
  std::vector<double> e1(P.begin(), P.end());
  for (double& v : e1) v /= np;
  std::vector<double> e2(Q.begin(), Q.end());
  const double c = dot(e1, e2);
  for (std::size_t i = 0; i < e2.size(); ++i) e2[i] -= c * e1[i];
  const double n2 = std::sqrt(dot(e2, e2));
  if (n2 <= 1e-12 * nq) throw DegeneratePlaneError("sectional_curvature: vectors are parallel");
  for (double& v : e2) v /= n2;
  return {std::move(e1), std::move(e2)};
}

}  // namespace detail

// Sectional curvature of span{P, Q} (frame components) using the closed form
//   kappa = -lambda^2 sum a_i^2 Y_i^2 - mu^2 (sum a_i X_i^2 sum a_i Y_i^2 - (sum a_i X_i Y_i)^2)
// where the plane is rewritten with an orthonormal pair P' = lambda E_{N+1} + mu X, Q' = Y,
// and X, Y horizontal.
inline double sectional_curvature(const MetricParams& p, std::span<const double> P, std::span<const double> Q) {
  require_dim(P.size(), p.dim(), "sectional_curvature P");
  require_dim(Q.size(), p.dim(), "sectional_curvature Q");
  auto [e1, e2] = detail::orthonormalize(P, Q);
  const std::size_t n = p.dim();
  const std::size_t h = n - 1;

  // Rotate inside the plane so that Q' has no vertical component.
  const double c1 = e1[h], c2 = e2[h];
  const double r = std::hypot(c1, c2);
  std::vector<double> Pp(n), Qp(n);
  if (r == 0.0) {
    Pp = e1;
    Qp = e2;
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      Pp[i] = (c1 * e1[i] + c2 * e2[i]) / r;
      Qp[i] = (c2 * e1[i] - c1 * e2[i]) / r;
    }
    Qp[h] = 0.0;
  }
  const double lambda = Pp[h];
  double mu2 = 0.0;
  for (std::size_t i = 0; i < h; ++i) mu2 += Pp[i] * Pp[i];
  const double mu = std::sqrt(mu2);

  double sYY2 = 0.0, sXX = 0.0, sYY = 0.0, sXY = 0.0;
  for (std::size_t i = 0; i < h; ++i) {
    const double a = p.rate(i);
    const double X = mu > 0.0 ? Pp[i] / mu : 0.0;
    const double Y = Qp[i];
    sYY2 += a * a * Y * Y;
    sXX += a * X * X;
    sYY += a * Y * Y;
    sXY += a * X * Y;
  }
  return -lambda * lambda * sYY2 - mu2 * (sXX * sYY - sXY * sXY);
}

struct CurvatureBounds {
  double lower;
  double upper;
};

// Pinching interval for the sectional curvature. Zero rates count toward the extremes M and m.
inline CurvatureBounds curvature_bounds(const MetricParams& p) {
  const double M = p.max_rate();
  const double m = p.min_rate();
  if (M * m >= 0.0) {
    // One sign (zeros allowed): -max a_i^2 <= kappa <= -min a_i^2.
    const double hi = std::max(M * M, m * m);
    const double lo = std::min(M * M, m * m);
    return {-hi, -lo};
  }
  return {-std::max(M * M, m * m), -M * m};
}

// |LHS - RHS| of sum a X^2 * sum a Y^2 - (sum a X Y)^2 = sum_{i<j} a_i a_j (X_i Y_j - X_j Y_i)^2.
inline double wedge_identity_residual(std::span<const double> a, std::span<const double> X,
                                      std::span<const double> Y) {
  require_dim(X.size(), a.size(), "wedge_identity X");
  require_dim(Y.size(), a.size(), "wedge_identity Y");
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sxx += a[i] * X[i] * X[i];
    syy += a[i] * Y[i] * Y[i];
    sxy += a[i] * X[i] * Y[i];
  }
  const double lhs = sxx * syy - sxy * sxy;
  double rhs = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double w = X[i] * Y[j] - X[j] * Y[i];
      rhs += a[i] * a[j] * w * w;
    }
  return std::abs(lhs - rhs);
}

// The residual above relative to the size of the terms on either side.
inline double wedge_identity_relative_residual(std::span<const double> a, std::span<const double> X,
                                               std::span<const double> Y) {
  double sxx = 0.0, syy = 0.0, sxy = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sxx += std::abs(a[i]) * X[i] * X[i];
    syy += std::abs(a[i]) * Y[i] * Y[i];
    sxy += std::abs(a[i] * X[i] * Y[i]);
  }
  scale = sxx * syy + sxy * sxy;
  const double r = wedge_identity_residual(a, X, Y);
  return scale > 0.0 ? r / scale : r;
}

}  // namespace solvgeo
