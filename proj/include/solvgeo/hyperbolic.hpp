#pragma once

// Constant-curvature reference geometry and the closed-form envelopes used to bracket
// geodesic-ball volumes of g_a.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "solvgeo/metric.hpp"
#include "solvgeo/quadrature.hpp"

namespace solvgeo {

// (x_1..x_N, x_{N+1}) -> (x_1..x_N, exp(p x_{N+1}) / p). For p > 0 this maps (R^{N+1}, g_{(p,..,p)})
// isometrically onto the half-space model of curvature -p^2.
inline Point log_model_map(double p, const Point& pt) {
  if (p == 0.0) throw std::invalid_argument("log_model_map: p must be nonzero");
  std::vector<double> y = pt.x;
  y.back() = std::exp(p * pt.height()) / p;
  return Point(std::move(y));
}

inline Point log_model_inverse(double p, const Point& y) {
  if (p == 0.0) throw std::invalid_argument("log_model_inverse: p must be nonzero");
  const double w = p * y.height();
  if (!(w > 0.0)) throw std::domain_error("log_model_inverse: point outside the image half-space");
  std::vector<double> x = y.x;
  x.back() = std::log(w) / p;
  return Point(std::move(x));
}

// Curvature -1 half-space distance between points with positive last coordinate.
inline double half_space_distance(std::span<const double> y1, std::span<const double> y2) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < y1.size(); ++i) d2 += (y1[i] - y2[i]) * (y1[i] - y2[i]);
  return std::acosh(1.0 + d2 / (2.0 * y1.back() * y2.back()));
}

// Distance in the log model with rate p between (x1, z1) and (x2, z2), where x1, x2 are the
// horizontal coordinates. Any sign of p; p = 0 is the Euclidean limit. Written in a form
// that never forms exp(p z) on its own, so it stays finite for large |p z|.
inline double log_model_distance(double p, double dx2, double z1, double z2) {
  const double dz = z2 - z1;
  if (p == 0.0) return std::sqrt(dx2 + dz * dz);
  const double sh = std::sinh(0.5 * p * dz);
  const double arg = sh * sh + 0.25 * p * p * dx2 * std::exp(-p * (z1 + z2));
  return 2.0 * std::asinh(std::sqrt(arg)) / std::abs(p);
}

// Distance in (R^2, g_{(p)}) between z = (x, y) and w = (x', y') in log coordinates.
inline double hyperbolic_distance_2d(double p, std::span<const double> z, std::span<const double> w) {
  if (!(p > 0.0)) throw std::invalid_argument("hyperbolic_distance_2d: p must be > 0");
  require_dim(z.size(), 2, "hyperbolic_distance_2d z");
  require_dim(w.size(), 2, "hyperbolic_distance_2d w");
  const double dx = w[0] - z[0];
  return log_model_distance(p, dx * dx, z[1], w[1]);
}

// Volume of the radius-rho ball in H^{N+1}(p): omega_N / p^N * int_0^rho sinh(p r)^N dr.
inline double hyperbolic_ball_volume(double p, std::size_t N, double rho) {
  if (!(p > 0.0)) throw std::invalid_argument("hyperbolic_ball_volume: p must be > 0");
  if (N < 1) throw std::invalid_argument("hyperbolic_ball_volume: N must be >= 1");
  if (rho < 0.0) throw std::invalid_argument("hyperbolic_ball_volume: rho must be >= 0");
  if (rho == 0.0) return 0.0;
  const double n = static_cast<double>(N);
  const double I = integrate([&](double r) { return std::pow(std::sinh(p * r), n); }, 0.0, rho, 1e-12);
  return sphere_volume(N) / std::pow(p, n) * I;
}

// Area of the radius-r disk in H^2(|a|): 4 pi / a^2 sinh^2(|a| r / 2).
inline double hyperbolic_disk_area(double a, double r) {
  const double s = std::sinh(0.5 * std::abs(a) * r);
  return 4.0 * std::numbers::pi / (a * a) * s * s;
}

struct CoordinateBox {
  std::vector<double> half_width;  // |x_i| <= half_width[i]

  bool contains(std::span<const double> x, double slack = 0.0) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (std::abs(x[i]) > half_width[i] * (1.0 + slack) + slack) return false;
    }
    return true;
  }
  double euclidean_volume() const {
    double v = 1.0;
    for (double w : half_width) v *= 2.0 * w;
    return v;
  }
};

// |x_{N+1}| <= rho and |x_i| <= rho exp(|a_i| rho) on the closed geodesic ball.
inline CoordinateBox coordinate_box_bound(const MetricParams& p, double rho) {
  if (rho < 0.0) throw std::invalid_argument("coordinate_box_bound: rho must be >= 0");
  CoordinateBox box;
  box.half_width.resize(p.dim());
  for (std::size_t i = 0; i < p.horizontal_dim(); ++i) box.half_width[i] = rho * std::exp(std::abs(p.rate(i)) * rho);
  box.half_width.back() = rho;
  return box;
}

// Largest |x_i| allowed at height z by d_{H(a)}((0,0), (x_i, z)) <= rho, for any sign of a:
//   (sqrt 2 / |a|) exp(a z / 2) (cosh(a rho) - cosh(a z))^{1/2},
// evaluated through cosh u - cosh v = 2 sinh((u+v)/2) sinh((u-v)/2). a = 0 gives sqrt(rho^2 - z^2).
inline double envelope_half_width(double a, double z, double rho) {
  if (std::abs(z) > rho) return 0.0;
  if (a == 0.0) return std::sqrt(std::max(0.0, rho * rho - z * z));
  const double s1 = std::sinh(0.5 * a * (rho + z));
  const double s2 = std::sinh(0.5 * a * (rho - z));
  return 2.0 / std::abs(a) * std::exp(0.5 * a * z) * std::sqrt(std::max(0.0, s1 * s2));
}

inline double xi_envelope_bound(const MetricParams& p, std::size_t i, double x_last, double rho) {
  if (i >= p.horizontal_dim()) throw std::invalid_argument("xi_envelope_bound: index out of range");
  if (!(p.rate(i) > 0.0)) throw std::invalid_argument("xi_envelope_bound: requires a_i > 0");
  if (std::abs(x_last) > rho) throw std::domain_error("xi_envelope_bound: |x_{N+1}| > rho");
  return envelope_half_width(p.rate(i), x_last, rho);
}

// Riemannian volume of the envelope region
//   Omega = { |z| <= rho, |x_i| <= envelope_half_width(a_i, z, rho) for all i },
// which contains the closed ball; also the normalizer of the Monte Carlo proposal.
inline double envelope_region_volume(const MetricParams& p, double rho) {
  if (rho <= 0.0) return 0.0;
  auto f = [&](double z) {
    double v = std::exp(-p.trace() * z);
    for (double a : p.rates()) v *= 2.0 * envelope_half_width(a, z, rho);
    return v;
  };
  return integrate(f, -rho, rho, 1e-11);
}

struct BoundReport {
  double rho = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::vector<std::string> formula_tags;
  // Diagnostics: the upper bound with the constants exactly as printed alongside the
  // derivation, and the envelope-region volume (a tighter valid upper bound).
  double printed_upper = 0.0;
  double envelope_volume = 0.0;
};

namespace detail {

inline double abs_product(std::span<const double> a) {
  double prod = 1.0;
  for (double v : a) prod *= std::abs(v);
  return prod;
}

inline bool same_sign(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return v > 0; }) ||
         std::all_of(a.begin(), a.end(), [](double v) { return v < 0; });
}

// Polar lower bound for a one-signed rate vector:
//   omega_N / (2 S^N) exp(-(N-1) rho S) int_0^rho sinh(S r)^N dr,  S = sum |a_i|.
inline double hadamard_polar_lower(std::span<const double> a, double rho) {
  if (rho <= 0.0) return 0.0;
  double S = 0.0;
  for (double v : a) S += std::abs(v);
  const double n = static_cast<double>(a.size());
  const double I = integrate([&](double r) { return std::pow(std::sinh(S * r), n); }, 0.0, rho, 1e-11);
  return sphere_volume(a.size()) / (2.0 * std::pow(S, n)) * std::exp(-(n - 1.0) * rho * S) * I;
}

struct LowerChain {
  double value = 0.0;
  std::string tag;
};

// Lower bound on the ball volume for a with all entries nonzero. One entry: exact hyperbolic
// disk. One sign: polar bound. Mixed: Vol_a(rho) >= int_0^rho Vol_b(r) dr where b drops one
// coordinate; the best deletion is kept.
inline LowerChain ball_volume_lower(const std::vector<double>& a, double rho) {
  if (rho <= 0.0) return {0.0, ""};
  if (a.size() == 1) return {hyperbolic_disk_area(a[0], rho), "disk"};
  if (same_sign(a)) return {hadamard_polar_lower(a, rho), "polar"};
  LowerChain best;
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::vector<double> b;
    for (std::size_t j = 0; j < a.size(); ++j)
      if (j != i) b.push_back(a[j]);
    // Skip deletions already covered by an equal rate.
    bool duplicate = false;
    for (std::size_t j = 0; j < i; ++j) duplicate = duplicate || a[j] == a[i];
    if (duplicate) continue;
    std::string sub_tag;
    const double v = integrate(
        [&](double r) {
          auto sub = ball_volume_lower(b, r);
          sub_tag = sub.tag;
          return sub.value;
        },
        0.0, rho, 1e-9);
    if (v > best.value) {
      best.value = v;
      best.tag = "drop" + std::to_string(i + 1) + "(" + sub_tag + ")";
    }
  }
  return best;
}

}  // namespace detail

// Numeric lower/upper bounds on Vol(D(0, rho)) for rate vectors with no zero entry.
//
// Upper: the envelope region Omega contains the ball and
//   Vol(Omega) <= 2^{1+3N/2} / (prod |a_i|) * (e^{P rho} - e^{Q rho}) / (P - Q)   (P != Q),
//   Vol(Omega) <= 2^{1+3N/2} / (prod |a_i|) * rho e^{P rho}                    (P == Q),
// with P, Q the positive and negative rate sums. The factor 2^N relative to printed_upper comes
// from each |x_i| <= w_i constraint spanning an interval of length 2 w_i.
// Lower: polar comparison for one-signed a, coordinate-deletion recursion otherwise.
inline BoundReport volume_bounds(const MetricParams& p, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("volume_bounds: rho must be > 0");
  if (p.has_zero_rate()) throw std::invalid_argument("volume_bounds: all rates must be nonzero");
  const double N = static_cast<double>(p.horizontal_dim());
  const double P = p.positive_sum(), Q = p.negative_sum();
  const double prod = detail::abs_product(p.rates());
  const double c_full = std::pow(2.0, 1.0 + 1.5 * N) / prod;
  const double c_printed = std::pow(2.0, 1.0 + 0.5 * N) / prod;

  BoundReport r;
  r.rho = rho;
  if (p.hadamard()) {
    const double S = P + Q;
    r.upper = c_full / S * std::expm1(S * rho);
    r.printed_upper = c_printed / S * std::exp(S * rho);
    r.formula_tags.push_back("upper:hadamard-envelope");
  } else if (P == Q) {
    r.upper = c_full * rho * std::exp(P * rho);
    r.printed_upper = c_printed * rho * std::exp(P * rho);
    r.formula_tags.push_back("upper:unimodular-envelope");
  } else {
    r.upper = c_full / std::abs(P - Q) * std::abs(std::exp(P * rho) - std::exp(Q * rho));
    r.printed_upper = c_printed / std::abs(P - Q) * std::abs(std::exp(P * rho) - std::exp(Q * rho));
    r.formula_tags.push_back("upper:mixed-envelope");
  }

  if (p.hadamard()) {
    r.lower = detail::hadamard_polar_lower(p.rates(), rho);
    r.formula_tags.push_back("lower:hadamard-polar");
  } else {
    const auto chain = detail::ball_volume_lower(p.rate_vector(), rho);
    r.lower = chain.value;
    r.formula_tags.push_back("lower:deletion-recursion:" + chain.tag);
  }
  r.envelope_volume = envelope_region_volume(p, rho);
  return r;
}

}  // namespace solvgeo
