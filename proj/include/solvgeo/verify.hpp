#pragma once

// Invariant sweeps shared by the command-line verify suites and the tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "solvgeo/checks.hpp"
#include "solvgeo/distance.hpp"
#include "solvgeo/geodesics.hpp"
#include "solvgeo/hyperbolic.hpp"
#include "solvgeo/jacobi.hpp"
#include "solvgeo/metric.hpp"
#include "solvgeo/ode.hpp"
#include "solvgeo/sampling.hpp"
#include "solvgeo/serialize.hpp"

namespace solvgeo {

struct CurvatureScan {
  std::uint64_t samples = 0;
  std::uint64_t degenerate = 0;  // planes dropped because P, Q were numerically parallel
  double min_seen = std::numeric_limits<double>::infinity();
  double max_seen = -std::numeric_limits<double>::infinity();
  CurvatureBounds bounds{0.0, 0.0};
  double slack = 1e-9;
  std::uint64_t violations = 0;
  std::vector<double> witness_P, witness_Q;  // first violating plane, if any
};

// Planes spanned by two independent Gaussian frame vectors, i.e. uniform on the Grassmannian.
inline CurvatureScan curvature_scan(const MetricParams& p, std::uint64_t samples, std::uint64_t seed = kDefaultSeed,
                                    double slack = 1e-9) {
  if (samples == 0) throw std::invalid_argument("curvature_scan: samples must be >= 1");
  CurvatureScan r;
  r.bounds = curvature_bounds(p);
  r.slack = slack;
  const std::size_t n = p.dim();
  std::vector<double> P(n), Q(n);
  for (std::uint64_t k = 0; k < samples; ++k) {
    CounterRng rng(seed, k);
    for (std::size_t i = 0; i < n; ++i) P[i] = rng.normal();
    for (std::size_t i = 0; i < n; ++i) Q[i] = rng.normal();
    double kappa;
    try {
      kappa = sectional_curvature(p, P, Q);
    } catch (const DegeneratePlaneError&) {
      ++r.degenerate;
      continue;
    }
    ++r.samples;
    r.min_seen = std::min(r.min_seen, kappa);
    r.max_seen = std::max(r.max_seen, kappa);
    if (kappa < r.bounds.lower - slack || kappa > r.bounds.upper + slack) {
      if (r.violations == 0) {
        r.witness_P = P;
        r.witness_Q = Q;
      }
      ++r.violations;
    }
  }
  return r;
}

inline nlohmann::json to_json(const CurvatureScan& r) {
  nlohmann::json j{{"samples", r.samples},
                   {"degenerate", r.degenerate},
                   {"min_seen", r.min_seen},
                   {"max_seen", r.max_seen},
                   {"bounds", nlohmann::json::array({r.bounds.lower, r.bounds.upper})},
                   {"gap_lower", r.min_seen - r.bounds.lower},
                   {"gap_upper", r.bounds.upper - r.max_seen},
                   {"violations", r.violations}};
  if (r.violations > 0) j["witness"] = nlohmann::json{{"P", r.witness_P}, {"Q", r.witness_Q}};
  return j;
}

struct ConservationReport {
  std::uint64_t directions = 0;
  double length = 0.0;
  double max_speed_drift = 0.0;     // max |g(xdot, xdot) - 1|
  double max_integral_drift = 0.0;  // max |C_i(s) - C_i(0)|
  std::vector<double> worst_direction;
};

// Samples each unit-speed geodesic every 0.05 of arc length and recomputes speed and
// C_i = xdot_i e^{-2 a_i z} from the returned coordinate velocities.
inline ConservationReport conservation_check(const MetricParams& p, std::uint64_t directions, double length,
                                             const IntegratorConfig& cfg, std::uint64_t seed = kDefaultSeed) {
  const std::size_t n = p.dim();
  ConservationReport rep;
  rep.directions = directions;
  rep.length = length;
  for (std::uint64_t k = 0; k < directions; ++k) {
    CounterRng rng(seed, k);
    const auto v = rng.unit_vector(n);
    const auto states = trace(p, Tangent::from_frame(p, Point::origin(n), v), length, 0.05, cfg);
    const auto C0 = states.front().integrals(p);
    double speed = 0.0, integ = 0.0;
    for (const auto& st : states) {
      speed = std::max(speed, std::abs(st.speed_squared(p) - 1.0));
      const auto C = st.integrals(p);
      for (std::size_t i = 0; i < C.size(); ++i) integ = std::max(integ, std::abs(C[i] - C0[i]));
    }
    if (speed + integ > rep.max_speed_drift + rep.max_integral_drift) rep.worst_direction = v;
    rep.max_speed_drift = std::max(rep.max_speed_drift, speed);
    rep.max_integral_drift = std::max(rep.max_integral_drift, integ);
  }
  return rep;
}

struct InvariantResult {
  std::string name;
  bool passed = false;
  nlohmann::json detail;
  nlohmann::json witness;  // null unless failed
};

inline nlohmann::json to_json(const InvariantResult& r) {
  nlohmann::json j{{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}};
  if (!r.passed) j["witness"] = r.witness;
  return j;
}

// Fast invariants for one parameter vector; none of them needs the volume estimators.
inline std::vector<InvariantResult> core_suite(const MetricParams& p, std::uint64_t seed = kDefaultSeed) {
  std::vector<InvariantResult> out;
  const std::size_t N = p.horizontal_dim();
  const std::size_t n = p.dim();

  {
    InvariantResult r;
    r.name = "derived_scalars_consistent";
    r.passed = p.consistent() && std::abs(p.positive_sum() - p.negative_sum() - p.trace()) <= 1e-12 * (1.0 + p.positive_sum() + p.negative_sum());
    r.detail = {{"pos_sum", p.positive_sum()}, {"neg_sum", p.negative_sum()}, {"trace", p.trace()}};
    if (!r.passed) r.witness = {{"a", p.rate_vector()}};
    out.push_back(std::move(r));
  }
  {
    InvariantResult r;
    r.name = "frame_norm_matches_metric";
    double worst = 0.0;
    std::vector<double> wv;
    Point wpt;
    for (std::uint64_t k = 0; k < 1000; ++k) {
      CounterRng rng(seed ^ 0x11ULL, k);
      std::vector<double> x(n), f(n);
      for (auto& c : x) c = rng.uniform(-2.0, 2.0);
      for (auto& c : f) c = rng.normal();
      const Point pt(x);
      const auto t = Tangent::from_frame(p, pt, f);
      const double g = metric_inner(p, pt, t, t);
      double e = 0.0;
      for (double c : f) e += c * c;
      const double rel = std::abs(g - e) / e;
      if (rel > worst) {
        worst = rel;
        wv = f;
        wpt = pt;
      }
    }
    r.passed = worst <= 1e-14;
    r.detail = {{"max_relative_error", worst}, {"samples", 1000}};
    if (!r.passed) r.witness = {{"point", wpt.x}, {"frame", wv}};
    out.push_back(std::move(r));
  }
  {
    InvariantResult r;
    r.name = "wedge_identity";
    double worst = 0.0;
    std::vector<double> wx, wy;
    for (std::uint64_t k = 0; k < 10000; ++k) {
      CounterRng rng(seed ^ 0x22ULL, k);
      std::vector<double> X(N), Y(N);
      for (auto& c : X) c = rng.normal();
      for (auto& c : Y) c = rng.normal();
      const double res = wedge_identity_relative_residual(p.rates(), X, Y);
      if (res > worst) {
        worst = res;
        wx = X;
        wy = Y;
      }
    }
    r.passed = worst < 1e-10;
    r.detail = {{"max_relative_residual", worst}, {"samples", 10000}};
    if (!r.passed) r.witness = {{"X", wx}, {"Y", wy}};
    out.push_back(std::move(r));
  }
  {
    InvariantResult r;
    r.name = "curvature_within_bounds";
    const auto scan = curvature_scan(p, 20000, seed);
    r.passed = scan.violations == 0;
    r.detail = to_json(scan);
    if (!r.passed) r.witness = {{"P", scan.witness_P}, {"Q", scan.witness_Q}};
    out.push_back(std::move(r));
  }
  {
    InvariantResult r;
    r.name = "speed_and_first_integrals_conserved";
    try {
      const auto c = conservation_check(p, 20, 20.0, IntegratorConfig{1e-10, 1e-10}, seed);
      r.passed = c.max_speed_drift < 1e-8 && c.max_integral_drift < 1e-8;
      r.detail = {{"directions", c.directions},
                  {"length", c.length},
                  {"max_speed_drift", c.max_speed_drift},
                  {"max_integral_drift", c.max_integral_drift}};
      if (!r.passed) r.witness = {{"direction", c.worst_direction}};
    } catch (const IntegrationError& e) {
      r.passed = false;
      r.detail = {{"error", e.what()}};
    }
    out.push_back(std::move(r));
  }
  {
    InvariantResult r;
    r.name = "jacobi_small_t_limit";
    const double t = 1e-3;
    double worst = 0.0;
    std::vector<double> wv;
    for (std::uint64_t k = 0; k < 20; ++k) {
      CounterRng rng(seed ^ 0x33ULL, k);
      const auto v = rng.unit_vector(n);
      const double d = jacobi_volume_density(p, v, t, IntegratorConfig{1e-12, 1e-12});
      const double err = std::abs(d / std::pow(t, static_cast<double>(N)) - 1.0);
      if (err > worst) {
        worst = err;
        wv = v;
      }
    }
    r.passed = worst < 1e-4;
    r.detail = {{"t", t}, {"max_relative_deviation", worst}};
    if (!r.passed) r.witness = {{"direction", wv}};
    out.push_back(std::move(r));
  }
  {
    InvariantResult r;
    r.name = "volume_bounds_ordered";
    r.passed = true;
    nlohmann::json rows = nlohmann::json::array();
    for (double rho : {1.0, 2.0, 3.0, 4.0, 5.0}) {
      const auto b = volume_bounds(p, rho);
      rows.push_back(to_json(b));
      if (!(b.lower >= 0.0 && b.lower <= b.upper)) {
        r.passed = false;
        r.witness = {{"rho", rho}};
      }
    }
    r.detail = rows;
    out.push_back(std::move(r));
  }
  {
    // d(0, exp(t v)) <= t always, with equality when the exponential map is a diffeomorphism;
    // and every distance lies between the closed-form lower and staircase upper bounds.
    InvariantResult r;
    r.name = "distance_consistent_with_exp_and_bounds";
    r.passed = true;
    const double t = 1.5;
    double worst_excess = 0.0, worst_gap = 0.0;
    ShootingConfig cfg;
    cfg.integrator = IntegratorConfig{1e-11, 1e-11};
    for (std::uint64_t k = 0; k < 8; ++k) {
      CounterRng rng(seed ^ 0x44ULL, k);
      const auto v = rng.unit_vector(n);
      const auto end = exp_map(p, Tangent::from_frame(p, Point::origin(n), v), t, cfg.integrator);
      const auto d = distance(p, end.x, cfg, p.one_signed() ? 1 : 8, seed);
      const double lo = distance_lower_bound(p, end.x), up = distance_upper_bound(p, end.x);
      bool ok = d.status != DistanceStatus::failed;
      if (ok) {
        worst_excess = std::max(worst_excess, d.value - t);
        if (p.one_signed()) worst_gap = std::max(worst_gap, std::abs(d.value - t));
        ok = d.value <= t + 1e-7 && (!p.one_signed() || std::abs(d.value - t) <= 1e-7) && lo <= d.value + 1e-9 &&
             d.value <= up * (1.0 + 1e-9);
      }
      if (!ok && r.passed) {
        r.passed = false;
        r.witness = {{"direction", v}, {"t", t}, {"target", end.x.x}, {"distance", to_json(d)}, {"lower", lo}, {"upper", up}};
      }
    }
    r.detail = {{"t", t}, {"max_excess_over_t", worst_excess}, {"max_gap_one_signed", worst_gap}, {"targets", 8}};
    out.push_back(std::move(r));
  }
  return out;
}

inline InvariantResult projection_invariant(const MetricParams& p, double rho, std::uint64_t samples,
                                            std::uint64_t seed = kDefaultSeed) {
  InvariantResult r;
    r.name = "sphere_projects_onto_reduced_ball";
  const auto rep = sphere_projection_check(p, rho, samples, seed);
  r.passed = rep.passed();
  r.detail = to_json(rep);
  if (!r.passed) r.witness = {{"a", p.rate_vector()}, {"rho", rho}, {"max_excess", rep.max_excess}};
  return r;
}

inline InvariantResult recursion_invariant(const MetricParams& p, double rho, std::size_t grid, std::uint64_t samples,
                                           std::uint64_t seed = kDefaultSeed) {
  InvariantResult r;
    r.name = "volume_dominates_reduced_integral";
  const auto rep = disk_volume_recursion_check(p, rho, grid, samples, seed);
  r.passed = rep.passed();
  r.detail = to_json(rep);
  if (!r.passed) r.witness = {{"a", p.rate_vector()}, {"rho", rho}, {"lhs", rep.lhs.value}, {"rhs", rep.rhs}};
  return r;
}

}  // namespace solvgeo
