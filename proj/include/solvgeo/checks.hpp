#pragma once

// Numerical checks of two structural facts about dropping the first coordinate:
//   projection: the geodesic sphere of radius rho projects onto the closed rho-ball of the
//               metric with the remaining rates;
//   recursion:  Vol_a(rho) >= int_0^rho Vol_b(r) dr, b = a without its first rate.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "solvgeo/distance.hpp"
#include "solvgeo/geodesics.hpp"
#include "solvgeo/metric.hpp"
#include "solvgeo/sampling.hpp"
#include "solvgeo/volume.hpp"

namespace solvgeo {

inline MetricParams drop_first_rate(const MetricParams& p) {
  if (p.horizontal_dim() < 2) throw std::invalid_argument("drop_first_rate: need at least two rates");
  return MetricParams(std::vector<double>(p.rate_vector().begin() + 1, p.rate_vector().end()));
}

struct ProjectionReport {
  double rho = 0.0;
  double tolerance = 0.0;
  std::uint64_t forward_samples = 0;
  std::uint64_t forward_violations = 0;
  double max_excess = -std::numeric_limits<double>::infinity();  // max d_b(pi(x)) - rho seen
  std::uint64_t lift_samples = 0;
  std::uint64_t lift_found = 0;
  std::uint64_t lift_failures = 0;  // bracketing or distance failure; recorded, not fatal
  double max_lift_error = 0.0;      // max |d_a(lifted point) - rho|
  bool passed() const { return forward_violations == 0; }
};

inline ProjectionReport sphere_projection_check(const MetricParams& p, double rho, std::uint64_t samples,
                                                std::uint64_t seed = kDefaultSeed, std::uint64_t lift_samples = 100,
                                                double tol = 1e-6) {
  if (p.dim() < 3) throw std::invalid_argument("sphere_projection_check: need dimension >= 3");
  if (p.has_zero_rate()) throw std::invalid_argument("sphere_projection_check: rates must be nonzero");
  if (!(rho > 0.0)) throw std::invalid_argument("sphere_projection_check: rho must be > 0");
  const MetricParams b = drop_first_rate(p);
  const std::size_t n = p.dim();
  ProjectionReport rep;
  rep.rho = rho;
  rep.tolerance = tol;

  IntegratorConfig icfg{1e-11, 1e-11};
  for (std::uint64_t k = 0; k < samples; ++k) {
    CounterRng rng(seed, k);
    const auto v = rng.unit_vector(n);
    const auto end = exp_map(p, Tangent::from_frame(p, Point::origin(n), v), rho, icfg);
    const Point y(std::vector<double>(end.x.x.begin() + 1, end.x.x.end()));
    double d = distance_upper_bound(b, y);
    if (d > rho + tol) {
      const auto r = distance(b, y);
      if (r.status != DistanceStatus::failed) d = std::min(d, r.value);
    }
    ++rep.forward_samples;
    rep.max_excess = std::max(rep.max_excess, d - rho);
    if (d > rho + tol) ++rep.forward_violations;
  }

  // Surjectivity: lift reduced-ball points y along the first axis until d_a(0, (s, y)) = rho.
  const EnvelopeProposal prop(b, rho);
  const std::size_t Nb = b.horizontal_dim();
  std::uint64_t drawn = 0;
  ShootingConfig scfg;
  scfg.integrator = IntegratorConfig{1e-10, 1e-10};
  while (rep.lift_samples < lift_samples && drawn < 1000 * (lift_samples + 1)) {
    CounterRng rng(seed ^ 0x5bd1e995ULL, drawn++);
    const auto [z, qz] = prop.sample_height(rng.uniform());
    std::vector<double> yc(Nb + 1);
    for (std::size_t i = 0; i < Nb; ++i) {
      const double w = envelope_half_width(b.rate(i), z, rho);
      yc[i] = rng.uniform(-w, w);
    }
    yc[Nb] = z;
    const Point y(yc);
    if (distance_upper_bound(b, y) > rho) continue;  // only points certainly in the reduced ball
    ++rep.lift_samples;

    auto lifted = [&](double s) {
      std::vector<double> x{s};
      x.insert(x.end(), yc.begin(), yc.end());
      return Point(std::move(x));
    };
    // f(s) >= the lower bound, so a bracket exists once the bound passes rho.
    double hi = 1.0;
    while (distance_lower_bound(p, lifted(hi)) <= rho && hi < 1e12) hi *= 2.0;
    if (hi >= 1e12) {
      ++rep.lift_failures;
      continue;
    }
    double lo = 0.0;
    bool failed = false;
    for (int it = 0; it < 40 && hi - lo > 1e-10 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      const Point q = lifted(mid);
      double f;
      if (distance_upper_bound(p, q) <= rho) {
        f = rho - 1.0;  // certainly inside
      } else if (distance_lower_bound(p, q) > rho) {
        f = rho + 1.0;
      } else {
        const auto r = distance(p, q, scfg, 0);
        if (r.status == DistanceStatus::failed) {
          failed = true;
          break;
        }
        f = r.value;
      }
      (f <= rho ? lo : hi) = mid;
    }
    if (failed) {
      ++rep.lift_failures;
      continue;
    }
    const auto r = distance(p, lifted(0.5 * (lo + hi)), scfg, 0);
    if (r.status == DistanceStatus::failed) {
      ++rep.lift_failures;
      continue;
    }
    ++rep.lift_found;
    rep.max_lift_error = std::max(rep.max_lift_error, std::abs(r.value - rho));
  }
  return rep;
}

struct RecursionReport {
  double rho = 0.0;
  VolumeEstimate lhs;               // Vol_a(rho)
  double rhs = 0.0;                 // trapezoid of Vol_b(r) over the grid
  double rhs_std_error = 0.0;
  std::vector<VolumeEstimate> grid;  // Vol_b at the interior and end grid points
  bool holds = false;               // lhs - rhs >= -3 sigma
  bool has_pushforward = false;     // one-signed rates: lhs also checked against pushforward
  VolumeEstimate pushforward;
  bool below_pushforward = true;
  bool passed() const { return holds && below_pushforward; }
};

inline RecursionReport disk_volume_recursion_check(const MetricParams& p, double rho, std::size_t grid,
                                                   std::uint64_t samples, std::uint64_t seed = kDefaultSeed) {
  if (p.dim() < 3) throw std::invalid_argument("disk_volume_recursion_check: need dimension >= 3");
  if (p.has_zero_rate()) throw std::invalid_argument("disk_volume_recursion_check: rates must be nonzero");
  if (!(rho > 0.0)) throw std::invalid_argument("disk_volume_recursion_check: rho must be > 0");
  if (grid < 2) throw std::invalid_argument("disk_volume_recursion_check: grid needs >= 2 points");
  const MetricParams b = drop_first_rate(p);
  RecursionReport rep;
  rep.rho = rho;
  rep.lhs = ball_volume_mc(p, rho, samples, seed);
  const double h = rho / static_cast<double>(grid - 1);
  double var = 0.0;
  for (std::size_t j = 1; j < grid; ++j) {
    const double r = h * static_cast<double>(j);
    const auto e = ball_volume_mc(b, r, samples, splitmix64(seed + j));
    rep.grid.push_back(e);
    const double w = (j + 1 == grid) ? 0.5 * h : h;  // r = 0 contributes 0
    rep.rhs += w * e.value;
    var += w * w * e.std_error * e.std_error;
  }
  rep.rhs_std_error = std::sqrt(var);
  const double sigma = std::sqrt(rep.lhs.std_error * rep.lhs.std_error + var);
  rep.holds = rep.lhs.value - rep.rhs >= -3.0 * sigma;
  if (p.one_signed()) {
    rep.has_pushforward = true;
    rep.pushforward = ball_volume_pushforward(p, rho);
    const double s2 = std::sqrt(rep.lhs.std_error * rep.lhs.std_error +
                                rep.pushforward.std_error * rep.pushforward.std_error);
    rep.below_pushforward = rep.lhs.value <= rep.pushforward.value + 3.0 * s2;
  }
  return rep;
}

}  // namespace solvgeo
