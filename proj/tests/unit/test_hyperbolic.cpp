#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "solvgeo/geodesics.hpp"
#include "solvgeo/hyperbolic.hpp"
#include "solvgeo/sampling.hpp"

using namespace solvgeo;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

// Reference values below were computed with mpmath at 30 digits.

TEST_CASE("log model map round-trips and is an isometry") {
  const Point x({0.4, -1.2, 0.7});
  const auto y = log_model_map(2.0, x);
  CHECK(y[0] == 0.4);
  CHECK_THAT(y[2], WithinRel(std::exp(1.4) / 2.0, 1e-15));
  const auto back = log_model_inverse(2.0, y);
  for (std::size_t i = 0; i < 3; ++i) CHECK_THAT(back[i], WithinAbs(x[i], 1e-15));
  CHECK_THROWS_AS(log_model_map(0.0, x), std::invalid_argument);
  CHECK_THROWS_AS(log_model_inverse(1.0, Point({0.0, -1.0})), std::domain_error);

  // Distances in the log model equal (1/p) times half-space distances of the rescaled images.
  for (double p : {0.5, 1.0, 2.0}) {
    for (std::uint64_t k = 0; k < 50; ++k) {
      CounterRng rng(20, k);
      const Point a({rng.normal(), rng.normal(), rng.normal()});
      const Point b({rng.normal(), rng.normal(), rng.normal()});
      auto ya = log_model_map(p, a).x, yb = log_model_map(p, b).x;
      for (auto* v : {&ya, &yb})
        for (double& c : *v) c *= p;
      const double dx2 = (a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]);
      CHECK_THAT(log_model_distance(p, dx2, a[2], b[2]), WithinRel(half_space_distance(ya, yb) / p, 1e-11));
    }
  }
}

TEST_CASE("half-space distance values") {
  CHECK_THAT(half_space_distance(std::vector<double>{0, 1}, std::vector<double>{1, 1}),
             WithinRel(0.962423650119206895, 1e-15));
  CHECK_THAT(half_space_distance(std::vector<double>{0, 1}, std::vector<double>{0, std::exp(2.0)}),
             WithinRel(2.0, 1e-14));
}

TEST_CASE("log model distance values") {
  CHECK_THAT(log_model_distance(2.0, 0.09 + 0.49, 0.0, 0.4), WithinRel(0.615605357796460577, 1e-14));
  CHECK_THAT(log_model_distance(0.5, 2.25 + 4.0 + 1.0, 0.0, 0.3), WithinRel(2.37413820452793840, 1e-14));
  CHECK_THAT(hyperbolic_distance_2d(1.0, std::vector<double>{0, 0}, std::vector<double>{2, -0.5}),
             WithinRel(2.16741392725360300, 1e-14));
  CHECK_THAT(hyperbolic_distance_2d(3.0, std::vector<double>{0, 0}, std::vector<double>{0.2, 0.1}),
             WithinRel(0.196414655325914729, 1e-14));
  // Vertical and Euclidean limits; negative rate is the mirror image.
  CHECK_THAT(log_model_distance(1.7, 0.0, -0.3, 1.1), WithinRel(1.4, 1e-14));
  CHECK_THAT(log_model_distance(0.0, 9.0, 0.0, 4.0), WithinRel(5.0, 1e-15));
  CHECK_THAT(log_model_distance(-2.0, 0.58, 0.0, -0.4), WithinRel(0.615605357796460577, 1e-14));
  // Stays finite where exp(p z) alone would overflow.
  CHECK(std::isfinite(log_model_distance(1.0, 1.0, 800.0, 800.0)));
  CHECK_THROWS_AS(hyperbolic_distance_2d(-1.0, std::vector<double>{0, 0}, std::vector<double>{1, 1}),
                  std::invalid_argument);
}

TEST_CASE("distance scales as 1/p") {
  for (std::uint64_t k = 0; k < 100; ++k) {
    CounterRng rng(21, k);
    const std::vector<double> z{rng.normal(), rng.normal()}, w{rng.normal(), rng.normal()};
    const double d1 = hyperbolic_distance_2d(1.0, z, w);
    // g_(p) is the pullback of g_(1)/p^2 under (x, y) -> (p x, p y).
    const double p = rng.uniform(0.2, 4.0);
    const std::vector<double> zs{z[0] / p, z[1] / p}, ws{w[0] / p, w[1] / p};
    CHECK_THAT(hyperbolic_distance_2d(p, zs, ws), WithinRel(d1 / p, 1e-11));
  }
}

TEST_CASE("hyperbolic ball and disk volumes") {
  CHECK_THAT(hyperbolic_ball_volume(1.0, 2, 1.0), WithinRel(5.11093270570828898, 1e-11));
  CHECK_THAT(hyperbolic_ball_volume(1.0, 3, 2.0), WithinRel(289.271319482856550, 1e-11));
  CHECK_THAT(hyperbolic_ball_volume(0.5, 2, 3.0), WithinRel(176.378434526103610, 1e-11));
  CHECK_THAT(hyperbolic_ball_volume(2.0, 1, 1.5), WithinRel(14.2434501555853960, 1e-11));
  CHECK(hyperbolic_ball_volume(1.0, 2, 0.0) == 0.0);
  CHECK_THROWS_AS(hyperbolic_ball_volume(1.0, 0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(hyperbolic_ball_volume(0.0, 1, 1.0), std::invalid_argument);

  CHECK_THAT(hyperbolic_disk_area(1.0, 1.0), WithinRel(3.41227626528490231, 1e-14));
  CHECK_THAT(hyperbolic_disk_area(1.0, 2.0), WithinRel(17.3553873817714371, 1e-14));
  CHECK_THAT(hyperbolic_disk_area(1.0, 3.0), WithinRel(56.9738006223415838, 1e-14));
  CHECK_THAT(hyperbolic_disk_area(-1.0, 2.0), WithinRel(17.3553873817714371, 1e-14));
  for (double p : {0.5, 2.0, 3.0}) {
    CHECK_THAT(hyperbolic_disk_area(p, 1.3), WithinRel(hyperbolic_ball_volume(p, 1, 1.3), 1e-11));
  }
}

TEST_CASE("geodesic endpoints respect the coordinate box and the envelope") {
  const IntegratorConfig cfg{1e-10, 1e-10};
  for (const auto& a : {std::vector<double>{1, 2}, {1, -1}, {0.5, -2, 1}}) {
    const MetricParams p(a);
    const std::size_t n = p.dim();
    for (std::uint64_t k = 0; k < 200; ++k) {
      CounterRng rng(22, k);
      const double rho = rng.uniform(0.1, 3.0);
      const auto end = exp_map(p, Tangent::from_frame(p, Point::origin(n), rng.unit_vector(n)), rho, cfg);
      CHECK(coordinate_box_bound(p, rho).contains(end.x.x, 1e-9));
      for (std::size_t i = 0; i + 1 < n; ++i) {
        CHECK(std::abs(end.x[i]) <= envelope_half_width(a[i], end.x.height(), rho) * (1 + 1e-8) + 1e-10);
      }
    }
  }
  const auto box = coordinate_box_bound(MetricParams({1, -2}), 1.0);
  CHECK_THAT(box.half_width[1], WithinRel(std::exp(2.0), 1e-15));
  CHECK(box.half_width[2] == 1.0);
  CHECK_THAT(box.euclidean_volume(), WithinRel(8.0 * std::exp(3.0), 1e-15));
}

TEST_CASE("envelope half width") {
  for (double rho : {0.5, 1.0, 3.0}) {
    CHECK_THAT(xi_envelope_bound(MetricParams({1.0}), 0, 0.0, rho), WithinRel(2.0 * std::sinh(rho / 2), 1e-14));
  }
  CHECK(envelope_half_width(1.0, 2.0, 2.0) == 0.0);
  CHECK(envelope_half_width(1.0, 2.5, 2.0) == 0.0);
  CHECK_THAT(envelope_half_width(0.0, 0.6, 1.0), WithinRel(0.8, 1e-15));
  // Tiny a approaches the Euclidean half-disk.
  CHECK_THAT(envelope_half_width(1e-6, 0.6, 1.0), WithinRel(0.8, 1e-6));
  CHECK_THROWS_AS(xi_envelope_bound(MetricParams({-1.0}), 0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(xi_envelope_bound(MetricParams({1.0}), 0, 1.5, 1.0), std::domain_error);
  // Envelope region for one rate is exactly the disk.
  CHECK_THAT(envelope_region_volume(MetricParams({1.0}), 2.0), WithinRel(17.3553873817714371, 1e-9));
}

TEST_CASE("volume bound formulas") {
  SECTION("positive rates, printed constant") {
    for (double rho : {1.0, 2.0, 4.0}) {
      const auto b = volume_bounds(MetricParams({1, 1}), rho);
      CHECK_THAT(b.printed_upper, WithinRel(2.0 * std::exp(2 * rho), 1e-14));
      CHECK_THAT(b.upper, WithinRel(8.0 * std::expm1(2 * rho), 1e-14));
      CHECK(b.lower <= b.envelope_volume);
      CHECK(b.envelope_volume <= b.upper);
    }
  }
  SECTION("single rate") {
    const auto b = volume_bounds(MetricParams({1}), 2.0);
    CHECK_THAT(b.lower, WithinRel(8.67769369088571854, 1e-11));
    CHECK_THAT(b.lower, WithinRel(std::numbers::pi * (std::cosh(2.0) - 1.0), 1e-11));
  }
  SECTION("mixed and unimodular") {
    const auto u = volume_bounds(MetricParams({1, -1}), 3.0);
    CHECK_THAT(u.upper, WithinRel(std::pow(2.0, 4.0) * 3.0 * std::exp(3.0), 1e-14));
    CHECK(u.formula_tags.front() == "upper:unimodular-envelope");
    const auto m = volume_bounds(MetricParams({2, -1}), 2.0);
    CHECK_THAT(m.upper, WithinRel(16.0 / 2.0 / 1.0 * (std::exp(4.0) - std::exp(2.0)), 1e-14));
    CHECK(m.lower > 0.0);
    CHECK(m.lower < m.envelope_volume);
    CHECK(m.envelope_volume < m.upper);
  }
  SECTION("argument checks") {
    CHECK_THROWS_AS(volume_bounds(MetricParams({1, 0}), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(volume_bounds(MetricParams({1}), 0.0), std::invalid_argument);
  }
}

TEST_CASE("log model map examples") {
  CHECK(log_model_map(1.0, Point::origin(3)).x == std::vector<double>{0, 0, 1});
  CHECK(log_model_map(2.0, Point::origin(2)).height() == 0.5);
}

TEST_CASE("hyperbolic distance is a metric on samples") {
  for (std::uint64_t k = 0; k < 300; ++k) {
    CounterRng rng(23, k);
    const double p = rng.uniform(0.3, 3.0);
    const std::vector<double> x{rng.normal(), rng.normal()}, y{rng.normal(), rng.normal()}, z{rng.normal(), rng.normal()};
    const double xy = hyperbolic_distance_2d(p, x, y), yz = hyperbolic_distance_2d(p, y, z);
    CHECK(xy == hyperbolic_distance_2d(p, y, x));
    CHECK(hyperbolic_distance_2d(p, x, z) <= xy + yz + 1e-12);
    CHECK(hyperbolic_distance_2d(p, x, x) == 0.0);
  }
}

TEST_CASE("hyperbolic ball volume grows with slope N p") {
  // On [6, 10] the log-slope is within 1% of N p once p >= 1; for p = 0.5 it is still ~4% high.
  for (double p : {1.0, 2.0, 3.0}) {
    for (std::size_t N : {1u, 2u, 3u}) {
      double prev = 0.0;
      for (double r = 0.5; r <= 10.0; r += 0.5) {
        const double v = hyperbolic_ball_volume(p, N, r);
        CHECK(v > prev);
        prev = v;
      }
      const double slope = (std::log(hyperbolic_ball_volume(p, N, 10.0)) - std::log(hyperbolic_ball_volume(p, N, 6.0))) / 4.0;
      CHECK_THAT(slope, WithinRel(N * p, 0.01));
    }
  }
}
