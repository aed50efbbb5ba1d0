#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "solvgeo/metric.hpp"
#include "solvgeo/sampling.hpp"
#include "solvgeo/verify.hpp"

using namespace solvgeo;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<double> basis(std::size_t n, std::size_t i) {
  std::vector<double> e(n, 0.0);
  e[i] = 1.0;
  return e;
}

std::vector<double> gaussian(CounterRng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& c : v) c = rng.normal();
  return v;
}

}  // namespace

TEST_CASE("params derive the documented scalars") {
  const MetricParams p({1.0, -2.0, 0.5});
  CHECK(p.horizontal_dim() == 3);
  CHECK(p.dim() == 4);
  CHECK(p.max_rate() == 1.0);
  CHECK(p.min_rate() == -2.0);
  CHECK(p.positive_sum() == 1.5);
  CHECK(p.negative_sum() == 2.0);
  CHECK(p.positive_sum() - p.negative_sum() == p.trace());
  CHECK(p.consistent());
  CHECK_FALSE(p.one_signed());
  CHECK(MetricParams({1.0, 0.0}).one_signed());
  CHECK_THROWS_AS(MetricParams({}), std::invalid_argument);
  CHECK_THROWS_AS(MetricParams({1.0, NAN}), std::invalid_argument);
  CHECK(MetricParams({1, 2}).digest() != MetricParams({2, 1}).digest());
}

TEST_CASE("metric_inner examples") {
  const MetricParams p({1.0, -1.0});
  const auto e1 = basis(3, 0), e3 = basis(3, 2);
  CHECK(metric_inner(p, Point::origin(3), e1, e1) == 1.0);
  CHECK_THAT(metric_inner(p, Point({0, 0, 1}), e1, e1), WithinRel(std::exp(-2.0), 1e-15));
  CHECK(metric_inner(p, Point({0, 0, 1}), e3, e3) == 1.0);
  CHECK_THROWS_AS(metric_inner(p, Point({0, 0}), e1, e1), DimensionError);
}

TEST_CASE("volume_density examples") {
  CHECK_THAT(volume_density(MetricParams({1, -1}), Point({0.3, 0.1, 5})), WithinRel(1.0, 1e-15));
  CHECK_THAT(volume_density(MetricParams({1, 1}), Point({0, 0, 1})), WithinRel(std::exp(-2.0), 1e-15));
  CHECK(volume_density(MetricParams({2, 3}), Point({4, 4, 0})) == 1.0);
}

TEST_CASE("frame and coordinate components round-trip") {
  const MetricParams p({1.0, -2.0, 0.5});
  for (std::uint64_t k = 0; k < 200; ++k) {
    CounterRng rng(5, k);
    std::vector<double> x(4);
    for (auto& c : x) c = rng.uniform(-3, 3);
    const auto coord = gaussian(rng, 4);
    const auto t = Tangent::from_coord(p, Point(x), coord);
    const auto back = Tangent::from_frame(p, Point(x), {t.frame().begin(), t.frame().end()});
    for (std::size_t i = 0; i < 4; ++i) CHECK_THAT(back.coord()[i], WithinRel(coord[i], 1e-14));
    double e = 0.0;
    for (double c : t.frame()) e += c * c;
    CHECK_THAT(metric_inner(p, t.base(), t, t), WithinRel(e, 1e-14));
  }
}

TEST_CASE("connection coefficients") {
  const ConnectionTable G(MetricParams({1.0, -1.0}));
  // G(k, i, j): component k of nabla_{E_i} E_j, zero-based.
  CHECK(G(2, 0, 0) == 1.0);
  CHECK(G(2, 1, 1) == -1.0);
  CHECK(G(0, 0, 2) == -1.0);
  CHECK(G(1, 1, 2) == 1.0);
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(G(k, 2, j) == 0.0);
  }
  // Metric compatibility in an orthonormal frame: Gamma^l_{ij} + Gamma^j_{il} = 0.
  const MetricParams q({0.7, -1.3, 2.0});
  const ConnectionTable H(q);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      for (std::size_t l = 0; l < 4; ++l) CHECK(H(l, i, j) + H(j, i, l) == 0.0);
    }
  }
}

TEST_CASE("curvature tensor values and symmetries") {
  const MetricParams p({1.0, -1.0});
  const auto e1 = basis(3, 0), e2 = basis(3, 1), e3 = basis(3, 2);
  CHECK_THAT(curvature_tensor(p, e1, e3, e3, e1), WithinAbs(-1.0, 1e-15));
  CHECK_THAT(curvature_tensor(p, e1, e2, e2, e1), WithinAbs(1.0, 1e-15));

  const MetricParams q({1.0, -2.0, 0.5});
  const CurvatureTensor R(q);
  for (std::uint64_t k = 0; k < 10000; ++k) {
    CounterRng rng(9, k);
    const auto X = gaussian(rng, 4), Y = gaussian(rng, 4), Z = gaussian(rng, 4), W = gaussian(rng, 4);
    const double r = R(X, Y, Z, W);
    const double s = 1e-12 * (1.0 + std::abs(r));
    REQUIRE_THAT(R(Y, X, Z, W), WithinAbs(-r, s));
    REQUIRE_THAT(R(X, Y, W, Z), WithinAbs(-r, s));
    REQUIRE_THAT(R(Z, W, X, Y), WithinAbs(r, s));
    REQUIRE_THAT(R(X, X, Z, W), WithinAbs(0.0, 1e-12));
  }
  // First Bianchi identity on the vector-valued operator.
  for (std::uint64_t k = 0; k < 1000; ++k) {
    CounterRng rng(10, k);
    const auto X = gaussian(rng, 4), Y = gaussian(rng, 4), Z = gaussian(rng, 4);
    const auto a = R.apply(X, Y, Z), b = R.apply(Y, Z, X), c = R.apply(Z, X, Y);
    for (std::size_t i = 0; i < 4; ++i) REQUIRE_THAT(a[i] + b[i] + c[i], WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("sectional curvature examples") {
  const auto e1 = basis(3, 0), e2 = basis(3, 1), e3 = basis(3, 2);
  const MetricParams m({1.0, -2.0});
  CHECK_THAT(sectional_curvature(m, e2, e3), WithinAbs(-4.0, 1e-14));
  CHECK_THAT(sectional_curvature(m, e1, e2), WithinAbs(2.0, 1e-14));
  CHECK_THAT(sectional_curvature(m, e1, e3), WithinAbs(-1.0, 1e-14));
  CHECK_THROWS_AS(sectional_curvature(m, e1, std::vector<double>{2.0, 0.0, 0.0}), DegeneratePlaneError);

  // Same plane, different basis.
  const std::vector<double> P{0.3, -1.1, 0.7}, Q{1.2, 0.4, -0.2};
  std::vector<double> P2(3), Q2(3);
  for (std::size_t i = 0; i < 3; ++i) {
    P2[i] = 2.0 * P[i] - 3.0 * Q[i];
    Q2[i] = 0.5 * P[i] + Q[i];
  }
  CHECK_THAT(sectional_curvature(m, P2, Q2), WithinAbs(sectional_curvature(m, P, Q), 1e-13));

  // Agrees with R(X, Y, Y, X) on orthonormal pairs.
  const CurvatureTensor R(m);
  const auto [u, v] = detail::orthonormalize(P, Q);
  CHECK_THAT(sectional_curvature(m, P, Q), WithinAbs(R(u, v, v, u), 1e-13));
}

TEST_CASE("constant curvature when all rates are equal") {
  for (double p : {0.5, 1.0, 3.0, -2.0}) {
    const MetricParams q({p, p, p});
    for (std::uint64_t k = 0; k < 2000; ++k) {
      CounterRng rng(11, k);
      REQUIRE_THAT(sectional_curvature(q, gaussian(rng, 4), gaussian(rng, 4)), WithinAbs(-p * p, 1e-12 * (1 + p * p)));
    }
  }
}

TEST_CASE("curvature bounds") {
  auto b = curvature_bounds(MetricParams({1.0, 2.0}));
  CHECK(b.lower == -4.0);
  CHECK(b.upper == -1.0);
  b = curvature_bounds(MetricParams({1.0, -2.0}));
  CHECK(b.lower == -4.0);
  CHECK(b.upper == 2.0);
  b = curvature_bounds(MetricParams({1.5, 1.5}));
  CHECK(b.lower == -2.25);
  CHECK(b.upper == -2.25);
  b = curvature_bounds(MetricParams({1.0, 0.0}));
  CHECK(b.lower == -1.0);
  CHECK(b.upper == 0.0);
}

TEST_CASE("random planes stay inside the pinching interval") {
  for (const auto& a : {std::vector<double>{1, -2}, {1, 2}, {0.5, -1, 2}, {-1, -3, -0.5}, {1, 0, -1}}) {
    const auto scan = curvature_scan(MetricParams(a), 100000, 3);
    CHECK(scan.violations == 0);
    CHECK(scan.min_seen >= scan.bounds.lower - 1e-9);
    CHECK(scan.max_seen <= scan.bounds.upper + 1e-9);
  }
  const auto scan = curvature_scan(MetricParams({1, -2}), 100000);
  CHECK(scan.min_seen - scan.bounds.lower < 1e-3);
  CHECK(scan.bounds.upper - scan.max_seen < 1e-3);
  CHECK_THROWS_AS(curvature_scan(MetricParams({1}), 0), std::invalid_argument);
}

TEST_CASE("wedge identity") {
  const std::vector<double> a{0.7, -1.9};
  const std::vector<double> X{1, 0}, Y{0, 1};
  CHECK(wedge_identity_residual(a, X, Y) == 0.0);
  CHECK(wedge_identity_residual(a, X, X) == 0.0);
  for (std::uint64_t k = 0; k < 100000; ++k) {
    CounterRng rng(12, k);
    const std::size_t n = 2 + k % 5;
    const auto A = gaussian(rng, n), U = gaussian(rng, n), V = gaussian(rng, n);
    REQUIRE(wedge_identity_relative_residual(A, U, V) < 1e-10);
  }
  CHECK_THROWS_AS(wedge_identity_residual(a, std::vector<double>{1, 2, 3}, Y), DimensionError);
}
