#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "solvgeo/entropy.hpp"
#include "solvgeo/hyperbolic.hpp"
#include "solvgeo/sampling.hpp"
#include "solvgeo/volume.hpp"

using namespace solvgeo;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("entropy_exact values") {
  CHECK(entropy_exact(MetricParams({1, -1})) == 1.0);
  CHECK(entropy_exact(MetricParams({0, 0, 0})) == 0.0);
  CHECK(entropy_exact(MetricParams({2, 3})) == 5.0);
  CHECK(entropy_exact(MetricParams({1, 2, -2})) == 3.0);
  CHECK(entropy_exact(MetricParams({-1, -0.5})) == 1.5);
}

TEST_CASE("entropy_exact symmetries") {
  for (std::uint64_t k = 0; k < 500; ++k) {
    CounterRng rng(40, k);
    const std::size_t n = 1 + k % 5;
    std::vector<double> a(n);
    for (auto& c : a) c = rng.uniform(-3, 3);
    const double e = entropy_exact(MetricParams(a));
    std::vector<double> neg(a), rev(a.rbegin(), a.rend());
    for (auto& c : neg) c = -c;
    CHECK(entropy_exact(MetricParams(neg)) == e);
    CHECK(entropy_exact(MetricParams(rev)) == e);
    double pos = 0, ng = 0, abs_sum = 0;
    for (double c : a) {
      (c >= 0 ? pos : ng) += std::abs(c);
      abs_sum += std::abs(c);
    }
    CHECK_THAT(e, WithinRel(std::max(pos, ng), 1e-14));
    CHECK(e <= abs_sum * (1 + 1e-15));
    CHECK(entropy_exact(std::span<const double>(a)) == e);
  }
}

TEST_CASE("one-parameter family a = (1, -alpha)") {
  CHECK(sol_interpolation_entropy(-0.5) == 1.5);
  CHECK(sol_interpolation_entropy(0.5) == 1.0);
  CHECK(sol_interpolation_entropy(2.0) == 2.0);
  for (double alpha = -3.0; alpha <= 3.0; alpha += 0.125) {
    CHECK(sol_interpolation_entropy(alpha) == sol_interpolation_piecewise(alpha));
  }
}

TEST_CASE("Heintze entropy") {
  Eigen::MatrixXd A(2, 2);
  A << 1, 0, 0, 2;
  CHECK_THAT(heintze_entropy(A), WithinAbs(3.0, 1e-12));
  A << 1, 5, 0, 2;
  CHECK_THAT(heintze_entropy(A), WithinAbs(3.0, 1e-12));
  A << 1, 0, 0, -1;
  CHECK_THROWS_AS(heintze_entropy(A), NotHeintzeError);
  // Rotation-scaling block: eigenvalues 1 +- 2i.
  A << 1, -2, 2, 1;
  CHECK_THAT(heintze_entropy(A), WithinAbs(2.0, 1e-12));
  // Jordan block.
  A << 1, 1, 0, 1;
  CHECK_THROWS_AS(heintze_entropy(A), NotHeintzeError);
  CHECK_THROWS_AS(heintze_entropy(Eigen::MatrixXd(2, 3)), std::invalid_argument);

  for (std::uint64_t k = 0; k < 50; ++k) {
    CounterRng rng(41, k);
    const int n = 1 + static_cast<int>(k % 4);
    std::vector<double> a(n);
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) D(i, i) = a[i] = rng.uniform(0.1, 3.0);
    CHECK_THAT(heintze_entropy(D), WithinRel(entropy_exact(std::span<const double>(a)), 1e-12));
  }
}

TEST_CASE("horospherical products") {
  Eigen::MatrixXd one(1, 1);
  one << 1;
  CHECK_THAT(horospherical_product_entropy(one, one), WithinAbs(1.0, 1e-14));
  Eigen::MatrixXd A(2, 2), B(1, 1);
  A << 1, 0, 0, 2;
  B << 2;
  CHECK_THAT(horospherical_product_entropy(A, B), WithinAbs(3.0, 1e-12));
  CHECK_THAT(horospherical_product_entropy(A, B), WithinAbs(entropy_exact(MetricParams({1, 2, -2})), 1e-12));
  B << -1;
  CHECK_THROWS_AS(horospherical_product_entropy(A, B), NotHeintzeError);
}

TEST_CASE("entropy fit on synthetic volumes") {
  std::vector<FitPoint> pts;
  for (double r = 4.0; r <= 9.0 + 1e-12; r += 0.5) pts.push_back({r, std::exp(2.0 * r), 0.0});
  auto f = entropy_fit(pts);
  CHECK_THAT(f.slope, WithinAbs(2.0, 1e-12));
  CHECK_THAT(f.r_squared, WithinAbs(1.0, 1e-12));
  CHECK(f.points_used == 5);
  CHECK(f.rho_lo == 7.0);
  CHECK(f.rho_hi == 9.0);

  // rho e^rho: slope is 1 + 1/rho-ish and approaches 1 as the window moves right.
  double prev = 10.0;
  for (double hi : {10.0, 20.0, 40.0, 80.0}) {
    std::vector<FitPoint> q;
    for (int i = 0; i <= 10; ++i) {
      const double r = hi / 2 + i * hi / 20;
      q.push_back({r, r * std::exp(r), 0.0});
    }
    const double s = entropy_fit(q).slope;
    CHECK(s > 1.0);
    CHECK(s < prev);
    prev = s;
  }
  CHECK(prev < 1.02);
}

TEST_CASE("entropy fit errors") {
  CHECK_THROWS_AS(entropy_fit({{1, 1, 0}, {2, 2, 0}}), FitError);
  CHECK_THROWS_AS(entropy_fit({{1, 1, 0}, {1, 2, 0}, {3, 3, 0}}), FitError);
  CHECK_THROWS_AS(entropy_fit({{1, 1, 0}, {2, 0, 0}, {3, 3, 0}}, 1.0), FitError);
  CHECK_THROWS_AS(entropy_fit({{1, 1, 0}, {2, 2, 0}, {3, 3, 0}, {4, 4, 0}}, 0.4), FitError);
  CHECK_THROWS_AS(entropy_fit({{1, 1, 0}, {2, 2, 0}, {3, 3, 0}}, 0.0), FitError);
}

TEST_CASE("entropy fit from exact disk areas") {
  std::vector<FitPoint> pts;
  for (double r = 4.0; r <= 9.0 + 1e-12; r += 0.5) pts.push_back({r, hyperbolic_disk_area(1.0, r), 0.0});
  CHECK_THAT(entropy_fit(pts).slope, WithinAbs(1.0, 1e-3));
}
