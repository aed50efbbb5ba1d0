// One line per acceptance criterion: "PASS n name: details" or "FAIL n name: details".
// Exit status 0 iff every selected criterion passes. Pass criterion numbers as arguments to run a
// subset, e.g. `acceptance 3 4 5`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "solvgeo/solvgeo.hpp"

using namespace solvgeo;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> g;
  for (int k = 0;; ++k) {
    const double r = lo + k * step;
    if (r > hi + 1e-9) break;
    g.push_back(r);
  }
  return g;
}

unsigned worker_threads() {
  if (const char* t = std::getenv("SOLVGEO_THREADS")) return static_cast<unsigned>(std::max(1, std::atoi(t)));
  return std::max(1u, std::thread::hardware_concurrency());
}

struct MixedFit {
  EntropyFit fit;
  std::uint64_t flagged = 0;
};

// Same protocol as `solvgeo entropy-fit --method mc`: one seed for every radius, no extra restarts.
MixedFit mc_fit(const MetricParams& p, std::uint64_t samples) {
  MixedFit out;
  std::vector<FitPoint> pts;
  for (double rho : grid(4.0, 9.0, 0.5)) {
    MonteCarloOptions opt;
    opt.samples = samples;
    opt.threads = worker_threads();
    const auto e = ball_volume_mc(p, rho, opt);
    if (e.flagged) ++out.flagged;
    pts.push_back({rho, e.value, e.std_error});
  }
  out.fit = entropy_fit(pts, 0.4);
  return out;
}

// Shared between criteria 1 and 9 (alpha = 1 is SOL).
const MixedFit& sol_fit() {
  static const MixedFit f = mc_fit(MetricParams({1.0, -1.0}), 200000);
  return f;
}

Outcome c1_sol_entropy() {
  const auto& f = sol_fit();
  const double s = f.fit.slope;
  return {s >= 0.85 && s <= 1.15,
          fmt("slope %.4f +- %.4f over rho in [%.1f, %.1f], exact 1, want [0.85, 1.15]; flagged radii %llu",
              s, f.fit.slope_std_error, f.fit.rho_lo, f.fit.rho_hi, static_cast<unsigned long long>(f.flagged))};
}

Outcome c2_hyperbolic_plane() {
  const MetricParams p({1.0});
  bool ok = true;
  std::string d;
  for (double rho : {1.0, 2.0, 3.0}) {
    const double exact = hyperbolic_disk_area(1.0, rho);
    MonteCarloOptions opt;
    opt.samples = 100000;
    opt.threads = worker_threads();
    const auto mc = ball_volume_mc(p, rho, opt);
    const auto pf = ball_volume_pushforward(p, rho, PushforwardOptions{});
    const double mc_rel = std::abs(mc.value - exact) / exact;
    const double mc_sig = std::abs(mc.value - exact) / mc.std_error;
    const double pf_rel = std::abs(pf.value - exact) / exact;
    ok = ok && mc_rel < 0.02 && mc_sig <= 3.0 && pf_rel < 1e-6;
    d += fmt("rho=%g mc rel %.2e (%.2f sigma) pushforward rel %.2e; ", rho, mc_rel, mc_sig, pf_rel);
  }
  return {ok, d + "want mc < 2% and 3 sigma, pushforward < 1e-6"};
}

Outcome c3_distance_oracle() {
  const MetricParams p({1.0});
  double worst = 0.0;
  int failed = 0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    CounterRng rng(0xACCE55, k);
    const std::vector<double> t{rng.uniform(-5, 5), rng.uniform(-4, 4)};
    const auto r = distance(p, Point(t));
    if (r.status != DistanceStatus::converged) ++failed;
    const double exact = hyperbolic_distance_2d(1.0, std::vector<double>{0, 0}, t);
    worst = std::max(worst, std::abs(r.value - exact));
  }
  return {worst < 1e-6 && failed == 0, fmt("100 targets, max abs error %.2e, unconverged %d, want < 1e-6", worst, failed)};
}

Outcome c4_pinching() {
  const auto m = curvature_scan(MetricParams({1.0, -2.0}), 100000);
  const auto h = curvature_scan(MetricParams({1.0, 2.0}), 100000);
  const double gl = m.min_seen - m.bounds.lower, gu = m.bounds.upper - m.max_seen;
  const bool ok = m.violations == 0 && h.violations == 0 && gl < 1e-3 && gu < 1e-3 &&
                  h.min_seen >= -4.0 - 1e-9 && h.max_seen <= -1.0 + 1e-9;
  return {ok, fmt("(1,-2): range [%.6f, %.6f] gaps %.1e/%.1e, violations %llu; (1,2): range [%.6f, %.6f], violations %llu",
                  m.min_seen, m.max_seen, gl, gu, static_cast<unsigned long long>(m.violations), h.min_seen,
                  h.max_seen, static_cast<unsigned long long>(h.violations))};
}

Outcome c5_conservation() {
  bool ok = true;
  std::string d;
  for (const auto& a : {std::vector<double>{1, -1}, {1, 2, -3}}) {
    const auto c = conservation_check(MetricParams(a), 100, 20.0, IntegratorConfig{1e-10, 1e-10});
    ok = ok && c.max_speed_drift < 1e-8 && c.max_integral_drift < 1e-8;
    d += fmt("a=%s speed %.1e integrals %.1e; ", a.size() == 2 ? "(1,-1)" : "(1,2,-3)", c.max_speed_drift,
             c.max_integral_drift);
  }
  return {ok, d + "want < 1e-8"};
}

Outcome c6_wedge_identity() {
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 1000000; ++k) {
    CounterRng rng(0x3ED6E, k);
    const std::size_t n = 2 + k % 5;
    std::vector<double> a(n), X(n), Y(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.normal();
      X[i] = rng.normal();
      Y[i] = rng.normal();
    }
    worst = std::max(worst, wedge_identity_relative_residual(a, X, Y));
  }
  return {worst < 1e-10, fmt("1e6 samples, dims 2-6, max relative residual %.2e, want < 1e-10", worst)};
}

Outcome c7_jacobi() {
  double worst = 0.0;
  const IntegratorConfig cfg{1e-12, 1e-12};
  for (double p : {0.5, 1.0, 2.0}) {
    for (std::size_t N = 1; N <= 3; ++N) {
      const MetricParams m(std::vector<double>(N, p));
      for (std::uint64_t k = 0; k < 8; ++k) {
        CounterRng rng(0x7AC0B1, k + 100 * N);
        const auto v = rng.unit_vector(N + 1);
        for (double t : {0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0}) {
          const double exact = std::pow(std::sinh(p * t) / p, static_cast<double>(N));
          worst = std::max(worst, std::abs(jacobi_volume_density(m, v, t, cfg) - exact) / exact);
        }
      }
    }
  }
  return {worst < 1e-6, fmt("max relative error %.2e over p in {0.5,1,2}, N in {1,2,3}, t <= 5, want < 1e-6", worst)};
}

Outcome c8_sandwich() {
  bool ok = true;
  std::string d;
  for (const auto& a : {std::vector<double>{1, 2}, {1, -1}}) {
    const MetricParams p(a);
    for (double rho : {2.0, 3.0, 4.0, 5.0}) {
      MonteCarloOptions opt;
      opt.samples = 20000;
      opt.threads = worker_threads();
      const auto e = ball_volume_mc(p, rho, opt);
      const auto b = volume_bounds(p, rho);
      const bool in = e.value + 3 * e.std_error >= b.lower && e.value - 3 * e.std_error <= b.upper;
      ok = ok && in && !e.flagged;
      d += fmt("%s rho=%g %.4g <= %.4g <= %.4g%s; ", a[1] > 0 ? "(1,2)" : "(1,-1)", rho, b.lower, e.value, b.upper,
               in ? "" : " OUT");
    }
  }
  return {ok, d};
}

Outcome c9_interpolation() {
  bool ok = true;
  std::string d;
  std::vector<double> plateau;
  for (double alpha : {-1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0}) {
    const MixedFit f = alpha == 1.0 ? sol_fit() : mc_fit(MetricParams({1.0, -alpha}), 20000);
    const double exact = sol_interpolation_piecewise(alpha);
    const double rel = std::abs(f.fit.slope - exact) / exact;
    ok = ok && rel <= 0.15;
    if (alpha >= 0.0 && alpha <= 1.0) plateau.push_back(f.fit.slope);
    d += fmt("alpha=%g %.3f/%g; ", alpha, f.fit.slope, exact);
  }
  const auto [lo, hi] = std::minmax_element(plateau.begin(), plateau.end());
  return {ok, d + fmt("plateau spread %.3f; want each within 15%%", *hi - *lo)};
}

Outcome c10_projection_recursion() {
  const MetricParams p({1.0, -1.0});
  const auto proj = projection_invariant(p, 3.0, 1000, kDefaultSeed);
  const auto rec = recursion_invariant(p, 3.0, 7, 1000, kDefaultSeed);
  const auto& pd = proj.detail;
  const auto& rd = rec.detail;
  return {proj.passed && rec.passed,
          fmt("projection violations %llu max excess %.2e; recursion lhs %.2f >= rhs %.2f",
              pd.value("forward_violations", 0ULL), pd.value("max_excess", 0.0), rd["lhs"].value("value", 0.0),
              rd.value("rhs", 0.0))};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"sol-entropy-fit", c1_sol_entropy},
      {"hyperbolic-plane-volumes", c2_hyperbolic_plane},
      {"distance-vs-half-plane", c3_distance_oracle},
      {"curvature-pinching", c4_pinching},
      {"conservation", c5_conservation},
      {"wedge-identity", c6_wedge_identity},
      {"jacobi-constant-curvature", c7_jacobi},
      {"volume-sandwich", c8_sandwich},
      {"sol-interpolation-curve", c9_interpolation},
      {"projection-and-recursion", c10_projection_recursion},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(n)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s %d %s: %s [%.0fs]\n", o.pass ? "PASS" : "FAIL", n, criteria[i].first, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
