// solvgeo: batch front end for curvature scans, distances, ball volumes and entropy fits.
// Exit codes: 0 ok, 1 invariant breach or estimation failure, 2 usage error.

#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "solvgeo/solvgeo.hpp"

using namespace solvgeo;

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Exit 1, after the JSON report has been written.
struct Breach {
  std::string what;
};

struct Globals {
  std::string cache_path;
  bool no_cache = false;
  unsigned threads = 1;
  bool progress = false;
  std::string out;
};

std::uint64_t to_count(double v, const char* name, bool allow_zero = false) {
  if (!std::isfinite(v) || v < 0.0 || v != std::floor(v) || v > 1e18) {
    throw UsageError(std::string(name) + " must be a non-negative integer");
  }
  if (!allow_zero && v == 0.0) throw UsageError(std::string(name) + " must be >= 1");
  return static_cast<std::uint64_t>(v);
}

// "lo:hi:step", inclusive of hi up to rounding.
std::vector<double> parse_grid(const std::string& spec, const char* name) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError(std::string(name) + ": cannot parse '" + tok + "'");
    }
  }
  if (parts.size() != 3) throw UsageError(std::string(name) + ": expected lo:hi:step");
  const double lo = parts[0], hi = parts[1], step = parts[2];
  for (double v : parts) {
    if (!std::isfinite(v)) throw UsageError(std::string(name) + ": non-finite value");
  }
  if (!(step > 0.0)) throw UsageError(std::string(name) + ": step must be > 0");
  if (hi < lo) throw UsageError(std::string(name) + ": empty grid (hi < lo)");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  if (count > 100000) throw UsageError(std::string(name) + ": too many grid points");
  std::vector<double> g(count);
  for (std::size_t k = 0; k < count; ++k) g[k] = lo + static_cast<double>(k) * step;
  return g;
}

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(g.out);
  f << text;
  if (!f) throw std::runtime_error("cannot write " + g.out);
}

void emit_json(const Globals& g, const json& j) { emit(g, j.dump(2) + "\n"); }

std::optional<ResultCache> open_cache(const Globals& g) {
  if (g.no_cache) return std::nullopt;
  if (g.cache_path.empty()) return ResultCache(ResultCache::default_path());
  std::filesystem::path path(g.cache_path);
  if (std::filesystem::is_directory(path)) path /= "solvgeo-cache.jsonl";
  return ResultCache(path);
}

struct VolumeRequest {
  std::string method = "mc";
  std::uint64_t samples = 100000;
  std::uint64_t seed = kDefaultSeed;
  int restarts = 0;
  std::uint64_t radial_steps = 64;
};

// Cached by everything that changes the numbers; the thread count does not.
VolumeEstimate volume_estimate(const Globals& g, const MetricParams& p, double rho, const VolumeRequest& r) {
  if (!(rho > 0.0)) throw UsageError("rho must be > 0");
  json req{{"a", p.rate_vector()}, {"rho", rho}, {"method", r.method}, {"samples", r.samples}, {"seed", r.seed}};
  if (r.method == "mc") req["restarts"] = r.restarts;
  if (r.method == "pushforward") req["radial_steps"] = r.radial_steps;
  auto cache = open_cache(g);
  const std::string key = ResultCache::key_for("ball-volume", req);
  if (cache) {
    if (auto hit = cache->lookup(key)) {
      if (g.progress) std::cerr << "cache hit rho=" << rho << "\n";
      return volume_from_json(*hit);
    }
  }
  VolumeEstimate e;
  if (r.method == "mc") {
    MonteCarloOptions opt;
    opt.samples = r.samples;
    opt.seed = r.seed;
    opt.restarts = r.restarts;
    opt.threads = g.threads;
    if (g.progress) {
      opt.progress_every = std::max<std::uint64_t>(1, r.samples / 20);
      opt.progress = [rho](std::uint64_t done, std::uint64_t total) {
        std::cerr << "  rho=" << rho << " " << done << "/" << total << "\r" << std::flush;
      };
    }
    e = ball_volume_mc(p, rho, opt);
    if (g.progress) std::cerr << "\n";
  } else if (r.method == "pushforward") {
    PushforwardOptions opt;
    opt.sphere_samples = r.samples;
    opt.radial_steps = r.radial_steps;
    opt.seed = r.seed;
    e = ball_volume_pushforward(p, rho, opt);
  } else {
    throw UsageError("unknown volume method " + r.method);
  }
  if (cache) cache->store(key, to_json(e), hex64(p.digest()));
  return e;
}

// The closed-form generator used to test the fit itself: a must be (p, ..., p).
VolumeEstimate hyperbolic_volume(const MetricParams& p, double rho) {
  for (double v : p.rates()) {
    if (v != p.rate(0) || v == 0.0) throw UsageError("exact-hyperbolic needs all rates equal and nonzero");
  }
  VolumeEstimate e;
  e.method = VolumeMethod::closed_form;
  e.rho = rho;
  e.value = hyperbolic_ball_volume(std::abs(p.rate(0)), p.horizontal_dim(), rho);
  e.params_hash = p.digest();
  return e;
}

struct FitOutcome {
  EntropyFit fit;
  std::vector<VolumeEstimate> volumes;
  std::uint64_t flagged = 0;
};

FitOutcome run_fit(const Globals& g, const MetricParams& p, const std::vector<double>& grid, const VolumeRequest& r,
                   double window) {
  FitOutcome out;
  std::vector<FitPoint> pts;
  for (double rho : grid) {
    if (g.progress) std::cerr << "volume a=" << json(p.rate_vector()).dump() << " rho=" << rho << "\n";
    const VolumeEstimate e = r.method == "exact-hyperbolic" ? hyperbolic_volume(p, rho) : volume_estimate(g, p, rho, r);
    if (e.flagged) ++out.flagged;
    out.volumes.push_back(e);
    pts.push_back({rho, e.value, e.std_error});
  }
  out.fit = entropy_fit(pts, window);
  return out;
}

void check_method(const std::string& m, bool allow_exact) {
  if (m == "mc" || m == "pushforward" || (allow_exact && m == "exact-hyperbolic")) return;
  throw UsageError("unknown method " + m);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometry and volume-growth experiments for the metrics sum e^{-2 a_i z} dx_i^2 + dz^2"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "INI/TOML file of defaults; command-line flags take precedence");

  Globals g;
  app.add_option("--cache", g.cache_path, "Cache file or directory (default $SOLVGEO_CACHE or ./solvgeo-cache.jsonl)");
  app.add_flag("--no-cache", g.no_cache, "Neither read nor write the cache");
  app.add_option("--threads", g.threads, "Monte Carlo worker threads; results do not depend on it")
      ->check(CLI::Range(1u, 1024u));
  app.add_flag("--progress", g.progress, "Progress on stderr");
  app.add_option("--out", g.out, "Write the report here instead of stdout");

  std::vector<double> a;
  std::uint64_t seed = kDefaultSeed;
  auto add_rates = [&](CLI::App* sub, bool required, std::string def = "") {
    auto* o = sub->add_option("--a", a, "Rates, comma separated (use --a=-1,2 when the first is negative)")
                  ->delimiter(',')
                  ->expected(1, 64);
    if (required) o->required();
    if (!def.empty()) o->default_str(def);
    sub->add_option("--seed", seed, "RNG seed")->default_val(kDefaultSeed);
  };

  // entropy-exact
  auto* c_exact = app.add_subcommand("entropy-exact", "Closed-form volume entropy");
  add_rates(c_exact, true);

  // curvature-scan
  auto* c_curv = app.add_subcommand("curvature-scan", "Sample sectional curvatures of random 2-planes");
  add_rates(c_curv, true);
  double curv_samples = 100000;
  c_curv->add_option("--samples", curv_samples, "Number of random planes");

  // ball-volume
  auto* c_ball = app.add_subcommand("ball-volume", "Volume of the geodesic ball around the origin");
  add_rates(c_ball, true);
  double rho = 0.0;
  std::string method = "mc";
  double samples = -1;
  int restarts = 0;
  double radial_steps = 64;
  c_ball->add_option("--rho", rho, "Radius")->required();
  c_ball->add_option("--method", method, "mc | pushforward")->check(CLI::IsMember({"mc", "pushforward"}));
  c_ball->add_option("--samples", samples, "MC samples (default 1e5) or sphere directions (default 256)");
  c_ball->add_option("--restarts", restarts, "Extra shooting starts per undecided MC sample")->check(CLI::Range(0, 1000));
  c_ball->add_option("--radial-steps", radial_steps, "Pushforward: radial steps cap");

  // entropy-fit
  auto* c_fit = app.add_subcommand("entropy-fit", "Slope of log volume against rho");
  add_rates(c_fit, true);
  std::string rho_grid = "4:9:0.5";
  double window = 0.4;
  c_fit->add_option("--rho-grid", rho_grid, "lo:hi:step")->capture_default_str();
  c_fit->add_option("--method", method, "mc | pushforward | exact-hyperbolic")
      ->check(CLI::IsMember({"mc", "pushforward", "exact-hyperbolic"}));
  c_fit->add_option("--samples", samples, "Samples per radius");
  c_fit->add_option("--restarts", restarts, "Extra shooting starts per undecided MC sample")->check(CLI::Range(0, 1000));
  c_fit->add_option("--radial-steps", radial_steps, "Pushforward: radial steps cap");
  c_fit->add_option("--window", window, "Fit the top fraction of the rho range")->capture_default_str();

  // sol-sweep
  auto* c_sweep = app.add_subcommand("sol-sweep", "Entropy of a = (1, -alpha) over an alpha grid, as CSV");
  std::string alpha_grid;
  bool sweep_fit = false;
  c_sweep->add_option("--alpha", alpha_grid, "lo:hi:step")->required();
  c_sweep->add_flag("--fit", sweep_fit, "Also estimate volumes and fit the slope");
  c_sweep->add_option("--rho-grid", rho_grid, "lo:hi:step")->capture_default_str();
  c_sweep->add_option("--method", method, "mc | pushforward")->check(CLI::IsMember({"mc", "pushforward"}));
  c_sweep->add_option("--samples", samples, "Samples per radius (default 2e4)");
  c_sweep->add_option("--restarts", restarts, "Extra shooting starts per undecided MC sample")->check(CLI::Range(0, 1000));
  c_sweep->add_option("--window", window, "Fit window fraction")->capture_default_str();
  c_sweep->add_option("--seed", seed, "RNG seed")->default_val(kDefaultSeed);

  // verify
  auto* c_verify = app.add_subcommand("verify", "Invariant suites; exit 0 iff all pass");
  std::string suite = "core";
  std::size_t grid_points = 7;
  double verify_samples = 1000;
  double verify_rho = 3.0;
  add_rates(c_verify, false);
  c_verify->add_option("--suite", suite, "core | projection | recursion | all")
      ->check(CLI::IsMember({"core", "projection", "recursion", "all"}))
      ->capture_default_str();
  c_verify->add_option("--rho", verify_rho, "Radius for projection and recursion")->capture_default_str();
  c_verify->add_option("--samples", verify_samples, "Samples for projection and recursion")->capture_default_str();
  c_verify->add_option("--grid", grid_points, "Recursion: radii in the trapezoid rule")->capture_default_str();

  // distance
  auto* c_dist = app.add_subcommand("distance", "Distance from the origin to a point by geodesic shooting");
  add_rates(c_dist, true);
  std::vector<double> target;
  c_dist->add_option("--target", target, "Point x_1,...,x_{N+1}")->delimiter(',')->required();
  int dist_restarts = -1;
  c_dist->add_option("--restarts", dist_restarts, "Low-discrepancy restarts (default 1 one-signed, 32 mixed)");

  // trace
  auto* c_trace = app.add_subcommand("trace", "Sample a geodesic from the origin as CSV");
  add_rates(c_trace, true);
  std::vector<double> v;
  double length = 10.0, step = 0.1, tol = 1e-10;
  c_trace->add_option("--v", v, "Initial frame vector (normalized)")->delimiter(',')->required();
  c_trace->add_option("--length", length, "Arc length")->capture_default_str();
  c_trace->add_option("--step", step, "Sample spacing")->capture_default_str();
  c_trace->add_option("--tol", tol, "Integrator tolerance")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_exact->parsed()) {
      const MetricParams p(a);
      emit_json(g, json{{"a", a},
                        {"entropy", entropy_exact(p)},
                        {"pos_sum", p.positive_sum()},
                        {"neg_sum", p.negative_sum()}});
      return 0;
    }

    if (c_curv->parsed()) {
      const MetricParams p(a);
      const auto n = to_count(curv_samples, "--samples");
      const auto scan = curvature_scan(p, n, seed);
      json j = to_json(scan);
      j["a"] = a;
      j["seed"] = seed;
      emit_json(g, j);
      if (scan.violations > 0) throw Breach{"curvature outside the pinching interval"};
      return 0;
    }

    if (c_ball->parsed()) {
      const MetricParams p(a);
      if (!(rho > 0.0) || !std::isfinite(rho)) throw UsageError("--rho must be > 0");
      VolumeRequest r;
      r.method = method;
      r.samples = to_count(samples < 0 ? (method == "mc" ? 1e5 : 256.0) : samples, "--samples");
      r.seed = seed;
      r.restarts = restarts;
      r.radial_steps = to_count(radial_steps, "--radial-steps");
      const auto e = volume_estimate(g, p, rho, r);
      const auto b = volume_bounds(p, rho);
      const bool within = e.value + 3.0 * e.std_error >= b.lower && e.value - 3.0 * e.std_error <= b.upper;
      json j{{"a", a}, {"estimate", to_json(e)}, {"bounds", to_json(b)}, {"within_bounds", within}};
      if (method == "pushforward") j["exact_without_cut_locus"] = p.one_signed();
      emit_json(g, j);
      if (e.flagged) throw Breach{"more than 1% of distance evaluations failed"};
      if (!within) throw Breach{"estimate outside the volume bounds by more than 3 sigma"};
      return 0;
    }

    if (c_fit->parsed()) {
      const MetricParams p(a);
      const auto grid = parse_grid(rho_grid, "--rho-grid");
      if (!(grid.front() > 0.0)) throw UsageError("--rho-grid must start above 0");
      check_method(method, true);
      VolumeRequest r;
      r.method = method;
      r.samples = to_count(samples < 0 ? (method == "pushforward" ? 256.0 : 1e5) : samples, "--samples");
      r.seed = seed;
      r.restarts = restarts;
      r.radial_steps = to_count(radial_steps, "--radial-steps");
      FitOutcome f;
      try {
        f = run_fit(g, p, grid, r, window);
      } catch (const FitError& e) {
        std::cerr << "fit failed: " << e.what() << "\n";
        return 1;
      }
      const double exact = entropy_exact(p);
      json vols = json::array();
      for (const auto& e : f.volumes) vols.push_back(to_json(e));
      json j{{"a", a},
             {"method", method},
             {"fit", to_json(f.fit)},
             {"exact", exact},
             {"relative_gap", exact != 0.0 ? json((f.fit.slope - exact) / exact) : json(nullptr)},
             {"volumes", vols}};
      emit_json(g, j);
      if (f.flagged > 0) throw Breach{"flagged volume estimates in the fit"};
      return 0;
    }

    if (c_sweep->parsed()) {
      const auto alphas = parse_grid(alpha_grid, "--alpha");
      const auto grid = parse_grid(rho_grid, "--rho-grid");
      if (!(grid.front() > 0.0)) throw UsageError("--rho-grid must start above 0");
      VolumeRequest r;
      r.method = method;
      r.samples = to_count(samples < 0 ? (method == "pushforward" ? 256.0 : 2e4) : samples, "--samples");
      r.seed = seed;
      r.restarts = restarts;
      std::ostringstream os;
      csv::write_row(os, {"alpha", "exact", "fitted", "stderr", "error"});
      bool any_error = false;
      for (double al : alphas) {
        std::vector<std::string> row{csv::number(al), csv::number(sol_interpolation_piecewise(al)), "", "", ""};
        if (sweep_fit) {
          try {
            const auto f = run_fit(g, MetricParams({1.0, -al}), grid, r, window);
            row[2] = csv::number(f.fit.slope);
            row[3] = csv::number(f.fit.slope_std_error);
            if (f.flagged > 0) row[4] = "flagged volume estimates";
          } catch (const UsageError&) {
            throw;
          } catch (const std::exception& e) {
            row[4] = e.what();
          }
          if (!row[4].empty()) any_error = true;
        }
        csv::write_row(os, row);
        if (g.progress) std::cerr << "alpha=" << al << " done\n";
      }
      emit(g, os.str());
      return any_error ? 1 : 0;
    }

    if (c_verify->parsed()) {
      if (a.empty()) a = {1.0, -1.0};
      const MetricParams p(a);
      const auto n = to_count(verify_samples, "--samples");
      std::vector<InvariantResult> results;
      if (suite == "core" || suite == "all") {
        auto core = core_suite(p, seed);
        results.insert(results.end(), core.begin(), core.end());
      }
      if (suite == "projection" || suite == "all") results.push_back(projection_invariant(p, verify_rho, n, seed));
      if (suite == "recursion" || suite == "all") {
        results.push_back(recursion_invariant(p, verify_rho, grid_points, n, seed));
      }
      json list = json::array();
      bool ok = true;
      for (const auto& r : results) {
        list.push_back(to_json(r));
        if (!r.passed) {
          ok = false;
          std::cerr << "violated: " << r.name << " witness " << r.witness.dump() << "\n";
        }
      }
      emit_json(g, json{{"suite", suite}, {"a", a}, {"seed", seed}, {"invariants", list}, {"passed", ok}});
      return ok ? 0 : 1;
    }

    if (c_dist->parsed()) {
      const MetricParams p(a);
      const Point t(target);
      const auto d = distance(p, t, ShootingConfig{}, dist_restarts, seed);
      json j = to_json(d);
      j["a"] = a;
      j["target"] = target;
      j["lower_bound"] = distance_lower_bound(p, t);
      j["upper_bound"] = distance_upper_bound(p, t);
      emit_json(g, j);
      if (d.status == DistanceStatus::failed) throw Breach{"shooting did not converge"};
      return 0;
    }

    if (c_trace->parsed()) {
      const MetricParams p(a);
      require_dim(v.size(), p.dim(), "--v");
      double nv = 0.0;
      for (double c : v) nv += c * c;
      if (!(nv > 0.0)) throw UsageError("--v must be nonzero");
      for (double& c : v) c /= std::sqrt(nv);
      IntegratorConfig cfg{tol, tol};
      const auto states = trace(p, Tangent::from_frame(p, Point::origin(p.dim()), v), length, step, cfg);
      std::ostringstream os;
      write_trace_csv(os, p, states);
      emit(g, os.str());
      return 0;
    }
  } catch (const Breach& b) {
    std::cerr << "error: " << b.what << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
