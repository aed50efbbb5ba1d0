#pragma once

// Geodesic-ball volume estimators.
//
// pushforward: integral of the polar Jacobi density over directions and radii.
// mc_rejection: importance sampling over the envelope region Omega (which contains the ball),
// z drawn from a tabulated density close to the z-marginal of the volume of Omega and each
// x_i uniform across the envelope at that height. Membership is settled by the cheapest test
// that decides it: lower bounds reject, the staircase upper bound accepts, shooting decides
// the rest.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "solvgeo/distance.hpp"
#include "solvgeo/geodesics.hpp"
#include "solvgeo/hyperbolic.hpp"
#include "solvgeo/jacobi.hpp"
#include "solvgeo/metric.hpp"
#include "solvgeo/quadrature.hpp"
#include "solvgeo/sampling.hpp"

namespace solvgeo {

enum class VolumeMethod { mc_rejection, pushforward, closed_form };

inline const char* to_string(VolumeMethod m) {
  switch (m) {
    case VolumeMethod::pushforward: return "pushforward";
    case VolumeMethod::closed_form: return "closed_form";
    case VolumeMethod::mc_rejection: break;
  }
  return "mc_rejection";
}

struct VolumeEstimate {
  double value = 0.0;
  double std_error = 0.0;
  VolumeMethod method = VolumeMethod::mc_rejection;
  std::uint64_t samples = 0;
  double rho = 0.0;
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t params_hash = 0;

  // mc: how many samples each stage settled, distance calls and failures.
  // pushforward: directions whose density crossed zero.
  std::uint64_t rejected_height = 0;
  std::uint64_t rejected_projection = 0;
  std::uint64_t rejected_block = 0;
  std::uint64_t rejected_envelope = 0;
  std::uint64_t accepted_upper = 0;
  std::uint64_t skipped_roulette = 0;
  std::uint64_t distance_calls = 0;
  std::uint64_t distance_failures = 0;
  std::uint64_t conjugate_crossings = 0;
  bool flagged = false;  // > 1% of distance calls failed
  double proposal_volume = 0.0;
};

// ---------------------------------------------------------------------------------------------
// Pushforward

struct PushforwardOptions {
  std::uint64_t sphere_samples = 256;
  std::uint64_t radial_steps = 64;  // caps the integrator step at rho / radial_steps
  std::uint64_t seed = kDefaultSeed;
  IntegratorConfig integrator{1e-10, 1e-10};
};

// Integral of the clamped density along one direction, and whether it crossed zero.
inline std::pair<double, bool> radial_integral(const MetricParams& p, std::span<const double> v, double rho,
                                               const IntegratorConfig& cfg) {
  JacobiFlow flow(p, v, 1);
  const std::size_t acc = flow.extra_offset();
  auto y = flow.initial_state();
  DormandPrince dp(y.size());
  auto rhs = [&](double s, std::span<const double> yy, std::span<double> dy) {
    flow(s, yy, dy);
    dy[acc] = std::max(0.0, flow.density(yy));
  };
  bool crossed = false;
  dp.integrate(rhs, 0.0, rho, y, cfg, [&](const StepView& sv) {
    flow.check_range(sv.y1[0], sv.t1);
    if (sv.t1 > 1e-9 * rho && flow.density(sv.y1) < 0.0) crossed = true;
    return true;
  });
  return {y[acc], crossed};
}

inline VolumeEstimate ball_volume_pushforward(const MetricParams& p, double rho, const PushforwardOptions& opt = {}) {
  if (!(rho > 0.0)) throw std::invalid_argument("ball_volume_pushforward: rho must be > 0");
  if (opt.sphere_samples < 1) throw std::invalid_argument("ball_volume_pushforward: need sphere samples");
  if (opt.radial_steps < 1) throw std::invalid_argument("ball_volume_pushforward: need radial steps");
  IntegratorConfig cfg = opt.integrator;
  cfg.max_step = std::min(cfg.max_step, rho / static_cast<double>(opt.radial_steps));
  const std::size_t n = p.dim();
  const SphereSequence sphere(n, opt.seed);

  VolumeEstimate est;
  est.method = VolumeMethod::pushforward;
  est.rho = rho;
  est.seed = opt.seed;
  est.samples = opt.sphere_samples;
  est.params_hash = p.digest();

  double sum = 0.0, sum2 = 0.0;
  for (std::uint64_t k = 0; k < opt.sphere_samples; ++k) {
    const auto v = sphere.point(k);
    const auto [I, crossed] = radial_integral(p, v, rho, cfg);
    sum += I;
    sum2 += I * I;
    if (crossed) ++est.conjugate_crossings;
  }
  const double m = static_cast<double>(opt.sphere_samples);
  const double mean = sum / m;
  const double omega = sphere_volume(p.horizontal_dim());
  est.value = omega * mean;
  // Spread of the per-direction integrals; zero when the density is direction independent.
  const double var = m > 1 ? std::max(0.0, (sum2 - m * mean * mean) / (m - 1)) : 0.0;
  est.std_error = omega * std::sqrt(var / m);
  return est;
}

inline VolumeEstimate ball_volume_pushforward(const MetricParams& p, double rho, std::uint64_t sphere_samples,
                                              std::uint64_t radial_steps, std::uint64_t seed) {
  PushforwardOptions opt;
  opt.sphere_samples = sphere_samples;
  opt.radial_steps = radial_steps;
  opt.seed = seed;
  return ball_volume_pushforward(p, rho, opt);
}

// ---------------------------------------------------------------------------------------------
// Monte Carlo

// Piecewise-constant density on [-rho, rho] with cell masses from Simpson's rule applied to
//   g(z) = exp(-tr(a) z) prod_i 2 w_i(z),
// the Riemannian volume of the slice of Omega at height z.
class EnvelopeProposal {
 public:
  EnvelopeProposal(const MetricParams& p, double rho, std::size_t cells = 4096)
      : p_(&p), rho_(rho), width_(2.0 * rho / static_cast<double>(cells)), cum_(cells + 1, 0.0) {
    for (std::size_t c = 0; c < cells; ++c) {
      const double a = -rho + width_ * static_cast<double>(c);
      const double mass = width_ * (slice(a) + 4.0 * slice(a + 0.5 * width_) + slice(a + width_)) / 6.0;
      cum_[c + 1] = cum_[c] + mass;
    }
  }

  double total() const { return cum_.back(); }
  double rho() const { return rho_; }

  // Riemannian volume of the z-slice of Omega.
  double slice(double z) const {
    double v = std::exp(-p_->trace() * z);
    for (double a : p_->rates()) v *= 2.0 * envelope_half_width(a, z, rho_);
    return v;
  }

  // Draws z and returns it with its density.
  std::pair<double, double> sample_height(double u) const {
    const double target = u * total();
    auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
    std::size_t c = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - cum_.begin())) - 1;
    c = std::min(c, cum_.size() - 2);
    const double mass = cum_[c + 1] - cum_[c];
    const double frac = mass > 0 ? std::clamp((target - cum_[c]) / mass, 0.0, 1.0) : 0.5;
    const double z = -rho_ + width_ * (static_cast<double>(c) + frac);
    return {z, mass / (total() * width_)};
  }

 private:
  const MetricParams* p_;
  double rho_;
  double width_;
  std::vector<double> cum_;
};

struct MonteCarloOptions {
  std::uint64_t samples = 100000;
  std::uint64_t seed = kDefaultSeed;
  // Extra low-discrepancy starts per undecided sample, after continuation along the shortest
  // staircase; < 0 uses the distance() default.
  int restarts = 0;
  unsigned threads = 1;
  ShootingConfig shooting{IntegratorConfig{1e-8, 1e-8}, 1e-7, 40, -1.0, 1, false};
  // Undecided samples whose staircase bound exceeds (1 + shoot_band) rho are shot only with
  // probability far_shoot_probability and reweighted by its inverse (Russian roulette), which
  // keeps the estimate unbiased while skipping most of the shooting. 1 disables it.
  double shoot_band = 0.05;
  double far_shoot_probability = 0.05;
  // Called from the coordinating thread with (samples done, samples total).
  std::function<void(std::uint64_t, std::uint64_t)> progress;
  std::uint64_t progress_every = 0;
};

namespace detail {

enum class Verdict : std::uint8_t {
  out_height,
  out_projection,
  out_block,
  out_envelope,
  in_upper,
  out_roulette,
  in_shot,
  out_shot,
  failed
};

struct McSample {
  double weight = 0.0;  // importance weight, including any roulette factor
  Verdict verdict = Verdict::out_height;
};

inline bool inside(Verdict v) { return v == Verdict::in_upper || v == Verdict::in_shot; }

// Ball membership of x, cheapest test first. `boost` receives the roulette reweighting.
inline Verdict classify(const MetricParams& p, const Point& x, double rho, const MonteCarloOptions& opt,
                        std::uint64_t index, CounterRng& rng, double& boost) {
  const std::size_t N = p.horizontal_dim();
  const double z = x.height();
  boost = 1.0;
  if (std::abs(z) > rho) return Verdict::out_height;
  for (std::size_t i = 0; i < N; ++i) {
    if (log_model_distance(p.rate(i), x[i] * x[i], 0.0, z) > rho) return Verdict::out_projection;
  }
  if (distance_lower_bound(p, x) > rho) return Verdict::out_block;
  for (std::size_t i = 0; i < N; ++i) {
    if (std::abs(x[i]) > envelope_half_width(p.rate(i), z, rho)) return Verdict::out_envelope;
  }
  const double upper = distance_upper_bound(p, x);
  if (upper <= rho) return Verdict::in_upper;
  const double roll = rng.uniform();
  if (upper > (1.0 + opt.shoot_band) * rho && opt.far_shoot_probability < 1.0) {
    if (roll >= opt.far_shoot_probability) return Verdict::out_roulette;
    boost = 1.0 / opt.far_shoot_probability;
  }
  ShootingConfig cfg = opt.shooting;
  cfg.stop_below = rho;
  const auto d = distance(p, x, cfg, opt.restarts, splitmix64(opt.seed ^ index));
  if (d.status == DistanceStatus::failed) return Verdict::failed;
  return d.value <= rho ? Verdict::in_shot : Verdict::out_shot;
}

inline McSample draw(const MetricParams& p, const EnvelopeProposal& prop, double rho, const MonteCarloOptions& opt,
                     std::uint64_t index) {
  CounterRng rng(opt.seed, index);
  const auto [z, qz] = prop.sample_height(rng.uniform());
  const std::size_t N = p.horizontal_dim();
  std::vector<double> x(N + 1);
  for (std::size_t i = 0; i < N; ++i) {
    const double w = envelope_half_width(p.rate(i), z, rho);
    x[i] = rng.uniform(-w, w);
  }
  x[N] = z;
  McSample s;
  double boost = 1.0;
  s.verdict = classify(p, Point(std::move(x)), rho, opt, index, rng, boost);
  s.weight = prop.slice(z) / qz * boost;
  return s;
}

}  // namespace detail

// Monte Carlo estimate of Vol(D(0, rho)). Zero rates are allowed (flat envelope).
inline VolumeEstimate ball_volume_mc(const MetricParams& p, double rho, const MonteCarloOptions& opt) {
  if (!(rho > 0.0)) throw std::invalid_argument("ball_volume_mc: rho must be > 0");
  if (opt.samples < 2) throw std::invalid_argument("ball_volume_mc: need at least 2 samples");
  const EnvelopeProposal prop(p, rho);

  std::vector<detail::McSample> out(opt.samples);
  const unsigned T = std::max(1u, opt.threads);
  std::atomic<std::uint64_t> next{0};
  std::atomic<std::uint64_t> done{0};
  constexpr std::uint64_t kChunk = 64;
  auto worker = [&] {
    for (;;) {
      const std::uint64_t begin = next.fetch_add(kChunk);
      if (begin >= opt.samples) return;
      const std::uint64_t end = std::min(opt.samples, begin + kChunk);
      for (std::uint64_t i = begin; i < end; ++i) out[i] = detail::draw(p, prop, rho, opt, i);
      done.fetch_add(end - begin);
    }
  };

  if (T == 1 && !opt.progress) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < T; ++t) pool.emplace_back(worker);
    if (opt.progress && opt.progress_every > 0) {
      // The coordinating thread samples too; progress is reported between its chunks.
      std::uint64_t reported = 0;
      for (;;) {
        const std::uint64_t begin = next.fetch_add(kChunk);
        if (begin >= opt.samples) break;
        const std::uint64_t end = std::min(opt.samples, begin + kChunk);
        for (std::uint64_t i = begin; i < end; ++i) out[i] = detail::draw(p, prop, rho, opt, i);
        done.fetch_add(end - begin);
        const std::uint64_t d = done.load();
        if (d >= reported + opt.progress_every) {
          reported = d;
          opt.progress(d, opt.samples);
        }
      }
    } else {
      worker();
    }
    for (auto& th : pool) th.join();
  }

  // Reduction in index order, so the result does not depend on the thread count.
  VolumeEstimate est;
  est.method = VolumeMethod::mc_rejection;
  est.rho = rho;
  est.seed = opt.seed;
  est.samples = opt.samples;
  est.params_hash = p.digest();
  est.proposal_volume = prop.total();
  double sum = 0.0, sum2 = 0.0;
  for (const auto& s : out) {
    const double f = detail::inside(s.verdict) ? s.weight : 0.0;
    sum += f;
    sum2 += f * f;
    using V = detail::Verdict;
    switch (s.verdict) {
      case V::out_height: ++est.rejected_height; break;
      case V::out_projection: ++est.rejected_projection; break;
      case V::out_block: ++est.rejected_block; break;
      case V::out_envelope: ++est.rejected_envelope; break;
      case V::in_upper: ++est.accepted_upper; break;
      case V::out_roulette: ++est.skipped_roulette; break;
      case V::in_shot:
      case V::out_shot: ++est.distance_calls; break;
      case V::failed:
        ++est.distance_calls;
        ++est.distance_failures;
        break;
    }
  }
  const double m = static_cast<double>(opt.samples);
  const double mean = sum / m;
  est.value = mean;
  est.std_error = std::sqrt(std::max(0.0, (sum2 / m - mean * mean) / (m - 1)));
  est.flagged = est.distance_calls > 0 &&
                static_cast<double>(est.distance_failures) > 0.01 * static_cast<double>(est.distance_calls);
  return est;
}

inline VolumeEstimate ball_volume_mc(const MetricParams& p, double rho, std::uint64_t samples,
                                     std::uint64_t seed = kDefaultSeed, int restarts = 0) {
  MonteCarloOptions opt;
  opt.samples = samples;
  opt.seed = seed;
  opt.restarts = restarts;
  return ball_volume_mc(p, rho, opt);
}

}  // namespace solvgeo
