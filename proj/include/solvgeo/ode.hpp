#pragma once

// Dormand-Prince 5(4) with PI step-size control and cubic Hermite dense output.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace solvgeo {

struct IntegratorConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
  long max_steps = 200000;

  void validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw std::invalid_argument("IntegratorConfig: tolerances must be > 0");
    if (!(max_step > 0.0)) throw std::invalid_argument("IntegratorConfig: max_step must be > 0");
    if (max_steps <= 0) throw std::invalid_argument("IntegratorConfig: max_steps must be > 0");
  }
};

class IntegrationError : public std::runtime_error {
 public:
  enum class Kind { max_steps, non_finite, step_underflow, range };

  IntegrationError(Kind kind, const std::string& what, double t_reached)
      : std::runtime_error(what), kind_(kind), t_reached_(t_reached) {}

  Kind kind() const { return kind_; }
  double t_reached() const { return t_reached_; }

 private:
  Kind kind_;
  double t_reached_;
};

struct IntegrationStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_calls = 0;
};

// One accepted step, enough for Hermite interpolation on [t0, t1].
struct StepView {
  double t0, t1;
  std::span<const double> y0, f0, y1, f1;

  // Cubic Hermite interpolant at t in [t0, t1], written into out.
  void interpolate(double t, std::span<double> out) const {
    const double h = t1 - t0;
    const double s = (t - t0) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
    }
  }
};

class DormandPrince {
 public:
  explicit DormandPrince(std::size_t n)
      : n_(n), k1_(n), k2_(n), k3_(n), k4_(n), k5_(n), k6_(n), k7_(n), ytmp_(n), ynew_(n), yold_(n) {}

  std::size_t size() const { return n_; }

  // Integrates y' = f(t, y) from t0 to t1 (t1 >= t0) in place. The observer is called after
  // every accepted step with a StepView; returning false from it stops early. Throws
  // IntegrationError on step-count exhaustion or a non-finite state.
  template <class Rhs, class Observer>
  IntegrationStats integrate(Rhs&& f, double t0, double t1, std::span<double> y, const IntegratorConfig& cfg,
                             Observer&& observe) {
    return integrate(std::forward<Rhs>(f), t0, t1, y, cfg, std::forward<Observer>(observe),
                     [](std::span<double>) { return false; });
  }

  // As above, with project(y) applied to every accepted state before the observer sees it.
  // It returns true when it changed y, in which case the derivative at the new point is
  // re-evaluated.
  template <class Rhs, class Observer, class Projector>
  IntegrationStats integrate(Rhs&& f, double t0, double t1, std::span<double> y, const IntegratorConfig& cfg,
                             Observer&& observe, Projector&& project) {
    IntegrationStats stats;
    if (y.size() != n_) throw std::invalid_argument("DormandPrince: state size mismatch");
    if (t1 < t0) throw std::invalid_argument("DormandPrince: t1 < t0");
    if (t1 == t0) return stats;

    double t = t0;
    f(t, std::span<const double>(y), std::span<double>(k1_));
    ++stats.rhs_calls;
    double h = initial_step(t1 - t0, y, cfg);
    double err_old = 1e-4;
    bool last_rejected = false;

    while (t < t1) {
      if (stats.accepted + stats.rejected >= cfg.max_steps) {
        throw IntegrationError(IntegrationError::Kind::max_steps, "integrator: max_steps exceeded", t);
      }
      h = std::min(h, cfg.max_step);
      bool final_step = false;
      if (t + h >= t1 || t + 1.01 * h >= t1) {
        h = t1 - t;
        final_step = true;
      }
      if (h <= 1e-14 * std::max(1.0, std::abs(t))) {
        throw IntegrationError(IntegrationError::Kind::step_underflow, "integrator: step size underflow", t);
      }

      step(f, t, h, y);
      stats.rhs_calls += 6;
      const double err = error_norm(y, cfg);

      if (err <= 1.0) {
        for (std::size_t i = 0; i < n_; ++i) yold_[i] = y[i];
        for (std::size_t i = 0; i < n_; ++i) {
          if (!std::isfinite(ynew_[i])) {
            throw IntegrationError(IntegrationError::Kind::non_finite, "integrator: non-finite state", t);
          }
          y[i] = ynew_[i];
        }
        const double t_new = final_step ? t1 : t + h;
        if (project(y)) {
          f(t_new, std::span<const double>(y), std::span<double>(k7_));
          ++stats.rhs_calls;
        }
        StepView view{t, t_new, yold_, k1_, std::span<const double>(y), k7_};
        const bool keep_going = observe(view);
        ++stats.accepted;
        t = t_new;
        std::swap(k1_, k7_);  // FSAL
        if (!keep_going) break;

        double fac = 0.9 * std::pow(std::max(err, 1e-10), -kAlpha) * std::pow(err_old, kBeta);
        fac = std::clamp(fac, 0.2, 10.0);
        if (last_rejected) fac = std::min(fac, 1.0);
        h *= fac;
        err_old = std::max(err, 1e-4);
        last_rejected = false;
      } else {
        ++stats.rejected;
        const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -kAlpha)) : 0.2;
        h *= fac;
        last_rejected = true;
      }
    }
    return stats;
  }

  template <class Rhs>
  IntegrationStats integrate(Rhs&& f, double t0, double t1, std::span<double> y, const IntegratorConfig& cfg) {
    return integrate(std::forward<Rhs>(f), t0, t1, y, cfg, [](const StepView&) { return true; });
  }

 private:
  static constexpr double kBeta = 0.04;
  static constexpr double kAlpha = 0.2 - 0.75 * kBeta;

  double initial_step(double span, std::span<const double> y, const IntegratorConfig& cfg) const {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double sc = cfg.abs_tol + cfg.rel_tol * std::abs(y[i]);
      d0 += (y[i] / sc) * (y[i] / sc);
      d1 += (k1_[i] / sc) * (k1_[i] / sc);
    }
    d0 = std::sqrt(d0 / n_);
    d1 = std::sqrt(d1 / n_);
    double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min({h, span, cfg.max_step});
    // A conservative start; the controller grows it quickly.
    return std::max(h, 1e-8 * span);
  }

  template <class Rhs>
  void step(Rhs&& f, double t, double h, std::span<const double> y) {
    auto stage = [&](auto&& combine) {
      for (std::size_t i = 0; i < n_; ++i) ytmp_[i] = y[i] + h * combine(i);
    };
    stage([&](std::size_t i) { return a21 * k1_[i]; });
    f(t + c2 * h, std::span<const double>(ytmp_), std::span<double>(k2_));
    stage([&](std::size_t i) { return a31 * k1_[i] + a32 * k2_[i]; });
    f(t + c3 * h, std::span<const double>(ytmp_), std::span<double>(k3_));
    stage([&](std::size_t i) { return a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]; });
    f(t + c4 * h, std::span<const double>(ytmp_), std::span<double>(k4_));
    stage([&](std::size_t i) { return a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]; });
    f(t + c5 * h, std::span<const double>(ytmp_), std::span<double>(k5_));
    stage([&](std::size_t i) {
      return a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i];
    });
    f(t + h, std::span<const double>(ytmp_), std::span<double>(k6_));
    for (std::size_t i = 0; i < n_; ++i) {
      ynew_[i] = y[i] + h * (b1 * k1_[i] + b3 * k3_[i] + b4 * k4_[i] + b5 * k5_[i] + b6 * k6_[i]);
    }
    f(t + h, std::span<const double>(ynew_), std::span<double>(k7_));
    h_ = h;
  }

  double error_norm(std::span<const double> y, const IntegratorConfig& cfg) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double e = h_ * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] + e7 * k7_[i]);
      const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(ynew_[i]));
      const double r = e / sc;
      acc += r * r;
    }
    const double norm = std::sqrt(acc / n_);
    return std::isfinite(norm) ? norm : std::numeric_limits<double>::infinity();
  }

  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  // b - b* (fifth minus embedded fourth order weights)
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  std::size_t n_;
  std::vector<double> k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ynew_, yold_;
  double h_ = 0.0;
};

}  // namespace solvgeo
