#pragma once

// Distance from the origin by geodesic shooting.
//
// Unknown: the initial coordinate velocity w of a geodesic run over s in [0, 1], so |w| is its
// length. The endpoint's sensitivity to w comes from the variational equations integrated
// next to the geodesic; the residual is measured in the frame at the target.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "solvgeo/geodesics.hpp"
#include "solvgeo/hyperbolic.hpp"
#include "solvgeo/metric.hpp"
#include "solvgeo/ode.hpp"
#include "solvgeo/sampling.hpp"

namespace solvgeo {

enum class DistanceStatus { converged, upper_bound_only, failed };

inline const char* to_string(DistanceStatus s) {
  switch (s) {
    case DistanceStatus::converged: return "converged";
    case DistanceStatus::upper_bound_only: return "upper_bound_only";
    case DistanceStatus::failed: return "failed";
  }
  return "?";
}

struct DistanceResult {
  double value = std::numeric_limits<double>::infinity();
  std::vector<double> direction;  // unit frame vector at the origin
  double residual = std::numeric_limits<double>::infinity();
  DistanceStatus status = DistanceStatus::failed;
  int restarts_used = 0;
};

struct ShootingConfig {
  IntegratorConfig integrator{1e-11, 1e-11};
  double tolerance = 1e-9;  // frame-scaled endpoint error
  int max_iterations = 60;
  // Mixed-sign only: stop searching once a branch of length <= stop_below is found.
  double stop_below = -1.0;
  // Mixed-sign only: how many staircase continuations to run (< 0: all), and whether the
  // log-model heuristic start is tried after them.
  int staircase_starts = -1;
  bool heuristic_start = true;
};

namespace detail {

// Solves A x = b in place (A row-major n x n) by partial pivoting. False if singular.
inline bool solve_dense(std::vector<double>& A, std::vector<double>& b, std::size_t n) {
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r * n + c]) > std::abs(A[piv * n + c])) piv = r;
    if (!(std::abs(A[piv * n + c]) > 1e-300)) return false;
    if (piv != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(A[c * n + k], A[piv * n + k]);
      std::swap(b[c], b[piv]);
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = A[r * n + c] / A[c * n + c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) A[r * n + k] -= f * A[c * n + k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t c = n; c-- > 0;) {
    double s = b[c];
    for (std::size_t k = c + 1; k < n; ++k) s -= A[c * n + k] * b[k];
    b[c] = s / A[c * n + c];
    if (!std::isfinite(b[c])) return false;
  }
  return true;
}

inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  return std::sqrt(s);
}

}  // namespace detail

// Geodesic plus its first variation with respect to the initial velocity w.
// State: (x_1..x_N, z, z') followed by S = d(state)/dw, (N+2) x (N+1) row-major.
class ShootingFlow {
 public:
  explicit ShootingFlow(const MetricParams& p) : p_(&p), N_(p.horizontal_dim()), n_(N_ + 1), e_(N_) {}

  std::size_t state_size() const { return (N_ + 2) * (n_ + 1); }
  void set_constants(std::span<const double> w) { C_.assign(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(N_)); }

  void operator()(double, std::span<const double> y, std::span<double> dy) {
    const std::size_t N = N_, n = n_;
    const double z = y[N];
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double a = p_->rate(i);
      e_[i] = std::exp(2.0 * a * z);
      dy[i] = C_[i] * e_[i];
      acc += a * C_[i] * C_[i] * e_[i];
    }
    dy[N] = y[N + 1];
    dy[N + 1] = -acc;

    double curv = 0.0;  // d(-acc)/dz = -sum 2 a_i^2 C_i^2 e_i
    for (std::size_t i = 0; i < N; ++i) {
      const double a = p_->rate(i);
      curv -= 2.0 * a * a * C_[i] * C_[i] * e_[i];
    }
    const std::span<const double> S = y.subspan(N + 2);
    const std::span<double> dS = dy.subspan(N + 2);
    for (std::size_t k = 0; k < n; ++k) {
      const double Sz = S[N * n + k];
      for (std::size_t i = 0; i < N; ++i) {
        dS[i * n + k] = 2.0 * p_->rate(i) * C_[i] * e_[i] * Sz + (i == k ? e_[i] : 0.0);
      }
      dS[N * n + k] = S[(N + 1) * n + k];
      double v = curv * Sz;
      if (k < N) v -= 2.0 * p_->rate(k) * C_[k] * e_[k];
      dS[(N + 1) * n + k] = v;
    }
  }

  void initial_state(std::span<const double> w, std::span<double> y) const {
    std::fill(y.begin(), y.end(), 0.0);
    y[N_ + 1] = w[N_];
    y[N_ + 2 + (N_ + 1) * n_ + N_] = 1.0;  // dz'(0)/dw_{N+1}
  }

 private:
  const MetricParams* p_;
  std::size_t N_, n_;
  std::vector<double> C_;
  std::vector<double> e_;
};

// Newton solver for exp(w) = target with reusable buffers.
class GeodesicShooter {
 public:
  GeodesicShooter(const MetricParams& p, ShootingConfig cfg)
      : p_(&p), cfg_(cfg), N_(p.horizontal_dim()), n_(N_ + 1), flow_(p), dp_(flow_.state_size()),
        y_(flow_.state_size()) {
    cfg_.integrator.validate();
  }

  struct Outcome {
    bool converged = false;
    std::vector<double> w;
    double residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
  };

  // Endpoint residual F(w) (frame-scaled) and Jacobian dF/dw; false if integration fails.
  bool evaluate(std::span<const double> w, const Point& target, std::vector<double>& F, std::vector<double>& J) {
    flow_.set_constants(w);
    flow_.initial_state(w, y_);
    try {
      dp_.integrate(flow_, 0.0, 1.0, y_, cfg_.integrator, [&](const StepView& sv) {
        for (double a : p_->rates()) {
          if (std::abs(a * sv.y1[N_]) > kExponentGuard) {
            throw IntegrationError(IntegrationError::Kind::range, "shooting: exponent guard", sv.t1);
          }
        }
        return true;
      });
    } catch (const IntegrationError&) {
      return false;
    }
    F.resize(n_);
    J.resize(n_ * n_);
    const double zt = target.height();
    for (std::size_t i = 0; i < N_; ++i) {
      const double sc = std::exp(-p_->rate(i) * zt);
      F[i] = sc * (y_[i] - target[i]);
      for (std::size_t k = 0; k < n_; ++k) J[i * n_ + k] = sc * y_[N_ + 2 + i * n_ + k];
    }
    F[N_] = y_[N_] - zt;
    for (std::size_t k = 0; k < n_; ++k) J[N_ * n_ + k] = y_[N_ + 2 + N_ * n_ + k];
    for (double v : F)
      if (!std::isfinite(v)) return false;
    return true;
  }

  // Damped Newton from w0. Iterates with |w| > max_length are treated as failed trials.
  Outcome solve(const Point& target, std::vector<double> w0, double max_length) {
    Outcome out;
    std::vector<double> F, J, Ft, Jt, wt(n_), delta;
    std::vector<double> w = std::move(w0);
    if (!evaluate(w, target, F, J)) return out;
    double fn = detail::norm2(F);
    for (int it = 0; it < cfg_.max_iterations; ++it) {
      out.iterations = it;
      if (fn <= cfg_.tolerance) break;
      std::vector<double> A = J;
      delta.assign(F.begin(), F.end());
      for (double& d : delta) d = -d;
      if (!detail::solve_dense(A, delta, n_)) break;
      const double wn = detail::norm2(w);
      const double dn = detail::norm2(delta);
      const double cap = std::max(1.0, wn);
      if (dn > cap)
        for (double& d : delta) d *= cap / dn;
      double lambda = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 30; ++ls, lambda *= 0.5) {
        for (std::size_t k = 0; k < n_; ++k) wt[k] = w[k] + lambda * delta[k];
        if (detail::norm2(wt) > max_length) continue;
        if (!evaluate(wt, target, Ft, Jt)) continue;
        const double ftn = detail::norm2(Ft);
        if (ftn < (1.0 - 1e-4 * lambda) * fn) {
          w = wt;
          F.swap(Ft);
          J.swap(Jt);
          fn = ftn;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }
    out.residual = fn;
    out.converged = fn <= cfg_.tolerance;
    out.w = std::move(w);
    return out;
  }

 private:
  const MetricParams* p_;
  ShootingConfig cfg_;
  std::size_t N_, n_;
  ShootingFlow flow_;
  DormandPrince dp_;
  std::vector<double> y_;
};

// Lower bound on d(0, target): |z|, every 2D projection (x_i, z) in curvature -a_i^2, and the
// projection onto each block of equal rates (a hyperbolic space of higher dimension).
inline double distance_lower_bound(const MetricParams& p, const Point& target) {
  require_dim(target.dim(), p.dim(), "distance_lower_bound");
  const std::size_t N = p.horizontal_dim();
  const double z = target.height();
  double best = std::abs(z);
  for (std::size_t i = 0; i < N; ++i) {
    best = std::max(best, log_model_distance(p.rate(i), target[i] * target[i], 0.0, z));
  }
  for (std::size_t i = 0; i < N; ++i) {
    bool first = true;
    for (std::size_t j = 0; j < i; ++j) first = first && p.rate(j) != p.rate(i);
    if (!first) continue;
    double dx2 = 0.0;
    int members = 0;
    for (std::size_t j = i; j < N; ++j) {
      if (p.rate(j) == p.rate(i)) {
        dx2 += target[j] * target[j];
        ++members;
      }
    }
    if (members > 1) best = std::max(best, log_model_distance(p.rate(i), dx2, 0.0, z));
  }
  return best;
}

namespace detail {

// Length of the path that changes one horizontal coordinate at a time along 2D hyperbolic
// geodesics, in the given order, through intermediate heights h (h_0 = 0, h_N = z).
inline double staircase_length(const MetricParams& p, const Point& target, std::span<const std::size_t> order,
                               std::span<const double> h) {
  double len = 0.0;
  double prev = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double next = (k + 1 == order.size()) ? target.height() : h[k];
    const std::size_t i = order[k];
    len += log_model_distance(p.rate(i), target[i] * target[i], prev, next);
    prev = next;
  }
  return len;
}

template <class F>
double golden_min(F&& f, double lo, double hi, double& arg, int iters = 60) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < iters && b - a > 1e-12 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  arg = fc < fd ? c : d;
  return std::min(fc, fd);
}

}  // namespace detail

struct Staircase {
  double length = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> order;  // coordinates moved, in order; x_i = 0 ones are left out
  std::vector<double> heights;     // heights between moves (order.size() - 1 of them)
};

// Shortest staircase path for each coordinate order (all orders for up to 4 moving coordinates,
// otherwise the identity and its reverse), heights optimized by a coarse scan plus golden-section
// search, cycled over the heights. Sorted by length.
inline std::vector<Staircase> staircase_paths(const MetricParams& p, const Point& target) {
  require_dim(target.dim(), p.dim(), "staircase_paths");
  const std::size_t N = p.horizontal_dim();
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < N; ++i)
    if (target[i] != 0.0) active.push_back(i);

  std::vector<Staircase> out;
  if (active.empty()) {
    Staircase s;
    s.length = std::abs(target.height());
    out.push_back(s);
    return out;
  }

  auto optimize = [&](const std::vector<std::size_t>& ord) {
    const std::size_t m = ord.size();
    std::vector<double> h(m - 1);
    // Start each height where the horizontal move becomes cheap.
    for (std::size_t k = 0; k + 1 < m; ++k) {
      const double a = p.rate(ord[k]);
      const double x = std::abs(target[ord[k]]);
      h[k] = (a != 0.0 && std::abs(a) * x > 1.0) ? std::log(std::abs(a) * x) / a : 0.0;
    }
    double cur = detail::staircase_length(p, target, ord, h);
    for (int sweep = 0; sweep < 4 && !h.empty(); ++sweep) {
      const double before = cur;
      for (std::size_t k = 0; k < h.size(); ++k) {
        auto f = [&](double v) {
          const double keep = h[k];
          h[k] = v;
          const double L = detail::staircase_length(p, target, ord, h);
          h[k] = keep;
          return L;
        };
        const double W = cur;
        const int grid = 24;
        double bv = h[k], bf = cur;
        for (int g = 0; g <= grid; ++g) {
          const double v = h[k] - W + 2.0 * W * g / grid;
          const double fv = f(v);
          if (fv < bf) {
            bf = fv;
            bv = v;
          }
        }
        const double cell = 2.0 * W / grid;
        double arg = bv;
        const double fm = detail::golden_min(f, bv - cell, bv + cell, arg);
        if (fm < bf) {
          bf = fm;
          bv = arg;
        }
        h[k] = bv;
        cur = bf;
      }
      if (before - cur < 1e-12 * (1.0 + cur)) break;
    }
    out.push_back({cur, ord, h});
  };

  if (active.size() <= 4) {
    do {
      optimize(active);
    } while (std::next_permutation(active.begin(), active.end()));
  } else {
    optimize(active);
    std::reverse(active.begin(), active.end());
    optimize(active);
  }
  std::sort(out.begin(), out.end(), [](const Staircase& a, const Staircase& b) { return a.length < b.length; });
  return out;
}

// Upper bound on d(0, target): length of the shortest staircase path.
inline double distance_upper_bound(const MetricParams& p, const Point& target) {
  return staircase_paths(p, target).front().length;
}

namespace detail {

// Initial velocity (length = distance) of the geodesic to target in the constant-rate model
// with rate q, treating the horizontal part as a single direction.
inline std::vector<double> log_model_seed(const MetricParams& p, const Point& target, double q) {
  const std::size_t N = p.horizontal_dim();
  std::vector<double> w(N + 1, 0.0);
  double r2 = 0.0;
  for (std::size_t i = 0; i < N; ++i) r2 += target[i] * target[i];
  const double r = std::sqrt(r2);
  const double z = target.height();
  const double len = log_model_distance(q, r2, 0.0, z);
  if (len == 0.0) return w;
  if (r == 0.0) {
    w[N] = z;
    return w;
  }
  double ux, uz;
  if (q == 0.0) {
    ux = r;
    uz = z;
  } else {
    // Half-plane picture for |q|: the geodesic is a circle centred on the boundary at c.
    const double s = q > 0 ? 1.0 : -1.0;
    const double aq = std::abs(q);
    const double y1 = 1.0 / aq;
    const double y2 = std::exp(aq * s * z) / aq;
    const double c = (r2 + y2 * y2 - y1 * y1) / (2.0 * r);
    ux = y1;
    uz = s * c;
  }
  const double un = std::hypot(ux, uz);
  for (std::size_t i = 0; i < N; ++i) w[i] = len * ux / un * target[i] / r;
  w[N] = len * uz / un;
  return w;
}

// Tracks a geodesic from the first corner of a staircase, where the plane hyperbolic geodesic
// is an exact solution, to the target while the target slides along the remaining legs
// (straight lines in half-plane coordinates of each leg).
inline GeodesicShooter::Outcome continuation_solve(const MetricParams& p, GeodesicShooter& shooter,
                                                   const Point& target, const Staircase& st, double max_length) {
  const std::size_t m = st.order.size();
  GeodesicShooter::Outcome fail;
  if (m == 0) return fail;
  std::vector<double> cur(p.dim(), 0.0);
  cur[st.order[0]] = target[st.order[0]];
  cur.back() = m == 1 ? target.height() : st.heights[0];
  const Point first(cur);
  auto o = shooter.solve(first, log_model_seed(p, first, p.rate(st.order[0])), max_length);
  if (!o.converged) return o;

  for (std::size_t k = 1; k < m; ++k) {
    const std::size_t i = st.order[k];
    const double a = p.rate(i);
    const double x0 = cur[i], x1 = target[i];
    const double z0 = cur.back(), z1 = (k + 1 == m) ? target.height() : st.heights[k];
    // Half-plane height Y = exp(a z) is linear along the leg's straight chord.
    auto at = [&](double tau) {
      std::vector<double> q = cur;
      q[i] = x0 + tau * (x1 - x0);
      if (a == 0.0) {
        q.back() = z0 + tau * (z1 - z0);
      } else {
        const double y0 = std::exp(a * z0), y1 = std::exp(a * z1);
        q.back() = std::log(y0 + tau * (y1 - y0)) / a;
      }
      return Point(std::move(q));
    };
    double tau = 0.0, step = 0.25;
    while (tau < 1.0) {
      const double next = std::min(1.0, tau + step);
      auto trial = shooter.solve(at(next), o.w, max_length);
      if (trial.converged) {
        o = std::move(trial);
        tau = next;
        step = std::min(0.5, 2.0 * step);
      } else {
        step *= 0.25;
        if (step < 1e-3) return trial;
      }
    }
    cur[i] = x1;
    cur.back() = z1;
  }
  return o;
}

}  // namespace detail

// d(0, target) by multi-start shooting. restarts < 0 selects the default budget: 1 for one-signed
// rates (unique geodesics), 32 otherwise. Starts, in order: for one-signed rates the log-model
// heuristic, then continuation along the shortest staircase; for mixed signs continuation along
// each staircase, then the heuristic; finally `restarts` low-discrepancy directions.
inline DistanceResult distance(const MetricParams& p, const Point& target, const ShootingConfig& cfg = {},
                               int restarts = -1, std::uint64_t seed = kDefaultSeed) {
  require_dim(target.dim(), p.dim(), "distance");
  const std::size_t N = p.horizontal_dim();
  const std::size_t n = N + 1;
  const bool unique = p.one_signed();
  if (restarts < 0) restarts = unique ? 1 : 32;

  DistanceResult res;
  res.direction.assign(n, 0.0);
  const double lower = distance_lower_bound(p, target);
  if (lower == 0.0) {
    res.value = 0.0;
    res.residual = 0.0;
    res.status = DistanceStatus::converged;
    res.direction.back() = 1.0;
    return res;
  }
  const auto stairs = staircase_paths(p, target);
  const double upper = stairs.front().length;
  const double max_length = 2.0 * upper + 2.0;

  GeodesicShooter shooter(p, cfg);
  double best_fail = std::numeric_limits<double>::infinity();
  bool found = false;
  std::vector<double> best_w;
  int starts = 0;

  auto accept = [&](const GeodesicShooter::Outcome& o) {
    ++starts;
    if (!o.converged) {
      best_fail = std::min(best_fail, o.residual);
      return;
    }
    const double len = detail::norm2(o.w);
    if (!found || len < res.value) {
      found = true;
      res.value = len;
      res.residual = o.residual;
      best_w = o.w;
    }
  };
  auto done = [&] {
    if (!found) return false;
    return unique || (cfg.stop_below >= 0.0 && res.value <= cfg.stop_below);
  };

  const double mean_rate = p.trace() / static_cast<double>(N);
  if (unique) {
    accept(shooter.solve(target, detail::log_model_seed(p, target, mean_rate), max_length));
    if (!done()) accept(detail::continuation_solve(p, shooter, target, stairs.front(), max_length));
  } else {
    int tried = 0;
    for (const auto& st : stairs) {
      if (done() || (cfg.staircase_starts >= 0 && tried >= cfg.staircase_starts)) break;
      ++tried;
      accept(detail::continuation_solve(p, shooter, target, st, max_length));
    }
    if (!done() && cfg.heuristic_start) {
      accept(shooter.solve(target, detail::log_model_seed(p, target, mean_rate), max_length));
    }
  }
  const SphereSequence sphere(n, seed);
  for (int k = 0; k < restarts && !done(); ++k) {
    auto u = sphere.point(static_cast<std::uint64_t>(k));
    const double scale = (k % 2 == 0) ? lower : 0.5 * (lower + upper);
    // Coordinate velocity at the origin equals the frame velocity there.
    for (double& c : u) c *= scale;
    accept(shooter.solve(target, std::move(u), max_length));
  }
  res.restarts_used = std::max(0, starts - 1);
  if (!found) {
    res.residual = best_fail;
    res.status = DistanceStatus::failed;
    return res;
  }
  res.status = unique ? DistanceStatus::converged : DistanceStatus::upper_bound_only;
  for (std::size_t k = 0; k < n; ++k) res.direction[k] = best_w[k] / res.value;
  return res;
}

}  // namespace solvgeo
