#pragma once

// Deterministic random and quasi-random streams. Every draw is a pure function of
// (seed, sample index, draw counter), so any partition of the index range over workers
// reproduces the same numbers.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace solvgeo {

inline constexpr std::uint64_t kDefaultSeed = 0xC0FFEE;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based stream keyed by (seed, index).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t index) : key_(splitmix64(seed ^ splitmix64(index + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t next_u64() { return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * (++counter_)); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    // Box-Muller without caching the second variate; keeps draws index-aligned.
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::vector<double> unit_vector(std::size_t n) {
    std::vector<double> v(n);
    double s = 0.0;
    do {
      s = 0.0;
      for (double& c : v) {
        c = normal();
        s += c * c;
      }
    } while (s == 0.0);
    s = std::sqrt(s);
    for (double& c : v) c /= s;
    return v;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Inverse standard normal CDF: Acklam's rational approximation with one Halley refinement.
inline double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("inverse_normal_cdf: p must be in (0, 1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= 1 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2 * std::numbers::pi) * std::exp(x * x / 2);
  return x - u / (1 + x * u / 2);
}

inline double radical_inverse(std::uint64_t i, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

// Halton points with a Cranley-Patterson shift derived from the seed.
class HaltonSequence {
 public:
  HaltonSequence(std::size_t dims, std::uint64_t seed) : dims_(dims), shift_(dims) {
    static constexpr std::array<unsigned, 16> primes = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
    if (dims > primes.size()) throw std::invalid_argument("HaltonSequence: too many dimensions");
    bases_.assign(primes.begin(), primes.begin() + static_cast<std::ptrdiff_t>(dims));
    CounterRng rng(seed, 0xA17);
    for (double& s : shift_) s = rng.uniform();
  }

  std::vector<double> point(std::uint64_t index) const {
    std::vector<double> u(dims_);
    for (std::size_t k = 0; k < dims_; ++k) {
      double v = radical_inverse(index + 1, bases_[k]) + shift_[k];
      u[k] = v - std::floor(v);
    }
    return u;
  }

 private:
  std::size_t dims_;
  std::vector<unsigned> bases_;
  std::vector<double> shift_;
};

// Low-discrepancy points on the unit sphere S^{n-1} in R^n. Area-preserving maps for
// n = 2, 3; Gaussian inversion and normalization otherwise.
class SphereSequence {
 public:
  SphereSequence(std::size_t n, std::uint64_t seed) : n_(n), halton_(n == 2 ? 1 : (n == 3 ? 2 : n), seed) {
    if (n < 1) throw std::invalid_argument("SphereSequence: dimension must be >= 1");
  }

  std::vector<double> point(std::uint64_t index) const {
    const auto u = halton_.point(index);
    std::vector<double> v(n_);
    if (n_ == 1) {
      v[0] = u[0] < 0.5 ? -1.0 : 1.0;
    } else if (n_ == 2) {
      const double t = 2 * std::numbers::pi * u[0];
      v[0] = std::cos(t);
      v[1] = std::sin(t);
    } else if (n_ == 3) {
      const double z = 2 * u[0] - 1;
      const double r = std::sqrt(std::max(0.0, 1 - z * z));
      const double t = 2 * std::numbers::pi * u[1];
      v[0] = r * std::cos(t);
      v[1] = r * std::sin(t);
      v[2] = z;
    } else {
      double s = 0.0;
      for (std::size_t k = 0; k < n_; ++k) {
        const double q = std::clamp(u[k], 1e-15, 1 - 1e-15);
        v[k] = inverse_normal_cdf(q);
        s += v[k] * v[k];
      }
      s = std::sqrt(s);
      for (double& c : v) c /= s;
    }
    return v;
  }

 private:
  std::size_t n_;
  HaltonSequence halton_;
};

}  // namespace solvgeo
