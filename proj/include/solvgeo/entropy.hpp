#pragma once

// Closed-form volume entropy and the log-linear fit used to measure it from volumes.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "solvgeo/metric.hpp"

namespace solvgeo {

// max(sum of positive rates, sum of |negative rates|). Each sum runs in sorted order so the result
// is bit-identical under permutations and a -> -a.
inline double entropy_exact(std::span<const double> a) {
  std::vector<double> pos, neg;
  for (double v : a) (v >= 0 ? pos : neg).push_back(std::abs(v));
  auto sum = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  };
  return std::max(sum(pos), sum(neg));
}

inline double entropy_exact(const MetricParams& p) { return entropy_exact(p.rates()); }

// Entropy of the family a = (1, -alpha).
inline double sol_interpolation_entropy(double alpha) {
  const double a[2] = {1.0, -alpha};
  return entropy_exact(std::span<const double>(a, 2));
}

// The same family written piecewise: 1 - alpha below 0, 1 on [0, 1], alpha above 1.
inline double sol_interpolation_piecewise(double alpha) {
  if (alpha < 0.0) return 1.0 - alpha;
  if (alpha <= 1.0) return 1.0;
  return alpha;
}

class NotHeintzeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr double kHeintzeTolerance = 1e-9;

// Sum of the real parts of the eigenvalues of A after checking that A is diagonalizable with
// spectrum in the open right half-plane.
inline double heintze_entropy(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols() || A.rows() == 0) throw std::invalid_argument("heintze_entropy: need a square matrix");
  if (!A.allFinite()) throw std::invalid_argument("heintze_entropy: non-finite entry");
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, true);
  if (es.info() != Eigen::Success) throw std::runtime_error("heintze_entropy: eigenvalue iteration failed");
  const auto ev = es.eigenvalues();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (!(ev[i].real() > kHeintzeTolerance)) {
      throw NotHeintzeError("not a Heintze derivation: eigenvalue with real part " + std::to_string(ev[i].real()));
    }
    sum += ev[i].real();
  }
  // Nearly parallel eigenvectors mean a nontrivial Jordan block.
  const Eigen::MatrixXcd V = es.eigenvectors();
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(V);
  const auto& sv = svd.singularValues();
  const double cond = sv(0) / sv(sv.size() - 1);
  if (!std::isfinite(cond) || cond > 1e8) throw NotHeintzeError("not diagonalizable within tolerance");
  return sum;
}

inline double horospherical_product_entropy(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  return std::max(heintze_entropy(A), heintze_entropy(B));
}

struct FitPoint {
  double rho = 0.0;
  double value = 0.0;
  double std_error = 0.0;
};

struct EntropyFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_error = 0.0;
  double rho_lo = 0.0, rho_hi = 0.0;
  int points_used = 0;
  double r_squared = 0.0;
  std::vector<FitPoint> window;    // points inside the fit window
  std::vector<double> residuals;   // log(value) - (intercept + slope rho), per window point
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ordinary least squares of log(value) on rho over the top window_fraction of the rho range.
inline EntropyFit entropy_fit(const std::vector<FitPoint>& samples, double window_fraction = 0.4) {
  if (samples.size() < 3) throw FitError("entropy_fit: need at least 3 samples");
  if (!(window_fraction > 0.0 && window_fraction <= 1.0)) throw FitError("entropy_fit: window fraction must be in (0, 1]");
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].rho > samples[i - 1].rho)) throw FitError("entropy_fit: rho values must be strictly increasing");
  }
  const double lo_all = samples.front().rho, hi = samples.back().rho;
  // Small slack so grid points that land on the window edge are kept despite rounding.
  const double lo = hi - window_fraction * (hi - lo_all) - 1e-9 * (1.0 + std::abs(hi));

  EntropyFit fit;
  for (const auto& s : samples) {
    if (s.rho < lo) continue;
    if (!(s.value > 0.0) || !std::isfinite(s.value)) throw FitError("entropy_fit: non-positive volume in fit window");
    fit.window.push_back(s);
  }
  const std::size_t n = fit.window.size();
  if (n < 3) throw FitError("entropy_fit: fewer than 3 points in the fit window");

  double mx = 0.0, my = 0.0;
  for (const auto& s : fit.window) {
    mx += s.rho;
    my += std::log(s.value);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& s : fit.window) {
    const double dx = s.rho - mx, dy = std::log(s.value) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (const auto& s : fit.window) {
    const double r = std::log(s.value) - (fit.intercept + fit.slope * s.rho);
    fit.residuals.push_back(r);
    ssr += r * r;
  }
  fit.slope_std_error = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
  fit.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  fit.points_used = static_cast<int>(n);
  fit.rho_lo = fit.window.front().rho;
  fit.rho_hi = fit.window.back().rho;
  if (!std::isfinite(fit.slope)) throw FitError("entropy_fit: slope is not finite");
  return fit;
}

}  // namespace solvgeo
