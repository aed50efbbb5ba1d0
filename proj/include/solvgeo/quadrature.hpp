#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace solvgeo {

namespace detail {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
inline constexpr std::array<double, 8> kXgk = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                               0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                               0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                               0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                               0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                               0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                               0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                              0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
void gk15(F& f, double a, double b, double& integral, double& error) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    kron += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  integral = kron * h;
  error = std::abs((kron - gauss) * h);
}

template <class F>
double adaptive(F& f, double a, double b, double whole, double err, double rel_tol, double abs_floor, int depth) {
  if (err <= std::max(rel_tol * std::abs(whole), abs_floor) || depth >= 50) return whole;
  const double m = 0.5 * (a + b);
  double il, el, ir, er;
  gk15(f, a, m, il, el);
  gk15(f, m, b, ir, er);
  return adaptive(f, a, m, il, el, rel_tol, 0.5 * abs_floor, depth + 1) +
         adaptive(f, m, b, ir, er, rel_tol, 0.5 * abs_floor, depth + 1);
}

}  // namespace detail

// Adaptive Gauss-Kronrod quadrature of f over [a, b] to relative tolerance rel_tol.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-10) {
  if (a == b) return 0.0;
  if (b < a) return -integrate(f, b, a, rel_tol);
  double whole, err;
  detail::gk15(f, a, b, whole, err);
  const double floor = 1e-300;
  return detail::adaptive(f, a, b, whole, err, rel_tol, floor, 0);
}

// Volume of the round unit N-sphere S^N in R^{N+1}: 2 pi^{(N+1)/2} / Gamma((N+1)/2).
inline double sphere_volume(std::size_t N) {
  const double k = 0.5 * static_cast<double>(N + 1);
  return 2.0 * std::pow(std::numbers::pi, k) / std::tgamma(k);
}

}  // namespace solvgeo
