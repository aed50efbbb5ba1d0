// Writes a unit-speed geodesic of g_(1,-1) from the origin as CSV on stdout.
#include <cmath>
#include <iostream>

#include "solvgeo/solvgeo.hpp"

int main() {
  using namespace solvgeo;
  const MetricParams p({1.0, -1.0});
  const auto v = Tangent::from_frame(p, Point::origin(3), {0.6, 0.0, 0.8});
  const auto states = trace(p, v, 10.0, 0.25);
  write_trace_csv(std::cout, p, states);

  // The first integrals x_i' e^{-2 a_i z} stay put along the curve.
  const auto c0 = states.front().integrals(p), c1 = states.back().integrals(p);
  std::cerr << "C drift: " << std::abs(c1[0] - c0[0]) << " " << std::abs(c1[1] - c0[1]) << "\n";
}
