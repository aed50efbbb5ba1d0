// Ball volume in SOL at a few radii: Monte Carlo estimate next to the numeric bounds.
#include <cstdio>

#include "solvgeo/solvgeo.hpp"

int main() {
  using namespace solvgeo;
  const MetricParams sol({1.0, -1.0});
  std::printf("%6s %14s %12s %14s %14s\n", "rho", "volume", "std_error", "lower", "upper");
  for (double rho : {1.0, 2.0, 3.0}) {
    const auto e = ball_volume_mc(sol, rho, 5000);
    const auto b = volume_bounds(sol, rho);
    std::printf("%6.2f %14.6g %12.3g %14.6g %14.6g\n", rho, e.value, e.std_error, b.lower, b.upper);
  }
  std::printf("entropy (closed form): %g\n", entropy_exact(sol));
}
