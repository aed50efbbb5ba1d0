// Shooting distance against the half-plane formula in (R^2, g_(1)).
#include <cstdio>
#include <vector>

#include "solvgeo/solvgeo.hpp"

int main() {
  using namespace solvgeo;
  const MetricParams h({1.0});
  for (const auto& t : std::vector<std::vector<double>>{{2, -0.5}, {0.3, 1.2}, {-4, 2}}) {
    const auto r = distance(h, Point(t));
    const double exact = hyperbolic_distance_2d(1.0, std::vector<double>{0, 0}, t);
    std::printf("target (%g, %g): shooting %.15f  closed form %.15f  status %s\n", t[0], t[1], r.value, exact,
                to_string(r.status));
  }
}
