#include <cmath>
#include <numbers>

#include "fivec/simulator.hpp"

namespace fivec {

double GridSpec::dk1() const { return 2.0 * std::numbers::pi / length1(); }
double GridSpec::dk2() const { return 2.0 * std::numbers::pi / length2(); }

Field3 make_field(const GridSpec& g) {
    Field3 f;
    for (auto& c : f) c.assign(g.cells(), 0.0);
    return f;
}

// Largest retained |k| is sqrt(2) * (2 pi / 3) / dx; velocity Verlet needs omega dt < 2.
double verlet_cfl_limit() { return 3.0 / (std::sqrt(2.0) * std::numbers::pi); }

}  // namespace fivec
