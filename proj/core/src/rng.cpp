#include "es1p1/rng.hpp"

#include <cmath>
#include <numbers>

namespace es {

double Rng::normal() {
    if (has_spare) {
        has_spare = false;
        return spare;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare = r * std::sin(a);
    has_spare = true;
    return r * std::cos(a);
}

}  // namespace es
