#include "pdwsim/angle.hpp"

#include <cmath>
#include <stdexcept>

namespace pdwsim {

double normalize_angle(double deg) {
    if (!std::isfinite(deg)) {
        throw std::invalid_argument("normalize_angle: non-finite angle");
    }
    // std::remainder is exact and lands in [-180, 180].
    const double r = std::remainder(deg, 360.0);
    return r == 0.0 ? 0.0 : r;
}

double angular_offset(double a_deg, double b_deg) {
    return std::fabs(normalize_angle(a_deg - b_deg));
}

}  // namespace pdwsim
