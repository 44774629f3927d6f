#pragma once

namespace pdwsim {

/// Wraps an angle into [-180, +180] degrees. The result is congruent to the
/// input modulo 360 and exact (no rounding from the reduction itself).
/// +180 stays +180 and -180 stays -180; other inputs land on whichever end
/// the IEEE remainder picks. Throws std::invalid_argument on NaN or infinity.
double normalize_angle(double deg);

/// Absolute angular separation in [0, 180].
double angular_offset(double a_deg, double b_deg);

}  // namespace pdwsim
