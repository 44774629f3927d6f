#include "pdwsim/types.hpp"

#include <cmath>
#include <string>

#include "pdwsim/errors.hpp"

namespace pdwsim {

std::string_view to_string(ReceiverMode mode) {
    return mode == ReceiverMode::scan ? "scan" : "stare";
}

ReceiverMode parse_receiver_mode(std::string_view text) {
    if (text == "stare") return ReceiverMode::stare;
    if (text == "scan") return ReceiverMode::scan;
    throw ConfigError("unknown receiver mode '" + std::string(text) + "' (expected stare or scan)");
}

void LabeledPulseTrain::validate() const {
    if (labels.size() != pulses.size()) {
        throw ContractError("train has " + std::to_string(pulses.size()) + " pulses but " +
                            std::to_string(labels.size()) + " labels");
    }
    for (std::size_t i = 1; i < pulses.size(); ++i) {
        if (pulses[i].toa_us < pulses[i - 1].toa_us) {
            throw ContractError("train not sorted by toa at record " + std::to_string(i));
        }
    }
}

double distance_m(const Position& a, const Position& b) {
    return std::hypot(b.x_m - a.x_m, b.y_m - a.y_m);
}

}  // namespace pdwsim
