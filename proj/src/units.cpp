#include "ttm/units.hpp"

#include <numbers>

#include "ttm/errors.hpp"

namespace ttm::units {

EnergyScale::EnergyScale(double reference_wavenumber) : reference_(reference_wavenumber) {
    if (!(reference_ > 0.0)) {
        throw ValidationError("reference energy must be positive");
    }
}

double EnergyScale::beta_from_kelvin(double kelvin) const {
    if (!(kelvin > 0.0)) {
        throw ValidationError("temperature must be positive");
    }
    return reference_ / (kBoltzmannWavenumber * kelvin);
}

double EnergyScale::time_from_fs(double fs) const noexcept {
    return fs * 2.0 * std::numbers::pi * kSpeedOfLightCmPerFs * reference_;
}

double EnergyScale::time_to_fs(double t) const noexcept {
    return t / (2.0 * std::numbers::pi * kSpeedOfLightCmPerFs * reference_);
}

}  // namespace ttm::units
