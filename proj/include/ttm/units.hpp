#pragma once

// Conversion between spectroscopic units and the dimensionless units used
// internally (hbar = 1, energies in units of a reference coupling J).

namespace ttm::units {

/// k_B in cm^-1 per Kelvin.
inline constexpr double kBoltzmannWavenumber = 0.695034800;
/// Speed of light in cm per femtosecond.
inline constexpr double kSpeedOfLightCmPerFs = 2.99792458e-5;

class EnergyScale {
public:
    /// `reference_wavenumber` is J in cm^-1.
    explicit EnergyScale(double reference_wavenumber);

    double reference() const noexcept { return reference_; }
    double energy(double wavenumber) const noexcept { return wavenumber / reference_; }
    double beta_from_kelvin(double kelvin) const;
    /// Dimensionless time t*J (J as an angular frequency) from femtoseconds.
    double time_from_fs(double fs) const noexcept;
    double time_to_fs(double t) const noexcept;

private:
    double reference_;
};

}  // namespace ttm::units
