#pragma once
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace biphoton {

// Canonical internal units: time in fs, length in nm, angle in rad.
// 299 792 458 m/s exactly, expressed as nm/fs.
inline constexpr double kSpeedOfLightNmPerFs = 299.792458;

// 2*sqrt(2*ln 2): ratio between an intensity FWHM and the RMS width of the
// corresponding field envelope exp(-t^2/(4 sigma^2)).
inline constexpr double kFwhmOverSigma = 2.3548200450309493;

/// Propagation delay (fs) of an optical path length given in micrometers.
inline double delay_from_length_um(double length_um) {
    if (!std::isfinite(length_um))
        throw std::invalid_argument("delay_from_length: length must be finite");
    return length_um * 1000.0 / kSpeedOfLightNmPerFs;
}

/// Propagation delay (fs) of an optical path length given in nanometers.
inline double delay_from_length_nm(double length_nm) {
    if (!std::isfinite(length_nm))
        throw std::invalid_argument("delay_from_length: length must be finite");
    return length_nm / kSpeedOfLightNmPerFs;
}

/// Angular carrier frequency (rad/fs) of a vacuum wavelength in nm.
inline double carrier_omega(double wavelength_nm) {
    if (!(wavelength_nm > 0.0))
        throw std::invalid_argument("carrier_omega: wavelength must be positive");
    return 2.0 * std::numbers::pi * kSpeedOfLightNmPerFs / wavelength_nm;
}

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace biphoton
