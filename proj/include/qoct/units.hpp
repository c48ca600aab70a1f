#pragma once

#include <cmath>
#include <stdexcept>

// Unit conventions used throughout the toolkit:
//   wavelengths  nm
//   frequencies  THz
//   times        ps
//   depths       um (one-way optical path in air)
// All conversions live here so no other module hard-codes c.

namespace qoct {

// c = 299 792 458 m/s expressed in the toolkit's unit pairs.
inline constexpr double kC_nm_thz = 299792.458; // nm * THz
inline constexpr double kC_um_ps = 299.792458;  // um / ps

inline double wavelength_to_frequency(double lambda_nm) {
    if (!(lambda_nm > 0.0))
        throw std::invalid_argument("wavelength_to_frequency: wavelength must be > 0 nm");
    return kC_nm_thz / lambda_nm;
}

inline double frequency_to_wavelength(double nu_thz) {
    if (!(nu_thz > 0.0))
        throw std::invalid_argument("frequency_to_wavelength: frequency must be > 0 THz");
    return kC_nm_thz / nu_thz;
}

// FWHM-style bandwidth conversions about a centre wavelength.
inline double bandwidth_nm_to_thz(double dlambda_nm, double lambda0_nm) {
    if (!(lambda0_nm > 0.0))
        throw std::invalid_argument("bandwidth_nm_to_thz: centre wavelength must be > 0");
    return kC_nm_thz * dlambda_nm / (lambda0_nm * lambda0_nm);
}

inline double bandwidth_thz_to_nm(double dnu_thz, double lambda0_nm) {
    if (!(lambda0_nm > 0.0))
        throw std::invalid_argument("bandwidth_thz_to_nm: centre wavelength must be > 0");
    return dnu_thz * lambda0_nm * lambda0_nm / kC_nm_thz;
}

// One-way depth <-> round-trip delay.
inline double depth_to_roundtrip_ps(double z_um) { return 2.0 * z_um / kC_um_ps; }
inline double roundtrip_ps_to_depth(double t_ps) { return 0.5 * t_ps * kC_um_ps; }

inline constexpr double kLn2 = 0.6931471805599453;
inline constexpr double kPi = 3.141592653589793;

// Gaussian FWHM <-> standard deviation.
inline double fwhm_to_sigma(double fwhm) { return fwhm / (2.0 * std::sqrt(2.0 * kLn2)); }
inline double sigma_to_fwhm(double sigma) { return sigma * (2.0 * std::sqrt(2.0 * kLn2)); }

} // namespace qoct
