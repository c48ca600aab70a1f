#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "qoct/types.hpp"

namespace qoct::forward {

struct SimulationRequest {
    SourceSpec source;
    LayeredObject object;
    DetectionSpec detection;
    double reference_delay_um = 0.0; // reference arm offset as one-way optical path
    SpectralGrid grid;               // wavelength grid, used for both axes
    double integration_time_s = 1.0;
    std::optional<std::uint64_t> seed;

    void validate() const;
};

struct TimeDomainTrace {
    std::vector<double> stage_positions_um;
    std::vector<double> coincidence_rate;

    void validate() const;
};

struct ClassicalSpectrum {
    SpectralGrid grid;
    std::vector<double> intensity;

    void validate() const;
};

struct ClassicalSource {
    double center_nm = 1550.0;
    double fwhm_nm = 63.0;
    double reference_reflectivity = 1.0;
};

// Complex object reflectance H(nu) = sum_k r_k exp(i [2 pi 2 nu z_k / c + psi_k(nu)])
// with psi_k the dispersion phase accumulated over the gaps in front of
// interface k (two passes each), plus the global arm-imbalance phase.
std::complex<double> object_transfer(const LayeredObject& object, double nu_thz);

// Normalised (max 1) two-photon spectral envelope on grid x grid:
//   exp(-4 ln2 (nu1+nu2-2nu0)^2 / dnu_a^2) * exp(-4 ln2 (nu1-nu2)^2 / (2 dnu_d)^2)
// A warning is attached when the envelope exceeds 0.5 at the grid edge.
JointSpectrum joint_envelope(const SourceSpec& source, const SpectralGrid& grid);

// Pointwise expected coincidence rate before detection effects; the closed
// form the grid simulation samples, exposed so tests can probe off-grid
// frequency pairs:
//   env * [|H(nu1)|^2 + |H(nu2)|^2 - 2 V Re{H(nu1) H*(nu2) e^{-i 2 pi (nu1-nu2) tau}}] / 4
double coincidence_rate(const SourceSpec& source, const LayeredObject& object,
                        double reference_delay_um, double nu1_thz, double nu2_thz);

// Expected counts on the grid: rate * pair_rate, pump-leak line added,
// blurred per axis with the detection's Gaussian spectral-resolution kernel,
// accidental floor added, scaled by integration time.
JointSpectrum simulate_joint_spectrum(const SimulationRequest& request);

// Coincidence totals versus reference stage position. Each noise-free point
// equals the sum of simulate_joint_spectrum over the full grid at that
// delay; with a seed the totals are Poisson sampled per point.
TimeDomainTrace simulate_time_domain(const SourceSpec& source, const LayeredObject& object,
                                     const DetectionSpec& detection, const SpectralGrid& grid,
                                     const std::vector<double>& stage_positions_um,
                                     double integration_time_s,
                                     std::optional<std::uint64_t> seed = std::nullopt);

// Classical OCT fringes S(nu) = S0(nu) |r_ref + H(nu) e^{-i 2 pi nu tau}|^2.
ClassicalSpectrum simulate_classical_fringes(const ClassicalSource& source, const LayeredObject& object,
                                             double reference_delay_um, const SpectralGrid& grid);

// Independent Poisson sample per bin, keyed by (seed, flat bin index).
JointSpectrum apply_shot_noise(const JointSpectrum& js, std::uint64_t seed);

} // namespace qoct::forward
