#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "qoct/forward.hpp"
#include "qoct/preprocess.hpp"
#include "qoct/types.hpp"

namespace qoct::reconstruct {

struct AScanOptions {
    bool dc_removal = true; // subtract the smoothed row-average baseline
    int pad_factor = 4;     // FFT zero padding
};

// Mask-aware row average -> baseline removal -> 1D Fourier magnitude ->
// positive-depth half with z = c t / 2.
AScan ascan_row_average(const preprocess::RotatedSpectrum& rot, const AScanOptions& opts = {});

// Same A-scan via the central row of the full 2D transform. Masked bins are
// filled with their column mean first, so by linearity this equals
// ascan_row_average to floating-point accuracy.
AScan ascan_2dft_diagonal(const preprocess::RotatedSpectrum& rot, const AScanOptions& opts = {});

// Magnitude of the centred 2D transform with depth axes in um on both
// dimensions (signed, zero in the middle).
struct FourierMap {
    Matrix values;                  // rows = v-conjugate depth, cols = u-conjugate depth
    std::vector<double> u_depth_um; // column coordinates
    std::vector<double> v_depth_um; // row coordinates
};

FourierMap fourier_map(const preprocess::RotatedSpectrum& rot);

struct PeakReport {
    double position_um = 0.0;
    double height = 0.0;
    double fwhm_um = 0.0;
    double asymmetry = 1.0; // integrated tail energy right/left beyond half maximum
};

struct SearchWindow {
    double lo_um;
    double hi_um;
};

// FWHM by linear interpolation at half height, sub-bin position by a
// 3-point quadratic fit. Throws if no local maximum above 3x the A-scan
// median lies in the window.
PeakReport measure_peak(const AScan& ascan, const SearchWindow& window);

struct FalloffReport {
    std::vector<double> depths_um;
    std::vector<PeakReport> peaks;
    double six_db_range_um = 0.0;
    bool censored = false; // no 6 dB crossing inside the probed span
};

struct FalloffOptions {
    // Common dB reference; defaults to the largest measured height so
    // pipelines with different pre-processing can be compared on one scale.
    std::optional<double> reference_height;
    double window_halfwidth_um = 25.0;
};

FalloffReport falloff_analysis(const std::vector<std::pair<double, AScan>>& ascans,
                               const FalloffOptions& opts = {});

// Artefact bookkeeping: one midpoint and one stationary entry per unordered
// interface pair. Positions follow the midpoint / half-separation rules;
// suppression is the Gaussian factor exp(-(pi dnu_a dtau)^2 / (4 ln2)) with
// dtau the pair's one-way delay separation.
struct StructuralPeak {
    double position_um;
    double predicted_height; // relative, max structural = 1
};

struct ArtefactPeak {
    int interface_a;
    int interface_b;
    double position_um;
    double suppression;
};

struct PeakMatch {
    double predicted_um;
    bool matched;
    double measured_um;
    double measured_height;
};

struct ArtefactReport {
    std::vector<StructuralPeak> structural;
    std::vector<ArtefactPeak> midpoint;
    std::vector<ArtefactPeak> stationary;
    std::vector<PeakMatch> matches;
};

ArtefactReport predict_artefacts(const LayeredObject& object, const SourceSpec& source,
                                 double reference_delay_um);

// Associates every predicted position with the nearest measured local
// maximum within the tolerance and stores the result in report.matches.
void match_artefacts(ArtefactReport& report, const AScan& ascan, double tolerance_um);

enum class BaselineMode { smooth, dc, none };

struct ClassicalAScanOptions {
    BaselineMode baseline = BaselineMode::smooth;
    int pad_factor = 4;
};

// Uniform-frequency resampling (cubic), baseline removal, Fourier magnitude,
// z = c t / 2.
AScan classical_ascan(const forward::ClassicalSpectrum& spec, const ClassicalAScanOptions& opts = {});

// Closed-form axial resolutions for Gaussian spectra, used as oracles and
// for picking whole-spectrum bandwidths:
//   quantum   FWHM = ln2 c / (pi dnu)
//   classical FWHM = 2 ln2 c / (pi dnu)
double quantum_axial_fwhm_um(double diagonal_fwhm_thz);
double classical_axial_fwhm_um(double source_fwhm_thz);
double diagonal_fwhm_for_quantum_resolution(double fwhm_um);

} // namespace qoct::reconstruct
