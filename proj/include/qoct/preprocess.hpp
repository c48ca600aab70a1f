#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qoct/types.hpp"

namespace qoct::preprocess {

// Joint spectrum resampled onto rotated frequency axes:
//   u = (nu1 - nu2) / sqrt(2)  (columns, fringe direction)
//   v = (nu1 + nu2) / sqrt(2)  (rows)
// Bins outside the source footprint are masked and carry value 0.
struct RotatedSpectrum {
    SpectralGrid u_axis; // difference_frequency
    SpectralGrid v_axis; // sum_frequency
    Matrix values;       // rows = v, cols = u
    std::vector<std::uint8_t> mask; // 1 = synthesized outside the data footprint
    std::vector<std::string> provenance;

    bool masked(int v_row, int u_col) const {
        return mask[static_cast<std::size_t>(v_row) * values.cols() + u_col] != 0;
    }
    void set_mask(int v_row, int u_col, bool m) {
        mask[static_cast<std::size_t>(v_row) * values.cols() + u_col] = m ? 1 : 0;
    }
    void validate() const;
};

// Integer cyclic roll per u column, in v-row bins.
struct ShiftVector {
    std::vector<int> shifts;
};

struct RowFrequency {
    double fringe_frequency = 0.0; // cycles per THz of u
    double confidence = 0.0;       // peak energy fraction in [0, 1]
};

struct RowFrequencyProfile {
    std::vector<RowFrequency> rows;
};

// 45-degree counter-clockwise rotation by bilinear resampling from the
// wavelength grid onto uniform (u, v) frequency axes.
RotatedSpectrum rotate45(const JointSpectrum& js);

// Inverse resampling back onto the original wavelength grid; bins that map
// outside the rotated footprint are zero.
JointSpectrum derotate45(const RotatedSpectrum& rot, const SpectralGrid& axis1, const SpectralGrid& axis2);

// Column shifts straightening the fibre-bent ridge: the residual of the
// summed group delay after its linear part has been used for the wavelength
// calibration, expressed in v bins per u column. Zero for purely linear
// fibres.
ShiftVector fibre_shift_vector(const DetectionSpec& detection, const RotatedSpectrum& rot,
                               double lambda_ref_nm);

// Cyclic roll of each column by its shift; column means are preserved
// exactly, so the row-average A-scan is unchanged.
RotatedSpectrum compensate_fibre(const RotatedSpectrum& rot, const ShiftVector& sv);

// Per-row dominant fringe frequency via a zero-padded DFT magnitude peak
// with quadratic sub-bin refinement; confidence is the peak's energy
// fraction. Rows without fringe energy get confidence 0.
RowFrequencyProfile estimate_row_frequencies(const RotatedSpectrum& rot);

struct PumpCompensationOptions {
    double envelope_threshold = 0.05; // fringe region cut, fraction of row max
    double confidence_min = 0.02;     // rows below pass through unchanged
};

// Data-driven pump compensation: every confident row's fringe region is
// split at its centre and each half linearly resampled about the centre by
// f_ref / f_row (reference = highest-confidence row).
RotatedSpectrum compensate_pump(const RotatedSpectrum& rot, const RowFrequencyProfile& profile,
                                const PumpCompensationOptions& opts = {});

// Model-driven variant for arbitrary objects: per-row stretch factors from a
// nominal fringe frequency and the arm-imbalance betas instead of estimates.
struct RowStretchModel {
    double nominal_frequency = 0.0; // cycles per THz of u at the reference row
    double beta2_fs2 = 0.0;
    double beta3_fs3 = 0.0;
    double center_frequency_thz = 0.0; // nu0 of the source
};

// Row-frequency model f(v) = f0 + shift(v) implied by the arm-imbalance
// phase evaluated off the central anti-diagonal; also the oracle for
// estimate_row_frequencies tests.
double model_row_frequency(const RowStretchModel& model, double v_thz);

RotatedSpectrum compensate_pump_model(const RotatedSpectrum& rot, const RowStretchModel& model,
                                      const PumpCompensationOptions& opts = {});

} // namespace qoct::preprocess
