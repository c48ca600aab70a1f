#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qoct/grid.hpp"
#include "qoct/matrix.hpp"

namespace qoct {

// ---------------------------------------------------------------------------
// Joint spectrum

struct FrameMeta {
    double delay1_ps = 0.0;
    double delay2_ps = 0.0;
    double window_ps = 0.0;
};

// 2D coincidence distribution over two axes (wavelengths or arrival times).
// `values(i, j)` pairs axis1 bin i (channel 1, rows) with axis2 bin j.
// Transform names are appended to `provenance` by every op that touches the
// matrix; replaying them on the stored raw input reproduces the values.
struct JointSpectrum {
    SpectralGrid axis1;
    SpectralGrid axis2;
    Matrix values;
    std::optional<FrameMeta> frame_meta;
    std::vector<std::string> provenance;
    std::vector<std::string> warnings;

    void validate() const; // shape match, finite, non-negative
};

// ---------------------------------------------------------------------------
// Layered object

struct Interface {
    double position_um = 0.0; // one-way optical path, relative to reference-arm zero
    double reflectivity = 1.0;
};

// Dispersion accumulated over one pass of the gap between two adjacent
// interfaces. Reflected light traverses each gap twice.
struct GapDispersion {
    double beta2_fs2 = 0.0;
    double beta3_fs3 = 0.0;
};

// Net interferometer dispersion imbalance (object arm minus reference arm).
struct ArmImbalance {
    double beta2_fs2 = 0.0;
    double beta3_fs3 = 0.0;
};

struct LayeredObject {
    std::vector<Interface> interfaces;          // positions strictly increasing
    std::vector<GapDispersion> segment_dispersion; // one entry per gap, may be empty for none
    ArmImbalance arm_imbalance;
    double dispersion_center_nm = 1550.0; // expansion wavelength for the beta terms

    static LayeredObject mirror(double position_um, double reflectivity = 1.0);

    // Throws on hard violations, returns soft warnings (energy bound).
    std::vector<std::string> validate() const;
};

// ---------------------------------------------------------------------------
// Source and detection

struct SourceSpec {
    double center_wavelength_nm = 1550.0;
    double diagonal_fwhm_thz = 6.3;    // single-photon intensity FWHM
    double antidiagonal_fwhm_nm = 3.2; // joint-spectrum anti-diagonal FWHM at the photon wavelength
    double pump_center_nm = 775.0;
    double pump_fwhm_nm = 10.0;
    double pair_rate_hz = 1000.0;
    double hom_visibility = 1.0;

    void validate() const;
    double center_frequency_thz() const;
    // Anti-diagonal FWHM expressed as a width of (nu1 + nu2 - 2 nu0) in THz.
    double antidiagonal_fwhm_thz() const;
};

// Group delay vs wavelength for one detection fibre:
//   t(lambda) = c0 + c1 (lambda - lambda_ref) + c2 (lambda - lambda_ref)^2 + ...
// coefficients [t0 ps, D ps/nm, S/2 ps/nm^2, ...]. The map must be strictly
// monotonic over [lambda_min, lambda_max]; that range is fixed at
// construction and enforced by the ops that evaluate or invert the map.
struct FibreSpec {
    double length_km = 5.0;
    std::vector<double> group_delay_coeffs_ps{0.0};
    double lambda_ref_nm = 1550.0;
    double lambda_min_nm = 1300.0;
    double lambda_max_nm = 1800.0;

    void validate() const;
    // Linear effective fibre reproducing a given frame span per time window.
    static FibreSpec effective_linear(double slope_ps_per_nm, double lambda_ref_nm,
                                      double lambda_min_nm = 1300.0, double lambda_max_nm = 1800.0);
};

struct PumpLeak {
    int channel = 1; // 1 or 2
    double rate_hz = 0.0;
};

struct DetectionSpec {
    FibreSpec fibre1;
    FibreSpec fibre2;
    double time_bin_ps = 24.4140625;       // 12500 / 512
    double coincidence_window_ps = 12500.0; // 1 / (80 MHz)
    double spectral_resolution_fwhm_nm = 0.0;
    double background_rate_hz = 0.0;
    std::optional<PumpLeak> pump_leak;

    void validate() const;
};

// ---------------------------------------------------------------------------
// A-scan

enum class AScanKind { fd_qoct, td_qoct, classical };

std::string ascan_kind_name(AScanKind kind);

struct AScan {
    std::vector<double> depth_um;  // uniform, starts at 0
    std::vector<double> amplitude; // non-negative
    AScanKind source_kind = AScanKind::fd_qoct;

    void validate() const;
    double depth_step() const;
};

} // namespace qoct
