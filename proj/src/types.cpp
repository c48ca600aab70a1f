#include "qoct/types.hpp"

#include <cmath>
#include <stdexcept>

#include "qoct/units.hpp"

namespace qoct {

void JointSpectrum::validate() const {
    if (values.rows() != axis1.n_points || values.cols() != axis2.n_points)
        throw std::invalid_argument("JointSpectrum: values shape does not match axes");
    for (double v : values.flat()) {
        if (!std::isfinite(v))
            throw std::invalid_argument("JointSpectrum: non-finite value");
        if (v < 0.0)
            throw std::invalid_argument("JointSpectrum: negative value");
    }
}

LayeredObject LayeredObject::mirror(double position_um, double reflectivity) {
    LayeredObject obj;
    obj.interfaces.push_back({position_um, reflectivity});
    return obj;
}

std::vector<std::string> LayeredObject::validate() const {
    if (interfaces.empty())
        throw std::invalid_argument("LayeredObject: needs at least one interface");
    double prev = -1e300;
    double energy = 0.0;
    for (const auto& itf : interfaces) {
        if (!(itf.position_um > prev))
            throw std::invalid_argument("LayeredObject: interface positions must be strictly increasing");
        prev = itf.position_um;
        if (!(itf.reflectivity > 0.0) || itf.reflectivity > 1.0)
            throw std::invalid_argument("LayeredObject: reflectivity must be in (0, 1]");
        energy += itf.reflectivity * itf.reflectivity;
    }
    if (!segment_dispersion.empty() && segment_dispersion.size() != interfaces.size() - 1)
        throw std::invalid_argument("LayeredObject: segment_dispersion must have one entry per gap");
    std::vector<std::string> warnings;
    if (energy > 1.0)
        warnings.push_back("sum of reflectivity^2 exceeds 1 (energy bound)");
    return warnings;
}

void SourceSpec::validate() const {
    if (!(center_wavelength_nm > 0.0))
        throw std::invalid_argument("SourceSpec: centre wavelength must be > 0");
    if (!(diagonal_fwhm_thz > 0.0) || !(antidiagonal_fwhm_nm > 0.0) || !(pump_fwhm_nm > 0.0))
        throw std::invalid_argument("SourceSpec: all widths must be > 0");
    if (hom_visibility < 0.0 || hom_visibility > 1.0)
        throw std::invalid_argument("SourceSpec: hom_visibility must be in [0, 1]");
    double degenerate = 0.5 * center_wavelength_nm;
    if (std::fabs(pump_center_nm - degenerate) > 0.1 * degenerate)
        throw std::invalid_argument("SourceSpec: pump centre must be within 10% of half the photon wavelength");
    if (!(pair_rate_hz >= 0.0))
        throw std::invalid_argument("SourceSpec: pair rate must be >= 0");
}

double SourceSpec::center_frequency_thz() const {
    return wavelength_to_frequency(center_wavelength_nm);
}

double SourceSpec::antidiagonal_fwhm_thz() const {
    // A cut along lambda1 = lambda2 = lambda0 + d has
    // nu1 + nu2 - 2 nu0 ~= -2 c d / lambda0^2, so a width of w nm along that
    // cut corresponds to a sum-frequency width of 2 c w / lambda0^2.
    return 2.0 * bandwidth_nm_to_thz(antidiagonal_fwhm_nm, center_wavelength_nm);
}

void FibreSpec::validate() const {
    if (group_delay_coeffs_ps.empty())
        throw std::invalid_argument("FibreSpec: need at least the constant delay coefficient");
    if (!(lambda_min_nm > 0.0) || !(lambda_max_nm > lambda_min_nm))
        throw std::invalid_argument("FibreSpec: invalid validity range");
    if (lambda_ref_nm < lambda_min_nm || lambda_ref_nm > lambda_max_nm)
        throw std::invalid_argument("FibreSpec: lambda_ref outside validity range");
}

FibreSpec FibreSpec::effective_linear(double slope_ps_per_nm, double lambda_ref_nm,
                                      double lambda_min_nm, double lambda_max_nm) {
    FibreSpec f;
    f.group_delay_coeffs_ps = {0.0, slope_ps_per_nm};
    f.lambda_ref_nm = lambda_ref_nm;
    f.lambda_min_nm = lambda_min_nm;
    f.lambda_max_nm = lambda_max_nm;
    return f;
}

void DetectionSpec::validate() const {
    fibre1.validate();
    fibre2.validate();
    if (!(time_bin_ps > 0.0))
        throw std::invalid_argument("DetectionSpec: time bin must be > 0");
    if (coincidence_window_ps < time_bin_ps)
        throw std::invalid_argument("DetectionSpec: coincidence window must be >= time bin");
    if (spectral_resolution_fwhm_nm < 0.0)
        throw std::invalid_argument("DetectionSpec: spectral resolution must be >= 0");
    if (background_rate_hz < 0.0)
        throw std::invalid_argument("DetectionSpec: background rate must be >= 0");
    if (pump_leak && pump_leak->channel != 1 && pump_leak->channel != 2)
        throw std::invalid_argument("DetectionSpec: pump leak channel must be 1 or 2");
}

std::string ascan_kind_name(AScanKind kind) {
    switch (kind) {
    case AScanKind::fd_qoct: return "fd_qoct";
    case AScanKind::td_qoct: return "td_qoct";
    case AScanKind::classical: return "classical";
    }
    throw std::logic_error("ascan_kind_name: bad enum");
}

void AScan::validate() const {
    if (depth_um.size() != amplitude.size() || depth_um.empty())
        throw std::invalid_argument("AScan: depth and amplitude sizes must match and be non-empty");
    if (depth_um.front() != 0.0)
        throw std::invalid_argument("AScan: depth axis must start at 0");
    for (std::size_t i = 1; i < depth_um.size(); ++i)
        if (!(depth_um[i] > depth_um[i - 1]))
            throw std::invalid_argument("AScan: depth axis must be strictly increasing");
    for (double a : amplitude)
        if (!std::isfinite(a) || a < 0.0)
            throw std::invalid_argument("AScan: amplitudes must be finite and >= 0");
}

double AScan::depth_step() const {
    if (depth_um.size() < 2)
        throw std::logic_error("AScan: depth step undefined for a single sample");
    return depth_um[1] - depth_um[0];
}

} // namespace qoct
