#include "qoct/forward.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qoct/exact_sum.hpp"
#include "qoct/parallel.hpp"
#include "qoct/rng.hpp"
#include "qoct/units.hpp"

namespace qoct::forward {

namespace {

// Dispersion phase for one set of beta coefficients at angular detuning
// omega = 2 pi (nu - nu0) [rad/ps]; betas in fs^2, fs^3.
inline double beta_phase(double beta2_fs2, double beta3_fs3, double omega) {
    const double beta2_ps2 = beta2_fs2 * 1e-6;
    const double beta3_ps3 = beta3_fs3 * 1e-9;
    return 0.5 * beta2_ps2 * omega * omega + beta3_ps3 * omega * omega * omega / 6.0;
}

struct EnvelopeParams {
    double nu0;
    double four_ln2_over_anti2; // 4 ln2 / dnu_a^2
    double four_ln2_over_diag2; // 4 ln2 / (2 dnu_d)^2
};

EnvelopeParams envelope_params(const SourceSpec& source) {
    source.validate();
    const double nu0 = source.center_frequency_thz();
    const double dnu_a = source.antidiagonal_fwhm_thz();
    const double dnu_d = source.diagonal_fwhm_thz;
    return {nu0, 4.0 * kLn2 / (dnu_a * dnu_a), 4.0 * kLn2 / (4.0 * dnu_d * dnu_d)};
}

inline double envelope_value(const EnvelopeParams& p, double nu1, double nu2) {
    const double s = nu1 + nu2 - 2.0 * p.nu0;
    const double d = nu1 - nu2;
    return std::exp(-p.four_ln2_over_anti2 * s * s - p.four_ln2_over_diag2 * d * d);
}

// Separable Gaussian blur along one axis, kernel given in bins. Zero padding
// at the edges; the kernel is normalised once, so interior mass is conserved.
void blur_axis(Matrix& m, double sigma_bins, bool along_rows) {
    if (sigma_bins <= 0.0)
        return;
    const int half = std::max(1, static_cast<int>(std::ceil(4.0 * sigma_bins)));
    std::vector<double> kernel(2 * half + 1);
    double norm = 0.0;
    for (int k = -half; k <= half; ++k) {
        kernel[k + half] = std::exp(-0.5 * (k / sigma_bins) * (k / sigma_bins));
        norm += kernel[k + half];
    }
    for (double& k : kernel)
        k /= norm;

    const int rows = m.rows(), cols = m.cols();
    Matrix out(rows, cols);
    if (along_rows) {
        // convolve along the column index within each row
        parallel_for(rows, [&](int r) {
            for (int c = 0; c < cols; ++c) {
                double acc = 0.0;
                for (int k = -half; k <= half; ++k) {
                    int cc = c + k;
                    if (cc >= 0 && cc < cols)
                        acc += kernel[k + half] * m(r, cc);
                }
                out(r, c) = acc;
            }
        });
    } else {
        parallel_for(rows, [&](int r) {
            for (int c = 0; c < cols; ++c) {
                double acc = 0.0;
                for (int k = -half; k <= half; ++k) {
                    int rr = r + k;
                    if (rr >= 0 && rr < rows)
                        acc += kernel[k + half] * m(rr, c);
                }
                out(r, c) = acc;
            }
        });
    }
    m = std::move(out);
}

// Expected coincidence rate per bin (before integration time), including the
// pump-leak line and the spectral-resolution blur but not the flat
// background. Shared by the joint-spectrum and time-domain paths.
Matrix expected_rate_matrix(const SimulationRequest& req, std::vector<std::string>* warnings) {
    const SpectralGrid& g = req.grid;
    const EnvelopeParams env = envelope_params(req.source);
    req.object.validate();
    req.detection.validate();

    const int n = g.n_points;
    std::vector<double> nu(n);
    for (int i = 0; i < n; ++i)
        nu[i] = wavelength_to_frequency(g.value(i));

    std::vector<std::complex<double>> h(n);
    for (int i = 0; i < n; ++i)
        h[i] = object_transfer(req.object, nu[i]);

    const double tau_ps = depth_to_roundtrip_ps(req.reference_delay_um);
    const double visibility = req.source.hom_visibility;
    const double pair_rate = req.source.pair_rate_hz;

    Matrix m(n, n);
    parallel_for(n, [&](int i) {
        const double nu1 = nu[i];
        const std::complex<double> h1 = h[i];
        const double h1sq = std::norm(h1);
        for (int j = 0; j < n; ++j) {
            const double nu2 = nu[j];
            const std::complex<double> cross = h1 * std::conj(h[j]);
            const double phase = -2.0 * kPi * (nu1 - nu2) * tau_ps;
            const double interf = cross.real() * std::cos(phase) - cross.imag() * std::sin(phase);
            double rate = envelope_value(env, nu1, nu2) *
                          (h1sq + std::norm(h[j]) - 2.0 * visibility * interf) * 0.25;
            if (rate < 0.0)
                rate = 0.0; // clip fp undershoot at perfect suppression
            m(i, j) = pair_rate * rate;
        }
    });

    if (req.detection.pump_leak && req.detection.pump_leak->rate_hz > 0.0) {
        // Leaked pump photons pile up at a nearly fixed arrival time, which
        // calibrates to a fixed wavelength line across the other channel.
        const auto& leak = *req.detection.pump_leak;
        const int line = n / 2;
        const double per_bin = leak.rate_hz / n;
        for (int k = 0; k < n; ++k) {
            if (leak.channel == 1)
                m(line, k) += per_bin;
            else
                m(k, line) += per_bin;
        }
    }

    if (req.detection.spectral_resolution_fwhm_nm > 0.0) {
        const double sigma_bins = fwhm_to_sigma(req.detection.spectral_resolution_fwhm_nm) / g.step;
        blur_axis(m, sigma_bins, false); // axis1 (rows index nu1)
        blur_axis(m, sigma_bins, true);  // axis2
    }

    if (warnings) {
        double edge_max = 0.0;
        for (int i = 0; i < n; ++i) {
            edge_max = std::max({edge_max, envelope_value(env, nu[i], nu[0]),
                                 envelope_value(env, nu[i], nu[n - 1]),
                                 envelope_value(env, nu[0], nu[i]),
                                 envelope_value(env, nu[n - 1], nu[i])});
        }
        if (edge_max > 0.5)
            warnings->push_back("grid narrower than the joint envelope (edge value " +
                                std::to_string(edge_max) + ")");
    }
    return m;
}

} // namespace

void SimulationRequest::validate() const {
    source.validate();
    object.validate();
    detection.validate();
    if (!(integration_time_s >= 0.0))
        throw std::invalid_argument("SimulationRequest: integration time must be >= 0");
    if (grid.n_points < 8)
        throw std::invalid_argument("SimulationRequest: grid too small");
}

void TimeDomainTrace::validate() const {
    if (stage_positions_um.size() != coincidence_rate.size())
        throw std::invalid_argument("TimeDomainTrace: length mismatch");
    for (double r : coincidence_rate)
        if (!std::isfinite(r))
            throw std::invalid_argument("TimeDomainTrace: non-finite rate");
}

void ClassicalSpectrum::validate() const {
    if (static_cast<int>(intensity.size()) != grid.n_points)
        throw std::invalid_argument("ClassicalSpectrum: length mismatch");
    for (double v : intensity)
        if (!std::isfinite(v) || v < 0.0)
            throw std::invalid_argument("ClassicalSpectrum: intensity must be finite and >= 0");
}

std::complex<double> object_transfer(const LayeredObject& object, double nu_thz) {
    if (nu_thz < 100.0 || nu_thz > 400.0)
        throw std::invalid_argument("object_transfer: frequency outside the 100-400 THz sanity range");
    const double nu0 = wavelength_to_frequency(object.dispersion_center_nm);
    const double omega = 2.0 * kPi * (nu_thz - nu0);

    std::complex<double> h{0.0, 0.0};
    double psi_gaps = 0.0;
    for (std::size_t k = 0; k < object.interfaces.size(); ++k) {
        if (k > 0 && !object.segment_dispersion.empty()) {
            const auto& gap = object.segment_dispersion[k - 1];
            psi_gaps += 2.0 * beta_phase(gap.beta2_fs2, gap.beta3_fs3, omega);
        }
        const auto& itf = object.interfaces[k];
        const double delay_phase = 2.0 * kPi * nu_thz * depth_to_roundtrip_ps(itf.position_um);
        h += itf.reflectivity * std::polar(1.0, delay_phase + psi_gaps);
    }
    const double psi_arm =
        beta_phase(object.arm_imbalance.beta2_fs2, object.arm_imbalance.beta3_fs3, omega);
    return h * std::polar(1.0, psi_arm);
}

JointSpectrum joint_envelope(const SourceSpec& source, const SpectralGrid& grid) {
    const EnvelopeParams p = envelope_params(source);
    // pre: grid must cover at least twice the diagonal intensity FWHM
    const double diag_fwhm_nm = bandwidth_thz_to_nm(source.diagonal_fwhm_thz, source.center_wavelength_nm);
    if (grid.span() + 1e-9 < 2.0 * diag_fwhm_nm)
        throw std::invalid_argument("joint_envelope: grid narrower than twice the diagonal FWHM");

    const int n = grid.n_points;
    std::vector<double> nu(n);
    for (int i = 0; i < n; ++i)
        nu[i] = wavelength_to_frequency(grid.value(i));

    JointSpectrum js;
    js.axis1 = grid;
    js.axis2 = grid;
    js.values = Matrix(n, n);
    double edge_max = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double v = envelope_value(p, nu[i], nu[j]);
            js.values(i, j) = v;
            if (i == 0 || j == 0 || i == n - 1 || j == n - 1)
                edge_max = std::max(edge_max, v);
        }
    }
    if (edge_max > 0.5)
        js.warnings.push_back("grid narrower than the joint envelope (edge value " +
                              std::to_string(edge_max) + ")");
    js.provenance.push_back("joint_envelope");
    return js;
}

double coincidence_rate(const SourceSpec& source, const LayeredObject& object,
                        double reference_delay_um, double nu1_thz, double nu2_thz) {
    const EnvelopeParams env = envelope_params(source);
    const std::complex<double> h1 = object_transfer(object, nu1_thz);
    const std::complex<double> h2 = object_transfer(object, nu2_thz);
    const double tau_ps = depth_to_roundtrip_ps(reference_delay_um);
    const std::complex<double> ref_phase = std::polar(1.0, -2.0 * kPi * (nu1_thz - nu2_thz) * tau_ps);
    const double interf = (h1 * std::conj(h2) * ref_phase).real();
    double rate = envelope_value(env, nu1_thz, nu2_thz) *
                  (std::norm(h1) + std::norm(h2) - 2.0 * source.hom_visibility * interf) * 0.25;
    return rate < 0.0 ? 0.0 : rate;
}

JointSpectrum simulate_joint_spectrum(const SimulationRequest& req) {
    req.validate();
    JointSpectrum js;
    js.axis1 = req.grid;
    js.axis2 = req.grid;
    js.values = expected_rate_matrix(req, &js.warnings);

    const double time = req.integration_time_s;
    const double bg_per_bin =
        req.detection.background_rate_hz / (static_cast<double>(req.grid.n_points) * req.grid.n_points);
    for (double& v : js.values.flat())
        v = (v + bg_per_bin) * time;
    js.provenance.push_back("simulate_joint_spectrum");
    js.validate();
    return js;
}

TimeDomainTrace simulate_time_domain(const SourceSpec& source, const LayeredObject& object,
                                     const DetectionSpec& detection, const SpectralGrid& grid,
                                     const std::vector<double>& stage_positions_um,
                                     double integration_time_s, std::optional<std::uint64_t> seed) {
    if (stage_positions_um.empty())
        throw std::invalid_argument("simulate_time_domain: empty stage position list");
    for (double p : stage_positions_um)
        if (!std::isfinite(p))
            throw std::invalid_argument("simulate_time_domain: non-finite stage position");

    TimeDomainTrace trace;
    trace.stage_positions_um = stage_positions_um;
    trace.coincidence_rate.resize(stage_positions_um.size());
    for (std::size_t k = 0; k < stage_positions_um.size(); ++k) {
        SimulationRequest req{source, object, detection, stage_positions_um[k], grid,
                              integration_time_s, std::nullopt};
        JointSpectrum js = simulate_joint_spectrum(req);
        double total = exact_sum(js.values.flat());
        if (seed) {
            CounterRng rng(*seed, k);
            total = static_cast<double>(poisson_sample(total, rng));
        }
        trace.coincidence_rate[k] = total;
    }
    trace.validate();
    return trace;
}

ClassicalSpectrum simulate_classical_fringes(const ClassicalSource& source, const LayeredObject& object,
                                             double reference_delay_um, const SpectralGrid& grid) {
    object.validate();
    if (!(source.fwhm_nm > 0.0) || !(source.center_nm > 0.0))
        throw std::invalid_argument("simulate_classical_fringes: invalid source");
    const double nu_c = wavelength_to_frequency(source.center_nm);
    const double dnu = bandwidth_nm_to_thz(source.fwhm_nm, source.center_nm);
    const double tau_ps = depth_to_roundtrip_ps(reference_delay_um);

    ClassicalSpectrum spec;
    spec.grid = grid;
    spec.intensity.resize(grid.n_points);
    for (int i = 0; i < grid.n_points; ++i) {
        const double nu = wavelength_to_frequency(grid.value(i));
        const double d = nu - nu_c;
        const double s0 = std::exp(-4.0 * kLn2 * d * d / (dnu * dnu));
        const std::complex<double> field =
            source.reference_reflectivity +
            object_transfer(object, nu) * std::polar(1.0, -2.0 * kPi * nu * tau_ps);
        spec.intensity[i] = s0 * std::norm(field);
    }
    spec.validate();
    return spec;
}

JointSpectrum apply_shot_noise(const JointSpectrum& js, std::uint64_t seed) {
    js.validate();
    JointSpectrum out = js;
    const auto flat = js.values.flat();
    auto out_flat = out.values.flat();
    parallel_for(static_cast<int>(flat.size()), [&](int i) {
        CounterRng rng(seed, static_cast<std::uint64_t>(i));
        out_flat[i] = static_cast<double>(poisson_sample(flat[i], rng));
    });
    out.provenance.push_back("apply_shot_noise seed=" + std::to_string(seed));
    return out;
}

} // namespace qoct::forward
