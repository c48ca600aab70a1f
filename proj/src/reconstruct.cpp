#include "qoct/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qoct/exact_sum.hpp"
#include "qoct/fft.hpp"
#include "qoct/units.hpp"

namespace qoct::reconstruct {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

// Depth per unit of u-conjugate frequency: a reflector offset by d produces
// a fringe of 2 sqrt(2) d / c cycles per THz of u, so z = c f_u / (2 sqrt(2)).
inline double u_frequency_to_depth(double f_u) { return kC_um_ps * f_u / (2.0 * kSqrt2); }

// Column means with masked bins contributing zero mass (correctly-rounded
// sums, divided by the full row count). Normalising by the fixed row count
// rather than the per-column footprint keeps the relative envelope intact
// where the rotated diamond narrows.
struct ColumnStats {
    std::vector<double> mean;
    std::vector<int> count; // unmasked bins per column
};

ColumnStats column_stats(const preprocess::RotatedSpectrum& rot) {
    const int rows = rot.values.rows(), cols = rot.values.cols();
    ColumnStats st;
    st.mean.assign(cols, 0.0);
    st.count.assign(cols, 0);
    for (int c = 0; c < cols; ++c) {
        ExactSum acc;
        int n = 0;
        for (int r = 0; r < rows; ++r) {
            if (!rot.masked(r, c)) {
                acc.add(rot.values(r, c));
                ++n;
            }
        }
        st.count[c] = n;
        st.mean[c] = acc.result() / rows;
    }
    return st;
}

std::vector<double> gaussian_smooth_reflect(const std::vector<double>& x, double sigma_bins) {
    const int n = static_cast<int>(x.size());
    if (sigma_bins <= 0.0 || n < 3)
        return x;
    const int half = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_bins)));
    std::vector<double> kernel(2 * half + 1);
    double norm = 0.0;
    for (int k = -half; k <= half; ++k) {
        kernel[k + half] = std::exp(-0.5 * (k / sigma_bins) * (k / sigma_bins));
        norm += kernel[k + half];
    }
    std::vector<double> out(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int k = -half; k <= half; ++k) {
            int j = i + k;
            if (j < 0)
                j = -j;
            if (j > n - 1)
                j = 2 * (n - 1) - j;
            acc += kernel[k + half] * x[j];
        }
        out[i] = acc / norm;
    }
    return out;
}

// Shared baseline convention for both A-scan paths: the smoothed column-mean
// spectrum (or nothing when dc_removal is off).
std::vector<double> ascan_baseline(const std::vector<double>& mean_spectrum, bool dc_removal) {
    if (!dc_removal)
        return std::vector<double>(mean_spectrum.size(), 0.0);
    return gaussian_smooth_reflect(mean_spectrum, mean_spectrum.size() / 16.0);
}

AScan spectrum_to_ascan(const std::vector<double>& signal, double du, int pad_factor, AScanKind kind) {
    const std::size_t padded = static_cast<std::size_t>(std::max(1, pad_factor)) * next_pow2(signal.size());
    auto spectrum = fft_forward_real(signal, padded);
    const std::size_t half = padded / 2;
    AScan a;
    a.source_kind = kind;
    a.depth_um.resize(half);
    a.amplitude.resize(half);
    for (std::size_t k = 0; k < half; ++k) {
        const double f_u = static_cast<double>(k) / (static_cast<double>(padded) * du);
        a.depth_um[k] = u_frequency_to_depth(f_u);
        a.amplitude[k] = std::abs(spectrum[k]);
    }
    a.validate();
    return a;
}

int local_max_near(const std::vector<double>& y, int lo, int hi, double floor_level) {
    int best = -1;
    double best_v = floor_level;
    for (int i = std::max(1, lo); i <= std::min(static_cast<int>(y.size()) - 2, hi); ++i) {
        if (y[i] >= y[i - 1] && y[i] >= y[i + 1] && y[i] > best_v) {
            best_v = y[i];
            best = i;
        }
    }
    return best;
}

} // namespace

AScan ascan_row_average(const preprocess::RotatedSpectrum& rot, const AScanOptions& opts) {
    rot.validate();
    const ColumnStats st = column_stats(rot);
    if (std::all_of(st.count.begin(), st.count.end(), [](int n) { return n == 0; }))
        throw std::invalid_argument("ascan_row_average: fully masked input");

    std::vector<double> s = st.mean;
    const std::vector<double> baseline = ascan_baseline(s, opts.dc_removal);
    for (std::size_t i = 0; i < s.size(); ++i)
        s[i] -= baseline[i];
    return spectrum_to_ascan(s, rot.u_axis.step, opts.pad_factor, AScanKind::fd_qoct);
}

AScan ascan_2dft_diagonal(const preprocess::RotatedSpectrum& rot, const AScanOptions& opts) {
    rot.validate();
    const int rows = rot.values.rows(), cols = rot.values.cols();
    const ColumnStats st = column_stats(rot);
    if (std::all_of(st.count.begin(), st.count.end(), [](int n) { return n == 0; }))
        throw std::invalid_argument("ascan_2dft_diagonal: fully masked input");

    const std::vector<double> baseline = ascan_baseline(st.mean, opts.dc_removal);

    // Masked bins contribute zero mass, so every column sums to rows * mean
    // and the central row of the 2D transform is the transform of the
    // column-mean spectrum. The baseline, constant along v, only touches
    // that central row.
    Matrix filled(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            filled(r, c) = (rot.masked(r, c) ? 0.0 : rot.values(r, c)) - baseline[c];

    const int pad_cols = static_cast<int>(static_cast<std::size_t>(std::max(1, opts.pad_factor)) *
                                          next_pow2(static_cast<std::size_t>(cols)));
    auto stage = fft2_forward_real(filled, pad_cols);

    const std::size_t half = static_cast<std::size_t>(pad_cols) / 2;
    AScan a;
    a.source_kind = AScanKind::fd_qoct;
    a.depth_um.resize(half);
    a.amplitude.resize(half);
    for (std::size_t k = 0; k < half; ++k) {
        const double f_u = static_cast<double>(k) / (static_cast<double>(pad_cols) * rot.u_axis.step);
        a.depth_um[k] = u_frequency_to_depth(f_u);
        // v-frequency zero row, normalised by the row count
        a.amplitude[k] = std::abs(stage[k]) / rows;
    }
    a.validate();
    return a;
}

FourierMap fourier_map(const preprocess::RotatedSpectrum& rot) {
    rot.validate();
    const int rows = rot.values.rows(), cols = rot.values.cols();
    // masked bins carry value 0 by invariant, so the stored matrix is
    // already the zero-filled one
    auto stage = fft2_forward_real(rot.values, cols);

    FourierMap map;
    map.values = Matrix(rows, cols);
    map.u_depth_um.resize(cols);
    map.v_depth_um.resize(rows);
    // centre the transform: the DC sample lands at index rows/2, cols/2
    const int rshift = rows / 2, cshift = cols / 2;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int sr = (r + rows - rshift) % rows;
            const int sc = (c + cols - cshift) % cols;
            map.values(r, c) = std::abs(stage[static_cast<std::size_t>(sr) * cols + sc]);
        }
    }
    for (int c = 0; c < cols; ++c) {
        const double k = c - cshift;
        map.u_depth_um[c] = u_frequency_to_depth(k / (cols * rot.u_axis.step));
    }
    for (int r = 0; r < rows; ++r) {
        const double k = r - rshift;
        map.v_depth_um[r] = u_frequency_to_depth(k / (rows * rot.v_axis.step));
    }
    return map;
}

PeakReport measure_peak(const AScan& ascan, const SearchWindow& window) {
    ascan.validate();
    const auto& y = ascan.amplitude;
    const auto& z = ascan.depth_um;
    const int n = static_cast<int>(y.size());
    if (n < 5)
        throw std::invalid_argument("measure_peak: A-scan too short");

    std::vector<double> sorted = y;
    std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
    const double noise_floor = 3.0 * sorted[n / 2];

    const double dz = ascan.depth_step();
    int lo = static_cast<int>(std::ceil((window.lo_um - z.front()) / dz));
    int hi = static_cast<int>(std::floor((window.hi_um - z.front()) / dz));
    lo = std::clamp(lo, 0, n - 1);
    hi = std::clamp(hi, 0, n - 1);
    if (lo >= hi)
        throw std::invalid_argument("measure_peak: empty search window");

    const int p = local_max_near(y, lo, hi, noise_floor);
    if (p < 0)
        throw std::invalid_argument("measure_peak: no peak above the noise floor in the window");

    PeakReport report;
    // 3-point quadratic fit for the sub-bin apex
    const double ym = y[p - 1], y0 = y[p], yp = y[p + 1];
    const double denom = ym - 2.0 * y0 + yp;
    double delta = 0.0;
    if (denom < 0.0)
        delta = 0.5 * (ym - yp) / denom;
    report.position_um = z[p] + delta * dz;
    report.height = y0 - 0.25 * (ym - yp) * delta;

    const double half_level = 0.5 * report.height;
    // walk outwards to the half-maximum crossings
    int l = p;
    while (l > 0 && y[l] > half_level)
        --l;
    int r = p;
    while (r < n - 1 && y[r] > half_level)
        ++r;
    if (y[l] > half_level || y[r] > half_level)
        throw std::invalid_argument("measure_peak: peak does not drop to half maximum inside the A-scan");
    const double zl = z[l] + (half_level - y[l]) / (y[l + 1] - y[l]) * dz;
    const double zr = z[r - 1] + (y[r - 1] - half_level) / (y[r - 1] - y[r]) * dz;
    report.fwhm_um = zr - zl;
    if (!(report.fwhm_um > 0.0))
        throw std::invalid_argument("measure_peak: degenerate width");

    // tail energy beyond the half-maximum crossings: trapezoid integrals of
    // amplitude^2 starting at the interpolated crossing, over equal spans on
    // both sides so a symmetric peak reports a ratio near 1
    const double span = std::min(zl - z[lo], z[hi] - zr);
    auto tail_energy = [&](double from, double to) {
        // integrate y^2 over [from, to] with linear interpolation at the ends
        double acc = 0.0;
        const int first = static_cast<int>(std::ceil((from - z.front()) / dz));
        const int last = static_cast<int>(std::floor((to - z.front()) / dz));
        auto y_at = [&](double pos) {
            const int i = std::clamp(static_cast<int>(std::floor((pos - z.front()) / dz)), 0, n - 2);
            const double f = (pos - z[i]) / dz;
            return (1.0 - f) * y[i] + f * y[i + 1];
        };
        double prev_pos = from;
        double prev_val = y_at(from);
        for (int i = std::max(first, 0); i <= std::min(last, n - 1); ++i) {
            acc += 0.5 * (prev_val * prev_val + y[i] * y[i]) * (z[i] - prev_pos);
            prev_pos = z[i];
            prev_val = y[i];
        }
        const double end_val = y_at(to);
        acc += 0.5 * (prev_val * prev_val + end_val * end_val) * (to - prev_pos);
        return acc;
    };
    const double left = tail_energy(zl - span, zl);
    const double right = tail_energy(zr, zr + span);
    report.asymmetry = left > 0.0 ? right / left : (right > 0.0 ? 1e9 : 1.0);
    return report;
}

FalloffReport falloff_analysis(const std::vector<std::pair<double, AScan>>& ascans,
                               const FalloffOptions& opts) {
    if (ascans.size() < 3)
        throw std::invalid_argument("falloff_analysis: need at least 3 depths");
    for (std::size_t i = 1; i < ascans.size(); ++i)
        if (!(ascans[i].first > ascans[i - 1].first))
            throw std::invalid_argument("falloff_analysis: depths must be increasing");

    FalloffReport report;
    for (const auto& [depth, ascan] : ascans) {
        report.depths_um.push_back(depth);
        report.peaks.push_back(measure_peak(
            ascan, {depth - opts.window_halfwidth_um, depth + opts.window_halfwidth_um}));
    }

    double ref = 0.0;
    if (opts.reference_height) {
        ref = *opts.reference_height;
    } else {
        for (const auto& p : report.peaks)
            ref = std::max(ref, p.height);
    }
    if (!(ref > 0.0))
        throw std::invalid_argument("falloff_analysis: non-positive reference height");

    std::vector<double> db(report.peaks.size());
    for (std::size_t i = 0; i < report.peaks.size(); ++i)
        db[i] = 20.0 * std::log10(report.peaks[i].height / ref);

    report.censored = true;
    report.six_db_range_um = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < db.size(); ++i) {
        if (db[i - 1] > -6.0 && db[i] <= -6.0) {
            const double t = (db[i - 1] + 6.0) / (db[i - 1] - db[i]);
            report.six_db_range_um =
                report.depths_um[i - 1] + t * (report.depths_um[i] - report.depths_um[i - 1]);
            report.censored = false;
            // heights rising back above the 6 dB level deeper in mark the
            // crossing as unreliable
            for (std::size_t j = i; j < db.size(); ++j)
                if (db[j] > -6.0)
                    report.censored = true;
            break;
        }
    }
    return report;
}

ArtefactReport predict_artefacts(const LayeredObject& object, const SourceSpec& source,
                                 double reference_delay_um) {
    object.validate();
    source.validate();
    const double dnu_a = source.antidiagonal_fwhm_thz();

    ArtefactReport report;
    double max_r2 = 0.0;
    for (const auto& itf : object.interfaces)
        max_r2 = std::max(max_r2, itf.reflectivity * itf.reflectivity);
    for (const auto& itf : object.interfaces) {
        report.structural.push_back({itf.position_um - reference_delay_um,
                                     itf.reflectivity * itf.reflectivity / max_r2});
    }
    const int n = static_cast<int>(object.interfaces.size());
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            const double za = object.interfaces[a].position_um;
            const double zb = object.interfaces[b].position_um;
            const double dtau_ps = (zb - za) / kC_um_ps; // one-way delay separation
            const double arg = kPi * dnu_a * dtau_ps;
            const double suppression = std::exp(-arg * arg / (4.0 * kLn2));
            report.midpoint.push_back({a, b, 0.5 * (za + zb) - reference_delay_um, suppression});
            report.stationary.push_back({a, b, 0.5 * (zb - za), suppression});
        }
    }
    return report;
}

void match_artefacts(ArtefactReport& report, const AScan& ascan, double tolerance_um) {
    ascan.validate();
    report.matches.clear();
    const double dz = ascan.depth_step();
    const auto& y = ascan.amplitude;

    auto try_match = [&](double predicted) {
        PeakMatch m{std::fabs(predicted), false, 0.0, 0.0};
        const int centre = static_cast<int>(std::lround(m.predicted_um / dz));
        const int halfwin = std::max(1, static_cast<int>(std::lround(tolerance_um / dz)));
        const int p = local_max_near(y, centre - halfwin, centre + halfwin, 0.0);
        if (p >= 0) {
            m.matched = true;
            m.measured_um = ascan.depth_um[p];
            m.measured_height = y[p];
        }
        report.matches.push_back(m);
    };
    for (const auto& s : report.structural)
        try_match(s.position_um);
    for (const auto& a : report.midpoint)
        try_match(a.position_um);
    for (const auto& a : report.stationary)
        try_match(a.position_um);
}

AScan classical_ascan(const forward::ClassicalSpectrum& spec, const ClassicalAScanOptions& opts) {
    spec.validate();
    if (spec.grid.kind != AxisKind::wavelength)
        throw std::invalid_argument("classical_ascan: expects a wavelength grid");
    const int n = spec.grid.n_points;

    // uniform-frequency resampling (Catmull-Rom through the lambda samples)
    const double nu_lo = wavelength_to_frequency(spec.grid.back());
    const double nu_hi = wavelength_to_frequency(spec.grid.start);
    const double dnu = (nu_hi - nu_lo) / (n - 1);
    std::vector<double> resampled(n);
    auto sample_at = [&](double idx) {
        const int i1 = std::clamp(static_cast<int>(std::floor(idx)), 0, n - 2);
        const double t = idx - i1;
        const int i0 = std::max(i1 - 1, 0);
        const int i2 = i1 + 1;
        const int i3 = std::min(i1 + 2, n - 1);
        const double p0 = spec.intensity[i0], p1 = spec.intensity[i1], p2 = spec.intensity[i2],
                     p3 = spec.intensity[i3];
        return p1 + 0.5 * t * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                                               t * (3.0 * (p1 - p2) + p3 - p0)));
    };
    for (int k = 0; k < n; ++k) {
        const double nu = nu_lo + k * dnu;
        resampled[k] = sample_at(spec.grid.index_of(frequency_to_wavelength(nu)));
    }

    switch (opts.baseline) {
    case BaselineMode::none:
        break;
    case BaselineMode::dc: {
        const double mean = exact_mean(resampled);
        for (double& v : resampled)
            v -= mean;
        break;
    }
    case BaselineMode::smooth: {
        const auto baseline = gaussian_smooth_reflect(resampled, n / 16.0);
        for (int k = 0; k < n; ++k)
            resampled[k] -= baseline[k];
        break;
    }
    }

    const std::size_t padded = static_cast<std::size_t>(std::max(1, opts.pad_factor)) * next_pow2(resampled.size());
    auto spectrum = fft_forward_real(resampled, padded);
    const std::size_t half = padded / 2;
    AScan a;
    a.source_kind = AScanKind::classical;
    a.depth_um.resize(half);
    a.amplitude.resize(half);
    for (std::size_t k = 0; k < half; ++k) {
        const double t_ps = static_cast<double>(k) / (static_cast<double>(padded) * dnu);
        a.depth_um[k] = roundtrip_ps_to_depth(t_ps);
        a.amplitude[k] = std::abs(spectrum[k]);
    }
    a.validate();
    return a;
}

double quantum_axial_fwhm_um(double diagonal_fwhm_thz) {
    return kLn2 * kC_um_ps / (kPi * diagonal_fwhm_thz);
}

double classical_axial_fwhm_um(double source_fwhm_thz) {
    return 2.0 * kLn2 * kC_um_ps / (kPi * source_fwhm_thz);
}

double diagonal_fwhm_for_quantum_resolution(double fwhm_um) {
    return kLn2 * kC_um_ps / (kPi * fwhm_um);
}

} // namespace qoct::reconstruct
