#include "qoct/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qoct/exact_sum.hpp"
#include "qoct/fft.hpp"
#include "qoct/parallel.hpp"
#include "qoct/units.hpp"

namespace qoct::preprocess {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

struct Bilinear {
    int i0, j0;
    double fi, fj;
    bool inside;
};

Bilinear locate(double idx_i, double idx_j, int ni, int nj) {
    Bilinear b{};
    b.inside = idx_i >= 0.0 && idx_i <= ni - 1 && idx_j >= 0.0 && idx_j <= nj - 1;
    if (!b.inside)
        return b;
    b.i0 = std::min(static_cast<int>(std::floor(idx_i)), ni - 2);
    b.j0 = std::min(static_cast<int>(std::floor(idx_j)), nj - 2);
    b.fi = idx_i - b.i0;
    b.fj = idx_j - b.j0;
    return b;
}

double sample(const Matrix& m, const Bilinear& b) {
    const double v00 = m(b.i0, b.j0);
    const double v01 = m(b.i0, b.j0 + 1);
    const double v10 = m(b.i0 + 1, b.j0);
    const double v11 = m(b.i0 + 1, b.j0 + 1);
    return (1 - b.fi) * ((1 - b.fj) * v00 + b.fj * v01) + b.fi * ((1 - b.fj) * v10 + b.fj * v11);
}

int odd_ceil(double x) {
    int n = static_cast<int>(std::ceil(x));
    return (n % 2 == 0) ? n + 1 : n;
}

// Gaussian smoothing with reflective edges, used for fringe-region envelopes.
std::vector<double> smooth(const std::vector<double>& x, double sigma_bins) {
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

double full_group_delay(const FibreSpec& f, double lambda_nm) {
    const double d = lambda_nm - f.lambda_ref_nm;
    double acc = 0.0;
    for (std::size_t k = f.group_delay_coeffs_ps.size(); k-- > 0;)
        acc = acc * d + f.group_delay_coeffs_ps[k];
    return acc;
}

// Measured wavelength after the linear time calibration that the pipeline
// applies: lambda_ref + (T(lambda) - t0) / D. The bend comes from the
// nonlinear residual of T.
double linear_calibrated_lambda(const FibreSpec& f, double lambda_true_nm) {
    if (f.group_delay_coeffs_ps.size() < 2 || f.group_delay_coeffs_ps[1] == 0.0)
        return lambda_true_nm; // no dispersion slope: calibration is the identity
    const double t = full_group_delay(f, lambda_true_nm);
    return f.lambda_ref_nm + (t - f.group_delay_coeffs_ps[0]) / f.group_delay_coeffs_ps[1];
}

struct StretchContext {
    const RotatedSpectrum& in;
    RotatedSpectrum& out;
    const PumpCompensationOptions& opts;
    double period_bins_hint;
};

// Stretch one row's fringe region about its centre by src-offset factor
// `alpha` (= f_ref / f_row).
void stretch_row(StretchContext& ctx, int r, double alpha) {
    const int n = ctx.in.values.cols();
    const auto row = ctx.in.values.row(r);

    // mask-aware row mean over the contiguous unmasked span
    int lo = -1, hi = -1;
    for (int c = 0; c < n; ++c) {
        if (!ctx.in.masked(r, c)) {
            if (lo < 0)
                lo = c;
            hi = c;
        }
    }
    if (lo < 0 || hi - lo + 1 < 8 || alpha == 1.0)
        return; // nothing to do

    ExactSum acc;
    for (int c = lo; c <= hi; ++c)
        acc.add(row[c]);
    const double mean = acc.result() / (hi - lo + 1);

    std::vector<double> env(n, 0.0);
    for (int c = lo; c <= hi; ++c)
        env[c] = std::fabs(row[c] - mean);
    env = smooth(env, std::max(4.0, ctx.period_bins_hint));
    const double peak = *std::max_element(env.begin(), env.end());
    if (peak <= 0.0)
        return;

    int first = lo, last = hi;
    while (first < hi && env[first] < ctx.opts.envelope_threshold * peak)
        ++first;
    while (last > lo && env[last] < ctx.opts.envelope_threshold * peak)
        --last;
    if (last - first < 8)
        return;
    const int centre = (first + last) / 2;

    for (int c = first; c <= last; ++c) {
        const double src = centre + (c - centre) * alpha;
        if (src < 0.0 || src > n - 1) {
            ctx.out.values(r, c) = 0.0;
            ctx.out.set_mask(r, c, true);
            continue;
        }
        const int i0 = std::min(static_cast<int>(std::floor(src)), n - 2);
        const double f = src - i0;
        if (ctx.in.masked(r, i0) || ctx.in.masked(r, i0 + 1)) {
            ctx.out.values(r, c) = 0.0;
            ctx.out.set_mask(r, c, true);
            continue;
        }
        ctx.out.values(r, c) = (1.0 - f) * row[i0] + f * row[i0 + 1];
        ctx.out.set_mask(r, c, false);
    }
}

} // namespace

void RotatedSpectrum::validate() const {
    if (values.rows() != v_axis.n_points || values.cols() != u_axis.n_points)
        throw std::invalid_argument("RotatedSpectrum: values shape does not match axes");
    if (mask.size() != values.size())
        throw std::invalid_argument("RotatedSpectrum: mask size mismatch");
    for (int r = 0; r < values.rows(); ++r)
        for (int c = 0; c < values.cols(); ++c)
            if (masked(r, c) && values(r, c) != 0.0)
                throw std::invalid_argument("RotatedSpectrum: masked bin with non-zero value");
}

RotatedSpectrum rotate45(const JointSpectrum& js) {
    js.validate();
    if (js.axis1.kind != AxisKind::wavelength || js.axis2.kind != AxisKind::wavelength)
        throw std::invalid_argument("rotate45: expects wavelength axes (calibrate arrival times first)");
    const double aspect = js.axis1.span() / js.axis2.span();
    if (aspect > 2.0 || aspect < 0.5)
        throw std::invalid_argument("rotate45: grid aspect ratio beyond 2x");

    const int n1 = js.axis1.n_points, n2 = js.axis2.n_points;
    const double nu1_min = wavelength_to_frequency(js.axis1.back());
    const double nu1_max = wavelength_to_frequency(js.axis1.start);
    const double nu2_min = wavelength_to_frequency(js.axis2.back());
    const double nu2_max = wavelength_to_frequency(js.axis2.start);

    const double u_lo = (nu1_min - nu2_max) / kSqrt2;
    const double u_hi = (nu1_max - nu2_min) / kSqrt2;
    const double v_lo = (nu1_min + nu2_min) / kSqrt2;
    const double v_hi = (nu1_max + nu2_max) / kSqrt2;

    const int n_out = odd_ceil(std::max(n1, n2) * kSqrt2);

    RotatedSpectrum rot;
    rot.u_axis = SpectralGrid::uniform(u_lo, (u_hi - u_lo) / (n_out - 1), n_out, AxisKind::difference_frequency);
    rot.v_axis = SpectralGrid::uniform(v_lo, (v_hi - v_lo) / (n_out - 1), n_out, AxisKind::sum_frequency);
    rot.values = Matrix(n_out, n_out);
    rot.mask.assign(static_cast<std::size_t>(n_out) * n_out, 1);

    parallel_for(n_out, [&](int r) {
        const double v = rot.v_axis.value(r);
        for (int c = 0; c < n_out; ++c) {
            const double u = rot.u_axis.value(c);
            const double nu1 = (v + u) / kSqrt2;
            const double nu2 = (v - u) / kSqrt2;
            if (nu1 <= 0.0 || nu2 <= 0.0)
                continue;
            const double idx1 = js.axis1.index_of(frequency_to_wavelength(nu1));
            const double idx2 = js.axis2.index_of(frequency_to_wavelength(nu2));
            const Bilinear b = locate(idx1, idx2, n1, n2);
            if (!b.inside)
                continue;
            rot.values(r, c) = sample(js.values, b);
            rot.set_mask(r, c, false);
        }
    });
    rot.provenance = js.provenance;
    rot.provenance.push_back("rotate45");
    return rot;
}

JointSpectrum derotate45(const RotatedSpectrum& rot, const SpectralGrid& axis1, const SpectralGrid& axis2) {
    if (axis1.kind != AxisKind::wavelength || axis2.kind != AxisKind::wavelength)
        throw std::invalid_argument("derotate45: target axes must be wavelength grids");
    JointSpectrum js;
    js.axis1 = axis1;
    js.axis2 = axis2;
    js.values = Matrix(axis1.n_points, axis2.n_points);
    const int nu_rows = rot.values.rows(), nu_cols = rot.values.cols();
    parallel_for(axis1.n_points, [&](int i) {
        const double nu1 = wavelength_to_frequency(axis1.value(i));
        for (int j = 0; j < axis2.n_points; ++j) {
            const double nu2 = wavelength_to_frequency(axis2.value(j));
            const double u = (nu1 - nu2) / kSqrt2;
            const double v = (nu1 + nu2) / kSqrt2;
            const Bilinear b = locate(rot.v_axis.index_of(v), rot.u_axis.index_of(u), nu_rows, nu_cols);
            if (!b.inside)
                continue;
            js.values(i, j) = sample(rot.values, b);
        }
    });
    js.provenance = rot.provenance;
    js.provenance.push_back("derotate45");
    return js;
}

ShiftVector fibre_shift_vector(const DetectionSpec& detection, const RotatedSpectrum& rot,
                               double lambda_ref_nm) {
    detection.validate();
    const double nu0 = wavelength_to_frequency(lambda_ref_nm);
    const int n_cols = rot.values.cols();
    const int n_rows = rot.values.rows();
    const double dv = rot.v_axis.step;

    // Measured rotated coordinates of the true ridge point parametrised by
    // u_true (the ridge is nu1 + nu2 = 2 nu0).
    auto measured_uv = [&](double u_true) -> std::pair<double, double> {
        const double nu1 = nu0 + u_true / kSqrt2;
        const double nu2 = nu0 - u_true / kSqrt2;
        const double m1 = linear_calibrated_lambda(detection.fibre1, frequency_to_wavelength(nu1));
        const double m2 = linear_calibrated_lambda(detection.fibre2, frequency_to_wavelength(nu2));
        const double mnu1 = wavelength_to_frequency(m1);
        const double mnu2 = wavelength_to_frequency(m2);
        return {(mnu1 - mnu2) / kSqrt2, (mnu1 + mnu2) / kSqrt2};
    };

    auto measured_u_or_nan = [&](double u_true) {
        try {
            return measured_uv(u_true).first;
        } catch (const std::exception&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };

    const double v_flat = kSqrt2 * nu0;
    ShiftVector sv;
    sv.shifts.resize(n_cols, 0);
    for (int c = 0; c < n_cols; ++c) {
        const double u_col = rot.u_axis.value(c);
        // find the ridge point whose measured u lands on this column
        const double bracket = 50.0 * rot.u_axis.step;
        double lo = u_col - bracket;
        double hi = u_col + bracket;
        const double flo = measured_u_or_nan(lo) - u_col;
        const double fhi = measured_u_or_nan(hi) - u_col;
        double u_true = u_col;
        if (std::isfinite(flo) && std::isfinite(fhi) && flo < 0.0 && fhi > 0.0) {
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = measured_u_or_nan(mid) - u_col;
                if (!std::isfinite(fm))
                    break;
                (fm < 0.0 ? lo : hi) = mid;
            }
            u_true = 0.5 * (lo + hi);
        }
        double v_meas;
        try {
            v_meas = measured_uv(u_true).second;
        } catch (const std::exception&) {
            continue; // ridge point outside the fibre validity range: no data there
        }
        const int shift = static_cast<int>(std::lround((v_flat - v_meas) / dv));
        if (std::abs(shift) >= n_rows)
            throw std::invalid_argument("fibre_shift_vector: shift exceeds the grid height");
        sv.shifts[c] = shift;
    }
    return sv;
}

RotatedSpectrum compensate_fibre(const RotatedSpectrum& rot, const ShiftVector& sv) {
    if (static_cast<int>(sv.shifts.size()) != rot.values.cols())
        throw std::invalid_argument("compensate_fibre: shift vector length mismatch");
    const int rows = rot.values.rows(), cols = rot.values.cols();
    RotatedSpectrum out = rot;
    for (int c = 0; c < cols; ++c) {
        const int s = ((sv.shifts[c] % rows) + rows) % rows;
        if (s == 0)
            continue;
        for (int r = 0; r < rows; ++r) {
            const int src = (r - s + rows) % rows;
            out.values(r, c) = rot.values(src, c);
            out.set_mask(r, c, rot.masked(src, c));
        }
    }
    out.provenance.push_back("compensate_fibre");
    return out;
}

RowFrequencyProfile estimate_row_frequencies(const RotatedSpectrum& rot) {
    const int rows = rot.values.rows(), cols = rot.values.cols();
    const double du = rot.u_axis.step;
    RowFrequencyProfile profile;
    profile.rows.resize(rows);
    std::vector<double> row_energy(rows, 0.0);

    parallel_for(rows, [&](int r) {
        int lo = -1, hi = -1;
        for (int c = 0; c < cols; ++c) {
            if (!rot.masked(r, c)) {
                if (lo < 0)
                    lo = c;
                hi = c;
            }
        }
        RowFrequency rf;
        const int len = hi - lo + 1;
        if (lo < 0 || len < 16) {
            profile.rows[r] = rf;
            return;
        }
        std::vector<double> x(len);
        for (int c = 0; c < len; ++c)
            x[c] = rot.values(r, lo + c);
        // remove the slow envelope so its spectral lobe cannot outgrow the
        // fringe peak
        const std::vector<double> baseline = smooth(x, len / 16.0);
        double energy = 0.0;
        for (int c = 0; c < len; ++c) {
            x[c] -= baseline[c];
            energy += x[c] * x[c];
        }
        if (energy <= 0.0) {
            profile.rows[r] = rf;
            return;
        }
        row_energy[r] = energy;
        const std::size_t padded = 8 * next_pow2(len);
        auto spectrum = fft_forward_real(x, padded);
        const std::size_t half = padded / 2;
        const std::size_t width = padded / static_cast<std::size_t>(len); // one natural bin
        const std::size_t guard = 2 * width; // skip the residual DC lobe
        std::size_t peak = guard;
        double peak_mag = 0.0;
        std::vector<double> mag(half, 0.0);
        for (std::size_t k = 1; k < half; ++k) {
            mag[k] = std::abs(spectrum[k]);
            if (k >= guard && mag[k] > peak_mag) {
                peak_mag = mag[k];
                peak = k;
            }
        }
        if (peak_mag <= 0.0) {
            profile.rows[r] = rf;
            return;
        }
        // quadratic sub-bin refinement on log magnitude
        double delta = 0.0;
        if (peak > 1 && peak + 1 < half && mag[peak - 1] > 0.0 && mag[peak + 1] > 0.0) {
            const double la = std::log(mag[peak - 1]);
            const double lb = std::log(mag[peak]);
            const double lc = std::log(mag[peak + 1]);
            const double denom = la - 2.0 * lb + lc;
            if (denom < 0.0)
                delta = 0.5 * (la - lc) / denom;
        }
        rf.fringe_frequency = (peak + delta) / (static_cast<double>(padded) * du);

        // energy fraction near the peak, in natural (unpadded) resolution
        double peak_energy = 0.0, total = 0.0;
        for (std::size_t k = guard; k < half; ++k) {
            total += mag[k] * mag[k];
            if (k + width >= peak && k <= peak + width)
                peak_energy += mag[k] * mag[k];
        }
        rf.confidence = total > 0.0 ? peak_energy / total : 0.0;
        profile.rows[r] = rf;
    });

    // weight by relative fringe energy: low-energy rows carry no usable
    // frequency and the most confident row sits at the envelope centre
    const double max_energy = *std::max_element(row_energy.begin(), row_energy.end());
    if (max_energy > 0.0) {
        for (int r = 0; r < rows; ++r) {
            if (row_energy[r] < 1e-9 * max_energy)
                profile.rows[r].confidence = 0.0;
            else
                profile.rows[r].confidence *= std::sqrt(row_energy[r] / max_energy);
        }
    }
    return profile;
}

double model_row_frequency(const RowStretchModel& model, double v_thz) {
    const double x = v_thz / kSqrt2 - model.center_frequency_thz;
    const double beta2_ps2 = model.beta2_fs2 * 1e-6;
    const double beta3_ps3 = model.beta3_fs3 * 1e-9;
    const double two_pi = 2.0 * kPi;
    return model.nominal_frequency + 2.0 * kSqrt2 * kPi * beta2_ps2 * x +
           two_pi * two_pi * beta3_ps3 * x * x / kSqrt2;
}

RotatedSpectrum compensate_pump(const RotatedSpectrum& rot, const RowFrequencyProfile& profile,
                                const PumpCompensationOptions& opts) {
    if (static_cast<int>(profile.rows.size()) != rot.values.rows())
        throw std::invalid_argument("compensate_pump: profile length mismatch");
    RotatedSpectrum out = rot;

    int ref = -1;
    double best = 0.0;
    for (std::size_t r = 0; r < profile.rows.size(); ++r) {
        if (profile.rows[r].confidence > best) {
            best = profile.rows[r].confidence;
            ref = static_cast<int>(r);
        }
    }
    if (ref < 0 || best < opts.confidence_min) {
        out.provenance.push_back("compensate_pump mode=data (no confident rows)");
        return out;
    }
    const double f_ref = profile.rows[ref].fringe_frequency;
    if (f_ref <= 0.0)
        throw std::invalid_argument("compensate_pump: reference row has zero fringe frequency");
    const double period_bins = 1.0 / (f_ref * rot.u_axis.step);

    StretchContext ctx{rot, out, opts, period_bins};
    for (int r = 0; r < rot.values.rows(); ++r) {
        const auto& rf = profile.rows[r];
        if (rf.confidence < opts.confidence_min)
            continue;
        if (rf.fringe_frequency <= 0.0)
            throw std::invalid_argument("compensate_pump: zero frequency on a confident row");
        stretch_row(ctx, r, f_ref / rf.fringe_frequency);
    }
    out.provenance.push_back("compensate_pump mode=data");
    return out;
}

RotatedSpectrum compensate_pump_model(const RotatedSpectrum& rot, const RowStretchModel& model,
                                      const PumpCompensationOptions& opts) {
    if (!(model.nominal_frequency > 0.0))
        throw std::invalid_argument("compensate_pump_model: nominal frequency must be > 0");
    RotatedSpectrum out = rot;
    // reference row: envelope centre, v = sqrt(2) nu0
    const double v_ref = kSqrt2 * model.center_frequency_thz;
    const double f_ref = model_row_frequency(model, v_ref);
    if (f_ref <= 0.0)
        throw std::invalid_argument("compensate_pump_model: model frequency non-positive at the centre row");
    const double period_bins = 1.0 / (f_ref * rot.u_axis.step);

    StretchContext ctx{rot, out, opts, period_bins};
    for (int r = 0; r < rot.values.rows(); ++r) {
        const double f_row = model_row_frequency(model, rot.v_axis.value(r));
        if (f_row <= 0.0)
            continue; // far outside the envelope; leave untouched
        stretch_row(ctx, r, f_ref / f_row);
    }
    out.provenance.push_back("compensate_pump mode=model");
    return out;
}

} // namespace qoct::preprocess
