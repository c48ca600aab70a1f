#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "qoct/acquisition.hpp"
#include "qoct/exact_sum.hpp"
#include "qoct/forward.hpp"
#include "qoct/preprocess.hpp"
#include "qoct/reconstruct.hpp"
#include "qoct/units.hpp"

using namespace qoct;
using namespace qoct::preprocess;

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

SourceSpec broad_pump_source() {
    SourceSpec src;
    src.center_wavelength_nm = 1550.0;
    src.pump_center_nm = 775.0;
    src.diagonal_fwhm_thz = 6.3;
    src.antidiagonal_fwhm_nm = 3.2;
    return src;
}

JointSpectrum mirror_spectrum(double z_um, const SourceSpec& src, int n = 256,
                              double beta2_arm_fs2 = 0.0, double beta3_arm_fs3 = 0.0) {
    LayeredObject mirror = LayeredObject::mirror(z_um);
    mirror.dispersion_center_nm = src.center_wavelength_nm;
    mirror.arm_imbalance = {beta2_arm_fs2, beta3_arm_fs3};
    forward::SimulationRequest req{src, mirror, DetectionSpec{}, 0.0,
                                   make_grid(src.center_wavelength_nm, 102.0, n), 1.0, {}};
    return forward::simulate_joint_spectrum(req);
}

} // namespace

TEST_CASE("rotate45 geometry") {
    SpectralGrid grid = make_grid(1550.0, 102.0, 129);

    // a function of (nu1 - nu2) rotates into v-independent rows
    JointSpectrum js;
    js.axis1 = grid;
    js.axis2 = grid;
    js.values = Matrix(129, 129);
    for (int i = 0; i < 129; ++i) {
        for (int j = 0; j < 129; ++j) {
            const double d = wavelength_to_frequency(grid.value(i)) - wavelength_to_frequency(grid.value(j));
            js.values(i, j) = std::exp(-d * d / 18.0);
        }
    }
    RotatedSpectrum rot = rotate45(js);
    CHECK(rot.u_axis.kind == AxisKind::difference_frequency);
    CHECK(rot.v_axis.kind == AxisKind::sum_frequency);

    const int centre_row = rot.values.rows() / 2;
    for (int c = 0; c < rot.values.cols(); c += 5) {
        if (rot.masked(centre_row, c))
            continue;
        const double expected = rot.values(centre_row, c);
        for (int r = 0; r < rot.values.rows(); r += 7) {
            if (rot.masked(r, c))
                continue;
            CHECK(rot.values(r, c) == doctest::Approx(expected).epsilon(2e-3));
        }
    }

    // a delta lands at its rotated coordinates
    JointSpectrum delta = js;
    delta.values = Matrix(129, 129);
    delta.values(64, 64) = 1.0; // grid centre: u = 0, v = sqrt(2) nu0
    RotatedSpectrum rd = rotate45(delta);
    int best_r = 0, best_c = 0;
    double best = -1.0;
    for (int r = 0; r < rd.values.rows(); ++r)
        for (int c = 0; c < rd.values.cols(); ++c)
            if (rd.values(r, c) > best) {
                best = rd.values(r, c);
                best_r = r;
                best_c = c;
            }
    const double nu0 = wavelength_to_frequency(grid.value(64));
    CHECK(std::fabs(rd.u_axis.value(best_c) - 0.0) <= rd.u_axis.step);
    CHECK(std::fabs(rd.v_axis.value(best_r) - kSqrt2 * nu0) <= rd.v_axis.step);

    // aspect guard
    JointSpectrum skewed = js;
    skewed.axis2 = make_grid(1550.0, 30.0, 129);
    CHECK_THROWS_AS(rotate45(skewed), std::invalid_argument);
}

TEST_CASE("rotate45 conserves intensity for smooth symmetric input") {
    SourceSpec src = broad_pump_source();
    src.antidiagonal_fwhm_nm = 12.0; // well resolved on the 0.4 nm grid
    JointSpectrum js = forward::joint_envelope(src, make_grid(1550.0, 102.0, 256));
    RotatedSpectrum rot = rotate45(js);

    // integrate both representations (frequency measure on the source side)
    double src_integral = 0.0;
    for (int i = 0; i < 256; ++i) {
        const double l1 = js.axis1.value(i);
        const double dnu1 = kC_nm_thz / (l1 * l1) * js.axis1.step;
        for (int j = 0; j < 256; ++j) {
            const double l2 = js.axis2.value(j);
            const double dnu2 = kC_nm_thz / (l2 * l2) * js.axis2.step;
            src_integral += js.values(i, j) * dnu1 * dnu2;
        }
    }
    double rot_integral = 0.0;
    for (int r = 0; r < rot.values.rows(); ++r)
        for (int c = 0; c < rot.values.cols(); ++c)
            rot_integral += rot.values(r, c);
    rot_integral *= rot.u_axis.step * rot.v_axis.step;
    CHECK(rot_integral == doctest::Approx(src_integral).epsilon(0.01));

    // inverse resampling returns the unmasked region within 1e-3 relative
    JointSpectrum back = derotate45(rot, js.axis1, js.axis2);
    double peak = 0.0;
    for (double v : js.values.flat())
        peak = std::max(peak, v);
    for (int i = 4; i < 252; i += 3) {
        for (int j = 4; j < 252; j += 3) {
            CHECK(std::fabs(back.values(i, j) - js.values(i, j)) <= 1e-3 * peak);
        }
    }
}

TEST_CASE("mirror joint spectrum rotates into uniform-frequency rows") {
    SourceSpec src = broad_pump_source();
    JointSpectrum js = mirror_spectrum(78.0, src);
    RotatedSpectrum rot = rotate45(js);
    RowFrequencyProfile profile = estimate_row_frequencies(rot);

    const double f_expected = kSqrt2 * 2.0 * 78.0 / kC_um_ps; // cycles per THz of u
    int confident = 0;
    for (const auto& row : profile.rows) {
        if (row.confidence > 0.5) {
            ++confident;
            CHECK(row.fringe_frequency == doctest::Approx(f_expected).epsilon(5e-3));
        }
    }
    CHECK(confident > 5);
}

TEST_CASE("fibre shift vector straightens the bent ridge") {
    FibreSpec quad;
    quad.group_delay_coeffs_ps = {0.0, 122.549, 0.14}; // calibrated slope + S/2 (0.056 ps/nm^2/km x 5 km / 2)
    quad.lambda_ref_nm = 1550.0;
    quad.lambda_min_nm = 1200.0;
    quad.lambda_max_nm = 1900.0;
    DetectionSpec det;
    det.fibre1 = quad;
    det.fibre2 = quad;

    // purely linear fibres give a zero shift vector
    DetectionSpec lin = det;
    lin.fibre1.group_delay_coeffs_ps = {0.0, 122.549};
    lin.fibre2.group_delay_coeffs_ps = {0.0, 122.549};

    SourceSpec src = broad_pump_source();
    src.diagonal_fwhm_thz = 20.0;
    src.antidiagonal_fwhm_nm = 6.0;
    SpectralGrid grid = make_grid(1550.0, 398.0, 512);
    LayeredObject mirror = LayeredObject::mirror(120.0);
    forward::SimulationRequest req{src, mirror, det, 0.0, grid, 1.0, {}};
    JointSpectrum truth = forward::simulate_joint_spectrum(req);

    JointSpectrum hist = acquisition::to_time_histogram(truth, det, 122.549 * grid.step);
    JointSpectrum measured = acquisition::calibrate_wavelength_linear(hist, det);
    RotatedSpectrum rot = rotate45(measured);

    ShiftVector zero = fibre_shift_vector(lin, rot, 1550.0);
    CHECK(std::all_of(zero.shifts.begin(), zero.shifts.end(), [](int s) { return s == 0; }));

    ShiftVector sv = fibre_shift_vector(det, rot, 1550.0);
    CHECK(std::any_of(sv.shifts.begin(), sv.shifts.end(), [](int s) { return s != 0; }));

    // sign flip of the quadratic term negates the shifts on the data-bearing
    // columns (far grid corners pick up a second-order, sign-even residual
    // of the nu(lambda) nonlinearity)
    DetectionSpec flipped = det;
    flipped.fibre1.group_delay_coeffs_ps[2] *= -1.0;
    flipped.fibre2.group_delay_coeffs_ps[2] *= -1.0;
    ShiftVector neg = fibre_shift_vector(flipped, rot, 1550.0);
    for (std::size_t c = 0; c < sv.shifts.size(); ++c) {
        if (std::fabs(rot.u_axis.value(static_cast<int>(c))) > 15.0)
            continue;
        CHECK(std::abs(neg.shifts[c] + sv.shifts[c]) <= 1);
    }

    // oracle: the measured ridge centroid matches the predicted shifts within
    // a bin and a half, on columns carrying real fringe mass
    const double v_flat = kSqrt2 * wavelength_to_frequency(1550.0);
    std::vector<double> col_mass(rot.values.cols(), 0.0);
    std::vector<double> col_centroid(rot.values.cols(), 0.0);
    for (int c = 0; c < rot.values.cols(); ++c) {
        for (int r = 0; r < rot.values.rows(); ++r) {
            const double v = rot.values(r, c);
            col_mass[c] += v;
            col_centroid[c] += v * rot.v_axis.value(r);
        }
    }
    const double mass_peak = *std::max_element(col_mass.begin(), col_mass.end());
    // residual = measured ridge offset minus what the rolls will undo; the
    // bend shape must agree within a bin once the common half-bin alignment
    // offset of the time raster is removed
    std::vector<double> residual;
    for (int c = 0; c < rot.values.cols(); ++c) {
        if (col_mass[c] < 0.45 * mass_peak)
            continue; // near fringe minima the column centroid no longer tracks the ridge
        const double centroid = col_centroid[c] / col_mass[c];
        const double predicted_offset = -sv.shifts[c] * rot.v_axis.step; // roll undoes the ridge offset
        residual.push_back((centroid - v_flat) - predicted_offset);
    }
    REQUIRE(residual.size() > 30);
    const double common = exact_mean(residual);
    for (double r : residual)
        CHECK(std::fabs(r - common) <= 2.0 * rot.v_axis.step);

    // rolling columns straightens the ridge and sharpens the 2D transform
    // (peak height / total energy of the map, away from the DC row)
    RotatedSpectrum straight = compensate_fibre(rot, sv);
    auto sharpness = [](const RotatedSpectrum& r) {
        reconstruct::FourierMap map = reconstruct::fourier_map(r);
        const int rows = map.values.rows(), cols = map.values.cols();
        double peak = 0.0, total = 0.0;
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) {
                const double v = map.values(i, j);
                total += v * v;
                if (std::abs(i - rows / 2) > 3 || std::abs(j - cols / 2) > 3)
                    peak = std::max(peak, v);
            }
        }
        return peak * peak / total;
    };
    CHECK(sharpness(straight) > 1.1 * sharpness(rot));
}

TEST_CASE("compensate_fibre is exact bookkeeping") {
    SourceSpec src = broad_pump_source();
    JointSpectrum js = mirror_spectrum(60.0, src, 128);
    RotatedSpectrum rot = rotate45(js);

    ShiftVector zero;
    zero.shifts.assign(rot.values.cols(), 0);
    RotatedSpectrum same = compensate_fibre(rot, zero);
    CHECK(same.values == rot.values);

    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> dist(-40, 40);
    ShiftVector sv;
    sv.shifts.resize(rot.values.cols());
    for (int& s : sv.shifts)
        s = dist(rng);
    RotatedSpectrum rolled = compensate_fibre(rot, sv);

    // per-column means are preserved bit for bit
    for (int c = 0; c < rot.values.cols(); c += 3) {
        ExactSum a, b;
        for (int r = 0; r < rot.values.rows(); ++r) {
            a.add(rot.values(r, c));
            b.add(rolled.values(r, c));
        }
        CHECK(a.result() == b.result());
    }

    ShiftVector bad;
    bad.shifts.assign(3, 0);
    CHECK_THROWS_AS(compensate_fibre(rot, bad), std::invalid_argument);
}

TEST_CASE("row frequency estimation on constructed rows") {
    // rows cos(2 pi f_v u) with f_v linear in the row index
    const int n = 257;
    RotatedSpectrum rot;
    rot.u_axis = SpectralGrid::uniform(-8.0, 16.0 / (n - 1), n, AxisKind::difference_frequency);
    rot.v_axis = SpectralGrid::uniform(270.0, 10.0 / (n - 1), n, AxisKind::sum_frequency);
    rot.values = Matrix(n, n);
    rot.mask.assign(static_cast<std::size_t>(n) * n, 0);
    std::vector<double> truth(n);
    for (int r = 0; r < n; ++r) {
        truth[r] = 0.8 + 0.4 * r / (n - 1.0);
        for (int c = 0; c < n; ++c) {
            const double u = rot.u_axis.value(c);
            const double envelope = std::exp(-u * u / 20.0);
            rot.values(r, c) = envelope * (1.0 + std::cos(2.0 * kPi * truth[r] * u));
        }
    }
    RowFrequencyProfile profile = estimate_row_frequencies(rot);
    for (int r = 0; r < n; r += 5) {
        CHECK(profile.rows[r].confidence > 0.5);
        CHECK(profile.rows[r].fringe_frequency == doctest::Approx(truth[r]).epsilon(2e-3));
    }

    // constant rows carry no fringe information
    RotatedSpectrum flat = rot;
    flat.values = Matrix(n, n, 1.0);
    RowFrequencyProfile none = estimate_row_frequencies(flat);
    for (int r = 0; r < n; r += 17)
        CHECK(none.rows[r].confidence == 0.0);
}

TEST_CASE("row frequency slope follows the arm-imbalance model") {
    SourceSpec src = broad_pump_source();
    const double beta2 = 16000.0;
    JointSpectrum js = mirror_spectrum(150.0, src, 384, beta2);
    RotatedSpectrum rot = rotate45(js);
    RowFrequencyProfile profile = estimate_row_frequencies(rot);

    RowStretchModel model;
    model.nominal_frequency = kSqrt2 * 2.0 * 150.0 / kC_um_ps;
    model.beta2_fs2 = beta2;
    model.center_frequency_thz = src.center_frequency_thz();

    int checked = 0;
    for (int r = 0; r < rot.values.rows(); ++r) {
        if (profile.rows[r].confidence < 0.5)
            continue;
        const double expected = model_row_frequency(model, rot.v_axis.value(r));
        CHECK(profile.rows[r].fringe_frequency == doctest::Approx(expected).epsilon(5e-3));
        ++checked;
    }
    CHECK(checked > 5);
}

TEST_CASE("pump compensation equalises row frequencies") {
    SourceSpec src = broad_pump_source();
    const double beta2 = 16000.0;
    JointSpectrum js = mirror_spectrum(150.0, src, 384, beta2);
    RotatedSpectrum rot = rotate45(js);

    // a profile with one common frequency stretches nothing: exact identity
    JointSpectrum uniform_js = mirror_spectrum(150.0, src, 256);
    RotatedSpectrum uniform = rotate45(uniform_js);
    RowFrequencyProfile uniform_profile;
    uniform_profile.rows.assign(uniform.values.rows(), RowFrequency{0.7, 1.0});
    RotatedSpectrum unchanged = compensate_pump(uniform, uniform_profile);
    double peak = 0.0;
    for (double v : uniform.values.flat())
        peak = std::max(peak, v);
    for (int r = 0; r < uniform.values.rows(); r += 3)
        for (int c = 0; c < uniform.values.cols(); c += 3)
            CHECK(std::fabs(unchanged.values(r, c) - uniform.values(r, c)) <= 1e-10 * peak);

    RowFrequencyProfile before = estimate_row_frequencies(rot);
    RotatedSpectrum comp = compensate_pump(rot, before);
    RowFrequencyProfile after = estimate_row_frequencies(comp);

    double f_ref = 0.0, best = 0.0;
    for (const auto& row : after.rows) {
        if (row.confidence > best) {
            best = row.confidence;
            f_ref = row.fringe_frequency;
        }
    }
    double spread_before = 0.0, spread_after = 0.0;
    int counted = 0;
    for (std::size_t r = 0; r < after.rows.size(); ++r) {
        if (before.rows[r].confidence < 0.5 || after.rows[r].confidence < 0.5)
            continue;
        spread_before = std::max(spread_before, std::fabs(before.rows[r].fringe_frequency - f_ref) / f_ref);
        spread_after = std::max(spread_after, std::fabs(after.rows[r].fringe_frequency - f_ref) / f_ref);
        ++counted;
    }
    CHECK(counted > 5);
    CHECK(spread_before > 0.015);  // the imbalance visibly varies the rows
    CHECK(spread_after < 0.005);   // equalised to 0.5%

    // intensity is preserved within 1%
    double sum_before = 0.0, sum_after = 0.0;
    for (double v : rot.values.flat())
        sum_before += v;
    for (double v : comp.values.flat())
        sum_after += v;
    CHECK(sum_after == doctest::Approx(sum_before).epsilon(0.01));

    // model-driven variant agrees with the data-driven one
    RowStretchModel model;
    model.nominal_frequency = kSqrt2 * 2.0 * 150.0 / kC_um_ps;
    model.beta2_fs2 = beta2;
    model.center_frequency_thz = src.center_frequency_thz();
    RotatedSpectrum comp_model = compensate_pump_model(rot, model);
    RowFrequencyProfile after_model = estimate_row_frequencies(comp_model);
    for (std::size_t r = 0; r < after_model.rows.size(); ++r) {
        if (after_model.rows[r].confidence < 0.5)
            continue;
        CHECK(after_model.rows[r].fringe_frequency == doctest::Approx(f_ref).epsilon(0.005));
    }

    // row-averaged fringe visibility at the envelope edge strictly increases
    auto edge_visibility = [](const RotatedSpectrum& r) {
        std::vector<double> m(r.values.cols(), 0.0);
        for (int c = 0; c < r.values.cols(); ++c) {
            double acc = 0.0;
            int cnt = 0;
            for (int v = 0; v < r.values.rows(); ++v)
                if (!r.masked(v, c)) {
                    acc += r.values(v, c);
                    ++cnt;
                }
            m[c] = cnt ? acc / cnt : 0.0;
        }
        // fringe amplitude where the envelope has dropped to ~20% of max
        const double peak_m = *std::max_element(m.begin(), m.end());
        const int centre = static_cast<int>(std::max_element(m.begin(), m.end()) - m.begin());
        int edge = centre;
        while (edge + 1 < static_cast<int>(m.size()) && m[edge] > 0.2 * peak_m)
            ++edge;
        double lo = 1e300, hi = 0.0;
        for (int c = std::max(0, edge - 20); c <= std::min<int>(m.size() - 1, edge + 20); ++c) {
            lo = std::min(lo, m[c]);
            hi = std::max(hi, m[c]);
        }
        return (hi - lo) / (hi + lo + 1e-300);
    };
    CHECK(edge_visibility(comp) > edge_visibility(rot));
}
