#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "qoct/forward.hpp"
#include "qoct/preprocess.hpp"
#include "qoct/reconstruct.hpp"
#include "qoct/units.hpp"

using namespace qoct;
using namespace qoct::preprocess;
using namespace qoct::reconstruct;

namespace {

SourceSpec narrow_pump_source(double diagonal_fwhm_thz = 6.3) {
    SourceSpec src;
    src.center_wavelength_nm = 1550.0;
    src.pump_center_nm = 775.0;
    src.diagonal_fwhm_thz = diagonal_fwhm_thz;
    src.antidiagonal_fwhm_nm = 3.2;
    return src;
}

RotatedSpectrum simulate_rotated(const LayeredObject& object, const SourceSpec& src,
                                 double reference_delay_um, int n = 256,
                                 double blur_fwhm_nm = 0.0, double span_nm = 102.0) {
    DetectionSpec det;
    det.spectral_resolution_fwhm_nm = blur_fwhm_nm;
    forward::SimulationRequest req{src, object, det, reference_delay_um,
                                   make_grid(src.center_wavelength_nm, span_nm, n), 1.0, {}};
    return rotate45(forward::simulate_joint_spectrum(req));
}

double trace_fwhm(const std::vector<double>& axis, const std::vector<double>& y) {
    const auto it = std::max_element(y.begin(), y.end());
    const int p = static_cast<int>(it - y.begin());
    const double half = 0.5 * *it;
    int l = p;
    while (l > 0 && y[l] > half)
        --l;
    int r = p;
    while (r < static_cast<int>(y.size()) - 1 && y[r] > half)
        ++r;
    const double xl = axis[l] + (half - y[l]) / (y[l + 1] - y[l]) * (axis[l + 1] - axis[l]);
    const double xr = axis[r - 1] + (y[r - 1] - half) / (y[r - 1] - y[r]) * (axis[r] - axis[r - 1]);
    return xr - xl;
}

} // namespace

TEST_CASE("row-average and 2D-transform A-scans agree on random inputs") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> value(0.0, 5.0);
    for (int trial = 0; trial < 10; ++trial) {
        const int rows = 48 + static_cast<int>(rng() % 40);
        const int cols = 48 + static_cast<int>(rng() % 40);
        RotatedSpectrum rot;
        rot.u_axis = SpectralGrid::uniform(-5.0, 10.0 / (cols - 1), cols, AxisKind::difference_frequency);
        rot.v_axis = SpectralGrid::uniform(260.0, 20.0 / (rows - 1), rows, AxisKind::sum_frequency);
        rot.values = Matrix(rows, cols);
        rot.mask.assign(static_cast<std::size_t>(rows) * cols, 0);
        for (int r = 0; r < rows; ++r) {
            // random contiguous footprint per row, occasionally full
            int lo = static_cast<int>(rng() % 8);
            int hi = cols - 1 - static_cast<int>(rng() % 8);
            for (int c = 0; c < cols; ++c) {
                const bool m = c < lo || c > hi;
                rot.set_mask(r, c, m);
                rot.values(r, c) = m ? 0.0 : value(rng);
            }
        }
        AScan a = ascan_row_average(rot);
        AScan b = ascan_2dft_diagonal(rot);
        REQUIRE(a.amplitude.size() == b.amplitude.size());
        double peak = 0.0;
        for (double v : a.amplitude)
            peak = std::max(peak, v);
        for (std::size_t k = 0; k < a.amplitude.size(); ++k)
            CHECK(std::fabs(a.amplitude[k] - b.amplitude[k]) <= 1e-10 * peak);
    }
}

TEST_CASE("mirror A-scan peaks at the mirror depth with the closed-form width") {
    SourceSpec src = narrow_pump_source();
    // span covers +-3.7 sigma of the envelope so grid truncation cannot
    // broaden the measured width
    RotatedSpectrum rot = simulate_rotated(LayeredObject::mirror(78.0), src, 0.0, 512, 0.0, 160.0);
    AScan a = ascan_row_average(rot);
    PeakReport peak = measure_peak(a, {50.0, 110.0});
    CHECK(std::fabs(peak.position_um - 78.0) <= a.depth_step());
    CHECK(peak.fwhm_um == doctest::Approx(quantum_axial_fwhm_um(6.3)).epsilon(0.02));
    CHECK(peak.asymmetry > 0.8);
    CHECK(peak.asymmetry < 1.2);

    // constant spectrum: nothing left after DC removal
    RotatedSpectrum flat = rot;
    flat.values = Matrix(rot.values.rows(), rot.values.cols(), 2.0);
    flat.mask.assign(flat.mask.size(), 0);
    AScan zero = ascan_row_average(flat);
    for (double v : zero.amplitude)
        CHECK(v <= 1e-12);

    RotatedSpectrum masked = rot;
    masked.values = Matrix(rot.values.rows(), rot.values.cols(), 0.0);
    masked.mask.assign(masked.mask.size(), 1);
    CHECK_THROWS_AS(ascan_row_average(masked), std::invalid_argument);
    CHECK_THROWS_AS(ascan_2dft_diagonal(masked), std::invalid_argument);
}

TEST_CASE("glass A-scan shows structural peaks and both artefacts") {
    SourceSpec src = narrow_pump_source();
    LayeredObject glass;
    glass.interfaces = {{50.0, 0.2}, {200.0, 0.2}};
    RotatedSpectrum rot = simulate_rotated(glass, src, 0.0, 512);
    AScan a = ascan_row_average(rot);

    ArtefactReport report = predict_artefacts(glass, src, 0.0);
    REQUIRE(report.structural.size() == 2);
    REQUIRE(report.midpoint.size() == 1);
    REQUIRE(report.stationary.size() == 1);
    CHECK(report.midpoint[0].position_um == doctest::Approx(125.0));
    CHECK(report.stationary[0].position_um == doctest::Approx(75.0));

    for (double expected : {50.0, 200.0, 125.0, 75.0}) {
        PeakReport p = measure_peak(a, {expected - 12.0, expected + 12.0});
        CHECK(std::fabs(p.position_um - expected) <= a.depth_step());
    }

    match_artefacts(report, a, 5.0);
    REQUIRE(report.matches.size() == 4);
    for (const auto& m : report.matches)
        CHECK(m.matched);
}

TEST_CASE("fourier map element layout") {
    SourceSpec src = narrow_pump_source();

    // mirror: two symmetric elements on the central row at +-78 um
    RotatedSpectrum mrot = simulate_rotated(LayeredObject::mirror(78.0), src, 0.0, 256);
    FourierMap mmap = fourier_map(mrot);
    const int rows = mmap.values.rows(), cols = mmap.values.cols();

    auto value_near = [&](const FourierMap& map, double zu, double zv) {
        // max over a small neighbourhood of the (u,v) depth coordinates
        int best_c = 0, best_r = 0;
        double dc = 1e300, dr = 1e300;
        for (int c = 0; c < map.values.cols(); ++c)
            if (std::fabs(map.u_depth_um[c] - zu) < dc) {
                dc = std::fabs(map.u_depth_um[c] - zu);
                best_c = c;
            }
        for (int r = 0; r < map.values.rows(); ++r)
            if (std::fabs(map.v_depth_um[r] - zv) < dr) {
                dr = std::fabs(map.v_depth_um[r] - zv);
                best_r = r;
            }
        double v = 0.0;
        for (int r = std::max(0, best_r - 2); r <= std::min(map.values.rows() - 1, best_r + 2); ++r)
            for (int c = std::max(0, best_c - 2); c <= std::min(map.values.cols() - 1, best_c + 2); ++c)
                v = std::max(v, map.values(r, c));
        return v;
    };
    std::vector<double> sorted(mmap.values.flat().begin(), mmap.values.flat().end());
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double floor_m = 20.0 * sorted[sorted.size() / 2];
    CHECK(value_near(mmap, 78.0, 0.0) > floor_m);
    CHECK(value_near(mmap, -78.0, 0.0) > floor_m);

    // real input: the map is centrally symmetric
    const int rc = rows / 2, cc = cols / 2;
    for (int d = 3; d < rows / 2 - 2; d += 11)
        for (int e = 1; e < cols / 2 - 2; e += 17)
            CHECK(mmap.values(rc + d, cc + e) ==
                  doctest::Approx(mmap.values(rc - d, cc - e)).epsilon(1e-9));

    // glass: structural elements on the central row, artefact twins off it
    LayeredObject glass;
    glass.interfaces = {{50.0, 0.2}, {200.0, 0.2}};
    RotatedSpectrum grot = simulate_rotated(glass, src, 0.0, 256);
    FourierMap gmap = fourier_map(grot);
    std::vector<double> gsorted(gmap.values.flat().begin(), gmap.values.flat().end());
    std::nth_element(gsorted.begin(), gsorted.begin() + gsorted.size() / 2, gsorted.end());
    const double floor_g = 20.0 * gsorted[gsorted.size() / 2];
    CHECK(value_near(gmap, 50.0, 0.0) > floor_g);
    CHECK(value_near(gmap, 200.0, 0.0) > floor_g);
    CHECK(value_near(gmap, 125.0, 75.0) > floor_g);  // midpoint pair a/a'
    CHECK(value_near(gmap, 125.0, -75.0) > floor_g);
    CHECK(value_near(gmap, 75.0, 75.0) > floor_g);   // stationary pair b/b'
    CHECK(value_near(gmap, 75.0, -75.0) > floor_g);
}

TEST_CASE("measure_peak on a synthetic Gaussian") {
    AScan a;
    const int n = 2000;
    const double dz = 0.25;
    a.depth_um.resize(n);
    a.amplitude.resize(n);
    for (int i = 0; i < n; ++i) {
        a.depth_um[i] = i * dz;
        const double z = a.depth_um[i];
        a.amplitude[i] = 3.0 * std::exp(-4.0 * kLn2 * (z - 200.0) * (z - 200.0) / (12.0 * 12.0));
    }
    PeakReport p = measure_peak(a, {150.0, 250.0});
    CHECK(p.position_um == doctest::Approx(200.0).epsilon(1e-4));
    CHECK(p.fwhm_um == doctest::Approx(12.0).epsilon(0.01));
    CHECK(p.height == doctest::Approx(3.0).epsilon(1e-4));
    CHECK(p.asymmetry == doctest::Approx(1.0).epsilon(0.05));

    AScan flat;
    flat.depth_um = a.depth_um;
    flat.amplitude.assign(n, 1.0);
    CHECK_THROWS_AS(measure_peak(flat, {150.0, 250.0}), std::invalid_argument);
}

TEST_CASE("falloff analysis censoring and kernel scaling") {
    SourceSpec src = narrow_pump_source();
    auto sweep = [&](double blur_nm) {
        std::vector<std::pair<double, AScan>> ascans;
        for (double depth = 40.0; depth <= 360.0; depth += 40.0) {
            RotatedSpectrum rot =
                simulate_rotated(LayeredObject::mirror(depth), src, 0.0, 256, blur_nm, 160.0);
            ascans.push_back({depth, ascan_row_average(rot)});
        }
        return falloff_analysis(ascans);
    };

    // no kernel: heights stay flat, the range is censored
    FalloffReport flat = sweep(0.0);
    CHECK(flat.censored);
    CHECK(std::isinf(flat.six_db_range_um));

    // doubling the kernel width halves the range
    FalloffReport narrow = sweep(1.56);
    FalloffReport wide = sweep(3.12);
    CHECK(!narrow.censored);
    CHECK(!wide.censored);
    CHECK(narrow.six_db_range_um == doctest::Approx(2.0 * wide.six_db_range_um).epsilon(0.15));

    CHECK_THROWS_AS(falloff_analysis({}), std::invalid_argument);
}

TEST_CASE("artefact prediction") {
    SourceSpec src = narrow_pump_source();

    LayeredObject glass;
    glass.interfaces = {{50.0, 0.2}, {200.0, 0.2}};
    ArtefactReport g = predict_artefacts(glass, src, 0.0);
    const double dnu_a = src.antidiagonal_fwhm_thz();
    const double dtau = 150.0 / kC_um_ps;
    const double expected = std::exp(-std::pow(kPi * dnu_a * dtau, 2) / (4.0 * kLn2));
    CHECK(g.midpoint[0].suppression == doctest::Approx(expected).epsilon(1e-12));
    CHECK(g.stationary[0].suppression == doctest::Approx(expected).epsilon(1e-12));

    // a thicker layer at the same anti-diagonal width is suppressed harder
    LayeredObject plastic;
    plastic.interfaces = {{-260.0, 0.2}, {0.0, 0.2}};
    ArtefactReport p = predict_artefacts(plastic, src, 45.0);
    CHECK(p.midpoint[0].suppression < g.midpoint[0].suppression);
    CHECK(p.midpoint[0].position_um == doctest::Approx(-175.0));
    CHECK(p.stationary[0].position_um == doctest::Approx(130.0));

    // four interfaces: one midpoint and one stationary entry per pair
    LayeredObject stack;
    stack.interfaces = {{35.0, 0.2}, {185.0, 0.2}, {215.0, 0.2}, {365.0, 0.2}};
    ArtefactReport s = predict_artefacts(stack, src, 0.0);
    CHECK(s.structural.size() == 4);
    CHECK(s.midpoint.size() == 6);
    CHECK(s.stationary.size() == 6);
}

TEST_CASE("classical A-scan resolution and autocorrelation clutter") {
    forward::ClassicalSource laser{1550.0, bandwidth_thz_to_nm(7.6, 1550.0), 1.0};
    SpectralGrid grid = make_grid(1550.0, 160.0, 2048);

    forward::ClassicalSpectrum spec =
        forward::simulate_classical_fringes(laser, LayeredObject::mirror(78.0), 0.0, grid);
    AScan a = classical_ascan(spec);
    PeakReport p = measure_peak(a, {60.0, 96.0});
    CHECK(std::fabs(p.position_um - 78.0) <= a.depth_step());
    CHECK(p.fwhm_um == doctest::Approx(classical_axial_fwhm_um(7.6)).epsilon(0.02));

    // quantum beats classical by a factor of two at the same bandwidth
    SourceSpec src = narrow_pump_source(7.6);
    RotatedSpectrum rot = simulate_rotated(LayeredObject::mirror(78.0), src, 0.0, 512, 0.0, 160.0);
    PeakReport q = measure_peak(ascan_row_average(rot), {60.0, 96.0});
    CHECK(q.fwhm_um / p.fwhm_um == doctest::Approx(0.5).epsilon(0.02));

    // glass stack: structural peaks plus autocorrelation clutter at the
    // pairwise separations near the front
    LayeredObject stack;
    stack.interfaces = {{35.0, 0.2}, {185.0, 0.2}, {215.0, 0.2}, {365.0, 0.2}};
    forward::ClassicalSpectrum sspec =
        forward::simulate_classical_fringes(laser, stack, -400.0, grid);
    AScan sa = classical_ascan(sspec);
    for (double structural : {435.0, 585.0, 615.0, 765.0}) {
        PeakReport sp = measure_peak(sa, {structural - 14.0, structural + 14.0});
        CHECK(std::fabs(sp.position_um - structural) <= 2.0 * sa.depth_step());
    }
    for (double autocorr : {150.0, 180.0, 330.0}) {
        PeakReport ap = measure_peak(sa, {autocorr - 14.0, autocorr + 14.0});
        CHECK(std::fabs(ap.position_um - autocorr) <= 2.0 * sa.depth_step());
    }
}

TEST_CASE("depth linearity of the mirror peak") {
    SourceSpec src = narrow_pump_source();
    for (double z = 20.0; z <= 300.0; z += 40.0) {
        RotatedSpectrum rot = simulate_rotated(LayeredObject::mirror(z), src, 0.0, 256, 0.0, 160.0);
        AScan a = ascan_row_average(rot);
        PeakReport p = measure_peak(a, {z - 15.0, z + 15.0});
        CHECK(std::fabs(p.position_um - z) <= a.depth_step());
    }
}

TEST_CASE("time-domain dip width matches the Fourier-domain peak width") {
    SourceSpec src = narrow_pump_source();
    LayeredObject mirror = LayeredObject::mirror(78.0);
    DetectionSpec det;
    SpectralGrid grid = make_grid(1550.0, 160.0, 384);

    std::vector<double> positions;
    for (double z = 56.0; z <= 100.0; z += 1.0)
        positions.push_back(z);
    forward::TimeDomainTrace trace =
        forward::simulate_time_domain(src, mirror, det, grid, positions, 1.0);

    // dip: invert the trace
    std::vector<double> dip(trace.coincidence_rate.size());
    const double top = *std::max_element(trace.coincidence_rate.begin(), trace.coincidence_rate.end());
    for (std::size_t i = 0; i < dip.size(); ++i)
        dip[i] = top - trace.coincidence_rate[i];
    const double td_fwhm = trace_fwhm(positions, dip);

    RotatedSpectrum rot = simulate_rotated(mirror, src, 0.0, 384, 0.0, 160.0);
    PeakReport fd = measure_peak(ascan_row_average(rot), {60.0, 96.0});

    CHECK(td_fwhm == doctest::Approx(fd.fwhm_um).epsilon(0.02));
    CHECK(fd.fwhm_um == doctest::Approx(quantum_axial_fwhm_um(6.3)).epsilon(0.03));

    // the dip sits at the mirror position
    const auto it = std::max_element(dip.begin(), dip.end());
    CHECK(positions[it - dip.begin()] == doctest::Approx(78.0).epsilon(0.02));
}

TEST_CASE("third-order imbalance makes the peak one-sided") {
    SourceSpec src = narrow_pump_source(22.8);
    src.antidiagonal_fwhm_nm = 0.8; // narrowband pump
    LayeredObject mirror = LayeredObject::mirror(150.0);
    mirror.dispersion_center_nm = src.center_wavelength_nm;
    LayeredObject skewed = mirror;
    skewed.arm_imbalance.beta3_fs3 = 2.0e5;

    RotatedSpectrum clean = simulate_rotated(mirror, src, 0.0, 512, 0.0, 398.0);
    PeakReport p_clean = measure_peak(ascan_row_average(clean), {100.0, 200.0});
    CHECK(p_clean.asymmetry > 0.8);
    CHECK(p_clean.asymmetry < 1.2);

    RotatedSpectrum bent = simulate_rotated(skewed, src, 0.0, 512, 0.0, 398.0);
    PeakReport p_bent = measure_peak(ascan_row_average(bent), {100.0, 200.0});
    const double one_sidedness = std::max(p_bent.asymmetry, 1.0 / p_bent.asymmetry);
    CHECK(one_sidedness > 5.0);
}
