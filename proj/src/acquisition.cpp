#include "qoct/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "qoct/units.hpp"

namespace qoct::acquisition {

namespace {

// Per-axis mass-preserving rebin: for every source bin, the list of target
// bins it overlaps and the fraction of its mass going there.
struct RebinMap {
    std::vector<std::vector<std::pair<int, double>>> weights; // per source bin
    int n_target = 0;
    double t_start = 0.0; // centre of the first target bin
};

RebinMap build_rebin_map(const FibreSpec& fibre, const SpectralGrid& axis, double time_bin_ps) {
    fibre.validate();
    const int n = axis.n_points;
    std::vector<double> edges(n + 1);
    for (int i = 0; i <= n; ++i) {
        const double lambda = axis.start + (i - 0.5) * axis.step;
        if (lambda < fibre.lambda_min_nm || lambda > fibre.lambda_max_nm)
            throw std::invalid_argument("to_time_histogram: wavelength outside the fibre validity range");
        edges[i] = group_delay(fibre, lambda);
    }
    const bool increasing = edges[1] > edges[0];
    for (int i = 1; i <= n; ++i) {
        if ((edges[i] > edges[i - 1]) != increasing || edges[i] == edges[i - 1])
            throw std::invalid_argument("to_time_histogram: group delay map is not monotonic over the grid");
    }

    const double t_lo = std::min(edges.front(), edges.back());
    const double t_hi = std::max(edges.front(), edges.back());
    RebinMap map;
    map.n_target = static_cast<int>(std::ceil((t_hi - t_lo) / time_bin_ps - 1e-9));
    map.n_target = std::max(map.n_target, 1);
    map.t_start = t_lo + 0.5 * time_bin_ps;
    map.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        const double a = std::min(edges[i], edges[i + 1]);
        const double b = std::max(edges[i], edges[i + 1]);
        const double width = b - a;
        int k_lo = static_cast<int>(std::floor((a - t_lo) / time_bin_ps));
        int k_hi = static_cast<int>(std::floor((b - t_lo) / time_bin_ps));
        k_lo = std::clamp(k_lo, 0, map.n_target - 1);
        k_hi = std::clamp(k_hi, 0, map.n_target - 1);
        for (int k = k_lo; k <= k_hi; ++k) {
            const double seg_lo = std::max(a, t_lo + k * time_bin_ps);
            const double seg_hi = std::min(b, t_lo + (k + 1) * time_bin_ps);
            if (seg_hi > seg_lo)
                map.weights[i].push_back({k, (seg_hi - seg_lo) / width});
        }
    }
    return map;
}

} // namespace

void StitchPlan::validate() const {
    if (frames.empty())
        throw std::invalid_argument("StitchPlan: needs at least one frame");
    if (overlap_bins < 0)
        throw std::invalid_argument("StitchPlan: overlap_bins must be >= 0");
    if (!normalisation.empty() && normalisation.size() != frames.size())
        throw std::invalid_argument("StitchPlan: normalisation length mismatch");
    for (double s : normalisation)
        if (!(s > 0.0))
            throw std::invalid_argument("StitchPlan: scale factors must be > 0");
    for (const auto& f : frames) {
        f.histogram.validate();
        if (f.histogram.axis1.kind != AxisKind::arrival_time ||
            f.histogram.axis2.kind != AxisKind::arrival_time)
            throw std::invalid_argument("StitchPlan: frames must be arrival-time histograms");
    }
}

double group_delay(const FibreSpec& fibre, double lambda_nm) {
    fibre.validate();
    if (lambda_nm < fibre.lambda_min_nm || lambda_nm > fibre.lambda_max_nm)
        throw std::invalid_argument("group_delay: wavelength outside the fibre validity range");
    const double d = lambda_nm - fibre.lambda_ref_nm;
    double acc = 0.0;
    for (std::size_t k = fibre.group_delay_coeffs_ps.size(); k-- > 0;)
        acc = acc * d + fibre.group_delay_coeffs_ps[k];
    return acc;
}

double calibrate_effective_dispersion(double frame_span_nm, double window_ps) {
    if (!(frame_span_nm > 0.0) || !(window_ps > 0.0))
        throw std::invalid_argument("calibrate_effective_dispersion: span and window must be > 0");
    return window_ps / frame_span_nm;
}

double wavelength_from_arrival(const FibreSpec& fibre, double t_ps) {
    fibre.validate();
    double lo = fibre.lambda_min_nm;
    double hi = fibre.lambda_max_nm;
    {
        const int probes = 64;
        const double dl = (hi - lo) / probes;
        double prev = group_delay(fibre, lo);
        const bool increasing = group_delay(fibre, lo + dl) > prev;
        for (int i = 1; i <= probes; ++i) {
            const double t = group_delay(fibre, lo + i * dl);
            if ((t > prev) != increasing)
                throw std::invalid_argument(
                    "wavelength_from_arrival: group delay not monotonic over the validity range");
            prev = t;
        }
    }
    double t_lo = group_delay(fibre, lo);
    double t_hi = group_delay(fibre, hi);
    if (t_lo > t_hi) {
        std::swap(lo, hi);
        std::swap(t_lo, t_hi);
    }
    if (t_ps < t_lo || t_ps > t_hi)
        throw std::out_of_range("wavelength_from_arrival: arrival time outside the group-delay image");
    while (std::fabs(hi - lo) > 1e-7) {
        const double mid = 0.5 * (lo + hi);
        if (group_delay(fibre, mid) < t_ps)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

JointSpectrum to_time_histogram(const JointSpectrum& js, const DetectionSpec& detection,
                                double time_bin_ps) {
    js.validate();
    if (js.axis1.kind != AxisKind::wavelength || js.axis2.kind != AxisKind::wavelength)
        throw std::invalid_argument("to_time_histogram: expects wavelength axes");
    if (!(time_bin_ps > 0.0))
        throw std::invalid_argument("to_time_histogram: time bin must be > 0");

    const RebinMap map1 = build_rebin_map(detection.fibre1, js.axis1, time_bin_ps);
    const RebinMap map2 = build_rebin_map(detection.fibre2, js.axis2, time_bin_ps);

    JointSpectrum out;
    out.axis1 = SpectralGrid::uniform(map1.t_start, time_bin_ps, map1.n_target, AxisKind::arrival_time);
    out.axis2 = SpectralGrid::uniform(map2.t_start, time_bin_ps, map2.n_target, AxisKind::arrival_time);
    out.values = Matrix(map1.n_target, map2.n_target);
    for (int i = 0; i < js.axis1.n_points; ++i) {
        for (int j = 0; j < js.axis2.n_points; ++j) {
            const double v = js.values(i, j);
            if (v == 0.0)
                continue;
            for (const auto& [ti, wi] : map1.weights[i])
                for (const auto& [tj, wj] : map2.weights[j])
                    out.values(ti, tj) += v * wi * wj;
        }
    }
    out.provenance = js.provenance;
    out.provenance.push_back("to_time_histogram");
    out.warnings = js.warnings;
    return out;
}

Frame select_frame(const JointSpectrum& hist, double delay1_ps, double delay2_ps, double window_ps) {
    hist.validate();
    if (hist.axis1.kind != AxisKind::arrival_time || hist.axis2.kind != AxisKind::arrival_time)
        throw std::invalid_argument("select_frame: expects an arrival-time histogram");
    if (!(window_ps > 0.0))
        throw std::invalid_argument("select_frame: window must be > 0");

    // half-open [d, d+window) so adjoining windows partition the histogram
    auto crop = [&](const SpectralGrid& axis, double d) -> std::pair<int, int> {
        int lo = axis.n_points; // sentinel
        int hi = -1;
        for (int i = 0; i < axis.n_points; ++i) {
            const double t = axis.value(i);
            if (t >= d && t < d + window_ps) {
                lo = std::min(lo, i);
                hi = std::max(hi, i);
            }
        }
        return {lo, hi};
    };
    const auto [lo1, hi1] = crop(hist.axis1, delay1_ps);
    const auto [lo2, hi2] = crop(hist.axis2, delay2_ps);
    if (hi1 < 0 || hi2 < 0 || lo1 > hi1 || lo2 > hi2)
        throw std::invalid_argument("select_frame: empty crop");

    Frame frame;
    frame.delay1_ps = delay1_ps;
    frame.delay2_ps = delay2_ps;
    frame.window_ps = window_ps;
    frame.histogram.axis1 =
        SpectralGrid::uniform(hist.axis1.value(lo1), hist.axis1.step, hi1 - lo1 + 1, AxisKind::arrival_time);
    frame.histogram.axis2 =
        SpectralGrid::uniform(hist.axis2.value(lo2), hist.axis2.step, hi2 - lo2 + 1, AxisKind::arrival_time);
    frame.histogram.values = Matrix(hi1 - lo1 + 1, hi2 - lo2 + 1);
    for (int i = lo1; i <= hi1; ++i)
        for (int j = lo2; j <= hi2; ++j)
            frame.histogram.values(i - lo1, j - lo2) = hist.values(i, j);
    frame.histogram.frame_meta = FrameMeta{delay1_ps, delay2_ps, window_ps};
    frame.histogram.provenance = hist.provenance;
    frame.histogram.provenance.push_back("select_frame");
    return frame;
}

JointSpectrum stitch_frames(const StitchPlan& plan, std::vector<double>* fitted_gains) {
    plan.validate();
    const std::size_t n_frames = plan.frames.size();
    const double step = plan.frames[0].histogram.axis1.step;
    for (const auto& f : plan.frames) {
        if (std::fabs(f.histogram.axis1.step - step) > 1e-9 * step ||
            std::fabs(f.histogram.axis2.step - step) > 1e-9 * step)
            throw std::invalid_argument("stitch_frames: inconsistent bin sizes");
    }

    // canonical processing order, so stitching is invariant to input order
    std::vector<std::size_t> order(n_frames);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& fa = plan.frames[a].histogram;
        const auto& fb = plan.frames[b].histogram;
        if (fa.axis1.start != fb.axis1.start)
            return fa.axis1.start < fb.axis1.start;
        return fa.axis2.start < fb.axis2.start;
    });

    double start1 = 1e300, start2 = 1e300, end1 = -1e300, end2 = -1e300;
    for (const auto& f : plan.frames) {
        start1 = std::min(start1, f.histogram.axis1.start);
        start2 = std::min(start2, f.histogram.axis2.start);
        end1 = std::max(end1, f.histogram.axis1.back());
        end2 = std::max(end2, f.histogram.axis2.back());
    }
    auto offset_of = [&](double start, double origin) {
        const double raw = (start - origin) / step;
        const long idx = std::lround(raw);
        if (std::fabs(raw - idx) > 1e-6)
            throw std::invalid_argument("stitch_frames: frames are not on a common time raster");
        return static_cast<int>(idx);
    };
    const int n1 = offset_of(end1, start1) + 1;
    const int n2 = offset_of(end2, start2) + 1;

    Matrix acc(n1, n2);
    Matrix weight(n1, n2);
    std::vector<double> gains(n_frames, 1.0);

    for (std::size_t rank = 0; rank < n_frames; ++rank) {
        const std::size_t idx = order[rank];
        const auto& frame = plan.frames[idx].histogram;
        const double prescale = plan.normalisation.empty() ? 1.0 : plan.normalisation[idx];
        const int o1 = offset_of(frame.axis1.start, start1);
        const int o2 = offset_of(frame.axis2.start, start2);

        // least-squares gain against what is already on the canvas
        double num = 0.0, den = 0.0;
        int overlap1 = 0, overlap2 = 0;
        std::vector<bool> row_hit(frame.values.rows(), false), col_hit(frame.values.cols(), false);
        for (int i = 0; i < frame.values.rows(); ++i) {
            for (int j = 0; j < frame.values.cols(); ++j) {
                if (weight(o1 + i, o2 + j) > 0.0) {
                    const double composite = acc(o1 + i, o2 + j) / weight(o1 + i, o2 + j);
                    const double v = prescale * frame.values(i, j);
                    num += composite * v;
                    den += v * v;
                    row_hit[i] = true;
                    col_hit[j] = true;
                }
            }
        }
        overlap1 = static_cast<int>(std::count(row_hit.begin(), row_hit.end(), true));
        overlap2 = static_cast<int>(std::count(col_hit.begin(), col_hit.end(), true));
        if (rank > 0 && plan.overlap_bins > 0 &&
            (overlap1 < plan.overlap_bins || overlap2 < plan.overlap_bins))
            throw std::invalid_argument("stitch_frames: adjacent frames share fewer bins than overlap_bins");

        double gain = 1.0;
        if (rank > 0 && den > 0.0)
            gain = num / den;
        if (!(gain > 0.0))
            gain = 1.0;
        gains[idx] = gain * prescale;

        for (int i = 0; i < frame.values.rows(); ++i) {
            for (int j = 0; j < frame.values.cols(); ++j) {
                acc(o1 + i, o2 + j) += gain * prescale * frame.values(i, j);
                weight(o1 + i, o2 + j) += 1.0;
            }
        }
    }

    JointSpectrum out;
    out.axis1 = SpectralGrid::uniform(start1, step, n1, AxisKind::arrival_time);
    out.axis2 = SpectralGrid::uniform(start2, step, n2, AxisKind::arrival_time);
    out.values = Matrix(n1, n2);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j)
            out.values(i, j) = weight(i, j) > 0.0 ? acc(i, j) / weight(i, j) : 0.0;
    out.provenance.push_back("stitch_frames");
    if (fitted_gains)
        *fitted_gains = gains;
    return out;
}

JointSpectrum calibrate_wavelength_linear(const JointSpectrum& hist, const DetectionSpec& detection) {
    hist.validate();
    if (hist.axis1.kind != AxisKind::arrival_time || hist.axis2.kind != AxisKind::arrival_time)
        throw std::invalid_argument("calibrate_wavelength_linear: expects arrival-time axes");
    auto axis_for = [&](const FibreSpec& fibre, const SpectralGrid& t_axis) {
        if (fibre.group_delay_coeffs_ps.size() < 2 || !(fibre.group_delay_coeffs_ps[1] > 0.0))
            throw std::invalid_argument("calibrate_wavelength_linear: fibre needs a positive dispersion slope");
        const double t0 = fibre.group_delay_coeffs_ps[0];
        const double slope = fibre.group_delay_coeffs_ps[1];
        const double start = fibre.lambda_ref_nm + (t_axis.start - t0) / slope;
        return SpectralGrid::uniform(start, t_axis.step / slope, t_axis.n_points, AxisKind::wavelength);
    };
    JointSpectrum out = hist;
    out.axis1 = axis_for(detection.fibre1, hist.axis1);
    out.axis2 = axis_for(detection.fibre2, hist.axis2);
    out.provenance.push_back("calibrate_wavelength_linear");
    return out;
}

std::vector<EventRecord> read_event_stream(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("read_event_stream: cannot open " + path);
    in.seekg(0, std::ios::end);
    const std::streamoff bytes = in.tellg();
    in.seekg(0);
    if (bytes % 9 != 0)
        throw std::runtime_error("read_event_stream: size is not a multiple of the 9-byte record");
    std::vector<EventRecord> events(static_cast<std::size_t>(bytes / 9));
    std::vector<unsigned char> buf(static_cast<std::size_t>(bytes));
    in.read(reinterpret_cast<char*>(buf.data()), bytes);
    for (std::size_t i = 0; i < events.size(); ++i) {
        const unsigned char* p = buf.data() + i * 9;
        events[i].channel = p[0];
        std::uint64_t t = 0;
        for (int b = 7; b >= 0; --b)
            t = (t << 8) | p[1 + b];
        events[i].timestamp_ps = t;
    }
    return events;
}

void write_event_stream(const std::string& path, const std::vector<EventRecord>& events) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("write_event_stream: cannot open " + path);
    std::vector<unsigned char> buf(events.size() * 9);
    for (std::size_t i = 0; i < events.size(); ++i) {
        unsigned char* p = buf.data() + i * 9;
        p[0] = events[i].channel;
        std::uint64_t t = events[i].timestamp_ps;
        for (int b = 0; b < 8; ++b) {
            p[1 + b] = static_cast<unsigned char>(t & 0xFF);
            t >>= 8;
        }
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

JointSpectrum histogram_events(const std::vector<EventRecord>& events, int trigger_channel,
                               int channel1, int channel2, double delay1_ps, double delay2_ps,
                               double window_ps, double time_bin_ps) {
    if (!(window_ps > 0.0) || !(time_bin_ps > 0.0) || time_bin_ps > window_ps)
        throw std::invalid_argument("histogram_events: invalid window or bin");
    const int n = static_cast<int>(std::ceil(window_ps / time_bin_ps - 1e-9));

    JointSpectrum out;
    out.axis1 = SpectralGrid::uniform(delay1_ps + 0.5 * time_bin_ps, time_bin_ps, n, AxisKind::arrival_time);
    out.axis2 = SpectralGrid::uniform(delay2_ps + 0.5 * time_bin_ps, time_bin_ps, n, AxisKind::arrival_time);
    out.values = Matrix(n, n);
    out.frame_meta = FrameMeta{delay1_ps, delay2_ps, window_ps};

    std::vector<EventRecord> sorted = events;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const EventRecord& a, const EventRecord& b) { return a.timestamp_ps < b.timestamp_ps; });

    bool have_trigger = false;
    std::uint64_t trigger = 0;
    std::vector<int> bins1, bins2;
    auto flush = [&]() {
        for (int b1 : bins1)
            for (int b2 : bins2)
                out.values(b1, b2) += 1.0;
        bins1.clear();
        bins2.clear();
    };
    for (const auto& ev : sorted) {
        if (ev.channel == trigger_channel) {
            flush();
            trigger = ev.timestamp_ps;
            have_trigger = true;
            continue;
        }
        if (!have_trigger)
            continue;
        const double offset = static_cast<double>(ev.timestamp_ps - trigger);
        if (ev.channel == channel1) {
            const int b = static_cast<int>(std::floor((offset - delay1_ps) / time_bin_ps));
            if (b >= 0 && b < n)
                bins1.push_back(b);
        } else if (ev.channel == channel2) {
            const int b = static_cast<int>(std::floor((offset - delay2_ps) / time_bin_ps));
            if (b >= 0 && b < n)
                bins2.push_back(b);
        }
    }
    flush();
    out.provenance.push_back("histogram_events");
    return out;
}

} // namespace qoct::acquisition
