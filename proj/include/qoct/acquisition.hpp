#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qoct/types.hpp"

namespace qoct::acquisition {

// Frame: the part of the time-time histogram inside one coincidence window
// at fixed channel delays.
struct Frame {
    JointSpectrum histogram; // arrival_time axes
    double delay1_ps = 0.0;
    double delay2_ps = 0.0;
    double window_ps = 0.0;
    int index = 0;
};

struct StitchPlan {
    std::vector<Frame> frames;
    int overlap_bins = 0;
    std::vector<double> normalisation; // optional pre-scales, defaults to 1

    void validate() const;
};

// Group delay of a fibre at a wavelength: polynomial in (lambda - lambda_ref).
double group_delay(const FibreSpec& fibre, double lambda_nm);

// Effective linear dispersion slope that maps one frame span onto one
// coincidence window.
double calibrate_effective_dispersion(double frame_span_nm, double window_ps);

// Numerical inversion of the monotonic group-delay map (bisection to 1e-6 nm).
double wavelength_from_arrival(const FibreSpec& fibre, double t_ps);

// Mass-preserving rebin of a wavelength-axis joint spectrum onto uniform
// arrival-time axes through the two group-delay maps. Total counts are
// conserved; nonlinear fibre terms bend the histogram.
JointSpectrum to_time_histogram(const JointSpectrum& js, const DetectionSpec& detection,
                                double time_bin_ps);

// Crop of the time histogram to [d1, d1+window] x [d2, d2+window]; bins
// outside the window are dropped.
Frame select_frame(const JointSpectrum& hist, double delay1_ps, double delay2_ps, double window_ps);

// Gain-matches frames by least squares on their overlaps, averages the
// overlaps and returns the union histogram. Frames must share a common time
// raster. Fitted per-frame gains are reported through `fitted_gains`.
JointSpectrum stitch_frames(const StitchPlan& plan, std::vector<double>* fitted_gains = nullptr);

// Relabels uniform arrival-time axes as wavelength axes using the linear
// part of each fibre's group delay map. Values are untouched; residual fibre
// nonlinearity stays in the data as the bent ridge that the fibre
// compensation removes later.
JointSpectrum calibrate_wavelength_linear(const JointSpectrum& hist, const DetectionSpec& detection);

// -----------------------------------------------------------------------
// Event-stream import.
//
// Binary little-endian records, 9 bytes each, no padding:
//   offset 0  u8   channel
//   offset 1  u64  timestamp in ps
// Events on `trigger_channel` open a coincidence window; every pair of
// channel-1/channel-2 events whose offsets from the latest trigger fall in
// [d1, d1+window] x [d2, d2+window] fills one histogram bin.

struct EventRecord {
    std::uint8_t channel = 0;
    std::uint64_t timestamp_ps = 0;
};

std::vector<EventRecord> read_event_stream(const std::string& path);
void write_event_stream(const std::string& path, const std::vector<EventRecord>& events);

JointSpectrum histogram_events(const std::vector<EventRecord>& events, int trigger_channel,
                               int channel1, int channel2, double delay1_ps, double delay2_ps,
                               double window_ps, double time_bin_ps);

} // namespace qoct::acquisition
