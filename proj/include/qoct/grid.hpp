#pragma once

#include <string>

namespace qoct {

enum class AxisKind {
    wavelength,           // nm
    difference_frequency, // THz, rotated u axis
    sum_frequency,        // THz, rotated v axis
    arrival_time,         // ps
    depth,                // um
};

std::string axis_kind_name(AxisKind kind);
AxisKind axis_kind_from_name(const std::string& name);

// Uniform 1D axis. For wavelength grids use make_grid(); other kinds are
// built with uniform().
struct SpectralGrid {
    double start = 0.0;
    double step = 0.0;
    int n_points = 0;
    AxisKind kind = AxisKind::wavelength;

    static SpectralGrid uniform(double start, double step, int n, AxisKind kind);

    double value(int i) const { return start + step * i; }
    double back() const { return value(n_points - 1); }
    double span() const { return step * (n_points - 1); }
    double center() const { return start + 0.5 * span(); }
    // Fractional index of a value; exact inverse of value() on bin centres.
    double index_of(double v) const { return (v - start) / step; }
    bool contains(double v) const { return v >= start - 0.5 * step && v <= back() + 0.5 * step; }
};

// Wavelength grid centred on `center_nm` covering `span_nm` with n samples.
SpectralGrid make_grid(double center_nm, double span_nm, int n);

} // namespace qoct
