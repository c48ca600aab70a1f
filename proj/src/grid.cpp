#include "qoct/grid.hpp"

#include <stdexcept>

namespace qoct {

std::string axis_kind_name(AxisKind kind) {
    switch (kind) {
    case AxisKind::wavelength: return "wavelength";
    case AxisKind::difference_frequency: return "difference_frequency";
    case AxisKind::sum_frequency: return "sum_frequency";
    case AxisKind::arrival_time: return "arrival_time";
    case AxisKind::depth: return "depth";
    }
    throw std::logic_error("axis_kind_name: bad enum");
}

AxisKind axis_kind_from_name(const std::string& name) {
    if (name == "wavelength") return AxisKind::wavelength;
    if (name == "difference_frequency") return AxisKind::difference_frequency;
    if (name == "sum_frequency") return AxisKind::sum_frequency;
    if (name == "arrival_time") return AxisKind::arrival_time;
    if (name == "depth") return AxisKind::depth;
    throw std::invalid_argument("unknown axis kind: " + name);
}

SpectralGrid SpectralGrid::uniform(double start, double step, int n, AxisKind kind) {
    if (n < 2)
        throw std::invalid_argument("SpectralGrid::uniform: need at least 2 points");
    if (!(step > 0.0))
        throw std::invalid_argument("SpectralGrid::uniform: step must be > 0");
    return SpectralGrid{start, step, n, kind};
}

SpectralGrid make_grid(double center_nm, double span_nm, int n) {
    if (n < 8)
        throw std::invalid_argument("make_grid: n_points must be >= 8");
    if (!(span_nm > 0.0))
        throw std::invalid_argument("make_grid: span must be > 0 nm");
    if (!(center_nm > 0.0))
        throw std::invalid_argument("make_grid: centre must be > 0 nm");
    if (!(center_nm - 0.5 * span_nm > 0.0))
        throw std::invalid_argument("make_grid: grid would reach non-positive wavelengths");
    SpectralGrid g;
    g.start = center_nm - 0.5 * span_nm;
    g.step = span_nm / (n - 1);
    g.n_points = n;
    g.kind = AxisKind::wavelength;
    return g;
}

} // namespace qoct
