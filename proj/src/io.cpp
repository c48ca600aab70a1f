#include "qoct/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qoct::io {

namespace {

namespace fs = std::filesystem;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string sibling(const std::string& header_path, const std::string& name) {
    return (fs::path(header_path).parent_path() / name).string();
}

void write_doubles_le(const std::string& path, const double* data, std::size_t count) {
    // the toolchain targets little-endian hosts; IEEE-754 doubles are dumped as-is
    static_assert(sizeof(double) == 8);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open payload for writing: " + path);
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * 8));
    if (!out)
        throw std::runtime_error("short write on payload: " + path);
}

void read_doubles_le(const std::string& path, double* data, std::size_t count) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open payload: " + path);
    in.seekg(0, std::ios::end);
    if (in.tellg() != static_cast<std::streamoff>(count * 8))
        throw std::runtime_error("payload size mismatch vs header: " + path);
    in.seekg(0);
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * 8));
    if (!in)
        throw std::runtime_error("short read on payload: " + path);
}

struct Header {
    std::string payload;
    std::string mask;
    int rows = 0, cols = 0;
    SpectralGrid axis1, axis2;
    bool has_frame = false;
    FrameMeta frame;
    std::vector<std::string> provenance;
    std::vector<std::string> warnings;
};

SpectralGrid parse_axis(std::istringstream& line) {
    std::string kind;
    double start, step;
    int count;
    if (!(line >> kind >> start >> step >> count))
        throw std::runtime_error("QJS1: malformed axis line");
    return SpectralGrid::uniform(start, step, count, axis_kind_from_name(kind));
}

Header read_header(const std::string& header_path) {
    std::ifstream in(header_path);
    if (!in)
        throw std::runtime_error("cannot open QJS header: " + header_path);
    std::string line;
    if (!std::getline(in, line) || line != "QJS1")
        throw std::runtime_error("QJS1: bad magic in " + header_path);

    Header h;
    bool have_version = false, have_end = false;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "version") {
            int v = 0;
            ls >> v;
            if (v != 1)
                throw std::runtime_error("QJS1: unsupported version in " + header_path);
            have_version = true;
        } else if (key == "payload") {
            ls >> h.payload;
        } else if (key == "mask") {
            ls >> h.mask;
        } else if (key == "rows") {
            ls >> h.rows;
        } else if (key == "cols") {
            ls >> h.cols;
        } else if (key == "axis1") {
            h.axis1 = parse_axis(ls);
        } else if (key == "axis2") {
            h.axis2 = parse_axis(ls);
        } else if (key == "frame") {
            ls >> h.frame.delay1_ps >> h.frame.delay2_ps >> h.frame.window_ps;
            h.has_frame = true;
        } else if (key == "provenance") {
            std::string rest;
            std::getline(ls, rest);
            h.provenance.push_back(rest.empty() ? "" : rest.substr(1));
        } else if (key == "warning") {
            std::string rest;
            std::getline(ls, rest);
            h.warnings.push_back(rest.empty() ? "" : rest.substr(1));
        } else if (key == "end") {
            have_end = true;
            break;
        } else {
            throw std::runtime_error("QJS1: unknown header key '" + key + "' in " + header_path);
        }
    }
    if (!have_version || !have_end || h.payload.empty() || h.rows <= 0 || h.cols <= 0)
        throw std::runtime_error("QJS1: incomplete header in " + header_path);
    return h;
}

void write_header(std::ofstream& out, const Header& h) {
    out << "QJS1\n";
    out << "version 1\n";
    out << "payload " << h.payload << "\n";
    if (!h.mask.empty())
        out << "mask " << h.mask << "\n";
    out << "rows " << h.rows << "\n";
    out << "cols " << h.cols << "\n";
    out << "axis1 " << axis_kind_name(h.axis1.kind) << " " << num(h.axis1.start) << " "
        << num(h.axis1.step) << " " << h.axis1.n_points << "\n";
    out << "axis2 " << axis_kind_name(h.axis2.kind) << " " << num(h.axis2.start) << " "
        << num(h.axis2.step) << " " << h.axis2.n_points << "\n";
    if (h.has_frame)
        out << "frame " << num(h.frame.delay1_ps) << " " << num(h.frame.delay2_ps) << " "
            << num(h.frame.window_ps) << "\n";
    for (const auto& p : h.provenance)
        out << "provenance " << p << "\n";
    for (const auto& w : h.warnings)
        out << "warning " << w << "\n";
    out << "end\n";
}

} // namespace

void write_qjs(const JointSpectrum& js, const std::string& header_path) {
    js.validate();
    Header h;
    h.payload = fs::path(header_path).filename().string() + ".bin";
    h.rows = js.values.rows();
    h.cols = js.values.cols();
    h.axis1 = js.axis1;
    h.axis2 = js.axis2;
    h.has_frame = js.frame_meta.has_value();
    if (h.has_frame)
        h.frame = *js.frame_meta;
    h.provenance = js.provenance;
    h.warnings = js.warnings;

    std::ofstream out(header_path);
    if (!out)
        throw std::runtime_error("cannot open QJS header for writing: " + header_path);
    write_header(out, h);
    write_doubles_le(sibling(header_path, h.payload), js.values.data(), js.values.size());
}

JointSpectrum read_qjs(const std::string& header_path) {
    Header h = read_header(header_path);
    if (!h.mask.empty())
        throw std::runtime_error("read_qjs: header describes a rotated spectrum: " + header_path);
    JointSpectrum js;
    js.axis1 = h.axis1;
    js.axis2 = h.axis2;
    js.values = Matrix(h.rows, h.cols);
    read_doubles_le(sibling(header_path, h.payload), js.values.data(), js.values.size());
    if (h.has_frame)
        js.frame_meta = h.frame;
    js.provenance = h.provenance;
    js.warnings = h.warnings;
    js.validate();
    return js;
}

void write_rotated_qjs(const preprocess::RotatedSpectrum& rot, const std::string& header_path) {
    rot.validate();
    Header h;
    h.payload = fs::path(header_path).filename().string() + ".bin";
    h.mask = fs::path(header_path).filename().string() + ".mask";
    h.rows = rot.values.rows();
    h.cols = rot.values.cols();
    h.axis1 = rot.v_axis;
    h.axis2 = rot.u_axis;
    h.provenance = rot.provenance;

    std::ofstream out(header_path);
    if (!out)
        throw std::runtime_error("cannot open QJS header for writing: " + header_path);
    write_header(out, h);
    write_doubles_le(sibling(header_path, h.payload), rot.values.data(), rot.values.size());

    std::ofstream mask(sibling(header_path, h.mask), std::ios::binary);
    if (!mask)
        throw std::runtime_error("cannot open mask payload for writing: " + header_path);
    mask.write(reinterpret_cast<const char*>(rot.mask.data()),
               static_cast<std::streamsize>(rot.mask.size()));
}

preprocess::RotatedSpectrum read_rotated_qjs(const std::string& header_path) {
    Header h = read_header(header_path);
    if (h.mask.empty())
        throw std::runtime_error("read_rotated_qjs: header describes a joint spectrum: " + header_path);
    preprocess::RotatedSpectrum rot;
    rot.v_axis = h.axis1;
    rot.u_axis = h.axis2;
    rot.values = Matrix(h.rows, h.cols);
    read_doubles_le(sibling(header_path, h.payload), rot.values.data(), rot.values.size());
    rot.mask.resize(rot.values.size());
    {
        const std::string mask_path = sibling(header_path, h.mask);
        std::ifstream in(mask_path, std::ios::binary);
        if (!in)
            throw std::runtime_error("cannot open mask payload: " + mask_path);
        in.seekg(0, std::ios::end);
        if (in.tellg() != static_cast<std::streamoff>(rot.mask.size()))
            throw std::runtime_error("mask payload size mismatch: " + mask_path);
        in.seekg(0);
        in.read(reinterpret_cast<char*>(rot.mask.data()), static_cast<std::streamsize>(rot.mask.size()));
    }
    rot.provenance = h.provenance;
    rot.validate();
    return rot;
}

bool qjs_is_rotated(const std::string& header_path) {
    return !read_header(header_path).mask.empty();
}

void write_matrix_csv(const Matrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open CSV for writing: " + path);
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) {
            if (c)
                out << ',';
            out << num(m(r, c));
        }
        out << '\n';
    }
}

Matrix read_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open CSV: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::vector<double> row;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ','))
            row.push_back(std::stod(cell));
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error("CSV: ragged rows in " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw std::runtime_error("CSV: empty file " + path);
    Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c)
            m(r, c) = rows[r][c];
    return m;
}

void write_ascan_csv(const AScan& ascan, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open CSV for writing: " + path);
    out << "depth_um,amplitude\n";
    for (std::size_t i = 0; i < ascan.depth_um.size(); ++i)
        out << num(ascan.depth_um[i]) << ',' << num(ascan.amplitude[i]) << '\n';
}

void write_trace_csv(const std::vector<double>& x, const std::vector<double>& y,
                     const std::string& x_label, const std::string& y_label,
                     const std::string& path) {
    if (x.size() != y.size())
        throw std::invalid_argument("write_trace_csv: length mismatch");
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open CSV for writing: " + path);
    out << x_label << ',' << y_label << '\n';
    for (std::size_t i = 0; i < x.size(); ++i)
        out << num(x[i]) << ',' << num(y[i]) << '\n';
}

void write_svg_line(const std::vector<double>& x, const std::vector<std::vector<double>>& curves,
                    const std::string& x_label, const std::string& y_label, const std::string& path) {
    if (x.empty() || curves.empty())
        throw std::invalid_argument("write_svg_line: empty data");
    const int width = 860, height = 480;
    const int ml = 70, mr = 20, mt = 20, mb = 50;
    double x_lo = x.front(), x_hi = x.back();
    double y_lo = 1e300, y_hi = -1e300;
    for (const auto& c : curves) {
        if (c.size() != x.size())
            throw std::invalid_argument("write_svg_line: curve length mismatch");
        for (double v : c) {
            y_lo = std::min(y_lo, v);
            y_hi = std::max(y_hi, v);
        }
    }
    if (y_hi == y_lo)
        y_hi = y_lo + 1.0;

    const char* colours[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"};
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open SVG for writing: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << width - ml - mr << "\" height=\""
        << height - mt - mb << "\" fill=\"none\" stroke=\"#444\"/>\n";
    auto px = [&](double v) { return ml + (v - x_lo) / (x_hi - x_lo) * (width - ml - mr); };
    auto py = [&](double v) { return height - mb - (v - y_lo) / (y_hi - y_lo) * (height - mt - mb); };
    for (std::size_t k = 0; k < curves.size(); ++k) {
        out << "<polyline fill=\"none\" stroke=\"" << colours[k % 5] << "\" stroke-width=\"1.4\" points=\"";
        for (std::size_t i = 0; i < x.size(); ++i)
            out << px(x[i]) << ',' << py(curves[k][i]) << ' ';
        out << "\"/>\n";
    }
    out << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-size=\"14\">" << x_label << "</text>\n";
    out << "<text x=\"18\" y=\"" << (mt + height - mb) / 2
        << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 "
        << (mt + height - mb) / 2 << ")\">" << y_label << "</text>\n";
    // axis extremes
    out << "<text x=\"" << ml << "\" y=\"" << height - mb + 16 << "\" font-size=\"11\">" << num(x_lo)
        << "</text>\n";
    out << "<text x=\"" << width - mr << "\" y=\"" << height - mb + 16
        << "\" text-anchor=\"end\" font-size=\"11\">" << num(x_hi) << "</text>\n";
    out << "<text x=\"" << ml - 4 << "\" y=\"" << height - mb << "\" text-anchor=\"end\" font-size=\"11\">"
        << num(y_lo) << "</text>\n";
    out << "<text x=\"" << ml - 4 << "\" y=\"" << mt + 10 << "\" text-anchor=\"end\" font-size=\"11\">"
        << num(y_hi) << "</text>\n";
    out << "</svg>\n";
}

void write_pgm_heatmap(const Matrix& m, const std::string& path) {
    double lo = 1e300, hi = -1e300;
    for (double v : m.flat()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi == lo)
        hi = lo + 1.0;
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open PGM for writing: " + path);
    out << "P5\n" << m.cols() << ' ' << m.rows() << "\n65535\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(m.cols()) * 2);
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) {
            const double t = (m(r, c) - lo) / (hi - lo);
            const unsigned v = static_cast<unsigned>(std::lround(t * 65535.0));
            row[2 * c] = static_cast<unsigned char>(v >> 8); // PGM is big-endian
            row[2 * c + 1] = static_cast<unsigned char>(v & 0xFF);
        }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
}

void write_axis_sidecar(const std::string& path, const std::string& axis1_desc,
                        const std::string& axis2_desc) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open sidecar for writing: " + path);
    out << "rows " << axis1_desc << "\n";
    out << "cols " << axis2_desc << "\n";
}

std::uint64_t fnv1a(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::uint64_t fnv1a(const std::string& text) { return fnv1a(text.data(), text.size()); }

std::string file_checksum_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open file for checksum: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string bytes = ss.str();
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(bytes.data(), bytes.size())));
    return buf;
}

} // namespace qoct::io
