#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qoct/preprocess.hpp"
#include "qoct/types.hpp"

namespace qoct::io {

// QJS1 on-disk format: a line-oriented text header next to a raw binary
// payload of row-major little-endian float64. Rotated spectra carry a second
// uint8 payload for the interpolation mask.
//
//   QJS1
//   version 1
//   payload <file>        relative to the header
//   mask <file>           rotated spectra only
//   rows <n>
//   cols <n>
//   axis1 <kind> <start> <step> <count>
//   axis2 <kind> <start> <step> <count>
//   frame <delay1_ps> <delay2_ps> <window_ps>   optional
//   provenance <text>     repeated
//   warning <text>        repeated
//   end
//
// Numbers are printed with 17 significant digits, so the header round-trips
// bit-exactly; the payload is bit-exact by construction.

void write_qjs(const JointSpectrum& js, const std::string& header_path);
JointSpectrum read_qjs(const std::string& header_path);

void write_rotated_qjs(const preprocess::RotatedSpectrum& rot, const std::string& header_path);
preprocess::RotatedSpectrum read_rotated_qjs(const std::string& header_path);

// Inspect which payloads a header references (joint vs rotated).
bool qjs_is_rotated(const std::string& header_path);

// CSV interchange: plain matrix, 17 significant digits per cell.
void write_matrix_csv(const Matrix& m, const std::string& path);
Matrix read_matrix_csv(const std::string& path);

void write_ascan_csv(const AScan& ascan, const std::string& path);
void write_trace_csv(const std::vector<double>& x, const std::vector<double>& y,
                     const std::string& x_label, const std::string& y_label,
                     const std::string& path);

// Plot emission without plotting dependencies: SVG polylines for curves and
// 16-bit PGM heatmaps with a sidecar axis description.
void write_svg_line(const std::vector<double>& x, const std::vector<std::vector<double>>& curves,
                    const std::string& x_label, const std::string& y_label, const std::string& path);
void write_pgm_heatmap(const Matrix& m, const std::string& path);
void write_axis_sidecar(const std::string& path, const std::string& axis1_desc,
                        const std::string& axis2_desc);

std::uint64_t fnv1a(const void* data, std::size_t len);
std::uint64_t fnv1a(const std::string& text);
std::string file_checksum_hex(const std::string& path);

} // namespace qoct::io
