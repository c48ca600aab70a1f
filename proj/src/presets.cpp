#include "qoct/pipeline.hpp"

#include <array>

// Scenario presets. The arm-imbalance betas and the detection resolution are
// calibrated so the toolkit reproduces the measured resolution (11.4 um
// single-frame FWHM) and imaging range (0.19 mm -> 0.24 mm with pump
// compensation) on the mirror sweeps.

namespace qoct::pipeline {

namespace {

struct Preset {
    const char* name;
    const char* json;
};

constexpr const char* kFig4Mirror = R"JSON({
  "source": {"center_wavelength_nm": 1550, "diagonal_fwhm_thz": 6.3, "antidiagonal_fwhm_nm": 3.2,
             "pump_center_nm": 775, "pump_fwhm_nm": 10, "pair_rate_hz": 800, "hom_visibility": 1.0},
  "object": {"interfaces": [{"position_um": 78, "reflectivity": 1.0}],
             "arm_imbalance": {"beta2_fs2": 31000, "beta3_fs3": 95000}},
  "grid": {"center_nm": 1550, "span_nm": 102, "n": 512},
  "scan": {"mode": "fd_single_frame", "reference_delay_um": 0, "integration_time_s": 2, "seed": 20240601},
  "processing": {"fibre_comp": true, "pump_comp": "data", "dc_removal": true},
  "outputs": [{"kind": "joint_spectrum", "path": "joint_spectrum.qjs"},
              {"kind": "rotated", "path": "rotated.qjs"},
              {"kind": "fourier_map", "path": "fourier_map.csv"},
              {"kind": "ascan", "path": "ascan.csv"}]
})JSON";

constexpr const char* kFig5Whole = R"JSON({
  "source": {"center_wavelength_nm": 1550, "diagonal_fwhm_thz": 22.8, "antidiagonal_fwhm_nm": 3.2,
             "pump_center_nm": 775, "pump_fwhm_nm": 10, "pair_rate_hz": 800, "hom_visibility": 1.0},
  "object": {"interfaces": [{"position_um": 78, "reflectivity": 1.0}],
             "arm_imbalance": {"beta2_fs2": 31000, "beta3_fs3": 95000}},
  "grid": {"center_nm": 1550, "span_nm": 398, "n": 1024},
  "scan": {"mode": "fd_whole", "reference_delay_um": 0, "integration_time_s": 18},
  "processing": {"fibre_comp": true, "pump_comp": "off", "dc_removal": true},
  "whole_spectrum_frames": 9,
  "outputs": [{"kind": "joint_spectrum", "path": "joint_spectrum.qjs"},
              {"kind": "rotated", "path": "rotated.qjs"},
              {"kind": "fourier_map", "path": "fourier_map.csv"},
              {"kind": "ascan", "path": "ascan.csv"}]
})JSON";

constexpr const char* kFig6Pump = R"JSON({
  "source": {"center_wavelength_nm": 1550, "diagonal_fwhm_thz": 22.8, "antidiagonal_fwhm_nm": 3.2,
             "pump_center_nm": 775, "pump_fwhm_nm": 10, "pair_rate_hz": 800, "hom_visibility": 1.0},
  "object": {"interfaces": [{"position_um": 78, "reflectivity": 1.0}],
             "arm_imbalance": {"beta2_fs2": 31000, "beta3_fs3": 95000}},
  "grid": {"center_nm": 1550, "span_nm": 398, "n": 1024},
  "scan": {"mode": "fd_whole", "reference_delay_um": 0, "integration_time_s": 18},
  "processing": {"fibre_comp": true, "pump_comp": "data", "dc_removal": true},
  "whole_spectrum_frames": 9,
  "outputs": [{"kind": "rotated", "path": "rotated.qjs"},
              {"kind": "fourier_map", "path": "fourier_map.csv"},
              {"kind": "ascan", "path": "ascan.csv"}]
})JSON";

constexpr const char* kFig7Falloff = R"JSON({
  "source": {"center_wavelength_nm": 1550, "diagonal_fwhm_thz": 6.3, "antidiagonal_fwhm_nm": 3.2,
             "pump_center_nm": 775, "pump_fwhm_nm": 10, "pair_rate_hz": 800, "hom_visibility": 1.0},
  "object": {"interfaces": [{"position_um": 0, "reflectivity": 1.0}],
             "arm_imbalance": {"beta2_fs2": 31000, "beta3_fs3": 95000}},
  "grid": {"center_nm": 1550, "span_nm": 102, "n": 512},
  "scan": {"mode": "fd_single_frame", "reference_delay_um": 0, "integration_time_s": 2,
           "stage_positions_um": [-20, -40, -60, -80, -100, -120, -140, -160, -180, -200,
                                  -220, -240, -260, -280, -300, -320, -340]},
  "processing": {"fibre_comp": true, "pump_comp": "data", "dc_removal": true},
  "outputs": [{"kind": "falloff", "path": "falloff.csv"}]
})JSON";

constexpr const char* kFig7TdMirror = R"JSON({
  "source": {"center_wavelength_nm": 1550, "diagonal_fwhm_thz": 6.3, "antidiagonal_fwhm_nm": 3.2,
             "pump_center_nm": 775, "pump_fwhm_nm": 10, "pair_rate_hz": 800, "hom_visibility": 1.0},
  "object": {"interfaces": [{"position_um": 78, "reflectivity": 1.0}],
             "arm_imbalance": {"beta2_fs2": 31000, "beta3_fs3": 95000}},
  "grid": {"center_nm": 1550, "span_nm": 102, "n": 256},
  "scan": {"mode": "td", "integration_time_s": 1,
           "stage_positions_um": [28, 33, 38, 43, 48, 53, 58, 63, 68, 73, 78, 83, 88, 93, 98,
                                  103, 108, 113, 118, 123, 128]},
  "processing": {"fibre_comp": false, "pump_comp": "off", "dc_removal": false},
  "outputs": [{"kind": "ascan", "path": "td_trace.csv"}]
})JSON";

constexpr const char* kFig7ClassicalMirror = R"JSON({
  "source": {"center_wavelength_nm": 1550, "diagonal_fwhm_thz": 6.3, "antidiagonal_fwhm_nm": 3.2},
  "object": {"interfaces": [{"position_um": 78, "reflectivity": 1.0}]},
  "grid": {"center_nm": 1580, "span_nm": 160, "n": 2048},
  "scan": {"mode": "classical", "reference_delay_um": 0},
  "classical": {"center_nm": 1580, "fwhm_nm": 63, "reference_reflectivity": 1.0},
  "outputs": [{"kind": "ascan", "path": "classical_ascan.csv"}]
})JSON";

constexpr const char* kFig8Glass = R"JSON({
  "source": {"center_wavelength_nm": 1550, "diagonal_fwhm_thz": 6.3, "antidiagonal_fwhm_nm": 3.2,
             "pump_center_nm": 775, "pump_fwhm_nm": 10, "pair_rate_hz": 800, "hom_visibility": 1.0},
  "object": {"interfaces": [{"position_um": 0, "reflectivity": 0.2},
                            {"position_um": 150, "reflectivity": 0.2}],
             "arm_imbalance": {"beta2_fs2": 31000, "beta3_fs3": 95000}},
  "grid": {"center_nm": 1550, "span_nm": 102, "n": 512},
  "scan": {"mode": "fd_single_frame", "reference_delay_um": -50, "integration_time_s": 180, "seed": 20240608},
  "processing": {"fibre_comp": true, "pump_comp": "data", "dc_removal": true},
  "outputs": [{"kind": "joint_spectrum", "path": "joint_spectrum.qjs"},
              {"kind": "rotated", "path": "rotated.qjs"},
              {"kind": "fourier_map", "path": "fourier_map.csv"},
              {"kind": "ascan", "path": "ascan.csv"},
              {"kind": "artefacts", "path": "artefacts.json"}]
})JSON";

constexpr const char* kFig8TdGlass = R"JSON({
  "source": {"center_wavelength_nm": 1550, "diagonal_fwhm_thz": 6.3, "antidiagonal_fwhm_nm": 3.2,
             "pump_center_nm": 775, "pump_fwhm_nm": 10, "pair_rate_hz": 800, "hom_visibility": 1.0},
  "object": {"interfaces": [{"position_um": 0, "reflectivity": 0.2},
                            {"position_um": 150, "reflectivity": 0.2}],
             "arm_imbalance": {"beta2_fs2": 31000, "beta3_fs3": 95000}},
  "grid": {"center_nm": 1550, "span_nm": 102, "n": 256},
  "scan": {"mode": "td", "reference_delay_um": 0, "integration_time_s": 10,
           "stage_positions_um": [-30, -25, -20, -15, -10, -5, 0, 5, 10, 15, 20, 25, 30, 35, 40,
                                  45, 50, 55, 60, 65, 70, 75, 80, 85, 90, 95, 100, 105, 110, 115,
                                  120, 125, 130, 135, 140, 145, 150, 155, 160, 165, 170, 175, 180]},
  "processing": {"fibre_comp": false, "pump_comp": "off", "dc_removal": false},
  "outputs": [{"kind": "ascan", "path": "td_trace.csv"},
              {"kind": "artefacts", "path": "artefacts.json"}]
})JSON";

constexpr const char* kFig9Plastic = R"JSON({
  "source": {"center_wavelength_nm": 1550, "diagonal_fwhm_thz": 6.3, "antidiagonal_fwhm_nm": 3.2,
             "pump_center_nm": 775, "pump_fwhm_nm": 10, "pair_rate_hz": 800, "hom_visibility": 1.0},
  "object": {"interfaces": [{"position_um": -260, "reflectivity": 0.2},
                            {"position_um": 0, "reflectivity": 0.15}],
             "arm_imbalance": {"beta2_fs2": 31000, "beta3_fs3": 95000}},
  "detection": {"pump_leak": {"channel": 2, "rate_hz": 40}},
  "grid": {"center_nm": 1550, "span_nm": 102, "n": 512},
  "scan": {"mode": "fd_single_frame", "reference_delay_um": 45, "integration_time_s": 240, "seed": 20240609},
  "processing": {"fibre_comp": true, "pump_comp": "data", "dc_removal": true},
  "outputs": [{"kind": "joint_spectrum", "path": "joint_spectrum.qjs"},
              {"kind": "rotated", "path": "rotated.qjs"},
              {"kind": "fourier_map", "path": "fourier_map.csv"},
              {"kind": "ascan", "path": "ascan.csv"},
              {"kind": "artefacts", "path": "artefacts.json"}]
})JSON";

constexpr const char* kFig10Stack = R"JSON({
  "source": {"center_wavelength_nm": 1550, "diagonal_fwhm_thz": 6.3, "antidiagonal_fwhm_nm": 3.2,
             "pump_center_nm": 775, "pump_fwhm_nm": 10, "pair_rate_hz": 800, "hom_visibility": 1.0},
  "object": {"interfaces": [{"position_um": 35, "reflectivity": 0.2},
                            {"position_um": 185, "reflectivity": 0.2},
                            {"position_um": 215, "reflectivity": 0.2},
                            {"position_um": 365, "reflectivity": 0.2}],
             "arm_imbalance": {"beta2_fs2": 31000, "beta3_fs3": 95000}},
  "grid": {"center_nm": 1550, "span_nm": 102, "n": 512},
  "scan": {"mode": "fd_single_frame", "reference_delay_um": 0, "integration_time_s": 240, "seed": 20240610},
  "processing": {"fibre_comp": true, "pump_comp": "data", "dc_removal": true},
  "outputs": [{"kind": "joint_spectrum", "path": "joint_spectrum.qjs"},
              {"kind": "rotated", "path": "rotated.qjs"},
              {"kind": "fourier_map", "path": "fourier_map.csv"},
              {"kind": "ascan", "path": "ascan.csv"},
              {"kind": "artefacts", "path": "artefacts.json"}]
})JSON";

constexpr const char* kFig10ClassicalStack = R"JSON({
  "source": {"center_wavelength_nm": 1550, "diagonal_fwhm_thz": 6.3, "antidiagonal_fwhm_nm": 3.2},
  "object": {"interfaces": [{"position_um": 35, "reflectivity": 0.2},
                            {"position_um": 185, "reflectivity": 0.2},
                            {"position_um": 215, "reflectivity": 0.2},
                            {"position_um": 365, "reflectivity": 0.2}]},
  "grid": {"center_nm": 1550, "span_nm": 160, "n": 2048},
  "scan": {"mode": "classical", "reference_delay_um": -400},
  "classical": {"center_nm": 1550, "fwhm_nm": 61, "reference_reflectivity": 1.0},
  "outputs": [{"kind": "ascan", "path": "classical_ascan.csv"},
              {"kind": "artefacts", "path": "artefacts.json"}]
})JSON";

constexpr const char* kTab1Counts = R"JSON({
  "source": {"center_wavelength_nm": 1550, "diagonal_fwhm_thz": 6.3, "antidiagonal_fwhm_nm": 3.2,
             "pump_center_nm": 775, "pump_fwhm_nm": 10, "pair_rate_hz": 800, "hom_visibility": 1.0},
  "object": {"interfaces": [{"position_um": 78, "reflectivity": 1.0}],
             "arm_imbalance": {"beta2_fs2": 31000, "beta3_fs3": 95000}},
  "detection": {"background_rate_hz": 20},
  "grid": {"center_nm": 1550, "span_nm": 102, "n": 512},
  "scan": {"mode": "fd_single_frame", "reference_delay_um": 0, "integration_time_s": 2, "seed": 20240611},
  "processing": {"fibre_comp": true, "pump_comp": "data", "dc_removal": true},
  "outputs": [{"kind": "joint_spectrum", "path": "counts.qjs"},
              {"kind": "ascan", "path": "ascan.csv"}]
})JSON";

constexpr std::array<Preset, 12> kPresets = {{
    {"fig4_mirror", kFig4Mirror},
    {"fig5_whole", kFig5Whole},
    {"fig6_pump", kFig6Pump},
    {"fig7_falloff", kFig7Falloff},
    {"fig7_td_mirror", kFig7TdMirror},
    {"fig7_classical_mirror", kFig7ClassicalMirror},
    {"fig8_glass", kFig8Glass},
    {"fig8_td_glass", kFig8TdGlass},
    {"fig9_plastic", kFig9Plastic},
    {"fig10_stack", kFig10Stack},
    {"fig10_classical_stack", kFig10ClassicalStack},
    {"tab1_counts", kTab1Counts},
}};

} // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& p : kPresets)
        names.push_back(p.name);
    return names;
}

std::string preset_json(const std::string& name) {
    for (const auto& p : kPresets)
        if (name == p.name)
            return p.json;
    throw ConfigError("unknown preset: " + name);
}

PipelineConfig preset_config(const std::string& name) {
    return parse_config(preset_json(name), "preset:" + name);
}

} // namespace qoct::pipeline
