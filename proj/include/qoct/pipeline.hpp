#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qoct/forward.hpp"
#include "qoct/types.hpp"

namespace qoct::pipeline {

enum class ScanMode { fd_single_frame, fd_whole, td, classical };
enum class PumpCompMode { off, data, model };
enum class OutputKind { joint_spectrum, rotated, fourier_map, ascan, falloff, artefacts };
enum class FileFormat { qjs, csv };

std::string scan_mode_name(ScanMode mode);
std::string output_kind_name(OutputKind kind);
OutputKind output_kind_from_name(const std::string& name);

struct OutputRequest {
    OutputKind kind;
    std::string path;
};

struct ScanConfig {
    ScanMode mode = ScanMode::fd_single_frame;
    double reference_delay_um = 0.0;
    std::vector<double> stage_positions_um; // td sweep; falloff reference delays
    double integration_time_s = 1.0;
    std::optional<std::uint64_t> seed;
};

struct GridConfig {
    double center_nm = 1550.0;
    double span_nm = 102.0;
    int n = 512;
};

struct ProcessingConfig {
    bool fibre_comp = true;
    PumpCompMode pump_comp = PumpCompMode::data;
    bool dc_removal = true;
};

struct PipelineConfig {
    SourceSpec source;
    LayeredObject object = LayeredObject::mirror(78.0);
    DetectionSpec detection;
    GridConfig grid;
    ScanConfig scan;
    ProcessingConfig processing;
    forward::ClassicalSource classical;
    std::vector<OutputRequest> outputs;
    int whole_spectrum_frames = 9;

    void validate() const;
};

// Raised by configuration parsing/validation; the CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when a pipeline stage fails; the CLI maps it to exit code 3.
struct StageError : std::runtime_error {
    StageError(const std::string& stage, const std::string& what)
        : std::runtime_error("stage '" + stage + "': " + what), stage_name(stage) {}
    std::string stage_name;
};

PipelineConfig parse_config(const std::string& json_text, const std::string& origin);
PipelineConfig load_config(const std::string& path);
std::string config_to_json(const PipelineConfig& config);

std::vector<std::string> preset_names();
std::string preset_json(const std::string& name); // throws ConfigError on unknown name
PipelineConfig preset_config(const std::string& name);

struct OutputRecord {
    std::string kind;
    std::string path;
    std::string checksum;
};

struct RunManifest {
    std::string config_hash;
    std::string version;
    std::vector<OutputRecord> outputs;
    double wall_ms = 0.0;

    std::string to_json() const;
};

struct RunOptions {
    std::string out_dir = ".";
    FileFormat format = FileFormat::qjs;
    bool plots = false;
};

RunManifest run(const PipelineConfig& config, const RunOptions& opts);

} // namespace qoct::pipeline
