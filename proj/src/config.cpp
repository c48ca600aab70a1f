#include "qoct/pipeline.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace qoct::pipeline {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config error at '" + path + "': " + what);
}

void expect_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    if (!obj.is_object())
        fail(path, "expected an object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key))
            fail(path + "." + key, "unknown key");
    }
}

double get_num(const json& obj, const std::string& path, const std::string& key, double fallback) {
    if (!obj.contains(key))
        return fallback;
    if (!obj[key].is_number())
        fail(path + "." + key, "expected a number");
    return obj[key].get<double>();
}

bool get_bool(const json& obj, const std::string& path, const std::string& key, bool fallback) {
    if (!obj.contains(key))
        return fallback;
    if (!obj[key].is_boolean())
        fail(path + "." + key, "expected a boolean");
    return obj[key].get<bool>();
}

std::string get_str(const json& obj, const std::string& path, const std::string& key,
                    const std::string& fallback) {
    if (!obj.contains(key))
        return fallback;
    if (!obj[key].is_string())
        fail(path + "." + key, "expected a string");
    return obj[key].get<std::string>();
}

FibreSpec parse_fibre(const json& obj, const std::string& path, const FibreSpec& defaults) {
    expect_keys(obj, path,
                {"length_km", "group_delay_coeffs_ps", "lambda_ref_nm", "lambda_min_nm", "lambda_max_nm"});
    FibreSpec f = defaults;
    f.length_km = get_num(obj, path, "length_km", defaults.length_km);
    f.lambda_ref_nm = get_num(obj, path, "lambda_ref_nm", defaults.lambda_ref_nm);
    f.lambda_min_nm = get_num(obj, path, "lambda_min_nm", defaults.lambda_min_nm);
    f.lambda_max_nm = get_num(obj, path, "lambda_max_nm", defaults.lambda_max_nm);
    if (obj.contains("group_delay_coeffs_ps")) {
        const auto& arr = obj["group_delay_coeffs_ps"];
        if (!arr.is_array() || arr.empty())
            fail(path + ".group_delay_coeffs_ps", "expected a non-empty array of numbers");
        f.group_delay_coeffs_ps.clear();
        for (const auto& v : arr) {
            if (!v.is_number())
                fail(path + ".group_delay_coeffs_ps", "expected a number");
            f.group_delay_coeffs_ps.push_back(v.get<double>());
        }
    }
    return f;
}

} // namespace

std::string scan_mode_name(ScanMode mode) {
    switch (mode) {
    case ScanMode::fd_single_frame: return "fd_single_frame";
    case ScanMode::fd_whole: return "fd_whole";
    case ScanMode::td: return "td";
    case ScanMode::classical: return "classical";
    }
    throw std::logic_error("scan_mode_name: bad enum");
}

std::string output_kind_name(OutputKind kind) {
    switch (kind) {
    case OutputKind::joint_spectrum: return "joint_spectrum";
    case OutputKind::rotated: return "rotated";
    case OutputKind::fourier_map: return "fourier_map";
    case OutputKind::ascan: return "ascan";
    case OutputKind::falloff: return "falloff";
    case OutputKind::artefacts: return "artefacts";
    }
    throw std::logic_error("output_kind_name: bad enum");
}

OutputKind output_kind_from_name(const std::string& name) {
    if (name == "joint_spectrum") return OutputKind::joint_spectrum;
    if (name == "rotated") return OutputKind::rotated;
    if (name == "fourier_map") return OutputKind::fourier_map;
    if (name == "ascan") return OutputKind::ascan;
    if (name == "falloff") return OutputKind::falloff;
    if (name == "artefacts") return OutputKind::artefacts;
    throw ConfigError("unknown output kind: " + name);
}

void PipelineConfig::validate() const {
    try {
        source.validate();
        object.validate();
        detection.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config error: ") + e.what());
    }
    if (grid.n < 8)
        throw ConfigError("config error at 'grid.n': need at least 8 points");
    if (!(grid.span_nm > 0.0) || !(grid.center_nm > 0.0))
        throw ConfigError("config error at 'grid': span and centre must be positive");
    if (scan.mode == ScanMode::td && scan.stage_positions_um.empty())
        throw ConfigError("config error at 'scan.stage_positions_um': td mode requires stage positions");
    if (!(scan.integration_time_s >= 0.0))
        throw ConfigError("config error at 'scan.integration_time_s': must be >= 0");
    for (const auto& out : outputs) {
        if (out.path.empty())
            throw ConfigError("config error at 'outputs': empty path");
        if (out.kind == OutputKind::falloff && scan.stage_positions_um.size() < 3 &&
            scan.mode != ScanMode::td)
            throw ConfigError(
                "config error at 'outputs': falloff needs at least 3 scan.stage_positions_um");
        if (scan.mode == ScanMode::td &&
            (out.kind == OutputKind::rotated || out.kind == OutputKind::fourier_map ||
             out.kind == OutputKind::joint_spectrum || out.kind == OutputKind::falloff))
            throw ConfigError("config error at 'outputs': kind '" + output_kind_name(out.kind) +
                              "' is not produced in td mode");
        if (scan.mode == ScanMode::classical &&
            (out.kind == OutputKind::rotated || out.kind == OutputKind::fourier_map ||
             out.kind == OutputKind::joint_spectrum || out.kind == OutputKind::falloff))
            throw ConfigError("config error at 'outputs': kind '" + output_kind_name(out.kind) +
                              "' is not produced in classical mode");
    }
    if (whole_spectrum_frames < 1)
        throw ConfigError("config error at 'whole_spectrum_frames': must be >= 1");
}

PipelineConfig parse_config(const std::string& json_text, const std::string& origin) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        // report the line of the parse failure
        std::size_t line = 1;
        for (std::size_t i = 0; i < e.byte && i < json_text.size(); ++i)
            if (json_text[i] == '\n')
                ++line;
        throw ConfigError("config parse error in " + origin + " at line " + std::to_string(line) +
                          ": " + e.what());
    }

    expect_keys(root, origin,
                {"source", "object", "detection", "grid", "scan", "processing", "classical",
                 "outputs", "whole_spectrum_frames"});

    PipelineConfig cfg;

    if (root.contains("source")) {
        const auto& s = root["source"];
        const std::string p = "source";
        expect_keys(s, p,
                    {"center_wavelength_nm", "diagonal_fwhm_thz", "antidiagonal_fwhm_nm",
                     "pump_center_nm", "pump_fwhm_nm", "pair_rate_hz", "hom_visibility"});
        cfg.source.center_wavelength_nm = get_num(s, p, "center_wavelength_nm", 1550.0);
        cfg.source.diagonal_fwhm_thz = get_num(s, p, "diagonal_fwhm_thz", 6.3);
        cfg.source.antidiagonal_fwhm_nm = get_num(s, p, "antidiagonal_fwhm_nm", 3.2);
        cfg.source.pump_center_nm = get_num(s, p, "pump_center_nm", cfg.source.center_wavelength_nm / 2.0);
        cfg.source.pump_fwhm_nm = get_num(s, p, "pump_fwhm_nm", 10.0);
        cfg.source.pair_rate_hz = get_num(s, p, "pair_rate_hz", 1000.0);
        cfg.source.hom_visibility = get_num(s, p, "hom_visibility", 1.0);
    }

    if (root.contains("object")) {
        const auto& o = root["object"];
        const std::string p = "object";
        expect_keys(o, p, {"interfaces", "segment_dispersion", "arm_imbalance", "dispersion_center_nm"});
        if (!o.contains("interfaces") || !o["interfaces"].is_array() || o["interfaces"].empty())
            fail(p + ".interfaces", "expected a non-empty array");
        cfg.object.interfaces.clear();
        for (std::size_t i = 0; i < o["interfaces"].size(); ++i) {
            const auto& itf = o["interfaces"][i];
            const std::string ip = p + ".interfaces[" + std::to_string(i) + "]";
            expect_keys(itf, ip, {"position_um", "reflectivity"});
            cfg.object.interfaces.push_back(
                {get_num(itf, ip, "position_um", 0.0), get_num(itf, ip, "reflectivity", 1.0)});
        }
        cfg.object.segment_dispersion.clear();
        if (o.contains("segment_dispersion")) {
            if (!o["segment_dispersion"].is_array())
                fail(p + ".segment_dispersion", "expected an array");
            for (std::size_t i = 0; i < o["segment_dispersion"].size(); ++i) {
                const auto& gap = o["segment_dispersion"][i];
                const std::string gp = p + ".segment_dispersion[" + std::to_string(i) + "]";
                expect_keys(gap, gp, {"beta2_fs2", "beta3_fs3"});
                cfg.object.segment_dispersion.push_back(
                    {get_num(gap, gp, "beta2_fs2", 0.0), get_num(gap, gp, "beta3_fs3", 0.0)});
            }
        }
        if (o.contains("arm_imbalance")) {
            const auto& a = o["arm_imbalance"];
            expect_keys(a, p + ".arm_imbalance", {"beta2_fs2", "beta3_fs3"});
            cfg.object.arm_imbalance = {get_num(a, p + ".arm_imbalance", "beta2_fs2", 0.0),
                                        get_num(a, p + ".arm_imbalance", "beta3_fs3", 0.0)};
        }
        cfg.object.dispersion_center_nm =
            get_num(o, p, "dispersion_center_nm", cfg.source.center_wavelength_nm);
    } else {
        cfg.object.dispersion_center_nm = cfg.source.center_wavelength_nm;
    }

    // default detection: effective linear slope mapping one 102 nm frame
    // onto one 12.5 ns window, plus the configurable quadratic residual
    {
        FibreSpec fibre;
        fibre.length_km = 5.0;
        fibre.group_delay_coeffs_ps = {0.0, 12500.0 / 102.0, 0.5 * 0.056 * 5.0};
        fibre.lambda_ref_nm = cfg.source.center_wavelength_nm;
        fibre.lambda_min_nm = 1300.0;
        fibre.lambda_max_nm = 1800.0;
        cfg.detection.fibre1 = fibre;
        cfg.detection.fibre2 = fibre;
        cfg.detection.time_bin_ps = 12500.0 / 512.0;
        cfg.detection.coincidence_window_ps = 12500.0;
        cfg.detection.spectral_resolution_fwhm_nm = 1.468;
    }
    if (root.contains("detection")) {
        const auto& d = root["detection"];
        const std::string p = "detection";
        expect_keys(d, p,
                    {"fibre1", "fibre2", "time_bin_ps", "coincidence_window_ps",
                     "spectral_resolution_fwhm_nm", "background_rate_hz", "pump_leak"});
        if (d.contains("fibre1"))
            cfg.detection.fibre1 = parse_fibre(d["fibre1"], p + ".fibre1", cfg.detection.fibre1);
        if (d.contains("fibre2"))
            cfg.detection.fibre2 = parse_fibre(d["fibre2"], p + ".fibre2", cfg.detection.fibre2);
        cfg.detection.time_bin_ps = get_num(d, p, "time_bin_ps", cfg.detection.time_bin_ps);
        cfg.detection.coincidence_window_ps =
            get_num(d, p, "coincidence_window_ps", cfg.detection.coincidence_window_ps);
        cfg.detection.spectral_resolution_fwhm_nm =
            get_num(d, p, "spectral_resolution_fwhm_nm", cfg.detection.spectral_resolution_fwhm_nm);
        cfg.detection.background_rate_hz = get_num(d, p, "background_rate_hz", 0.0);
        if (d.contains("pump_leak")) {
            const auto& leak = d["pump_leak"];
            expect_keys(leak, p + ".pump_leak", {"channel", "rate_hz"});
            PumpLeak pl;
            pl.channel = static_cast<int>(get_num(leak, p + ".pump_leak", "channel", 1.0));
            pl.rate_hz = get_num(leak, p + ".pump_leak", "rate_hz", 0.0);
            cfg.detection.pump_leak = pl;
        }
    }

    if (root.contains("grid")) {
        const auto& g = root["grid"];
        expect_keys(g, "grid", {"center_nm", "span_nm", "n"});
        cfg.grid.center_nm = get_num(g, "grid", "center_nm", cfg.source.center_wavelength_nm);
        cfg.grid.span_nm = get_num(g, "grid", "span_nm", 102.0);
        cfg.grid.n = static_cast<int>(get_num(g, "grid", "n", 512.0));
    } else {
        cfg.grid.center_nm = cfg.source.center_wavelength_nm;
    }

    if (root.contains("scan")) {
        const auto& s = root["scan"];
        const std::string p = "scan";
        expect_keys(s, p,
                    {"mode", "reference_delay_um", "stage_positions_um", "integration_time_s", "seed"});
        const std::string mode = get_str(s, p, "mode", "fd_single_frame");
        if (mode == "fd_single_frame")
            cfg.scan.mode = ScanMode::fd_single_frame;
        else if (mode == "fd_whole")
            cfg.scan.mode = ScanMode::fd_whole;
        else if (mode == "td")
            cfg.scan.mode = ScanMode::td;
        else if (mode == "classical")
            cfg.scan.mode = ScanMode::classical;
        else
            fail(p + ".mode", "unknown mode '" + mode + "'");
        cfg.scan.reference_delay_um = get_num(s, p, "reference_delay_um", 0.0);
        if (s.contains("stage_positions_um")) {
            if (!s["stage_positions_um"].is_array())
                fail(p + ".stage_positions_um", "expected an array of numbers");
            for (const auto& v : s["stage_positions_um"]) {
                if (!v.is_number())
                    fail(p + ".stage_positions_um", "expected a number");
                cfg.scan.stage_positions_um.push_back(v.get<double>());
            }
        }
        cfg.scan.integration_time_s = get_num(s, p, "integration_time_s", 1.0);
        if (s.contains("seed")) {
            if (!s["seed"].is_number_unsigned())
                fail(p + ".seed", "expected an unsigned integer");
            cfg.scan.seed = s["seed"].get<std::uint64_t>();
        }
    }

    if (root.contains("processing")) {
        const auto& pr = root["processing"];
        const std::string p = "processing";
        expect_keys(pr, p, {"fibre_comp", "pump_comp", "dc_removal"});
        cfg.processing.fibre_comp = get_bool(pr, p, "fibre_comp", true);
        const std::string pump = get_str(pr, p, "pump_comp", "data");
        if (pump == "off")
            cfg.processing.pump_comp = PumpCompMode::off;
        else if (pump == "data")
            cfg.processing.pump_comp = PumpCompMode::data;
        else if (pump == "model")
            cfg.processing.pump_comp = PumpCompMode::model;
        else
            fail(p + ".pump_comp", "expected off|data|model");
        cfg.processing.dc_removal = get_bool(pr, p, "dc_removal", true);
    }

    if (root.contains("classical")) {
        const auto& c = root["classical"];
        expect_keys(c, "classical", {"center_nm", "fwhm_nm", "reference_reflectivity"});
        cfg.classical.center_nm = get_num(c, "classical", "center_nm", 1550.0);
        cfg.classical.fwhm_nm = get_num(c, "classical", "fwhm_nm", 63.0);
        cfg.classical.reference_reflectivity = get_num(c, "classical", "reference_reflectivity", 1.0);
    }

    if (root.contains("outputs")) {
        if (!root["outputs"].is_array())
            fail("outputs", "expected an array");
        for (std::size_t i = 0; i < root["outputs"].size(); ++i) {
            const auto& out = root["outputs"][i];
            const std::string p = "outputs[" + std::to_string(i) + "]";
            expect_keys(out, p, {"kind", "path"});
            OutputRequest req;
            try {
                req.kind = output_kind_from_name(get_str(out, p, "kind", ""));
            } catch (const ConfigError&) {
                fail(p + ".kind", "unknown output kind");
            }
            req.path = get_str(out, p, "path", "");
            cfg.outputs.push_back(req);
        }
    }

    if (root.contains("whole_spectrum_frames"))
        cfg.whole_spectrum_frames = root["whole_spectrum_frames"].get<int>();

    cfg.validate();
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::string config_to_json(const PipelineConfig& cfg) {
    json root;
    root["source"] = {{"center_wavelength_nm", cfg.source.center_wavelength_nm},
                      {"diagonal_fwhm_thz", cfg.source.diagonal_fwhm_thz},
                      {"antidiagonal_fwhm_nm", cfg.source.antidiagonal_fwhm_nm},
                      {"pump_center_nm", cfg.source.pump_center_nm},
                      {"pump_fwhm_nm", cfg.source.pump_fwhm_nm},
                      {"pair_rate_hz", cfg.source.pair_rate_hz},
                      {"hom_visibility", cfg.source.hom_visibility}};
    json interfaces = json::array();
    for (const auto& itf : cfg.object.interfaces)
        interfaces.push_back({{"position_um", itf.position_um}, {"reflectivity", itf.reflectivity}});
    json gaps = json::array();
    for (const auto& gap : cfg.object.segment_dispersion)
        gaps.push_back({{"beta2_fs2", gap.beta2_fs2}, {"beta3_fs3", gap.beta3_fs3}});
    root["object"] = {{"interfaces", interfaces},
                      {"segment_dispersion", gaps},
                      {"arm_imbalance",
                       {{"beta2_fs2", cfg.object.arm_imbalance.beta2_fs2},
                        {"beta3_fs3", cfg.object.arm_imbalance.beta3_fs3}}},
                      {"dispersion_center_nm", cfg.object.dispersion_center_nm}};
    auto fibre_json = [](const FibreSpec& f) {
        return json{{"length_km", f.length_km},
                    {"group_delay_coeffs_ps", f.group_delay_coeffs_ps},
                    {"lambda_ref_nm", f.lambda_ref_nm},
                    {"lambda_min_nm", f.lambda_min_nm},
                    {"lambda_max_nm", f.lambda_max_nm}};
    };
    root["detection"] = {{"fibre1", fibre_json(cfg.detection.fibre1)},
                         {"fibre2", fibre_json(cfg.detection.fibre2)},
                         {"time_bin_ps", cfg.detection.time_bin_ps},
                         {"coincidence_window_ps", cfg.detection.coincidence_window_ps},
                         {"spectral_resolution_fwhm_nm", cfg.detection.spectral_resolution_fwhm_nm},
                         {"background_rate_hz", cfg.detection.background_rate_hz}};
    if (cfg.detection.pump_leak)
        root["detection"]["pump_leak"] = {{"channel", cfg.detection.pump_leak->channel},
                                          {"rate_hz", cfg.detection.pump_leak->rate_hz}};
    root["grid"] = {{"center_nm", cfg.grid.center_nm}, {"span_nm", cfg.grid.span_nm}, {"n", cfg.grid.n}};
    root["scan"] = {{"mode", scan_mode_name(cfg.scan.mode)},
                    {"reference_delay_um", cfg.scan.reference_delay_um},
                    {"integration_time_s", cfg.scan.integration_time_s}};
    if (!cfg.scan.stage_positions_um.empty())
        root["scan"]["stage_positions_um"] = cfg.scan.stage_positions_um;
    if (cfg.scan.seed)
        root["scan"]["seed"] = *cfg.scan.seed;
    const char* pump = cfg.processing.pump_comp == PumpCompMode::off
                           ? "off"
                           : (cfg.processing.pump_comp == PumpCompMode::data ? "data" : "model");
    root["processing"] = {{"fibre_comp", cfg.processing.fibre_comp},
                          {"pump_comp", pump},
                          {"dc_removal", cfg.processing.dc_removal}};
    root["classical"] = {{"center_nm", cfg.classical.center_nm},
                         {"fwhm_nm", cfg.classical.fwhm_nm},
                         {"reference_reflectivity", cfg.classical.reference_reflectivity}};
    json outs = json::array();
    for (const auto& out : cfg.outputs)
        outs.push_back({{"kind", output_kind_name(out.kind)}, {"path", out.path}});
    root["outputs"] = outs;
    root["whole_spectrum_frames"] = cfg.whole_spectrum_frames;
    return root.dump(2) + "\n";
}

} // namespace qoct::pipeline
