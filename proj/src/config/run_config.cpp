// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#include "config/run_config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "core/error.hpp"

namespace iatrack::config {
namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError("config key '" + key + "' needs a number, got '" + value + "'");
    }
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const std::int64_t v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError("config key '" + key + "' needs an integer, got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ParseError("config key '" + key + "' needs true/false, got '" + value + "'");
}

struct KeyEntry {
    std::string name;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

const std::vector<KeyEntry>& key_table() {
    static const std::vector<KeyEntry> table = {
        {"seed", [](const RunConfig& c) { return std::to_string(c.seed); },
         [](RunConfig& c, const std::string& v) { c.seed = static_cast<std::uint64_t>(parse_int("seed", v)); }},
        {"mode", [](const RunConfig& c) { return mode_name(c.mode); },
         [](RunConfig& c, const std::string& v) { c.mode = parse_mode(v); }},
        {"policies.allow_untrained", [](const RunConfig& c) { return c.allow_untrained ? std::string("true") : std::string("false"); },
         [](RunConfig& c, const std::string& v) { c.allow_untrained = parse_bool("policies.allow_untrained", v); }},

        {"feature.template_h", [](const RunConfig& c) { return std::to_string(c.pipe.feature.template_h); },
         [](RunConfig& c, const std::string& v) { c.pipe.feature.template_h = static_cast<int>(parse_int("feature.template_h", v)); }},
        {"feature.template_w", [](const RunConfig& c) { return std::to_string(c.pipe.feature.template_w); },
         [](RunConfig& c, const std::string& v) { c.pipe.feature.template_w = static_cast<int>(parse_int("feature.template_w", v)); }},
        {"feature.cell_size", [](const RunConfig& c) { return std::to_string(c.pipe.feature.cell_size); },
         [](RunConfig& c, const std::string& v) { c.pipe.feature.cell_size = static_cast<int>(parse_int("feature.cell_size", v)); }},
        {"feature.det_channels", [](const RunConfig& c) { return std::to_string(c.pipe.feature.det_channels); },
         [](RunConfig& c, const std::string& v) { c.pipe.feature.det_channels = static_cast<int>(parse_int("feature.det_channels", v)); }},
        {"feature.id_channels", [](const RunConfig& c) { return std::to_string(c.pipe.feature.id_channels); },
         [](RunConfig& c, const std::string& v) { c.pipe.feature.id_channels = static_cast<int>(parse_int("feature.id_channels", v)); }},
        {"feature.padding", [](const RunConfig& c) { return fmt_double(c.pipe.feature.padding); },
         [](RunConfig& c, const std::string& v) { c.pipe.feature.padding = parse_double("feature.padding", v); }},
        {"feature.det_gain", [](const RunConfig& c) { return fmt_double(c.pipe.feature.det_gain); },
         [](RunConfig& c, const std::string& v) { c.pipe.feature.det_gain = parse_double("feature.det_gain", v); }},
        {"feature.id_gain", [](const RunConfig& c) { return fmt_double(c.pipe.feature.id_gain); },
         [](RunConfig& c, const std::string& v) { c.pipe.feature.id_gain = parse_double("feature.id_gain", v); }},

        {"kcf.lambda", [](const RunConfig& c) { return fmt_double(c.pipe.kcf.lambda); },
         [](RunConfig& c, const std::string& v) { c.pipe.kcf.lambda = parse_double("kcf.lambda", v); }},
        {"kcf.sigma", [](const RunConfig& c) { return fmt_double(c.pipe.kcf.sigma); },
         [](RunConfig& c, const std::string& v) { c.pipe.kcf.sigma = parse_double("kcf.sigma", v); }},
        {"kcf.label_sigma_factor", [](const RunConfig& c) { return fmt_double(c.pipe.kcf.label_sigma_factor); },
         [](RunConfig& c, const std::string& v) { c.pipe.kcf.label_sigma_factor = parse_double("kcf.label_sigma_factor", v); }},

        {"multicut.big_c", [](const RunConfig& c) { return fmt_double(c.pipe.big_c); },
         [](RunConfig& c, const std::string& v) { c.pipe.big_c = parse_double("multicut.big_c", v); }},
        {"multicut.score_floor", [](const RunConfig& c) { return fmt_double(c.pipe.score_floor); },
         [](RunConfig& c, const std::string& v) { c.pipe.score_floor = parse_double("multicut.score_floor", v); }},

        {"pipeline.t_v", [](const RunConfig& c) { return std::to_string(c.pipe.t_v); },
         [](RunConfig& c, const std::string& v) { c.pipe.t_v = static_cast<int>(parse_int("pipeline.t_v", v)); }},
        {"pipeline.retrack_iou_gate", [](const RunConfig& c) { return fmt_double(c.pipe.retrack_iou_gate); },
         [](RunConfig& c, const std::string& v) { c.pipe.retrack_iou_gate = parse_double("pipeline.retrack_iou_gate", v); }},

        {"occlusion.accept_threshold", [](const RunConfig& c) { return fmt_double(c.pipe.occlusion_accept); },
         [](RunConfig& c, const std::string& v) { c.pipe.occlusion_accept = parse_double("occlusion.accept_threshold", v); }},

        {"refresh.learning_rate", [](const RunConfig& c) { return fmt_double(c.pipe.refresh_learning_rate); },
         [](RunConfig& c, const std::string& v) { c.pipe.refresh_learning_rate = parse_double("refresh.learning_rate", v); }},
        {"refresh.batch_size", [](const RunConfig& c) { return std::to_string(c.pipe.refresh_batch_size); },
         [](RunConfig& c, const std::string& v) { c.pipe.refresh_batch_size = static_cast<int>(parse_int("refresh.batch_size", v)); }},
        {"refresh.iters_per_mistake", [](const RunConfig& c) { return std::to_string(c.pipe.refresh_iters_per_mistake); },
         [](RunConfig& c, const std::string& v) { c.pipe.refresh_iters_per_mistake = static_cast<int>(parse_int("refresh.iters_per_mistake", v)); }},
        {"refresh.max_epochs", [](const RunConfig& c) { return std::to_string(c.pipe.refresh_max_epochs); },
         [](RunConfig& c, const std::string& v) { c.pipe.refresh_max_epochs = static_cast<int>(parse_int("refresh.max_epochs", v)); }},
        {"refresh.pooled_grid", [](const RunConfig& c) { return std::to_string(c.pipe.refresh_pooled_grid); },
         [](RunConfig& c, const std::string& v) { c.pipe.refresh_pooled_grid = static_cast<int>(parse_int("refresh.pooled_grid", v)); }},

        {"paths.sequence", [](const RunConfig& c) { return c.paths.sequence; },
         [](RunConfig& c, const std::string& v) { c.paths.sequence = v; }},
        {"paths.detections", [](const RunConfig& c) { return c.paths.detections; },
         [](RunConfig& c, const std::string& v) { c.paths.detections = v; }},
        {"paths.gt", [](const RunConfig& c) { return c.paths.ground_truth; },
         [](RunConfig& c, const std::string& v) { c.paths.ground_truth = v; }},
        {"paths.refresh_policy", [](const RunConfig& c) { return c.paths.refresh_policy; },
         [](RunConfig& c, const std::string& v) { c.paths.refresh_policy = v; }},
        {"paths.pair_scorer", [](const RunConfig& c) { return c.paths.pair_scorer; },
         [](RunConfig& c, const std::string& v) { c.paths.pair_scorer = v; }},
        {"paths.output", [](const RunConfig& c) { return c.paths.output; },
         [](RunConfig& c, const std::string& v) { c.paths.output = v; }},

        {"synth.layout", [](const RunConfig& c) { return c.synth.layout; },
         [](RunConfig& c, const std::string& v) {
             if (v != "lanes" && v != "crossing" && v != "random") {
                 throw ParseError("synth.layout must be lanes, crossing or random");
             }
             c.synth.layout = v;
         }},
        {"synth.n_targets", [](const RunConfig& c) { return std::to_string(c.synth.n_targets); },
         [](RunConfig& c, const std::string& v) { c.synth.n_targets = static_cast<int>(parse_int("synth.n_targets", v)); }},
        {"synth.frames", [](const RunConfig& c) { return std::to_string(c.synth.frames); },
         [](RunConfig& c, const std::string& v) { c.synth.frames = parse_int("synth.frames", v); }},
        {"synth.width", [](const RunConfig& c) { return std::to_string(c.synth.width); },
         [](RunConfig& c, const std::string& v) { c.synth.width = static_cast<int>(parse_int("synth.width", v)); }},
        {"synth.height", [](const RunConfig& c) { return std::to_string(c.synth.height); },
         [](RunConfig& c, const std::string& v) { c.synth.height = static_cast<int>(parse_int("synth.height", v)); }},
        {"synth.target_w", [](const RunConfig& c) { return fmt_double(c.synth.target_w); },
         [](RunConfig& c, const std::string& v) { c.synth.target_w = parse_double("synth.target_w", v); }},
        {"synth.target_h", [](const RunConfig& c) { return fmt_double(c.synth.target_h); },
         [](RunConfig& c, const std::string& v) { c.synth.target_h = parse_double("synth.target_h", v); }},
        {"synth.size_growth", [](const RunConfig& c) { return fmt_double(c.synth.size_growth); },
         [](RunConfig& c, const std::string& v) { c.synth.size_growth = parse_double("synth.size_growth", v); }},
        {"synth.center_jitter", [](const RunConfig& c) { return fmt_double(c.synth.center_jitter); },
         [](RunConfig& c, const std::string& v) { c.synth.center_jitter = parse_double("synth.center_jitter", v); }},
        {"synth.size_jitter", [](const RunConfig& c) { return fmt_double(c.synth.size_jitter); },
         [](RunConfig& c, const std::string& v) { c.synth.size_jitter = parse_double("synth.size_jitter", v); }},
        {"synth.fn_rate", [](const RunConfig& c) { return fmt_double(c.synth.fn_rate); },
         [](RunConfig& c, const std::string& v) { c.synth.fn_rate = parse_double("synth.fn_rate", v); }},
        {"synth.fp_rate", [](const RunConfig& c) { return fmt_double(c.synth.fp_rate); },
         [](RunConfig& c, const std::string& v) { c.synth.fp_rate = parse_double("synth.fp_rate", v); }},
    };
    return table;
}

const KeyEntry& find_key(const std::string& key) {
    for (const KeyEntry& entry : key_table()) {
        if (entry.name == key) return entry;
    }
    throw ParseError("unknown config key: " + key);
}

std::string trim(const std::string& s) {
    const std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

pipeline::AblationMode parse_mode(const std::string& name) {
    if (name == "full") return pipeline::AblationMode::full;
    if (name == "no_refresh") return pipeline::AblationMode::no_refresh;
    if (name == "no_verification") return pipeline::AblationMode::no_verification;
    if (name == "no_target_awareness") return pipeline::AblationMode::no_target_awareness;
    throw ParseError("unknown mode: " + name + " (expected full, no_refresh, no_verification, no_target_awareness)");
}

std::string mode_name(pipeline::AblationMode mode) {
    switch (mode) {
        case pipeline::AblationMode::full: return "full";
        case pipeline::AblationMode::no_refresh: return "no_refresh";
        case pipeline::AblationMode::no_verification: return "no_verification";
        default: return "no_target_awareness";
    }
}

std::string RunConfig::detections_path() const {
    if (!paths.detections.empty()) return paths.detections;
    return (std::filesystem::path(paths.sequence) / "det" / "det.txt").string();
}

std::string RunConfig::ground_truth_path() const {
    if (!paths.ground_truth.empty()) return paths.ground_truth;
    return (std::filesystem::path(paths.sequence) / "gt" / "gt.txt").string();
}

io::SyntheticConfig RunConfig::synthetic_config() const {
    io::SyntheticConfig out;
    out.n_targets = synth.n_targets;
    out.frame_count = synth.frames;
    out.width = synth.width;
    out.height = synth.height;
    out.target_w = synth.target_w;
    out.target_h = synth.target_h;
    out.size_growth = synth.size_growth;
    out.center_jitter = synth.center_jitter;
    out.size_jitter = synth.size_jitter;
    out.fn_rate = synth.fn_rate;
    out.fp_rate = synth.fp_rate;
    out.rng_seed = seed;
    if (synth.layout == "lanes") out.layout = io::SyntheticLayout::lanes;
    else if (synth.layout == "crossing") out.layout = io::SyntheticLayout::crossing;
    else out.layout = io::SyntheticLayout::random_walk;
    return out;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    RunConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        try {
            set_key(cfg, key, value);
        } catch (const ParseError& e) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cfg;
}

void save_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write config file: " + path);
    for (const KeyEntry& entry : key_table()) {
        out << entry.name << " = " << entry.get(cfg) << "\n";
    }
    if (!out) throw IoError("failed writing config file: " + path);
}

void set_key(RunConfig& cfg, const std::string& key, const std::string& value) { find_key(key).set(cfg, value); }

std::string get_key(const RunConfig& cfg, const std::string& key) { return find_key(key).get(cfg); }

std::vector<std::string> list_keys() {
    std::vector<std::string> out;
    for (const KeyEntry& entry : key_table()) out.push_back(entry.name);
    return out;
}

}  // namespace iatrack::config
