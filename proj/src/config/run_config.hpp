// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "io/synthetic.hpp"
#include "pipeline/pipeline.hpp"

namespace iatrack::config {

struct Paths {
    std::string sequence;        // sequence directory (img1/, det/, gt/)
    std::string detections;      // defaults to <sequence>/det/det.txt
    std::string ground_truth;    // defaults to <sequence>/gt/gt.txt
    std::string refresh_policy;  // weights files
    std::string pair_scorer;
    std::string output;          // results file
};

struct SynthSection {
    std::string layout = "lanes";  // lanes | crossing | random
    int n_targets = 4;
    std::int64_t frames = 100;
    int width = 320;
    int height = 240;
    double target_w = 36.0;
    double target_h = 48.0;
    double size_growth = 1.0;
    double center_jitter = 0.0;
    double size_jitter = 0.0;
    double fn_rate = 0.0;
    double fp_rate = 0.0;
};

/// Everything a run needs, loadable from a flat "key = value" file.
/// Unknown keys are rejected; save/load round-trips exactly.
struct RunConfig {
    pipeline::PipelineConfig pipe;
    pipeline::AblationMode mode = pipeline::AblationMode::full;
    std::uint64_t seed = 1;
    bool allow_untrained = false;
    Paths paths;
    SynthSection synth;

    std::string detections_path() const;
    std::string ground_truth_path() const;
    io::SyntheticConfig synthetic_config() const;
};

RunConfig load_config(const std::string& path);
void save_config(const RunConfig& cfg, const std::string& path);

/// Key-level access used by overrides (--seed, --tv, ablation modes, ...).
void set_key(RunConfig& cfg, const std::string& key, const std::string& value);
std::string get_key(const RunConfig& cfg, const std::string& key);
std::vector<std::string> list_keys();

pipeline::AblationMode parse_mode(const std::string& name);
std::string mode_name(pipeline::AblationMode mode);

}  // namespace iatrack::config
