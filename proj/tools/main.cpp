// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors
//
// Command-line front end; links the shared C API only.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "iatrack.h"

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;

int exit_code_for(ia_status status) {
    switch (status) {
        case IA_OK:
            return kExitOk;
        case IA_ERROR_INVALID_ARGUMENT:
        case IA_ERROR_IO:
        case IA_ERROR_PARSE:
            return kExitInput;
        default:
            return kExitInternal;
    }
}

int report_failure(ia_status status) {
    std::fprintf(stderr, "error: %s\n", ia_last_error());
    return exit_code_for(status);
}

struct ConfigHandle {
    ia_config* ptr = nullptr;
    ~ConfigHandle() { ia_config_destroy(ptr); }
};

int load_config(const std::string& path, ConfigHandle& out) {
    const ia_status st = ia_config_load(path.c_str(), &out.ptr);
    if (st != IA_OK) return report_failure(st);
    return kExitOk;
}

int apply_override(ia_config* cfg, const std::string& key, const std::string& value) {
    const ia_status st = ia_config_set(cfg, key.c_str(), value.c_str());
    if (st != IA_OK) return report_failure(st);
    return kExitOk;
}

std::string get_key(const ia_config* cfg, const std::string& key) {
    char buf[1024] = {0};
    if (ia_config_get(cfg, key.c_str(), buf, sizeof(buf)) != IA_OK) return "";
    return buf;
}

std::string gt_path_of(const ia_config* cfg) {
    const std::string explicit_gt = get_key(cfg, "paths.gt");
    if (!explicit_gt.empty()) return explicit_gt;
    return (fs::path(get_key(cfg, "paths.sequence")) / "gt" / "gt.txt").string();
}

void print_report_header() {
    std::printf("%-8s %-6s %-6s %-6s %-6s %-7s %-7s %-5s %-5s\n", "", "MOTA", "MOTP", "MT", "ML", "FP", "FN", "IDS",
                "Frag");
}

void print_report_row(const std::string& label, const ia_mot_report& r) {
    std::printf("%-8s %-6.1f %-6.1f %-5.1f%% %-5.1f%% %-7" PRId64 " %-7" PRId64 " %-5" PRId64 " %-5" PRId64 "\n",
                label.c_str(), r.mota, r.motp, r.mt_percent, r.ml_percent, r.fp, r.fn, r.id_switches,
                r.fragmentations);
}

void print_machine_line(const ia_mot_report& r) {
    std::printf("mota=%.6g;motp=%.6g;mt=%.6g;ml=%.6g;fp=%" PRId64 ";fn=%" PRId64 ";ids=%" PRId64 ";frag=%" PRId64
                ";gt=%" PRId64 "\n",
                r.mota, r.motp, r.mt_percent, r.ml_percent, r.fp, r.fn, r.id_switches, r.fragmentations, r.gt_total);
}

std::string temp_results_path(const std::string& tag) {
    return (fs::temp_directory_path() / ("iatrack_" + tag + "_" + std::to_string(::getpid()) + ".txt")).string();
}

int run_track(const std::string& config_path, const std::optional<std::string>& out,
              const std::optional<std::string>& dump_dir, const std::vector<std::pair<std::string, std::string>>& overrides) {
    ConfigHandle cfg;
    if (const int rc = load_config(config_path, cfg); rc != kExitOk) return rc;
    for (const auto& [k, v] : overrides) {
        if (const int rc = apply_override(cfg.ptr, k, v); rc != kExitOk) return rc;
    }
    ia_track_stats stats{};
    const ia_status st = ia_track(cfg.ptr, out.has_value() ? out->c_str() : nullptr,
                                  dump_dir.has_value() ? dump_dir->c_str() : nullptr, &stats);
    if (st != IA_OK) return report_failure(st);
    std::printf("frames=%" PRId64 " targets_created=%" PRId64 " live_at_end=%" PRId64 " wall_s=%.3f\n", stats.frames,
                stats.targets_created, stats.live_at_end, stats.wall_seconds);
    return kExitOk;
}

int run_eval(const std::string& results, const std::string& gt, double iou) {
    ia_mot_report report{};
    const ia_status st = ia_evaluate(results.c_str(), gt.c_str(), iou, &report);
    if (st != IA_OK) return report_failure(st);
    print_report_header();
    print_report_row("", report);
    print_machine_line(report);
    return kExitOk;
}

int run_sweep(const std::string& config_path, const std::vector<int>& tvs, double iou,
              const std::vector<std::pair<std::string, std::string>>& overrides) {
    ConfigHandle cfg;
    if (const int rc = load_config(config_path, cfg); rc != kExitOk) return rc;
    for (const auto& [k, v] : overrides) {
        if (const int rc = apply_override(cfg.ptr, k, v); rc != kExitOk) return rc;
    }
    const std::string gt = gt_path_of(cfg.ptr);
    std::printf("%-6s %-6s %-7s %-7s\n", "T_V", "MOTA", "FP", "FN");
    for (const int tv : tvs) {
        if (const int rc = apply_override(cfg.ptr, "pipeline.t_v", std::to_string(tv)); rc != kExitOk) return rc;
        const std::string results = temp_results_path("sweep_tv" + std::to_string(tv));
        ia_status st = ia_track(cfg.ptr, results.c_str(), nullptr, nullptr);
        if (st != IA_OK) return report_failure(st);
        ia_mot_report report{};
        st = ia_evaluate(results.c_str(), gt.c_str(), iou, &report);
        fs::remove(results);
        if (st != IA_OK) return report_failure(st);
        std::printf("%-6d %-6.1f %-7" PRId64 " %-7" PRId64 "\n", tv, report.mota, report.fp, report.fn);
    }
    return kExitOk;
}

int run_ablate(const std::string& config_path, double iou,
               const std::vector<std::pair<std::string, std::string>>& overrides) {
    ConfigHandle cfg;
    if (const int rc = load_config(config_path, cfg); rc != kExitOk) return rc;
    for (const auto& [k, v] : overrides) {
        if (const int rc = apply_override(cfg.ptr, k, v); rc != kExitOk) return rc;
    }
    const std::string gt = gt_path_of(cfg.ptr);
    const std::vector<std::string> modes = {"full", "no_refresh", "no_verification", "no_target_awareness"};
    print_report_header();
    for (const std::string& mode : modes) {
        if (const int rc = apply_override(cfg.ptr, "mode", mode); rc != kExitOk) return rc;
        const std::string results = temp_results_path("ablate_" + mode);
        ia_status st = ia_track(cfg.ptr, results.c_str(), nullptr, nullptr);
        if (st != IA_OK) return report_failure(st);
        ia_mot_report report{};
        st = ia_evaluate(results.c_str(), gt.c_str(), iou, &report);
        fs::remove(results);
        if (st != IA_OK) return report_failure(st);
        print_report_row(mode, report);
    }
    return kExitOk;
}

int run_train(const std::string& config_path, const std::vector<std::pair<std::string, std::string>>& overrides) {
    ConfigHandle cfg;
    if (const int rc = load_config(config_path, cfg); rc != kExitOk) return rc;
    for (const auto& [k, v] : overrides) {
        if (const int rc = apply_override(cfg.ptr, k, v); rc != kExitOk) return rc;
    }
    ia_train_stats stats{};
    const ia_status st = ia_train(cfg.ptr, &stats);
    if (st != IA_OK) return report_failure(st);
    std::printf("refresh: episodes=%" PRId64 " pool=%" PRId64 " epochs=%" PRId64 " converged=%s\n",
                stats.refresh_episodes, stats.refresh_pool_size, stats.refresh_epochs,
                stats.refresh_converged ? "true" : "false");
    std::printf("pair_scorer: samples=%" PRId64 "\n", stats.pair_samples);
    return kExitOk;
}

int run_synth(const std::string& config_path, const std::string& out_dir,
              const std::vector<std::pair<std::string, std::string>>& overrides) {
    ConfigHandle cfg;
    if (const int rc = load_config(config_path, cfg); rc != kExitOk) return rc;
    for (const auto& [k, v] : overrides) {
        if (const int rc = apply_override(cfg.ptr, k, v); rc != kExitOk) return rc;
    }
    const ia_status st = ia_synth(cfg.ptr, out_dir.c_str());
    if (st != IA_OK) return report_failure(st);
    std::printf("sequence written to %s\n", out_dir.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"iatrack: instance-aware multi-object tracking engine"};
    app.require_subcommand(1);

    std::string config_path, results_path, gt_path, out_path, dump_dir, mode, synth_out;
    std::vector<int> tv_list;
    double iou = 0.5;
    std::optional<std::int64_t> seed;
    std::optional<int> tv_single;

    auto overrides_of = [&]() {
        std::vector<std::pair<std::string, std::string>> o;
        if (seed.has_value()) o.emplace_back("seed", std::to_string(*seed));
        if (tv_single.has_value()) o.emplace_back("pipeline.t_v", std::to_string(*tv_single));
        if (!mode.empty()) o.emplace_back("mode", mode);
        return o;
    };

    CLI::App* track = app.add_subcommand("track", "run the tracker on the configured sequence");
    track->add_option("--config", config_path, "run configuration file")->required();
    track->add_option("--out", out_path, "results file (overrides paths.output)");
    track->add_option("--seed", seed, "seed override");
    track->add_option("--tv", tv_single, "verification horizon override");
    track->add_option("--mode", mode, "ablation mode: full|no_refresh|no_verification|no_target_awareness");
    track->add_option("--dump-graphs", dump_dir, "write per-frame association graph dumps to this directory");

    CLI::App* eval = app.add_subcommand("eval", "CLEAR MOT evaluation of a results file against ground truth");
    eval->add_option("--results", results_path, "results file")->required();
    eval->add_option("--gt", gt_path, "ground-truth file")->required();
    eval->add_option("--iou", iou, "match threshold (default 0.5)");

    CLI::App* sweep = app.add_subcommand("sweep-tv", "track + evaluate across a list of T_V values");
    sweep->add_option("--config", config_path, "run configuration file")->required();
    sweep->add_option("--tv", tv_list, "T_V values")->required()->delimiter(',');
    sweep->add_option("--iou", iou, "match threshold (default 0.5)");
    sweep->add_option("--seed", seed, "seed override");

    CLI::App* ablate = app.add_subcommand("ablate", "compare the four ablation modes on the configured sequence");
    ablate->add_option("--config", config_path, "run configuration file")->required();
    ablate->add_option("--iou", iou, "match threshold (default 0.5)");
    ablate->add_option("--seed", seed, "seed override");

    CLI::App* train = app.add_subcommand("train", "train the refresh policy and pair scorer");
    train->add_option("--config", config_path, "run configuration file")->required();
    train->add_option("--seed", seed, "seed override");

    CLI::App* synth = app.add_subcommand("synth", "generate the configured synthetic sequence");
    synth->add_option("--config", config_path, "run configuration file")->required();
    synth->add_option("--out", synth_out, "output sequence directory")->required();
    synth->add_option("--seed", seed, "seed override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInput;
    }

    if (track->parsed()) {
        return run_track(config_path, out_path.empty() ? std::nullopt : std::make_optional(out_path),
                         dump_dir.empty() ? std::nullopt : std::make_optional(dump_dir), overrides_of());
    }
    if (eval->parsed()) return run_eval(results_path, gt_path, iou);
    if (sweep->parsed()) return run_sweep(config_path, tv_list, iou, overrides_of());
    if (ablate->parsed()) return run_ablate(config_path, iou, overrides_of());
    if (train->parsed()) return run_train(config_path, overrides_of());
    if (synth->parsed()) return run_synth(config_path, synth_out, overrides_of());
    return kExitInput;
}
