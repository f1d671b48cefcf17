// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#include "iatrack.h"

#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "config/run_config.hpp"
#include "core/error.hpp"
#include "io/motchallenge.hpp"
#include "io/synthetic.hpp"
#include "metrics/clear_mot.hpp"
#include "pipeline/pipeline.hpp"
#include "train/trainer.hpp"

struct ia_config {
    iatrack::config::RunConfig cfg;
};

namespace {

thread_local std::string g_last_error;

ia_status fail(ia_status code, const std::string& message) {
    g_last_error = message;
    return code;
}

template <typename Fn>
ia_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return IA_OK;
    } catch (const iatrack::ParseError& e) {
        return fail(IA_ERROR_PARSE, e.what());
    } catch (const iatrack::IoError& e) {
        return fail(IA_ERROR_IO, e.what());
    } catch (const iatrack::InputError& e) {
        return fail(IA_ERROR_IO, e.what());
    } catch (const iatrack::StateError& e) {
        return fail(IA_ERROR_STATE, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(IA_ERROR_INVALID_ARGUMENT, e.what());
    } catch (const std::exception& e) {
        return fail(IA_ERROR_INTERNAL, e.what());
    } catch (...) {
        return fail(IA_ERROR_INTERNAL, "unknown error");
    }
}

}  // namespace

extern "C" {

const char* ia_version(void) { return "1.0.0"; }

const char* ia_last_error(void) { return g_last_error.c_str(); }

ia_status ia_config_create(ia_config** out) {
    if (out == nullptr) return fail(IA_ERROR_INVALID_ARGUMENT, "out must not be NULL");
    return guarded([&] { *out = new ia_config(); });
}

ia_status ia_config_load(const char* path, ia_config** out) {
    if (path == nullptr || out == nullptr) return fail(IA_ERROR_INVALID_ARGUMENT, "path and out must not be NULL");
    return guarded([&] { *out = new ia_config{iatrack::config::load_config(path)}; });
}

ia_status ia_config_save(const ia_config* cfg, const char* path) {
    if (cfg == nullptr || path == nullptr) return fail(IA_ERROR_INVALID_ARGUMENT, "cfg and path must not be NULL");
    return guarded([&] { iatrack::config::save_config(cfg->cfg, path); });
}

ia_status ia_config_set(ia_config* cfg, const char* key, const char* value) {
    if (cfg == nullptr || key == nullptr || value == nullptr) {
        return fail(IA_ERROR_INVALID_ARGUMENT, "cfg, key and value must not be NULL");
    }
    return guarded([&] { iatrack::config::set_key(cfg->cfg, key, value); });
}

ia_status ia_config_get(const ia_config* cfg, const char* key, char* buf, size_t buf_size) {
    if (cfg == nullptr || key == nullptr || buf == nullptr) {
        return fail(IA_ERROR_INVALID_ARGUMENT, "cfg, key and buf must not be NULL");
    }
    return guarded([&] {
        const std::string value = iatrack::config::get_key(cfg->cfg, key);
        if (value.size() + 1 > buf_size) throw std::invalid_argument("buffer too small for key " + std::string(key));
        std::memcpy(buf, value.c_str(), value.size() + 1);
    });
}

void ia_config_destroy(ia_config* cfg) { delete cfg; }

ia_status ia_track(const ia_config* cfg, const char* output_path, const char* graph_dump_dir, ia_track_stats* stats) {
    if (cfg == nullptr) return fail(IA_ERROR_INVALID_ARGUMENT, "cfg must not be NULL");
    return guarded([&] {
        namespace fs = std::filesystem;
        const auto& rc = cfg->cfg;
        const auto started = std::chrono::steady_clock::now();

        const iatrack::io::Sequence seq = iatrack::io::open_sequence(rc.paths.sequence);
        const std::string det_path = rc.detections_path();
        if (!fs::exists(det_path)) throw iatrack::IoError("detection file not found: " + det_path);
        const std::vector<iatrack::Detection> detections = iatrack::io::parse_detections(det_path);

        const iatrack::train::Policies policies = iatrack::train::load_policies(rc);
        const iatrack::pipeline::PipelineConfig pcfg = iatrack::pipeline::ablation_mode(rc.pipe, rc.mode);

        iatrack::pipeline::DumpSink sink = nullptr;
        if (graph_dump_dir != nullptr && graph_dump_dir[0] != '\0') {
            const std::string dir = graph_dump_dir;
            fs::create_directories(dir);
            sink = [dir](std::int64_t frame, const std::string& dump) {
                char name[32];
                std::snprintf(name, sizeof(name), "frame_%06lld.txt", static_cast<long long>(frame));
                std::ofstream out(fs::path(dir) / name);
                out << dump;
            };
        }

        const iatrack::pipeline::FrameProvider frames{seq.spec.frame_count,
                                                      [&seq](std::int64_t f) { return seq.frame(f); }};
        const iatrack::pipeline::RunResult result =
            iatrack::pipeline::run(frames, detections, pcfg, policies.refresh_policy, policies.pair_scorer, sink);

        std::vector<iatrack::metrics::TrackedBox> boxes;
        for (const auto& traj : result.trajectories) {
            for (const auto& entry : traj.entries) boxes.push_back({entry.frame, traj.id, entry.box});
        }
        const std::string out_path =
            output_path != nullptr && output_path[0] != '\0' ? std::string(output_path) : rc.paths.output;
        if (out_path.empty()) throw iatrack::InputError("no output path configured (paths.output)");
        iatrack::io::write_results(boxes, out_path);

        if (stats != nullptr) {
            stats->frames = result.frames;
            stats->targets_created = result.targets_created;
            stats->live_at_end = result.live_at_end;
            stats->wall_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        }
    });
}

ia_status ia_evaluate(const char* results_path, const char* gt_path, double iou_threshold, ia_mot_report* report) {
    if (results_path == nullptr || gt_path == nullptr || report == nullptr) {
        return fail(IA_ERROR_INVALID_ARGUMENT, "results_path, gt_path and report must not be NULL");
    }
    return guarded([&] {
        const auto results = iatrack::io::parse_tracked_boxes(results_path);
        const auto gt = iatrack::io::parse_tracked_boxes(gt_path);
        const iatrack::metrics::MotReport r = iatrack::metrics::evaluate(results, gt, iou_threshold);
        report->mota = r.mota;
        report->motp = r.motp;
        report->mt_percent = r.mt_percent;
        report->ml_percent = r.ml_percent;
        report->fp = r.fp;
        report->fn = r.fn;
        report->id_switches = r.ids;
        report->fragmentations = r.frag;
        report->gt_total = r.gt_total;
    });
}

ia_status ia_train(const ia_config* cfg, ia_train_stats* stats) {
    if (cfg == nullptr) return fail(IA_ERROR_INVALID_ARGUMENT, "cfg must not be NULL");
    return guarded([&] {
        const iatrack::train::TrainReport report = iatrack::train::train_policies(cfg->cfg);
        if (stats != nullptr) {
            stats->refresh_converged = report.refresh_converged ? 1 : 0;
            stats->refresh_epochs = report.refresh_epochs;
            stats->refresh_pool_size = static_cast<int64_t>(report.refresh_pool);
            stats->refresh_episodes = static_cast<int64_t>(report.refresh_episodes);
            stats->pair_samples = static_cast<int64_t>(report.pair_samples);
        }
    });
}

ia_status ia_synth(const ia_config* cfg, const char* out_dir) {
    if (cfg == nullptr || out_dir == nullptr) {
        return fail(IA_ERROR_INVALID_ARGUMENT, "cfg and out_dir must not be NULL");
    }
    return guarded([&] {
        const iatrack::io::SyntheticSequence seq = iatrack::io::generate_synthetic(cfg->cfg.synthetic_config());
        iatrack::io::write_sequence(seq, out_dir);
    });
}

}  // extern "C"
