// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "core/geometry.hpp"
#include "core/image.hpp"
#include "features/features.hpp"
#include "kcf/kcf.hpp"
#include "multicut/multicut.hpp"
#include "occlusion/occlusion.hpp"
#include "refresh/refresh.hpp"

namespace iatrack::pipeline {

enum class BoxSource { predicted, refreshed, interpolated };

struct TrajectoryEntry {
    std::int64_t frame = 0;
    BoundingBox box;
    BoxSource source = BoxSource::predicted;
};

struct Trajectory {
    TargetId id = 0;
    std::vector<TrajectoryEntry> entries;
};

enum class TargetStatus { tracked, unverified, exited };

struct TargetState {
    TargetId id = 0;
    std::shared_ptr<const kcf::DualModel> model;
    std::optional<refresh::ModelBackup> backup;
    BoundingBox box;  // current committed box; frozen while unverified
    int frames_unverified = 0;
    TargetStatus status = TargetStatus::tracked;
    std::vector<TrajectoryEntry> trajectory;
    std::int64_t last_verified_frame = 0;
    BoundingBox last_verified_box;
    occlusion::ColorHistogram last_verified_hist;
};

enum class AblationMode { full, no_refresh, no_verification, no_target_awareness };

struct PipelineConfig {
    features::FeatureConfig feature;
    kcf::KcfConfig kcf;
    double big_c = 1e6;
    double score_floor = 0.0;      // detection scores below this create no edge
    int t_v = 4;                   // verification horizon, frames
    double retrack_iou_gate = 0.3;
    double occlusion_accept = 0.0;
    bool refresh_enabled = true;
    int refresh_pooled_grid = 4;
    double refresh_learning_rate = 0.001;
    int refresh_batch_size = 32;
    int refresh_iters_per_mistake = 5;
    int refresh_max_epochs = 50;

    void validate() const;
};

/// Applies one of the ablations: no_refresh disables the refresh step,
/// no_verification removes counter expiry (t_v -> effectively infinite),
/// no_target_awareness zeroes the identity-channel gain.
PipelineConfig ablation_mode(PipelineConfig config, AblationMode mode);

struct TrackerState {
    std::int64_t frame = 0;
    std::map<TargetId, TargetState> targets;
    PipelineConfig config;
    TargetId next_id = 1;
    refresh::RefreshClassifier refresh_policy;
    occlusion::PairScorer pair_scorer;
};

struct StepOutput {
    std::int64_t frame = 0;
    struct Out {
        TargetId id = 0;
        BoundingBox box;
        BoxSource source = BoxSource::predicted;
    };
    std::vector<Out> outputs;
    std::vector<TargetId> entered;
    std::vector<TargetId> exited;
    std::vector<TargetId> verified;
    std::vector<TargetId> recovered;
    /// Every detection claim of the frame (multicut pairs, re-tracking,
    /// recovery, entering targets): target id -> detection index.
    std::vector<std::pair<TargetId, int>> detection_claims;
    std::string graph_dump;  // filled when requested
};

/// One frame of the tracking loop: predict, pool candidates, multicut
/// verification, refresh with backup, restore + re-tracking, occlusion
/// recovery, exit and enter handling, trajectory commit. The step is
/// atomic: on error the state is left untouched.
StepOutput step(TrackerState& state, const Image& image, const std::vector<Detection>& detections,
                bool want_graph_dump = false);

struct FrameProvider {
    std::int64_t frame_count = 0;
    std::function<Image(std::int64_t)> frame;  // 1-based
};

struct RunResult {
    std::vector<Trajectory> trajectories;
    std::int64_t frames = 0;
    std::int64_t targets_created = 0;
    std::int64_t live_at_end = 0;
};

using DumpSink = std::function<void(std::int64_t frame, const std::string& dump)>;

/// Fold step over the whole sequence; deterministic for fixed inputs and
/// policies.
RunResult run(const FrameProvider& frames, const std::vector<Detection>& detections, const PipelineConfig& config,
              const refresh::RefreshClassifier& refresh_policy, const occlusion::PairScorer& pair_scorer,
              const DumpSink& dump_sink = nullptr);

}  // namespace iatrack::pipeline
