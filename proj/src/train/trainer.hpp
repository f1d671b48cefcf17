// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "config/run_config.hpp"
#include "io/synthetic.hpp"
#include "metrics/clear_mot.hpp"
#include "occlusion/occlusion.hpp"
#include "pipeline/pipeline.hpp"
#include "refresh/refresh.hpp"

namespace iatrack::train {

/// Refresh-policy episodes derived from ground truth: each gt box is paired
/// with its matched detection and a seeded stand-in prediction box that is
/// either near the truth or displaced off-target, so "detection encloses
/// better" and "prediction encloses better" cases both occur.
std::vector<refresh::Episode> build_refresh_episodes(const pipeline::FrameProvider& frames,
                                                     const std::vector<metrics::TrackedBox>& gt,
                                                     const std::vector<Detection>& detections,
                                                     const features::FeatureConfig& fcfg, int pooled_grid,
                                                     std::uint64_t seed);

/// Pair-scorer samples from gt trajectories: same-target pairs across seeded
/// gaps versus different-target pairs at the same frames.
std::vector<occlusion::LabeledPair> build_pair_samples(const pipeline::FrameProvider& frames,
                                                       const std::vector<metrics::TrackedBox>& gt, int max_gap,
                                                       std::uint64_t seed);

struct TrainReport {
    bool refresh_converged = false;
    int refresh_epochs = 0;
    std::size_t refresh_pool = 0;
    std::size_t refresh_episodes = 0;
    std::size_t pair_samples = 0;
};

/// Train both policies on the configured sequence and write the weight
/// files at the configured paths.
TrainReport train_policies(const config::RunConfig& cfg);

/// Load the policies named in the config; when files are missing and
/// allow_untrained is set, zero-weight defaults are returned instead.
struct Policies {
    refresh::RefreshClassifier refresh_policy;
    occlusion::PairScorer pair_scorer;
};
Policies load_policies(const config::RunConfig& cfg);

}  // namespace iatrack::train
