// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "core/geometry.hpp"
#include "core/image.hpp"
#include "features/features.hpp"
#include "kcf/kcf.hpp"

namespace iatrack::refresh {

enum class Decision { keep, refresh };

/// Linear-logistic layer over the pooled stacked-feature descriptor. The
/// classifier is pluggable behind this interface; the training protocol does
/// not depend on its internals.
struct RefreshClassifier {
    std::vector<double> weights;  // sized to the descriptor on first use
    double bias = 0.0;
    double learning_rate = 0.001;
    int batch_size = 32;
    int iters_per_mistake = 5;
};

struct RefreshSample {
    std::vector<double> descriptor;
    Decision label = Decision::keep;
};

/// Pre-refresh model retained for one frame so a bad refresh can be undone.
struct ModelBackup {
    kcf::DualModel previous;
    std::int64_t saved_at = 0;
};

/// A replayable training instant: the descriptor with the boxes needed to
/// derive the correct label from ground truth.
struct Episode {
    std::vector<double> descriptor;
    BoundingBox gt_box;
    BoundingBox pred_box;
    BoundingBox det_box;
};

/// Pooled fused features at the prediction box followed by the detection
/// box, flattened; length 2 * grid^2 * (det_channels + id_channels). No
/// cosine window is applied to the pooled grids.
std::vector<double> refresh_descriptor(const Image& image, const BoundingBox& pred_box, const BoundingBox& det_box,
                                       const features::FeatureConfig& cfg, int pooled_grid = 4);

/// Logistic score of the linear response; refresh iff score > 0.5 (an exact
/// tie keeps the model).
std::pair<Decision, double> classify(const RefreshClassifier& clf, const std::vector<double>& descriptor);

struct TrainPolicyResult {
    RefreshClassifier classifier;
    bool converged = false;
    int epochs_run = 0;
    std::size_t pool_size = 0;
};

/// Mistake-driven protocol: replay episodes in order; the correct label is
/// refresh iff the detection box has strictly greater IoU with ground truth
/// than the prediction box. Each mistake adds the sample to the pool with
/// its correct label and triggers iters_per_mistake gradient steps on
/// batches of batch_size (the new sample plus uniformly drawn pool members).
/// Stops after a zero-mistake pass or max_epochs.
TrainPolicyResult train_policy(const RefreshClassifier& clf, const std::vector<Episode>& episodes,
                               std::uint64_t rng_seed, int max_epochs = 50);

/// Retrain the model from the detection box when the decision says refresh,
/// returning the new model and the displaced one as backup; a keep decision
/// returns the model unchanged and no backup.
std::pair<kcf::DualModel, std::optional<ModelBackup>> apply_refresh(const kcf::DualModel& model, const Image& image,
                                                                    const Detection& detection, Decision decision,
                                                                    const features::FeatureConfig& fcfg,
                                                                    const kcf::KcfConfig& kcfg,
                                                                    std::int64_t frame);

/// Swap the backup in as the active model; single shot (the backup is
/// consumed). Returns false (no-op) when no backup exists.
bool restore_backup(std::shared_ptr<const kcf::DualModel>& active, std::optional<ModelBackup>& backup);

/// Weights-file format shared by the refresh policy and the pair scorer:
///   IATRACK_WEIGHTS 1 <kind>
///   dim <N>
///   <N weight lines>
///   bias <b>
void save_weights(const std::string& path, const std::string& kind, const std::vector<double>& weights, double bias);

struct LoadedWeights {
    std::string kind;
    std::vector<double> weights;
    double bias = 0.0;
};

LoadedWeights load_weights(const std::string& path);

}  // namespace iatrack::refresh
