// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "core/geometry.hpp"
#include "core/image.hpp"

namespace iatrack::occlusion {

/// L1-normalized 8x8x8 RGB histogram over a box interior (clipped to the
/// image). An empty interior yields the all-zero histogram.
using ColorHistogram = std::vector<double>;

constexpr int kHistBinsPerChannel = 8;
constexpr int kHistSize = kHistBinsPerChannel * kHistBinsPerChannel * kHistBinsPerChannel;

ColorHistogram color_histogram(const Image& image, const BoundingBox& box);

/// Histogram intersection sum(min(h1, h2)), in [0, 1] for L1-normalized inputs.
double histogram_intersection(const ColorHistogram& a, const ColorHistogram& b);

/// The 6-dimensional pairwise feature between a target's last state and a
/// detection: [gap, dx/eta, dy/eta, dh/eta, IoU, hist intersection] with
/// eta the mean of the two heights.
struct PairFeature {
    double gap = 0.0;
    double dx_norm = 0.0;
    double dy_norm = 0.0;
    double dh_norm = 0.0;
    double iou = 0.0;
    double hist_intersection = 0.0;

    std::array<double, 6> to_array() const { return {gap, dx_norm, dy_norm, dh_norm, iou, hist_intersection}; }
};

PairFeature pair_feature(std::int64_t last_frame, const BoundingBox& last_box, const ColorHistogram& last_hist,
                         std::int64_t det_frame, const BoundingBox& det_box, const ColorHistogram& det_hist);

/// Patch-based convenience overload; histograms are computed internally.
PairFeature pair_feature(std::int64_t last_frame, const BoundingBox& last_box, const Image& last_image,
                         std::int64_t det_frame, const BoundingBox& det_box, const Image& det_image);

/// Linear margin scorer over the 6-vector.
struct PairScorer {
    std::array<double, 6> weights{};
    double bias = 0.0;

    double score(const PairFeature& f) const;
};

struct LabeledPair {
    PairFeature feature;
    bool same_target = false;
};

/// Max-margin fit (hinge loss + L2 penalty `reg`) by seeded subgradient
/// descent over internally standardized features; the returned weights act
/// on raw features. Throws when only one class is present.
PairScorer train_pair_scorer(const std::vector<LabeledPair>& pairs, double reg, std::uint64_t seed = 1,
                             int epochs = 400);

/// Entries at or above this magnitude mark forbidden pairs.
constexpr double kForbiddenCost = 1e30;

/// Minimum-cost one-to-one assignment of an m x n matrix (row-major),
/// covering min(m, n) pairs except those on forbidden entries. Among
/// equal-cost optima, rows prefer their smallest feasible column in order.
/// Returns per-row column indices, -1 for unassigned rows.
std::vector<int> hungarian(const std::vector<double>& cost, int rows, int cols);

struct LostTarget {
    TargetId id = 0;
    std::int64_t last_frame = 0;
    BoundingBox last_box;
    ColorHistogram last_hist;
};

struct FreeDetection {
    int index = 0;  // caller-side detection index
    Detection detection;
    ColorHistogram hist;
};

struct RecoveredMatch {
    TargetId target = 0;
    int detection_index = 0;
    double score = 0.0;
};

/// Match lost (unverified) targets to free detections: score every pair,
/// mask scores below `accept_threshold` as forbidden, run the Hungarian
/// assignment on negated scores.
std::vector<RecoveredMatch> recover_occluded(const std::vector<LostTarget>& lost,
                                             const std::vector<FreeDetection>& free_dets, const PairScorer& scorer,
                                             std::int64_t current_frame, double accept_threshold);

/// Componentwise linear interpolation for the missing frames t1+1 .. t2-1;
/// empty when the gap is below 2.
std::vector<BoundingBox> interpolate_gap(const BoundingBox& b1, std::int64_t t1, const BoundingBox& b2,
                                         std::int64_t t2);

}  // namespace iatrack::occlusion
