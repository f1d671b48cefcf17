// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "core/geometry.hpp"
#include "core/image.hpp"
#include "io/motchallenge.hpp"
#include "metrics/clear_mot.hpp"

namespace iatrack::io {

enum class SyntheticLayout { lanes, crossing, random_walk };

struct SyntheticConfig {
    int n_targets = 4;
    std::int64_t frame_count = 100;
    int width = 320;
    int height = 240;
    double target_w = 36.0;
    double target_h = 48.0;
    double size_growth = 1.0;  // end-of-sequence size scale factor
    SyntheticLayout layout = SyntheticLayout::lanes;
    /// Per-target center waypoints traversed at constant pace; when empty
    /// they are derived from the layout.
    std::vector<std::vector<Point>> waypoints;
    /// Per-target fill colors; the default palette is used when empty.
    std::vector<std::array<int, 3>> colors;
    /// All targets share one texture pattern (appearance differs by color
    /// only). Useful for identity-channel fixtures.
    bool shared_texture = false;
    double center_jitter = 0.0;  // detection jitter sigma, pixels
    double size_jitter = 0.0;
    double fn_rate = 0.0;  // per-box drop probability
    double fp_rate = 0.0;  // expected false boxes per frame
    std::uint64_t rng_seed = 1;

    void validate() const;
};

struct SyntheticSequence {
    int width = 0;
    int height = 0;
    std::vector<Image> frames;                  // 1-based frame f at index f-1
    std::vector<metrics::TrackedBox> gt;        // exact, ids 1..n_targets
    std::vector<Detection> detections;          // jittered / dropped / false
};

/// Textured rectangles over a structured static background, ground truth
/// exact and inside the image, detections derived from it with the
/// configured noise. Fully determined by rng_seed.
SyntheticSequence generate_synthetic(const SyntheticConfig& cfg);

/// Write the MOTChallenge-style layout: img1/NNNNNN.ppm, det/det.txt,
/// gt/gt.txt.
void write_sequence(const SyntheticSequence& seq, const std::string& dir);

}  // namespace iatrack::io
