// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace iatrack {

/// Axis-aligned box in continuous pixel coordinates, top-left + size
/// (the MOTChallenge CSV convention). Width and height must be positive.
struct BoundingBox {
    double x = 0.0;  // left edge
    double y = 0.0;  // top edge
    double w = 0.0;
    double h = 0.0;

    BoundingBox() = default;
    BoundingBox(double x_, double y_, double w_, double h_);

    double right() const { return x + w; }
    double bottom() const { return y + h; }
    double area() const { return w * h; }
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Center of the box: (x + w/2, y + h/2).
Point center(const BoundingBox& b);

/// Intersection-over-union of two boxes, in [0, 1].
double iou(const BoundingBox& a, const BoundingBox& b);

using TargetId = std::int64_t;

/// One external detection: a box on a 1-based frame with a detector confidence.
struct Detection {
    std::int64_t frame = 0;
    BoundingBox box;
    double confidence = 0.0;
};

enum class CandidateSource { detection, prediction };

/// A candidate location for the per-frame assignment: either a detector box
/// or a model prediction. Prediction candidates name their originating target.
struct Candidate {
    BoundingBox box;
    CandidateSource source = CandidateSource::detection;
    std::optional<TargetId> origin_target;

    static Candidate from_detection(const BoundingBox& b);
    static Candidate from_prediction(const BoundingBox& b, TargetId origin);
};

std::string to_string(const BoundingBox& b);

}  // namespace iatrack
