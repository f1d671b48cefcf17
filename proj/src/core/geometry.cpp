// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#include "core/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "core/error.hpp"

namespace iatrack {

BoundingBox::BoundingBox(double x_, double y_, double w_, double h_) : x(x_), y(y_), w(w_), h(h_) {
    if (!(std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h))) {
        throw StateError("bounding box has non-finite coordinates");
    }
    if (!(w > 0.0 && h > 0.0)) {
        throw StateError("bounding box needs positive width and height, got " + to_string(*this));
    }
}

Point center(const BoundingBox& b) { return {b.x + b.w / 2.0, b.y + b.h / 2.0}; }

double iou(const BoundingBox& a, const BoundingBox& b) {
    const double ix = std::max(0.0, std::min(a.right(), b.right()) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

Candidate Candidate::from_detection(const BoundingBox& b) {
    Candidate c;
    c.box = b;
    c.source = CandidateSource::detection;
    return c;
}

Candidate Candidate::from_prediction(const BoundingBox& b, TargetId origin) {
    Candidate c;
    c.box = b;
    c.source = CandidateSource::prediction;
    c.origin_target = origin;
    return c;
}

std::string to_string(const BoundingBox& b) {
    std::ostringstream os;
    os << "(" << b.x << ", " << b.y << ", " << b.w << ", " << b.h << ")";
    return os.str();
}

}  // namespace iatrack
