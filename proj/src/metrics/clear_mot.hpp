// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/geometry.hpp"

namespace iatrack::metrics {

struct TrackedBox {
    std::int64_t frame = 0;
    std::int64_t id = 0;
    BoundingBox box;
};

struct MotReport {
    double mota = 0.0;        // percent; 100 * (1 - (fp+fn+ids)/gt_total)
    double motp = 0.0;        // percent; mean IoU over matched pairs
    double mt_percent = 0.0;  // gt trajectories covered >= 80%
    double ml_percent = 0.0;  // gt trajectories covered <= 20%
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t ids = 0;
    std::int64_t frag = 0;
    std::int64_t gt_total = 0;

    std::string table() const;
    /// One-line machine form: "mota=...;motp=...;mt=...;ml=...;fp=...;fn=...;ids=...;frag=...;gt=..."
    std::string machine_line() const;
};

/// CLEAR MOT evaluation. Per frame, matches from the previous frame are
/// carried forward while still above the IoU threshold, then remaining
/// boxes are Hungarian-matched maximizing IoU; a gt matching a different
/// result id than its last known match counts an identity switch. Frag
/// counts interruptions of a gt's tracked status that are later resumed.
/// Throws InputError when gt is empty (MOTA is undefined then).
MotReport evaluate(const std::vector<TrackedBox>& results, const std::vector<TrackedBox>& gt, double iou_threshold);

}  // namespace iatrack::metrics
