// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#include "metrics/clear_mot.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "core/error.hpp"
#include "occlusion/occlusion.hpp"

namespace iatrack::metrics {
namespace {

struct FrameBoxes {
    std::vector<std::int64_t> ids;
    std::vector<BoundingBox> boxes;
};

std::map<std::int64_t, FrameBoxes> by_frame(const std::vector<TrackedBox>& list) {
    std::map<std::int64_t, FrameBoxes> out;
    for (const auto& tb : list) {
        out[tb.frame].ids.push_back(tb.id);
        out[tb.frame].boxes.push_back(tb.box);
    }
    return out;
}

}  // namespace

MotReport evaluate(const std::vector<TrackedBox>& results, const std::vector<TrackedBox>& gt, double iou_threshold) {
    if (gt.empty()) throw InputError("CLEAR MOT evaluation needs non-empty ground truth");

    const auto gt_frames = by_frame(gt);
    const auto res_frames = by_frame(results);

    MotReport report;
    report.gt_total = static_cast<std::int64_t>(gt.size());

    std::map<std::int64_t, std::int64_t> last_match;        // gt id -> last matched result id
    std::map<std::int64_t, std::int64_t> active_match;      // gt id -> result id matched in previous frame
    std::map<std::int64_t, std::int64_t> gt_present;        // gt id -> frames present
    std::map<std::int64_t, std::int64_t> gt_covered;        // gt id -> frames matched
    std::map<std::int64_t, bool> was_tracked;               // gt id -> matched at its previous appearance
    std::map<std::int64_t, std::int64_t> pending_frag;      // gt id -> interruptions awaiting resumption
    double overlap_sum = 0.0;
    std::int64_t match_count = 0;

    std::set<std::int64_t> frames;
    for (const auto& [f, _] : gt_frames) frames.insert(f);
    for (const auto& [f, _] : res_frames) frames.insert(f);

    for (const std::int64_t frame : frames) {
        static const FrameBoxes empty;
        const FrameBoxes& g = gt_frames.count(frame) ? gt_frames.at(frame) : empty;
        const FrameBoxes& r = res_frames.count(frame) ? res_frames.at(frame) : empty;

        std::vector<bool> gt_used(g.ids.size(), false);
        std::vector<bool> res_used(r.ids.size(), false);
        std::map<std::int64_t, std::int64_t> frame_match;  // gt id -> result id

        auto res_index_of = [&](std::int64_t id) -> int {
            for (std::size_t i = 0; i < r.ids.size(); ++i) {
                if (r.ids[i] == id && !res_used[i]) return static_cast<int>(i);
            }
            return -1;
        };

        // Carry forward matches still above the threshold.
        for (std::size_t gi = 0; gi < g.ids.size(); ++gi) {
            const auto it = active_match.find(g.ids[gi]);
            if (it == active_match.end()) continue;
            const int ri = res_index_of(it->second);
            if (ri < 0) continue;
            const double overlap = iou(g.boxes[gi], r.boxes[static_cast<std::size_t>(ri)]);
            if (overlap >= iou_threshold) {
                gt_used[gi] = true;
                res_used[static_cast<std::size_t>(ri)] = true;
                frame_match[g.ids[gi]] = it->second;
                overlap_sum += overlap;
                ++match_count;
            }
        }

        // Hungarian on the rest, maximizing IoU above the threshold.
        std::vector<int> free_gt, free_res;
        for (std::size_t gi = 0; gi < g.ids.size(); ++gi)
            if (!gt_used[gi]) free_gt.push_back(static_cast<int>(gi));
        for (std::size_t ri = 0; ri < r.ids.size(); ++ri)
            if (!res_used[ri]) free_res.push_back(static_cast<int>(ri));
        if (!free_gt.empty() && !free_res.empty()) {
            std::vector<double> cost(free_gt.size() * free_res.size(), occlusion::kForbiddenCost);
            for (std::size_t a = 0; a < free_gt.size(); ++a) {
                for (std::size_t b = 0; b < free_res.size(); ++b) {
                    const double overlap = iou(g.boxes[static_cast<std::size_t>(free_gt[a])],
                                               r.boxes[static_cast<std::size_t>(free_res[b])]);
                    if (overlap >= iou_threshold) cost[a * free_res.size() + b] = -overlap;
                }
            }
            const std::vector<int> match = occlusion::hungarian(cost, static_cast<int>(free_gt.size()),
                                                                static_cast<int>(free_res.size()));
            for (std::size_t a = 0; a < free_gt.size(); ++a) {
                if (match[a] < 0) continue;
                const int gi = free_gt[a];
                const int ri = free_res[static_cast<std::size_t>(match[a])];
                gt_used[static_cast<std::size_t>(gi)] = true;
                res_used[static_cast<std::size_t>(ri)] = true;
                const std::int64_t gid = g.ids[static_cast<std::size_t>(gi)];
                const std::int64_t rid = r.ids[static_cast<std::size_t>(ri)];
                frame_match[gid] = rid;
                overlap_sum += iou(g.boxes[static_cast<std::size_t>(gi)], r.boxes[static_cast<std::size_t>(ri)]);
                ++match_count;
                const auto lit = last_match.find(gid);
                if (lit != last_match.end() && lit->second != rid) ++report.ids;
            }
        }

        // Per-gt bookkeeping for FN, coverage, fragmentation.
        for (std::size_t gi = 0; gi < g.ids.size(); ++gi) {
            const std::int64_t gid = g.ids[gi];
            ++gt_present[gid];
            const bool matched = gt_used[gi];
            if (matched) {
                ++gt_covered[gid];
                const std::int64_t rid = frame_match[gid];
                last_match[gid] = rid;
                active_match[gid] = rid;
                auto pit = pending_frag.find(gid);
                if (pit != pending_frag.end()) {
                    report.frag += pit->second;
                    pending_frag.erase(pit);
                }
            } else {
                ++report.fn;
                active_match.erase(gid);
                auto wit = was_tracked.find(gid);
                if (wit != was_tracked.end() && wit->second) ++pending_frag[gid];
            }
            was_tracked[gid] = matched;
        }
        for (std::size_t ri = 0; ri < r.ids.size(); ++ri) {
            if (!res_used[ri]) ++report.fp;
        }
    }

    report.mota = 100.0 * (1.0 - static_cast<double>(report.fp + report.fn + report.ids) /
                                     static_cast<double>(report.gt_total));
    report.motp = match_count > 0 ? 100.0 * overlap_sum / static_cast<double>(match_count) : 0.0;

    std::int64_t mt = 0, ml = 0, total_traj = 0;
    for (const auto& [gid, present] : gt_present) {
        ++total_traj;
        const double coverage =
            static_cast<double>(gt_covered.count(gid) ? gt_covered.at(gid) : 0) / static_cast<double>(present);
        if (coverage >= 0.8) ++mt;
        if (coverage <= 0.2) ++ml;
    }
    report.mt_percent = total_traj > 0 ? 100.0 * static_cast<double>(mt) / static_cast<double>(total_traj) : 0.0;
    report.ml_percent = total_traj > 0 ? 100.0 * static_cast<double>(ml) / static_cast<double>(total_traj) : 0.0;
    return report;
}

std::string MotReport::table() const {
    char buf[256];
    std::ostringstream os;
    os << "MOTA   MOTP   MT     ML     FP      FN      IDS   Frag\n";
    std::snprintf(buf, sizeof(buf), "%-6.1f %-6.1f %-5.1f%% %-5.1f%% %-7lld %-7lld %-5lld %-5lld", mota, motp,
                  mt_percent, ml_percent, static_cast<long long>(fp), static_cast<long long>(fn),
                  static_cast<long long>(ids), static_cast<long long>(frag));
    os << buf;
    return os.str();
}

std::string MotReport::machine_line() const {
    char buf[320];
    std::snprintf(buf, sizeof(buf), "mota=%.6g;motp=%.6g;mt=%.6g;ml=%.6g;fp=%lld;fn=%lld;ids=%lld;frag=%lld;gt=%lld",
                  mota, motp, mt_percent, ml_percent, static_cast<long long>(fp), static_cast<long long>(fn),
                  static_cast<long long>(ids), static_cast<long long>(frag), static_cast<long long>(gt_total));
    return buf;
}

}  // namespace iatrack::metrics
