// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#include "train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>

#include "core/error.hpp"
#include "io/motchallenge.hpp"

namespace iatrack::train {
namespace {

namespace fs = std::filesystem;

struct FrameCache {
    const pipeline::FrameProvider* frames;
    std::map<std::int64_t, Image> cache;

    const Image& get(std::int64_t f) {
        auto it = cache.find(f);
        if (it == cache.end()) it = cache.emplace(f, frames->frame(f)).first;
        return it->second;
    }
};

bool box_inside(const Image& img, const BoundingBox& b) {
    return b.x >= 0 && b.y >= 0 && b.right() <= img.width && b.bottom() <= img.height;
}

// A displaced copy of `box` that sits fully inside the image and clear of
// every gt box in the frame, so the stand-in prediction looks at background.
std::optional<BoundingBox> displaced_box(const Image& img, const BoundingBox& box,
                                         const std::vector<BoundingBox>& frame_gt, int direction_hint) {
    const double dist_x = box.w * 1.6;
    const double dist_y = box.h * 1.2;
    const std::array<std::pair<double, double>, 8> dirs = {{{1, 0}, {-1, 0}, {0, 1}, {0, -1},
                                                            {1, 1}, {-1, 1}, {1, -1}, {-1, -1}}};
    for (int k = 0; k < 8; ++k) {
        const auto& [dx, dy] = dirs[static_cast<std::size_t>((direction_hint + k) % 8)];
        BoundingBox moved = box;
        moved.x += dx * dist_x;
        moved.y += dy * dist_y;
        if (!box_inside(img, moved)) continue;
        bool clear = true;
        for (const BoundingBox& g : frame_gt) {
            if (iou(moved, g) > 0.0) {
                clear = false;
                break;
            }
        }
        if (clear) return moved;
    }
    return std::nullopt;
}

}  // namespace

std::vector<refresh::Episode> build_refresh_episodes(const pipeline::FrameProvider& frames,
                                                     const std::vector<metrics::TrackedBox>& gt,
                                                     const std::vector<Detection>& detections,
                                                     const features::FeatureConfig& fcfg, int pooled_grid,
                                                     std::uint64_t seed) {
    std::map<std::int64_t, std::vector<metrics::TrackedBox>> gt_by_frame;
    for (const auto& g : gt) gt_by_frame[g.frame].push_back(g);
    std::map<std::int64_t, std::vector<Detection>> det_by_frame;
    for (const auto& d : detections) det_by_frame[d.frame].push_back(d);

    FrameCache cache{&frames, {}};
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> small(0.0, 1.0);
    std::uniform_int_distribution<int> dir(0, 7);

    std::vector<refresh::Episode> episodes;
    int flip = 0;
    for (const auto& [f, boxes] : gt_by_frame) {
        if (f > frames.frame_count) break;
        const Image& image = cache.get(f);
        std::vector<BoundingBox> frame_gt;
        for (const auto& g : boxes) frame_gt.push_back(g.box);

        for (const auto& g : boxes) {
            // Matched detection, or a lightly jittered truth box standing in
            // for an exact detector.
            BoundingBox det_box = g.box;
            double best = 0.3;
            if (det_by_frame.count(f)) {
                for (const Detection& d : det_by_frame.at(f)) {
                    const double o = iou(d.box, g.box);
                    if (o > best) {
                        best = o;
                        det_box = d.box;
                    }
                }
            }
            if (best == 0.3) {
                det_box.x += small(rng) * 0.5;
                det_box.y += small(rng) * 0.5;
            }

            refresh::Episode ep;
            ep.gt_box = g.box;
            ep.det_box = det_box;
            if (flip++ % 2 == 0) {
                // Prediction hugging the truth: keep is correct.
                BoundingBox pred = g.box;
                pred.x += small(rng) * 0.3;
                pred.y += small(rng) * 0.3;
                ep.pred_box = pred;
            } else {
                // Prediction drifted onto background: refresh is correct.
                const auto moved = displaced_box(image, g.box, frame_gt, dir(rng));
                if (!moved.has_value()) continue;
                ep.pred_box = *moved;
            }
            ep.descriptor = refresh::refresh_descriptor(image, ep.pred_box, ep.det_box, fcfg, pooled_grid);
            episodes.push_back(std::move(ep));
            if (episodes.size() >= 400) return episodes;
        }
    }
    return episodes;
}

std::vector<occlusion::LabeledPair> build_pair_samples(const pipeline::FrameProvider& frames,
                                                       const std::vector<metrics::TrackedBox>& gt, int max_gap,
                                                       std::uint64_t seed) {
    std::map<std::int64_t, std::map<std::int64_t, BoundingBox>> by_id;  // id -> frame -> box
    for (const auto& g : gt) by_id[g.id][g.frame] = g.box;

    FrameCache cache{&frames, {}};
    auto hist_of = [&](std::int64_t f, const BoundingBox& b) {
        return occlusion::color_histogram(cache.get(f), b);
    };

    std::mt19937_64 rng(seed);
    const std::array<int, 4> gaps = {1, 2, 4, std::max(1, max_gap)};

    std::vector<occlusion::LabeledPair> out;
    std::vector<std::int64_t> ids;
    for (const auto& [id, track] : by_id) ids.push_back(id);

    for (const auto& [id, track] : by_id) {
        std::vector<std::int64_t> frame_list;
        for (const auto& [f, b] : track) frame_list.push_back(f);
        const std::int64_t stride = std::max<std::int64_t>(1, static_cast<std::int64_t>(frame_list.size()) / 8);
        for (std::size_t i = 0; i < frame_list.size(); i += static_cast<std::size_t>(stride)) {
            const std::int64_t f = frame_list[i];
            for (const int gap : gaps) {
                const std::int64_t f2 = f + gap;
                if (f2 > frames.frame_count || !track.count(f2)) continue;
                const BoundingBox& b1 = track.at(f);
                const BoundingBox& b2 = track.at(f2);
                out.push_back({occlusion::pair_feature(f, b1, hist_of(f, b1), f2, b2, hist_of(f2, b2)), true});

                // A mismatched pair at the same frames, from another target.
                if (ids.size() > 1) {
                    std::uniform_int_distribution<std::size_t> pick(0, ids.size() - 1);
                    for (int tries = 0; tries < 4; ++tries) {
                        const std::int64_t other = ids[pick(rng)];
                        if (other == id || !by_id.at(other).count(f2)) continue;
                        const BoundingBox& ob = by_id.at(other).at(f2);
                        out.push_back(
                            {occlusion::pair_feature(f, b1, hist_of(f, b1), f2, ob, hist_of(f2, ob)), false});
                        break;
                    }
                }
            }
            if (out.size() >= 600) return out;
        }
    }
    return out;
}

TrainReport train_policies(const config::RunConfig& cfg) {
    const std::string gt_path = cfg.ground_truth_path();
    if (!fs::exists(gt_path)) throw IoError("training needs ground truth, missing file: " + gt_path);
    const std::vector<metrics::TrackedBox> gt = io::parse_tracked_boxes(gt_path);

    const io::Sequence seq = io::open_sequence(cfg.paths.sequence);
    const pipeline::FrameProvider frames{seq.spec.frame_count,
                                         [seq](std::int64_t f) { return seq.frame(f); }};

    std::vector<Detection> detections;
    if (fs::exists(cfg.detections_path())) detections = io::parse_detections(cfg.detections_path());

    TrainReport report;

    const std::vector<refresh::Episode> episodes = build_refresh_episodes(
        frames, gt, detections, cfg.pipe.feature, cfg.pipe.refresh_pooled_grid, cfg.seed);
    report.refresh_episodes = episodes.size();

    refresh::RefreshClassifier clf;
    clf.learning_rate = cfg.pipe.refresh_learning_rate;
    clf.batch_size = cfg.pipe.refresh_batch_size;
    clf.iters_per_mistake = cfg.pipe.refresh_iters_per_mistake;
    const refresh::TrainPolicyResult trained =
        refresh::train_policy(clf, episodes, cfg.seed, cfg.pipe.refresh_max_epochs);
    report.refresh_converged = trained.converged;
    report.refresh_epochs = trained.epochs_run;
    report.refresh_pool = trained.pool_size;

    const std::vector<occlusion::LabeledPair> pairs =
        build_pair_samples(frames, gt, std::max(8, cfg.pipe.t_v), cfg.seed + 1);
    report.pair_samples = pairs.size();
    const occlusion::PairScorer scorer = occlusion::train_pair_scorer(pairs, 1e-4, cfg.seed + 2);

    if (cfg.paths.refresh_policy.empty() || cfg.paths.pair_scorer.empty()) {
        throw InputError("config must name paths.refresh_policy and paths.pair_scorer for training");
    }
    refresh::save_weights(cfg.paths.refresh_policy, "refresh_policy", trained.classifier.weights,
                          trained.classifier.bias);
    refresh::save_weights(cfg.paths.pair_scorer, "pair_scorer",
                          {scorer.weights.begin(), scorer.weights.end()}, scorer.bias);
    return report;
}

Policies load_policies(const config::RunConfig& cfg) {
    Policies out;
    out.refresh_policy.learning_rate = cfg.pipe.refresh_learning_rate;
    out.refresh_policy.batch_size = cfg.pipe.refresh_batch_size;
    out.refresh_policy.iters_per_mistake = cfg.pipe.refresh_iters_per_mistake;

    const bool have_refresh = !cfg.paths.refresh_policy.empty() && fs::exists(cfg.paths.refresh_policy);
    const bool have_pair = !cfg.paths.pair_scorer.empty() && fs::exists(cfg.paths.pair_scorer);
    if (!cfg.allow_untrained && (!have_refresh || !have_pair)) {
        throw IoError("trained policies not found (" + cfg.paths.refresh_policy + ", " + cfg.paths.pair_scorer +
                      "); set policies.allow_untrained = true to run with defaults");
    }
    if (have_refresh) {
        const refresh::LoadedWeights w = refresh::load_weights(cfg.paths.refresh_policy);
        if (w.kind != "refresh_policy") throw ParseError("weights file kind mismatch: " + cfg.paths.refresh_policy);
        out.refresh_policy.weights = w.weights;
        out.refresh_policy.bias = w.bias;
    }
    if (have_pair) {
        const refresh::LoadedWeights w = refresh::load_weights(cfg.paths.pair_scorer);
        if (w.kind != "pair_scorer") throw ParseError("weights file kind mismatch: " + cfg.paths.pair_scorer);
        if (w.weights.size() != out.pair_scorer.weights.size()) {
            throw ParseError("pair scorer weights must have 6 entries: " + cfg.paths.pair_scorer);
        }
        std::copy(w.weights.begin(), w.weights.end(), out.pair_scorer.weights.begin());
        out.pair_scorer.bias = w.bias;
    }
    return out;
}

}  // namespace iatrack::train
