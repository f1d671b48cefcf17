// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#include "pipeline/pipeline.hpp"

#include <algorithm>
#include <set>

#include "core/error.hpp"

namespace iatrack::pipeline {
namespace {

bool center_inside(const Image& image, const BoundingBox& box) {
    const Point c = center(box);
    return image.contains(c.x, c.y);
}

void emit(TargetState& ts, std::int64_t frame, const BoundingBox& box, BoxSource source) {
    ts.trajectory.push_back({frame, box, source});
}

void drop_frame_entry(TargetState& ts, std::int64_t frame) {
    if (!ts.trajectory.empty() && ts.trajectory.back().frame == frame) ts.trajectory.pop_back();
}

void mark_verified(TargetState& ts, std::int64_t frame, const BoundingBox& box, const Image& image) {
    ts.frames_unverified = 0;
    ts.status = TargetStatus::tracked;
    ts.last_verified_frame = frame;
    ts.last_verified_box = box;
    ts.last_verified_hist = occlusion::color_histogram(image, box);
}

}  // namespace

void PipelineConfig::validate() const {
    feature.validate();
    kcf.validate();
    if (t_v < 0) throw StateError("t_v must be >= 0");
    if (big_c <= 0.0) throw StateError("big_c must be positive");
    if (refresh_pooled_grid < 1) throw StateError("refresh pooled grid must be >= 1");
}

PipelineConfig ablation_mode(PipelineConfig config, AblationMode mode) {
    switch (mode) {
        case AblationMode::full:
            break;
        case AblationMode::no_refresh:
            config.refresh_enabled = false;
            break;
        case AblationMode::no_verification:
            config.t_v = std::numeric_limits<int>::max();
            break;
        case AblationMode::no_target_awareness:
            config.feature.id_gain = 0.0;
            break;
    }
    return config;
}

StepOutput step(TrackerState& state, const Image& image, const std::vector<Detection>& detections,
                bool want_graph_dump) {
    const std::int64_t t = state.frame + 1;
    for (const Detection& d : detections) {
        if (d.frame != t) {
            throw InputError("detection frame " + std::to_string(d.frame) + " does not match step frame " +
                             std::to_string(t));
        }
    }
    state.config.validate();

    TrackerState work = state;  // mutate a copy; commit only on success
    const PipelineConfig& cfg = work.config;
    StepOutput out;
    out.frame = t;

    // (1) Response fields and predictions for every live target. Targets
    // whose window left the image entirely are dropped here.
    struct LiveTarget {
        TargetId id = 0;
        kcf::ResponseField field;
        BoundingBox predicted;
    };
    std::vector<LiveTarget> live;
    for (auto& [id, ts] : work.targets) {
        if (ts.status == TargetStatus::exited) continue;
        if (!intersects_image(image, ts.box)) {
            ts.status = TargetStatus::exited;
            out.exited.push_back(id);
            continue;
        }
        LiveTarget lt;
        lt.id = id;
        lt.field = kcf::compute_response_field(*ts.model, image, ts.box, cfg.feature, cfg.kcf);
        lt.predicted = lt.field.predicted_box();
        live.push_back(std::move(lt));
    }
    auto live_of = [&](TargetId id) -> LiveTarget& {
        for (auto& lt : live)
            if (lt.id == id) return lt;
        throw StateError("no live record for target " + std::to_string(id));
    };

    // (2) Candidate pool O = detections followed by predictions.
    std::vector<Candidate> candidates;
    candidates.reserve(detections.size() + live.size());
    for (const Detection& d : detections) candidates.push_back(Candidate::from_detection(d.box));
    for (const LiveTarget& lt : live) candidates.push_back(Candidate::from_prediction(lt.predicted, lt.id));

    // (3) Multicut verification.
    std::vector<multicut::TargetVertex> vertices;
    vertices.reserve(live.size());
    for (const LiveTarget& lt : live) vertices.push_back({lt.id, work.targets.at(lt.id).box});
    const multicut::ScoreFn score_fn = [&](int ti, int cj) {
        return live[static_cast<std::size_t>(ti)].field.score_of(candidates[static_cast<std::size_t>(cj)].box);
    };
    const multicut::AssociationGraph graph =
        multicut::build_graph(vertices, candidates, score_fn, cfg.big_c, cfg.score_floor);
    const multicut::CutLabeling labels = multicut::solve_heuristic(graph);
    const multicut::Assignment assignment = multicut::extract_assignment(graph, labels);
    if (want_graph_dump) out.graph_dump = multicut::dump_graph(graph, labels);

    std::map<TargetId, int> counters;
    for (const LiveTarget& lt : live) counters[lt.id] = work.targets.at(lt.id).frames_unverified;
    const multicut::VerifyResult verify = multicut::verify_targets(assignment, counters, cfg.t_v);
    for (const auto& [id, count] : verify.counters) work.targets.at(id).frames_unverified = count;

    // Spatial exclusivity (one detection, at most one target) is structural
    // in the multicut output; keep it asserted every frame anyway.
    std::set<int> used_detections;
    std::map<TargetId, int> paired;
    for (const auto& [tid, j] : assignment.pairs) {
        if (!used_detections.insert(j).second) {
            throw StateError("exclusivity violated: detection assigned twice in frame " + std::to_string(t));
        }
        paired[tid] = j;
    }

    std::set<TargetId> handled;  // targets with a committed frame-t box

    // (4) Refresh verified targets from their assigned detection.
    for (const auto& [tid, j] : paired) {
        TargetState& ts = work.targets.at(tid);
        const LiveTarget& lt = live_of(tid);
        const Detection& det = detections[static_cast<std::size_t>(j)];
        BoundingBox committed = lt.predicted;
        BoxSource source = BoxSource::predicted;
        if (cfg.refresh_enabled) {
            const std::vector<double> desc =
                refresh::refresh_descriptor(image, lt.predicted, det.box, cfg.feature, cfg.refresh_pooled_grid);
            const auto [decision, score] = refresh::classify(work.refresh_policy, desc);
            if (decision == refresh::Decision::refresh) {
                auto [fresh, backup] = refresh::apply_refresh(*ts.model, image, det, decision, cfg.feature, cfg.kcf, t);
                ts.model = std::make_shared<const kcf::DualModel>(std::move(fresh));
                ts.backup = std::move(backup);
                committed = det.box;
                source = BoxSource::refreshed;
            }
        }
        ts.box = committed;
        mark_verified(ts, t, committed, image);
        emit(ts, t, committed, source);
        handled.insert(tid);
        out.verified.push_back(tid);
        out.detection_claims.emplace_back(tid, j);
    }

    // (5) Targets refreshed last frame but unpaired now: restore the backup
    // and re-verify once against still-free detections (best score, IoU
    // gated). The retry keeps the restored model and never re-classifies.
    for (auto& [id, ts] : work.targets) {
        if (ts.status == TargetStatus::exited || handled.count(id)) continue;
        if (!ts.backup.has_value() || ts.backup->saved_at != t - 1) continue;
        refresh::restore_backup(ts.model, ts.backup);
        if (!intersects_image(image, ts.box)) continue;
        const kcf::ResponseField field = kcf::compute_response_field(*ts.model, image, ts.box, cfg.feature, cfg.kcf);
        const BoundingBox retry_pred = field.predicted_box();
        int best_j = -1;
        double best_score = 0.0;
        for (int j = 0; j < static_cast<int>(detections.size()); ++j) {
            if (used_detections.count(j)) continue;
            if (iou(detections[static_cast<std::size_t>(j)].box, retry_pred) <= cfg.retrack_iou_gate) continue;
            const std::optional<double> s = field.score_of(detections[static_cast<std::size_t>(j)].box);
            if (!s.has_value() || *s < cfg.score_floor) continue;
            if (best_j < 0 || *s > best_score) {
                best_j = j;
                best_score = *s;
            }
        }
        if (best_j >= 0) {
            used_detections.insert(best_j);
            ts.box = retry_pred;
            mark_verified(ts, t, retry_pred, image);
            emit(ts, t, retry_pred, BoxSource::predicted);
            handled.insert(id);
            out.verified.push_back(id);
            out.detection_claims.emplace_back(id, best_j);
        }
    }

    // (6) Occlusion recovery over remaining unverified targets and free
    // detections; matched gaps are filled by interpolation and the model is
    // re-initialized on the recovering detection.
    std::vector<occlusion::LostTarget> lost;
    for (const auto& [id, ts] : work.targets) {
        if (ts.status == TargetStatus::exited || handled.count(id)) continue;
        if (ts.frames_unverified < 1 || ts.last_verified_frame >= t) continue;
        lost.push_back({id, ts.last_verified_frame, ts.last_verified_box, ts.last_verified_hist});
    }
    std::vector<occlusion::FreeDetection> free_dets;
    for (int j = 0; j < static_cast<int>(detections.size()); ++j) {
        if (used_detections.count(j)) continue;
        free_dets.push_back({j, detections[static_cast<std::size_t>(j)],
                             occlusion::color_histogram(image, detections[static_cast<std::size_t>(j)].box)});
    }
    const std::vector<occlusion::RecoveredMatch> recovered =
        occlusion::recover_occluded(lost, free_dets, work.pair_scorer, t, cfg.occlusion_accept);
    for (const auto& match : recovered) {
        TargetState& ts = work.targets.at(match.target);
        const Detection& det = detections[static_cast<std::size_t>(match.detection_index)];
        if (!used_detections.insert(match.detection_index).second) {
            throw StateError("exclusivity violated: recovery reused a detection in frame " + std::to_string(t));
        }
        // Frozen in-gap entries are replaced by the interpolated segment.
        while (!ts.trajectory.empty() && ts.trajectory.back().frame > ts.last_verified_frame) {
            ts.trajectory.pop_back();
        }
        const std::vector<BoundingBox> gap =
            occlusion::interpolate_gap(ts.last_verified_box, ts.last_verified_frame, det.box, t);
        for (std::size_t k = 0; k < gap.size(); ++k) {
            emit(ts, ts.last_verified_frame + static_cast<std::int64_t>(k) + 1, gap[k], BoxSource::interpolated);
        }
        ts.model = std::make_shared<const kcf::DualModel>(
            kcf::train_model_at(image, det.box, t, cfg.feature, cfg.kcf));
        ts.backup.reset();
        ts.box = det.box;
        mark_verified(ts, t, det.box, image);
        emit(ts, t, det.box, BoxSource::refreshed);
        handled.insert(match.target);
        out.recovered.push_back(match.target);
        out.detection_claims.emplace_back(match.target, match.detection_index);
    }

    // (7) Exit: out-of-view centers and expired verification counters. A
    // target exiting now leaves no frame-t box behind.
    for (auto& [id, ts] : work.targets) {
        if (ts.status == TargetStatus::exited) continue;
        const bool verified_now = handled.count(id) > 0;
        const bool out_of_view = !center_inside(image, ts.box);
        const bool expired = !verified_now && ts.frames_unverified >= cfg.t_v;
        if (out_of_view || expired) {
            drop_frame_entry(ts, t);
            ts.status = TargetStatus::exited;
            handled.insert(id);
            out.exited.push_back(id);
        }
    }

    // (8) Enter: every still-free detection becomes a new target with a
    // model trained on it.
    for (int j = 0; j < static_cast<int>(detections.size()); ++j) {
        if (used_detections.count(j)) continue;
        const Detection& det = detections[static_cast<std::size_t>(j)];
        if (!intersects_image(image, det.box) || !center_inside(image, det.box)) continue;
        TargetState ts;
        ts.id = work.next_id++;
        ts.model = std::make_shared<const kcf::DualModel>(
            kcf::train_model_at(image, det.box, t, cfg.feature, cfg.kcf));
        ts.box = det.box;
        mark_verified(ts, t, det.box, image);
        emit(ts, t, det.box, BoxSource::refreshed);
        out.entered.push_back(ts.id);
        handled.insert(ts.id);
        out.detection_claims.emplace_back(ts.id, j);
        work.targets.emplace(ts.id, std::move(ts));
    }

    // (9) Commit: surviving unverified targets keep their frozen box; stale
    // backups (older than this frame) are dropped.
    for (auto& [id, ts] : work.targets) {
        if (ts.status == TargetStatus::exited) continue;
        if (!handled.count(id)) {
            ts.status = TargetStatus::unverified;
            emit(ts, t, ts.box, BoxSource::predicted);
        }
        if (ts.backup.has_value() && ts.backup->saved_at != t) ts.backup.reset();
    }

    work.frame = t;
    for (const auto& [id, ts] : work.targets) {
        if (ts.status == TargetStatus::exited) continue;
        if (!ts.trajectory.empty() && ts.trajectory.back().frame == t) {
            out.outputs.push_back({id, ts.trajectory.back().box, ts.trajectory.back().source});
        }
    }

    state = std::move(work);
    return out;
}

RunResult run(const FrameProvider& frames, const std::vector<Detection>& detections, const PipelineConfig& config,
              const refresh::RefreshClassifier& refresh_policy, const occlusion::PairScorer& pair_scorer,
              const DumpSink& dump_sink) {
    std::map<std::int64_t, std::vector<Detection>> by_frame;
    for (const Detection& d : detections) by_frame[d.frame].push_back(d);

    TrackerState state;
    state.config = config;
    state.refresh_policy = refresh_policy;
    state.pair_scorer = pair_scorer;

    for (std::int64_t f = 1; f <= frames.frame_count; ++f) {
        const Image image = frames.frame(f);
        static const std::vector<Detection> none;
        const auto it = by_frame.find(f);
        const StepOutput out = step(state, image, it == by_frame.end() ? none : it->second, dump_sink != nullptr);
        if (dump_sink) dump_sink(f, out.graph_dump);
    }

    RunResult result;
    result.frames = frames.frame_count;
    result.targets_created = state.next_id - 1;
    for (const auto& [id, ts] : state.targets) {
        if (ts.status != TargetStatus::exited) ++result.live_at_end;
        if (!ts.trajectory.empty()) result.trajectories.push_back({id, ts.trajectory});
    }
    return result;
}

}  // namespace iatrack::pipeline
