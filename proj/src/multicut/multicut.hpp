// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "core/geometry.hpp"

namespace iatrack::multicut {

enum class EdgeKind { target_candidate, candidate_candidate, target_target };

/// Association graph over tracked targets and candidate locations.
/// Vertices are indexed 0..T-1 (targets, in input order) followed by
/// T..T+M-1 (candidates). Edge costs follow the three-case rule:
/// score for target-candidate, IoU for candidate-candidate, -C between
/// targets.
struct AssociationGraph {
    std::vector<TargetId> target_ids;
    std::vector<Candidate> candidates;
    struct Edge {
        int u = 0;
        int v = 0;
        double cost = 0.0;
        EdgeKind kind = EdgeKind::target_candidate;
    };
    std::vector<Edge> edges;
    double big_c = 1e6;

    int num_targets() const { return static_cast<int>(target_ids.size()); }
    int num_vertices() const { return num_targets() + static_cast<int>(candidates.size()); }
    bool is_target(int v) const { return v < num_targets(); }
    int candidate_index(int v) const { return v - num_targets(); }
};

/// Cut labels plus the component map they are derived from. Consistency
/// (cut iff endpoints in different components) encodes the path constraints
/// exactly and holds for every labeling produced here.
struct CutLabeling {
    std::vector<int> component;     // per vertex
    std::vector<std::uint8_t> cut;  // per edge, parallel to graph.edges
};

struct Assignment {
    std::vector<std::pair<TargetId, int>> pairs;  // target -> detection-sourced candidate index
    std::vector<TargetId> unassigned_targets;
    std::vector<int> unassigned_candidates;  // every candidate (either source) not in pairs
};

struct TargetVertex {
    TargetId id = 0;
    BoundingBox anchor;
};

/// Score callback: nullopt when the candidate is outside the target's
/// search window (no edge is created then).
using ScoreFn = std::function<std::optional<double>(int target_index, int candidate_index)>;

/// Build the graph with the three-case edge costs. Target-candidate edges
/// require an in-window score >= score_floor; candidate-candidate edges
/// require IoU > 0; every target pair gets -big_c.
AssociationGraph build_graph(const std::vector<TargetVertex>& targets, const std::vector<Candidate>& candidates,
                             const ScoreFn& scores, double big_c, double score_floor = 0.0);

/// Total cost of a labeling: sum of cut-edge costs.
double labeling_cost(const AssociationGraph& g, const CutLabeling& labels);

/// True when cut labels agree with the component map on every edge.
bool is_consistent(const AssociationGraph& g, const CutLabeling& labels);

/// Exact minimizer by set-partition enumeration; refuses graphs with more
/// than 12 vertices. Ties prefer fewer cut edges, then the lexicographically
/// smallest component assignment.
CutLabeling solve_exact(const AssociationGraph& g);

/// Primal heuristic: greedy additive contraction (merge the component pair
/// with the largest positive joining cost) followed by single-vertex move
/// refinement, iterated to a fixed point. Deterministic for a fixed vertex
/// order.
CutLabeling solve_heuristic(const AssociationGraph& g);

/// Read the assignment off the cut labels (uncut target-candidate edges).
/// A target keeps its best-scoring uncut detection; surplus detections in
/// its component are reported unassigned. A component holding two targets
/// is a hard error (big_c chosen too small).
Assignment extract_assignment(const AssociationGraph& g, const CutLabeling& labels);

struct VerifyResult {
    std::set<TargetId> verified;
    std::map<TargetId, int> counters;
    std::set<TargetId> expired;
};

/// Detection-verification bookkeeping: a target paired with a detection
/// resets its counter and is verified; every other counter increments, and
/// counters reaching t_v expire their target.
VerifyResult verify_targets(const Assignment& assignment, const std::map<TargetId, int>& counters, int t_v);

/// Debug dump, one edge per line: "u v kind cost cut". Targets print as
/// t<id>, candidates as d<index> or p<index> by source.
std::string dump_graph(const AssociationGraph& g, const CutLabeling& labels);

}  // namespace iatrack::multicut
