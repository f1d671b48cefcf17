// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#include "multicut/multicut.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "core/error.hpp"

namespace iatrack::multicut {
namespace {

constexpr double kMoveGainEps = 1e-12;

std::vector<std::uint8_t> cuts_from_components(const AssociationGraph& g, const std::vector<int>& comp) {
    std::vector<std::uint8_t> cut(g.edges.size());
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        cut[e] = comp[static_cast<std::size_t>(g.edges[e].u)] != comp[static_cast<std::size_t>(g.edges[e].v)] ? 1 : 0;
    }
    return cut;
}

// Renumber components as a restricted growth string (first occurrence order).
std::vector<int> normalize_components(const std::vector<int>& comp) {
    std::vector<int> out(comp.size());
    std::map<int, int> remap;
    int next = 0;
    for (std::size_t i = 0; i < comp.size(); ++i) {
        auto [it, inserted] = remap.emplace(comp[i], next);
        if (inserted) ++next;
        out[i] = it->second;
    }
    return out;
}

}  // namespace

AssociationGraph build_graph(const std::vector<TargetVertex>& targets, const std::vector<Candidate>& candidates,
                             const ScoreFn& scores, double big_c, double score_floor) {
    AssociationGraph g;
    g.big_c = big_c;
    g.target_ids.reserve(targets.size());
    for (const auto& t : targets) g.target_ids.push_back(t.id);
    g.candidates = candidates;

    const int nt = g.num_targets();
    for (int i = 0; i < nt; ++i) {
        for (int j = 0; j < static_cast<int>(candidates.size()); ++j) {
            const std::optional<double> s = scores(i, j);
            if (s.has_value() && *s >= score_floor) {
                g.edges.push_back({i, nt + j, *s, EdgeKind::target_candidate});
            }
        }
    }
    for (int j = 0; j < static_cast<int>(candidates.size()); ++j) {
        for (int k = j + 1; k < static_cast<int>(candidates.size()); ++k) {
            const double overlap = iou(candidates[static_cast<std::size_t>(j)].box,
                                       candidates[static_cast<std::size_t>(k)].box);
            if (overlap > 0.0) {
                g.edges.push_back({nt + j, nt + k, overlap, EdgeKind::candidate_candidate});
            }
        }
    }
    for (int i = 0; i < nt; ++i) {
        for (int k = i + 1; k < nt; ++k) {
            g.edges.push_back({i, k, -big_c, EdgeKind::target_target});
        }
    }
    return g;
}

double labeling_cost(const AssociationGraph& g, const CutLabeling& labels) {
    double cost = 0.0;
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        if (labels.cut[e]) cost += g.edges[e].cost;
    }
    return cost;
}

bool is_consistent(const AssociationGraph& g, const CutLabeling& labels) {
    if (labels.component.size() != static_cast<std::size_t>(g.num_vertices()) ||
        labels.cut.size() != g.edges.size()) {
        return false;
    }
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        const bool differ = labels.component[static_cast<std::size_t>(g.edges[e].u)] !=
                            labels.component[static_cast<std::size_t>(g.edges[e].v)];
        if (differ != (labels.cut[e] != 0)) return false;
    }
    return true;
}

CutLabeling solve_exact(const AssociationGraph& g) {
    const int n = g.num_vertices();
    if (n > 12) throw std::invalid_argument("solve_exact refuses graphs with more than 12 vertices");
    if (n == 0) return {{}, {}};

    // Edges from each vertex to lower-indexed vertices, for incremental cost.
    std::vector<std::vector<std::pair<int, double>>> back_edges(static_cast<std::size_t>(n));
    for (const auto& e : g.edges) {
        const int lo = std::min(e.u, e.v), hi = std::max(e.u, e.v);
        back_edges[static_cast<std::size_t>(hi)].emplace_back(lo, e.cost);
    }

    std::vector<int> assign(static_cast<std::size_t>(n), 0);
    std::vector<int> best_assign;
    double best_cost = std::numeric_limits<double>::infinity();
    int best_cuts = std::numeric_limits<int>::max();

    // Enumerate restricted growth strings in lexicographic order; the first
    // encountered optimum wins, which realizes the documented tie-breaking.
    auto recurse = [&](auto&& self, int v, int max_block, double cost, int cuts) -> void {
        if (v == n) {
            if (cost < best_cost || (cost == best_cost && cuts < best_cuts)) {
                best_cost = cost;
                best_cuts = cuts;
                best_assign = assign;
            }
            return;
        }
        for (int b = 0; b <= max_block + 1; ++b) {
            double add_cost = 0.0;
            int add_cuts = 0;
            for (const auto& [u, c] : back_edges[static_cast<std::size_t>(v)]) {
                if (assign[static_cast<std::size_t>(u)] != b) {
                    add_cost += c;
                    ++add_cuts;
                }
            }
            assign[static_cast<std::size_t>(v)] = b;
            self(self, v + 1, std::max(max_block, b), cost + add_cost, cuts + add_cuts);
        }
    };
    assign[0] = 0;
    recurse(recurse, 1, 0, 0.0, 0);

    CutLabeling labels;
    labels.component = best_assign;
    labels.cut = cuts_from_components(g, labels.component);
    return labels;
}

namespace {

// Kernighan-Lin pass over the bipartition (A, B): greedily flip the best
// vertex (even at a loss), lock it, and keep the best prefix of the flip
// sequence when it strictly lowers the cost. B may be empty, which makes
// this a split move. Returns true when a prefix was committed.
bool kl_bipartition(const AssociationGraph& g, std::vector<int>& comp, int comp_a, int comp_b) {
    const int n = g.num_vertices();
    std::vector<int> members;
    std::vector<std::uint8_t> side_of(static_cast<std::size_t>(n), 0);
    std::vector<std::uint8_t> in_set(static_cast<std::size_t>(n), 0);
    for (int v = 0; v < n; ++v) {
        const int c = comp[static_cast<std::size_t>(v)];
        if (c == comp_a || (comp_b >= 0 && c == comp_b)) {
            members.push_back(v);
            side_of[static_cast<std::size_t>(v)] = c == comp_a ? 0 : 1;
            in_set[static_cast<std::size_t>(v)] = 1;
        }
    }
    if (members.size() < 2) return false;

    // Only edges inside the set change their cut status when a member flips.
    auto flip_delta = [&](int v) {
        double own = 0.0, other = 0.0;
        for (const auto& e : g.edges) {
            int peer = -1;
            if (e.u == v) peer = e.v;
            else if (e.v == v) peer = e.u;
            else continue;
            if (!in_set[static_cast<std::size_t>(peer)]) continue;
            if (side_of[static_cast<std::size_t>(peer)] == side_of[static_cast<std::size_t>(v)]) own += e.cost;
            else other += e.cost;
        }
        return own - other;  // own edges become cut, other-side edges uncut
    };

    std::vector<std::uint8_t> locked(static_cast<std::size_t>(n), 0);
    std::vector<int> sequence;
    double cum = 0.0, best_cum = 0.0;
    std::size_t best_prefix = 0;
    for (std::size_t step = 0; step < members.size(); ++step) {
        int pick = -1;
        double pick_delta = 0.0;
        for (const int v : members) {
            if (locked[static_cast<std::size_t>(v)]) continue;
            const double d = flip_delta(v);
            if (pick < 0 || d < pick_delta) {
                pick = v;
                pick_delta = d;
            }
        }
        if (pick < 0) break;
        side_of[static_cast<std::size_t>(pick)] ^= 1;
        locked[static_cast<std::size_t>(pick)] = 1;
        sequence.push_back(pick);
        cum += pick_delta;
        if (cum < best_cum - kMoveGainEps) {
            best_cum = cum;
            best_prefix = step + 1;
        }
    }
    if (best_prefix == 0) return false;

    // Re-derive the committed sides from scratch and write them back.
    for (const int v : members) {
        side_of[static_cast<std::size_t>(v)] = comp[static_cast<std::size_t>(v)] == comp_a ? 0 : 1;
    }
    for (std::size_t k = 0; k < best_prefix; ++k) side_of[static_cast<std::size_t>(sequence[k])] ^= 1;
    const int b_label = comp_b >= 0 ? comp_b : n;  // fresh id, normalized below
    for (const int v : members) {
        comp[static_cast<std::size_t>(v)] = side_of[static_cast<std::size_t>(v)] == 0 ? comp_a : b_label;
    }
    return true;
}

// Local refinement shared by every start: greedy positive-weight
// contraction, improving pair swaps, improving single-vertex moves, and
// KL bipartition updates, iterated to a fixed point. Component ids stay
// "smallest member".
void refine_components(const AssociationGraph& g, std::vector<int>& comp) {
    const int n = g.num_vertices();
    const auto& edge_list = g.edges;

    auto weight_between = [&](int a, int b) {
        double acc = 0.0;
        for (const auto& e : edge_list) {
            const int cu = comp[static_cast<std::size_t>(e.u)];
            const int cv = comp[static_cast<std::size_t>(e.v)];
            if ((cu == a && cv == b) || (cu == b && cv == a)) acc += e.cost;
        }
        return acc;
    };

    auto restore_labels = [&]() {
        std::map<int, int> relabel;
        for (int x = 0; x < n; ++x) relabel.emplace(comp[static_cast<std::size_t>(x)], x);
        for (int x = 0; x < n; ++x) comp[static_cast<std::size_t>(x)] = relabel.at(comp[static_cast<std::size_t>(x)]);
    };
    restore_labels();

    auto live_components = [&]() {
        std::vector<int> ids;
        for (int v = 0; v < n; ++v) {
            if (comp[static_cast<std::size_t>(v)] == v) ids.push_back(v);
        }
        return ids;
    };

    bool changed = true;
    int guard = 0;
    while (changed && ++guard < 1000) {
        changed = false;

        // Contraction: merge the pair with the largest positive joining
        // weight; removing those edges from the cut lowers the cost by that
        // amount.
        for (;;) {
            const std::vector<int> comps = live_components();
            double best_w = 0.0;
            int best_a = -1, best_b = -1;
            for (std::size_t i = 0; i < comps.size(); ++i) {
                for (std::size_t j = i + 1; j < comps.size(); ++j) {
                    const double wab = weight_between(comps[i], comps[j]);
                    if (wab > best_w) {
                        best_w = wab;
                        best_a = comps[i];
                        best_b = comps[j];
                    }
                }
            }
            if (best_a < 0) break;
            for (int v = 0; v < n; ++v) {
                if (comp[static_cast<std::size_t>(v)] == best_b) comp[static_cast<std::size_t>(v)] = best_a;
            }
            changed = true;
        }

        // Pair swaps: exchange the components of two vertices when that
        // strictly lowers the cost. Catches symmetric traps single moves
        // cannot escape (each one-sided move would raise the cost).
        for (bool swapped = true; swapped && ++guard < 1000;) {
            swapped = false;
            for (int u = 0; u < n; ++u) {
                for (int v = u + 1; v < n; ++v) {
                    const int cu = comp[static_cast<std::size_t>(u)];
                    const int cv = comp[static_cast<std::size_t>(v)];
                    if (cu == cv) continue;
                    double w_u_own = 0.0, w_u_other = 0.0, w_v_own = 0.0, w_v_other = 0.0;
                    for (const auto& e : edge_list) {
                        // The u-v edge (if any) stays cut either way.
                        if ((e.u == u && e.v == v) || (e.u == v && e.v == u)) continue;
                        if (e.u == u || e.v == u) {
                            const int other = comp[static_cast<std::size_t>(e.u == u ? e.v : e.u)];
                            if (other == cu) w_u_own += e.cost;
                            else if (other == cv) w_u_other += e.cost;
                        } else if (e.u == v || e.v == v) {
                            const int other = comp[static_cast<std::size_t>(e.u == v ? e.v : e.u)];
                            if (other == cv) w_v_own += e.cost;
                            else if (other == cu) w_v_other += e.cost;
                        }
                    }
                    const double delta = w_u_own - w_u_other + w_v_own - w_v_other;
                    if (delta < -kMoveGainEps) {
                        comp[static_cast<std::size_t>(u)] = cv;
                        comp[static_cast<std::size_t>(v)] = cu;
                        swapped = true;
                        changed = true;
                    }
                }
            }
            restore_labels();
        }

        // Single-vertex moves (to an adjacent component or a fresh
        // singleton) while the total cost strictly decreases.
        bool moved = true;
        while (moved && ++guard < 1000) {
            moved = false;
            for (int v = 0; v < n; ++v) {
                const int from = comp[static_cast<std::size_t>(v)];
                double w_stay = 0.0;         // edge weight from v into its own component
                std::map<int, double> w_to;  // edge weight from v into other components
                for (const auto& e : edge_list) {
                    int other = -1;
                    if (e.u == v) other = e.v;
                    else if (e.v == v) other = e.u;
                    else continue;
                    const int oc = comp[static_cast<std::size_t>(other)];
                    if (oc == from) w_stay += e.cost;
                    else w_to[oc] += e.cost;
                }

                double best_gain = -kMoveGainEps;
                int best_dest = -1;  // -2 encodes "new singleton"
                for (const auto& [dest, w] : w_to) {
                    const double gain = w_stay - w;  // cut w_stay, uncut w
                    if (gain < best_gain) {
                        best_gain = gain;
                        best_dest = dest;
                    }
                }
                bool alone = true;
                for (int u = 0; u < n && alone; ++u) {
                    if (u != v && comp[static_cast<std::size_t>(u)] == from) alone = false;
                }
                if (!alone && w_stay < best_gain) {
                    best_gain = w_stay;
                    best_dest = -2;
                }

                if (best_dest != -1) {
                    comp[static_cast<std::size_t>(v)] = best_dest == -2 ? v : best_dest;
                    restore_labels();
                    moved = true;
                    changed = true;
                }
            }
        }

        // KL bipartition updates over component pairs and splits.
        for (bool updated = true; updated && ++guard < 1000;) {
            updated = false;
            const std::vector<int> comps = live_components();
            for (std::size_t i = 0; i < comps.size() && !updated; ++i) {
                for (std::size_t j = i + 1; j <= comps.size() && !updated; ++j) {
                    const int b = j < comps.size() ? comps[j] : -1;  // -1: split attempt
                    if (kl_bipartition(g, comp, comps[i], b)) {
                        restore_labels();
                        updated = true;
                        changed = true;
                    }
                }
            }
        }
    }
}

double components_cost(const AssociationGraph& g, const std::vector<int>& comp) {
    double cost = 0.0;
    for (const auto& e : g.edges) {
        if (comp[static_cast<std::size_t>(e.u)] != comp[static_cast<std::size_t>(e.v)]) cost += e.cost;
    }
    return cost;
}

}  // namespace

CutLabeling solve_heuristic(const AssociationGraph& g) {
    const int n = g.num_vertices();
    CutLabeling labels;
    if (n == 0) return labels;

    // Start 1: all singletons; contraction builds the partition bottom-up.
    std::vector<int> from_singletons(static_cast<std::size_t>(n));
    std::iota(from_singletons.begin(), from_singletons.end(), 0);
    refine_components(g, from_singletons);

    // Start 2: each candidate joins its best positive-score target, the
    // domain-natural primal start.
    std::vector<int> from_greedy(static_cast<std::size_t>(n));
    std::iota(from_greedy.begin(), from_greedy.end(), 0);
    for (const auto& e : g.edges) {
        if (e.kind != EdgeKind::target_candidate || e.cost <= 0.0) continue;
        const int target = std::min(e.u, e.v);
        const int cand = std::max(e.u, e.v);
        const int cur = from_greedy[static_cast<std::size_t>(cand)];
        if (cur == cand) {
            from_greedy[static_cast<std::size_t>(cand)] = target;
        } else {
            // Keep the better-scoring owner.
            double cur_score = 0.0;
            for (const auto& e2 : g.edges) {
                if (e2.kind != EdgeKind::target_candidate) continue;
                if (std::max(e2.u, e2.v) == cand && std::min(e2.u, e2.v) == cur) cur_score = e2.cost;
            }
            if (e.cost > cur_score) from_greedy[static_cast<std::size_t>(cand)] = target;
        }
    }
    refine_components(g, from_greedy);

    std::vector<int>& best = components_cost(g, from_greedy) < components_cost(g, from_singletons) - 1e-12
                                 ? from_greedy
                                 : from_singletons;

    labels.component = normalize_components(best);
    labels.cut = cuts_from_components(g, labels.component);
    return labels;
}

Assignment extract_assignment(const AssociationGraph& g, const CutLabeling& labels) {
    if (!is_consistent(g, labels)) throw StateError("cut labeling is not component-consistent");
    const int nt = g.num_targets();

    // Two targets sharing a component means big_c failed to dominate.
    std::map<int, int> targets_per_component;
    for (int i = 0; i < nt; ++i) {
        if (++targets_per_component[labels.component[static_cast<std::size_t>(i)]] > 1) {
            throw StateError("two targets share a multicut component; big_c is too small");
        }
    }

    Assignment out;
    std::vector<bool> candidate_paired(g.candidates.size(), false);
    for (int i = 0; i < nt; ++i) {
        int best_j = -1;
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::size_t e = 0; e < g.edges.size(); ++e) {
            const auto& edge = g.edges[e];
            if (edge.kind != EdgeKind::target_candidate || labels.cut[e]) continue;
            if (edge.u != i && edge.v != i) continue;
            const int j = g.candidate_index(edge.u == i ? edge.v : edge.u);
            if (g.candidates[static_cast<std::size_t>(j)].source != CandidateSource::detection) continue;
            if (edge.cost > best_score || (edge.cost == best_score && j < best_j)) {
                best_score = edge.cost;
                best_j = j;
            }
        }
        if (best_j >= 0) {
            out.pairs.emplace_back(g.target_ids[static_cast<std::size_t>(i)], best_j);
            candidate_paired[static_cast<std::size_t>(best_j)] = true;
        } else {
            out.unassigned_targets.push_back(g.target_ids[static_cast<std::size_t>(i)]);
        }
    }
    for (int j = 0; j < static_cast<int>(g.candidates.size()); ++j) {
        if (!candidate_paired[static_cast<std::size_t>(j)]) out.unassigned_candidates.push_back(j);
    }
    return out;
}

VerifyResult verify_targets(const Assignment& assignment, const std::map<TargetId, int>& counters, int t_v) {
    std::set<TargetId> paired;
    for (const auto& [tid, j] : assignment.pairs) paired.insert(tid);

    VerifyResult out;
    for (const auto& [tid, count] : counters) {
        if (paired.count(tid)) {
            out.counters[tid] = 0;
            out.verified.insert(tid);
        } else {
            const int next = count + 1;
            out.counters[tid] = next;
            if (next >= t_v) out.expired.insert(tid);
        }
    }
    return out;
}

std::string dump_graph(const AssociationGraph& g, const CutLabeling& labels) {
    auto vertex_name = [&](int v) {
        std::ostringstream os;
        if (g.is_target(v)) {
            os << "t" << g.target_ids[static_cast<std::size_t>(v)];
        } else {
            const int j = g.candidate_index(v);
            os << (g.candidates[static_cast<std::size_t>(j)].source == CandidateSource::detection ? "d" : "p") << j;
        }
        return os.str();
    };
    auto kind_name = [](EdgeKind k) {
        switch (k) {
            case EdgeKind::target_candidate: return "tc";
            case EdgeKind::candidate_candidate: return "cc";
            default: return "tt";
        }
    };
    std::ostringstream os;
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        os << vertex_name(g.edges[e].u) << " " << vertex_name(g.edges[e].v) << " " << kind_name(g.edges[e].kind)
           << " " << g.edges[e].cost << " " << (labels.cut.empty() ? 0 : int(labels.cut[e])) << "\n";
    }
    return os.str();
}

}  // namespace iatrack::multicut
