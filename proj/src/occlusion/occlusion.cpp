// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#include "occlusion/occlusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "core/error.hpp"

namespace iatrack::occlusion {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct AssignmentCost {
    int forbidden = 0;
    double real = 0.0;
};

AssignmentCost assignment_cost(const std::vector<double>& cost, int cols, const std::vector<int>& row_to_col) {
    AssignmentCost out;
    for (std::size_t r = 0; r < row_to_col.size(); ++r) {
        const int c = row_to_col[r];
        if (c < 0) continue;
        const double v = cost[r * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)];
        if (v >= kForbiddenCost / 2) {
            ++out.forbidden;
        } else {
            out.real += v;
        }
    }
    return out;
}

bool cost_not_worse(const AssignmentCost& a, const AssignmentCost& b) {
    if (a.forbidden != b.forbidden) return a.forbidden < b.forbidden;
    return a.real <= b.real + 1e-9 * std::max(1.0, std::abs(b.real));
}

// Potentials-based shortest augmenting path solver; requires rows <= cols
// and assigns every row (forbidden pairs are dropped by the caller).
std::vector<int> solve_rows_le_cols(const std::vector<double>& cost, int rows, int cols) {
    const int n = rows, m = cols;
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(m) + 1, 0.0);
    std::vector<int> p(static_cast<std::size_t>(m) + 1, 0), way(static_cast<std::size_t>(m) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(m) + 1, kInf);
        std::vector<bool> used(static_cast<std::size_t>(m) + 1, false);
        do {
            used[static_cast<std::size_t>(j0)] = true;
            const int i0 = p[static_cast<std::size_t>(j0)];
            int j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= m; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cost[static_cast<std::size_t>(i0 - 1) * cols + (j - 1)] -
                                   u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= m; ++j) {
        if (p[static_cast<std::size_t>(j)] > 0) row_to_col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
    }
    return row_to_col;
}

std::vector<int> solve_raw(const std::vector<double>& cost, int rows, int cols) {
    if (rows == 0 || cols == 0) return std::vector<int>(static_cast<std::size_t>(rows), -1);
    if (rows <= cols) return solve_rows_le_cols(cost, rows, cols);
    // Transpose, solve, invert.
    std::vector<double> t(cost.size());
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) t[static_cast<std::size_t>(c) * rows + r] = cost[static_cast<std::size_t>(r) * cols + c];
    const std::vector<int> col_to_row = solve_rows_le_cols(t, cols, rows);
    std::vector<int> row_to_col(static_cast<std::size_t>(rows), -1);
    for (int c = 0; c < cols; ++c) {
        if (col_to_row[static_cast<std::size_t>(c)] >= 0) row_to_col[static_cast<std::size_t>(col_to_row[static_cast<std::size_t>(c)])] = c;
    }
    return row_to_col;
}

}  // namespace

ColorHistogram color_histogram(const Image& image, const BoundingBox& box) {
    ColorHistogram hist(kHistSize, 0.0);
    const int x0 = std::max(0, static_cast<int>(std::floor(box.x)));
    const int y0 = std::max(0, static_cast<int>(std::floor(box.y)));
    const int x1 = std::min(image.width, static_cast<int>(std::ceil(box.right())));
    const int y1 = std::min(image.height, static_cast<int>(std::ceil(box.bottom())));
    double total = 0.0;
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            int r, g, b;
            if (image.channels == 3) {
                r = image.at(x, y, 0);
                g = image.at(x, y, 1);
                b = image.at(x, y, 2);
            } else {
                r = g = b = image.at(x, y, 0);
            }
            const int idx = ((r * kHistBinsPerChannel / 256) * kHistBinsPerChannel + g * kHistBinsPerChannel / 256) *
                                kHistBinsPerChannel +
                            b * kHistBinsPerChannel / 256;
            hist[static_cast<std::size_t>(idx)] += 1.0;
            total += 1.0;
        }
    }
    if (total > 0.0) {
        for (double& v : hist) v /= total;
    }
    return hist;
}

double histogram_intersection(const ColorHistogram& a, const ColorHistogram& b) {
    double acc = 0.0;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) acc += std::min(a[i], b[i]);
    return acc;
}

PairFeature pair_feature(std::int64_t last_frame, const BoundingBox& last_box, const ColorHistogram& last_hist,
                         std::int64_t det_frame, const BoundingBox& det_box, const ColorHistogram& det_hist) {
    if (det_frame <= last_frame) throw StateError("pair_feature needs the detection frame after the last-seen frame");
    const double eta = (last_box.h + det_box.h) / 2.0;
    PairFeature f;
    f.gap = static_cast<double>(det_frame - last_frame);
    f.dx_norm = (det_box.x - last_box.x) / eta;
    f.dy_norm = (det_box.y - last_box.y) / eta;
    f.dh_norm = (det_box.h - last_box.h) / eta;
    f.iou = iou(det_box, last_box);
    f.hist_intersection = histogram_intersection(last_hist, det_hist);
    return f;
}

PairFeature pair_feature(std::int64_t last_frame, const BoundingBox& last_box, const Image& last_image,
                         std::int64_t det_frame, const BoundingBox& det_box, const Image& det_image) {
    return pair_feature(last_frame, last_box, color_histogram(last_image, last_box), det_frame, det_box,
                        color_histogram(det_image, det_box));
}

double PairScorer::score(const PairFeature& f) const {
    const auto x = f.to_array();
    double acc = bias;
    for (std::size_t i = 0; i < x.size(); ++i) acc += weights[i] * x[i];
    return acc;
}

PairScorer train_pair_scorer(const std::vector<LabeledPair>& pairs, double reg, std::uint64_t seed, int epochs) {
    bool has_pos = false, has_neg = false;
    for (const auto& p : pairs) (p.same_target ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) throw std::invalid_argument("train_pair_scorer needs both classes present");

    // Standardize per dimension; the scale is folded back into the returned
    // weights so the scorer acts on raw features.
    std::array<double, 6> mean{}, stddev{};
    for (const auto& p : pairs) {
        const auto x = p.feature.to_array();
        for (std::size_t i = 0; i < 6; ++i) mean[i] += x[i];
    }
    for (auto& m : mean) m /= static_cast<double>(pairs.size());
    for (const auto& p : pairs) {
        const auto x = p.feature.to_array();
        for (std::size_t i = 0; i < 6; ++i) stddev[i] += (x[i] - mean[i]) * (x[i] - mean[i]);
    }
    for (auto& s : stddev) {
        s = std::sqrt(s / static_cast<double>(pairs.size()));
        if (s < 1e-9) s = 1.0;
    }

    std::array<double, 6> w{};
    double b = 0.0;
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    long step = 0;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (const std::size_t idx : order) {
            const double lr = 0.5 / (1.0 + 0.005 * static_cast<double>(step++));
            const auto raw = pairs[idx].feature.to_array();
            std::array<double, 6> x{};
            for (std::size_t i = 0; i < 6; ++i) x[i] = (raw[i] - mean[i]) / stddev[i];
            const double y = pairs[idx].same_target ? 1.0 : -1.0;
            double margin = b;
            for (std::size_t i = 0; i < 6; ++i) margin += w[i] * x[i];
            margin *= y;
            for (std::size_t i = 0; i < 6; ++i) {
                double grad = reg * w[i];
                if (margin < 1.0) grad -= y * x[i];
                w[i] -= lr * grad;
            }
            if (margin < 1.0) b += lr * y;
        }
    }

    PairScorer scorer;
    double bias = b;
    for (std::size_t i = 0; i < 6; ++i) {
        scorer.weights[i] = w[i] / stddev[i];
        bias -= w[i] * mean[i] / stddev[i];
    }
    scorer.bias = bias;
    return scorer;
}

std::vector<int> hungarian(const std::vector<double>& cost, int rows, int cols) {
    if (rows < 0 || cols < 0 || cost.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
        throw std::invalid_argument("hungarian: matrix size mismatch");
    }
    std::vector<int> base = solve_raw(cost, rows, cols);
    const AssignmentCost best = assignment_cost(cost, cols, base);

    // Optimality-preserving lexicographic pass: fix each row in order to its
    // smallest column that still admits an optimal completion.
    std::vector<int> fixed_col(static_cast<std::size_t>(rows), -2);  // -2 undecided, -1 unassigned
    std::vector<bool> col_taken(static_cast<std::size_t>(cols), false);
    for (int r = 0; r < rows; ++r) {
        int chosen = -1;
        for (int c = 0; c < cols; ++c) {
            if (col_taken[static_cast<std::size_t>(c)]) continue;
            // Re-solve with rows < r pinned and row r pinned to c.
            std::vector<double> trial = cost;
            auto pin = [&](int row, int col) {
                for (int cc = 0; cc < cols; ++cc) {
                    if (cc != col) trial[static_cast<std::size_t>(row) * cols + cc] = kForbiddenCost * 4;
                }
            };
            for (int rr = 0; rr < r; ++rr) {
                if (fixed_col[static_cast<std::size_t>(rr)] >= 0) pin(rr, fixed_col[static_cast<std::size_t>(rr)]);
                else if (fixed_col[static_cast<std::size_t>(rr)] == -1) {
                    for (int cc = 0; cc < cols; ++cc) trial[static_cast<std::size_t>(rr) * cols + cc] = kForbiddenCost * 4;
                }
            }
            pin(r, c);
            std::vector<int> sol = solve_raw(trial, rows, cols);
            // Pinned-out rows may have been forced onto sentinel columns;
            // evaluate against the original matrix with those drops applied.
            for (int rr = 0; rr < rows; ++rr) {
                const int cc = sol[static_cast<std::size_t>(rr)];
                if (cc >= 0 && trial[static_cast<std::size_t>(rr) * cols + cc] >= kForbiddenCost * 2) {
                    sol[static_cast<std::size_t>(rr)] = -1;
                }
            }
            if (sol[static_cast<std::size_t>(r)] != c) continue;
            if (cost_not_worse(assignment_cost(cost, cols, sol), best)) {
                chosen = c;
                break;
            }
        }
        fixed_col[static_cast<std::size_t>(r)] = chosen;
        if (chosen >= 0) col_taken[static_cast<std::size_t>(chosen)] = true;
    }

    // Drop forbidden assignments.
    std::vector<int> out(static_cast<std::size_t>(rows), -1);
    for (int r = 0; r < rows; ++r) {
        const int c = fixed_col[static_cast<std::size_t>(r)];
        if (c >= 0 && cost[static_cast<std::size_t>(r) * cols + c] < kForbiddenCost / 2) out[static_cast<std::size_t>(r)] = c;
    }
    return out;
}

std::vector<RecoveredMatch> recover_occluded(const std::vector<LostTarget>& lost,
                                             const std::vector<FreeDetection>& free_dets, const PairScorer& scorer,
                                             std::int64_t current_frame, double accept_threshold) {
    if (lost.empty() || free_dets.empty()) return {};
    const int rows = static_cast<int>(lost.size());
    const int cols = static_cast<int>(free_dets.size());
    std::vector<double> cost(static_cast<std::size_t>(rows) * cols, kForbiddenCost);
    std::vector<double> scores(cost.size(), 0.0);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const auto& t = lost[static_cast<std::size_t>(r)];
            const auto& d = free_dets[static_cast<std::size_t>(c)];
            if (current_frame <= t.last_frame) continue;
            const PairFeature f =
                pair_feature(t.last_frame, t.last_box, t.last_hist, current_frame, d.detection.box, d.hist);
            const double s = scorer.score(f);
            scores[static_cast<std::size_t>(r) * cols + c] = s;
            if (s >= accept_threshold) cost[static_cast<std::size_t>(r) * cols + c] = -s;
        }
    }
    const std::vector<int> row_to_col = hungarian(cost, rows, cols);
    std::vector<RecoveredMatch> out;
    for (int r = 0; r < rows; ++r) {
        const int c = row_to_col[static_cast<std::size_t>(r)];
        if (c < 0) continue;
        out.push_back({lost[static_cast<std::size_t>(r)].id, free_dets[static_cast<std::size_t>(c)].index,
                       scores[static_cast<std::size_t>(r) * cols + c]});
    }
    return out;
}

std::vector<BoundingBox> interpolate_gap(const BoundingBox& b1, std::int64_t t1, const BoundingBox& b2,
                                         std::int64_t t2) {
    std::vector<BoundingBox> out;
    if (t2 - t1 < 2) return out;
    const double span = static_cast<double>(t2 - t1);
    for (std::int64_t t = t1 + 1; t < t2; ++t) {
        const double a = static_cast<double>(t - t1) / span;
        out.emplace_back(b1.x + a * (b2.x - b1.x), b1.y + a * (b2.y - b1.y), b1.w + a * (b2.w - b1.w),
                         b1.h + a * (b2.h - b1.h));
    }
    return out;
}

}  // namespace iatrack::occlusion
