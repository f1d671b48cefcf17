// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#include "features/features.hpp"

#include <cmath>
#include <numbers>

#include "core/error.hpp"

namespace iatrack::features {
namespace {

constexpr double kCellNormFloor = 1e-12;

double luma(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

// Resample the padded window around `window` to a patch of
// (template_h*cell) x (template_w*cell) pixels, edge replicated, one plane
// per color channel (gray replicated to three).
struct Patch {
    int h = 0, w = 0;
    std::vector<double> r, g, b, gray;
    double at_gray(int y, int x) const { return gray[static_cast<std::size_t>(y) * w + x]; }
};

Patch sample_window(const Image& image, const BoundingBox& window, const FeatureConfig& cfg) {
    const Point c = center(window);
    const double win_w = window.w * cfg.padding;
    const double win_h = window.h * cfg.padding;
    Patch p;
    p.h = cfg.template_h * cfg.cell_size;
    p.w = cfg.template_w * cfg.cell_size;
    const std::size_t n = static_cast<std::size_t>(p.h) * p.w;
    p.r.resize(n);
    p.g.resize(n);
    p.b.resize(n);
    p.gray.resize(n);
    const double x0 = c.x - win_w / 2.0;
    const double y0 = c.y - win_h / 2.0;
    const double sx = win_w / p.w;
    const double sy = win_h / p.h;
    for (int py = 0; py < p.h; ++py) {
        const double iy = y0 + (py + 0.5) * sy - 0.5;
        for (int px = 0; px < p.w; ++px) {
            const double ix = x0 + (px + 0.5) * sx - 0.5;
            const std::size_t idx = static_cast<std::size_t>(py) * p.w + px;
            if (image.channels == 3) {
                p.r[idx] = image.sample(ix, iy, 0);
                p.g[idx] = image.sample(ix, iy, 1);
                p.b[idx] = image.sample(ix, iy, 2);
            } else {
                p.r[idx] = p.g[idx] = p.b[idx] = image.sample(ix, iy, 0);
            }
            p.gray[idx] = luma(p.r[idx], p.g[idx], p.b[idx]);
        }
    }
    return p;
}

void normalize_cell(double* values, int count) {
    double norm2 = 0.0;
    for (int i = 0; i < count; ++i) norm2 += values[i] * values[i];
    if (norm2 <= kCellNormFloor) {
        for (int i = 0; i < count; ++i) values[i] = 0.0;
        return;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (int i = 0; i < count; ++i) values[i] *= inv;
}

}  // namespace

void FeatureConfig::validate() const {
    if (template_h < 1 || template_w < 1 || cell_size < 1) {
        throw StateError("feature template and cell sizes must be >= 1");
    }
    if (det_channels < 1) throw StateError("det_channels must be >= 1");
    if (id_channels != 3 && id_channels != 6) throw StateError("id_channels must be 3 or 6");
    if (padding < 1.0) throw StateError("padding must be >= 1");
}

FeatureMap hann_window(int h, int w) {
    if (h < 1 || w < 1) throw StateError("hann_window needs h, w >= 1");
    auto axis = [](int n, int i) {
        if (n == 1) return 1.0;
        return 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / (n - 1)));
    };
    FeatureMap win(h, w, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) win.at(y, x, 0) = axis(h, y) * axis(w, x);
    return win;
}

FeatureMap extract_fused_raw(const Image& image, const BoundingBox& window, const FeatureConfig& cfg) {
    cfg.validate();
    if (!intersects_image(image, window)) {
        throw StateError("track window left the image: " + to_string(window));
    }

    const Patch patch = sample_window(image, window, cfg);
    const int cell = cfg.cell_size;
    FeatureMap out(cfg.template_h, cfg.template_w, cfg.total_channels());

    // Detectability block: magnitude-weighted gradient orientation
    // histograms over [0, pi), hard-binned, normalized per cell.
    std::vector<double> hist(static_cast<std::size_t>(cfg.det_channels));
    for (int cy = 0; cy < cfg.template_h; ++cy) {
        for (int cx = 0; cx < cfg.template_w; ++cx) {
            std::fill(hist.begin(), hist.end(), 0.0);
            for (int dy = 0; dy < cell; ++dy) {
                for (int dx = 0; dx < cell; ++dx) {
                    const int py = cy * cell + dy;
                    const int px = cx * cell + dx;
                    const int ym = std::max(py - 1, 0), yp = std::min(py + 1, patch.h - 1);
                    const int xm = std::max(px - 1, 0), xp = std::min(px + 1, patch.w - 1);
                    const double gx = patch.at_gray(py, xp) - patch.at_gray(py, xm);
                    const double gy = patch.at_gray(yp, px) - patch.at_gray(ym, px);
                    const double mag = std::hypot(gx, gy);
                    if (mag <= 0.0) continue;
                    double ang = std::atan2(gy, gx);  // (-pi, pi]
                    if (ang < 0.0) ang += std::numbers::pi;
                    int bin = static_cast<int>(ang / std::numbers::pi * cfg.det_channels);
                    if (bin >= cfg.det_channels) bin = cfg.det_channels - 1;
                    hist[static_cast<std::size_t>(bin)] += mag;
                }
            }
            normalize_cell(hist.data(), cfg.det_channels);
            for (int c = 0; c < cfg.det_channels; ++c) out.at(cy, cx, c) = cfg.det_gain * hist[static_cast<std::size_t>(c)];
        }
    }

    // Identity block: per-cell color means (and stddevs for the 6-channel
    // variant), normalized per cell to unit L2 norm or exactly zero.
    std::vector<double> stats(static_cast<std::size_t>(cfg.id_channels));
    const double inv_count = 1.0 / (cell * cell);
    for (int cy = 0; cy < cfg.template_h; ++cy) {
        for (int cx = 0; cx < cfg.template_w; ++cx) {
            double sr = 0, sg = 0, sb = 0, srr = 0, sgg = 0, sbb = 0;
            for (int dy = 0; dy < cell; ++dy) {
                for (int dx = 0; dx < cell; ++dx) {
                    const std::size_t idx = static_cast<std::size_t>(cy * cell + dy) * patch.w + (cx * cell + dx);
                    sr += patch.r[idx];
                    sg += patch.g[idx];
                    sb += patch.b[idx];
                    srr += patch.r[idx] * patch.r[idx];
                    sgg += patch.g[idx] * patch.g[idx];
                    sbb += patch.b[idx] * patch.b[idx];
                }
            }
            const double mr = sr * inv_count, mg = sg * inv_count, mb = sb * inv_count;
            stats[0] = mr / 255.0;
            stats[1] = mg / 255.0;
            stats[2] = mb / 255.0;
            if (cfg.id_channels == 6) {
                stats[3] = std::sqrt(std::max(0.0, srr * inv_count - mr * mr)) / 255.0;
                stats[4] = std::sqrt(std::max(0.0, sgg * inv_count - mg * mg)) / 255.0;
                stats[5] = std::sqrt(std::max(0.0, sbb * inv_count - mb * mb)) / 255.0;
            }
            normalize_cell(stats.data(), cfg.id_channels);
            for (int c = 0; c < cfg.id_channels; ++c) {
                out.at(cy, cx, cfg.det_channels + c) = cfg.id_gain * stats[static_cast<std::size_t>(c)];
            }
        }
    }
    return out;
}

FeatureMap extract_fused(const Image& image, const BoundingBox& window, const FeatureConfig& cfg) {
    FeatureMap out = extract_fused_raw(image, window, cfg);
    const FeatureMap win = hann_window(cfg.template_h, cfg.template_w);
    for (int c = 0; c < out.channels; ++c) {
        double* pl = out.plane(c);
        const double* wp = win.plane(0);
        for (std::size_t i = 0; i < static_cast<std::size_t>(out.height) * out.width; ++i) pl[i] *= wp[i];
    }
    return out;
}

}  // namespace iatrack::features
