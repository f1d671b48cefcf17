// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#include "io/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "core/error.hpp"

namespace iatrack::io {
namespace {

namespace fs = std::filesystem;

constexpr int kTextureTile = 32;

const std::array<std::array<int, 3>, 8> kPalette = {{{200, 70, 60},
                                                     {60, 120, 200},
                                                     {70, 180, 90},
                                                     {210, 170, 60},
                                                     {160, 80, 190},
                                                     {70, 190, 180},
                                                     {220, 120, 160},
                                                     {140, 140, 70}}};

struct TargetAppearance {
    std::array<int, 3> color{};
    std::array<double, kTextureTile * kTextureTile> texture{};  // multiplicative, anchored to the box
};

Point waypoint_position(const std::vector<Point>& pts, double progress) {
    if (pts.size() == 1) return pts.front();
    const double s = progress * static_cast<double>(pts.size() - 1);
    const std::size_t seg = std::min(static_cast<std::size_t>(s), pts.size() - 2);
    const double a = s - static_cast<double>(seg);
    return {pts[seg].x + a * (pts[seg + 1].x - pts[seg].x), pts[seg].y + a * (pts[seg + 1].y - pts[seg].y)};
}

std::vector<std::vector<Point>> layout_waypoints(const SyntheticConfig& cfg, std::mt19937_64& rng) {
    std::vector<std::vector<Point>> out;
    const double mx = cfg.target_w * std::max(1.0, cfg.size_growth) / 2.0 + 6.0;
    const double my = cfg.target_h * std::max(1.0, cfg.size_growth) / 2.0 + 6.0;
    const double usable_h = cfg.height - 2.0 * my;
    switch (cfg.layout) {
        case SyntheticLayout::lanes: {
            for (int i = 0; i < cfg.n_targets; ++i) {
                const double y = my + usable_h * (i + 0.5) / cfg.n_targets;
                if (i % 2 == 0) {
                    out.push_back({{mx, y}, {cfg.width - mx, y}});
                } else {
                    out.push_back({{cfg.width - mx, y}, {mx, y}});
                }
            }
            break;
        }
        case SyntheticLayout::crossing: {
            // Pairs run in opposite directions on lanes offset by under half
            // a target height, crossing mid-sequence with partial overlap.
            for (int i = 0; i < cfg.n_targets; ++i) {
                const int pair = i / 2;
                const double y0 = my + usable_h * (pair + 0.35) / std::max(1, (cfg.n_targets + 1) / 2);
                const double y1 = y0 + 0.45 * cfg.target_h;
                if (i % 2 == 0) {
                    out.push_back({{mx, y0}, {cfg.width - mx, y0}});
                } else {
                    out.push_back({{cfg.width - mx, y1}, {mx, y1}});
                }
            }
            break;
        }
        case SyntheticLayout::random_walk: {
            std::uniform_real_distribution<double> ux(mx, cfg.width - mx);
            std::uniform_real_distribution<double> uy(my, cfg.height - my);
            for (int i = 0; i < cfg.n_targets; ++i) {
                std::vector<Point> pts;
                for (int k = 0; k < 3; ++k) pts.push_back({ux(rng), uy(rng)});
                out.push_back(std::move(pts));
            }
            break;
        }
    }
    return out;
}

Image render_background(const SyntheticConfig& cfg, std::mt19937_64& rng) {
    Image bg(cfg.width, cfg.height, 3);
    std::uniform_int_distribution<int> block_noise(-10, 10);
    const int block = 16;
    const int bw = (cfg.width + block - 1) / block;
    const int bh = (cfg.height + block - 1) / block;
    std::vector<int> noise(static_cast<std::size_t>(bw) * bh);
    for (auto& v : noise) v = block_noise(rng);
    for (int y = 0; y < cfg.height; ++y) {
        for (int x = 0; x < cfg.width; ++x) {
            const int base = 100 + (30 * y) / cfg.height;
            const int n = noise[static_cast<std::size_t>(y / block) * bw + x / block];
            const int v = std::clamp(base + n, 0, 255);
            bg.at(x, y, 0) = static_cast<std::uint8_t>(v);
            bg.at(x, y, 1) = static_cast<std::uint8_t>(v);
            bg.at(x, y, 2) = static_cast<std::uint8_t>(std::clamp(v + 6, 0, 255));
        }
    }
    return bg;
}

void draw_target(Image& img, const BoundingBox& box, const TargetAppearance& app) {
    const int x0 = std::max(0, static_cast<int>(std::lround(box.x)));
    const int y0 = std::max(0, static_cast<int>(std::lround(box.y)));
    const int x1 = std::min(img.width, static_cast<int>(std::lround(box.right())));
    const int y1 = std::min(img.height, static_cast<int>(std::lround(box.bottom())));
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            // Texture indexed in box-proportional coordinates so it moves
            // rigidly with the target.
            const double u = (x - box.x) / box.w;
            const double v = (y - box.y) / box.h;
            const int tu = std::clamp(static_cast<int>(u * kTextureTile), 0, kTextureTile - 1);
            const int tv = std::clamp(static_cast<int>(v * kTextureTile), 0, kTextureTile - 1);
            const double mul = app.texture[static_cast<std::size_t>(tv) * kTextureTile + tu];
            const bool border = (x - box.x) < 2.0 || (box.right() - x) <= 2.0 || (y - box.y) < 2.0 ||
                                (box.bottom() - y) <= 2.0;
            for (int c = 0; c < 3; ++c) {
                double value = app.color[static_cast<std::size_t>(c)] * mul;
                if (border) value *= 0.45;
                img.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(static_cast<int>(std::lround(value)), 0, 255));
            }
        }
    }
}

}  // namespace

void SyntheticConfig::validate() const {
    if (n_targets < 0 || frame_count < 1 || width < 16 || height < 16) {
        throw InputError("synthetic config needs n_targets >= 0, frames >= 1 and a sane image size");
    }
    if (!(target_w > 0 && target_h > 0)) throw InputError("synthetic target size must be positive");
    if (fn_rate < 0.0 || fn_rate > 1.0) throw InputError("fn_rate must be in [0,1]");
    if (fp_rate < 0.0) throw InputError("fp_rate must be >= 0");
    if (!waypoints.empty() && static_cast<int>(waypoints.size()) != n_targets) {
        throw InputError("waypoints must list one path per target");
    }
    for (const auto& pts : waypoints) {
        if (pts.empty()) throw InputError("waypoint paths must be non-empty");
    }
}

SyntheticSequence generate_synthetic(const SyntheticConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.rng_seed);

    SyntheticSequence seq;
    seq.width = cfg.width;
    seq.height = cfg.height;

    const Image background = render_background(cfg, rng);

    std::vector<std::vector<Point>> paths = cfg.waypoints;
    if (paths.empty()) paths = layout_waypoints(cfg, rng);

    std::vector<TargetAppearance> looks(static_cast<std::size_t>(cfg.n_targets));
    std::uniform_real_distribution<double> tex(0.8, 1.25);
    for (int i = 0; i < cfg.n_targets; ++i) {
        auto& look = looks[static_cast<std::size_t>(i)];
        look.color = !cfg.colors.empty() ? cfg.colors[static_cast<std::size_t>(i % cfg.colors.size())]
                                         : kPalette[static_cast<std::size_t>(i % kPalette.size())];
        const std::uint64_t tex_index = cfg.shared_texture ? 0 : static_cast<std::uint64_t>(i);
        std::mt19937_64 tex_rng(cfg.rng_seed * 1000003ULL + tex_index + 17ULL);
        for (auto& m : look.texture) m = tex(tex_rng);
    }

    std::normal_distribution<double> jitter_c(0.0, 1.0);
    std::normal_distribution<double> jitter_s(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::poisson_distribution<int> fp_count(cfg.fp_rate > 0.0 ? cfg.fp_rate : 1e-12);

    for (std::int64_t f = 1; f <= cfg.frame_count; ++f) {
        const double progress = cfg.frame_count > 1 ? static_cast<double>(f - 1) / static_cast<double>(cfg.frame_count - 1)
                                                    : 0.0;
        const double scale = 1.0 + (cfg.size_growth - 1.0) * progress;
        Image frame = background;
        std::vector<BoundingBox> boxes;
        for (int i = 0; i < cfg.n_targets; ++i) {
            const Point c = waypoint_position(paths[static_cast<std::size_t>(i)], progress);
            const double w = cfg.target_w * scale;
            const double h = cfg.target_h * scale;
            // Keep ground truth fully inside the image.
            const double cx = std::clamp(c.x, w / 2.0, cfg.width - w / 2.0);
            const double cy = std::clamp(c.y, h / 2.0, cfg.height - h / 2.0);
            BoundingBox box(cx - w / 2.0, cy - h / 2.0, w, h);
            draw_target(frame, box, looks[static_cast<std::size_t>(i)]);
            boxes.push_back(box);
            seq.gt.push_back({f, static_cast<std::int64_t>(i + 1), box});
        }
        seq.frames.push_back(std::move(frame));

        std::vector<Detection> frame_dets;
        for (int i = 0; i < cfg.n_targets; ++i) {
            const bool dropped = cfg.fn_rate > 0.0 && unit(rng) < cfg.fn_rate;
            const double dx = jitter_c(rng) * cfg.center_jitter;
            const double dy = jitter_c(rng) * cfg.center_jitter;
            const double dw = jitter_s(rng) * cfg.size_jitter;
            const double dh = jitter_s(rng) * cfg.size_jitter;
            const double conf = 0.8 + 0.2 * unit(rng);
            if (dropped) continue;
            const BoundingBox& b = boxes[static_cast<std::size_t>(i)];
            const double w = std::max(4.0, b.w + dw);
            const double h = std::max(4.0, b.h + dh);
            const Point c = center(b);
            frame_dets.push_back({f, BoundingBox(c.x + dx - w / 2.0, c.y + dy - h / 2.0, w, h), conf});
        }
        if (cfg.fp_rate > 0.0) {
            const int n_fp = fp_count(rng);
            for (int k = 0; k < n_fp; ++k) {
                const double w = std::max(4.0, cfg.target_w * scale + jitter_s(rng) * (cfg.size_jitter + 2.0));
                const double h = std::max(4.0, cfg.target_h * scale + jitter_s(rng) * (cfg.size_jitter + 2.0));
                const double cx = unit(rng) * cfg.width;
                const double cy = unit(rng) * cfg.height;
                const double conf = 0.3 + 0.4 * unit(rng);
                frame_dets.push_back({f, BoundingBox(cx - w / 2.0, cy - h / 2.0, w, h), conf});
            }
        }
        // Detectors emit boxes in no particular order; keep that true here so
        // nothing downstream can lean on ordering as an identity hint.
        std::shuffle(frame_dets.begin(), frame_dets.end(), rng);
        seq.detections.insert(seq.detections.end(), frame_dets.begin(), frame_dets.end());
    }
    return seq;
}

void write_sequence(const SyntheticSequence& seq, const std::string& dir) {
    const fs::path root(dir);
    fs::create_directories(root / "img1");
    fs::create_directories(root / "det");
    fs::create_directories(root / "gt");

    char name[32];
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        std::snprintf(name, sizeof(name), "%06zu.ppm", i + 1);
        save_image(seq.frames[i], (root / "img1" / name).string());
    }

    {
        std::ofstream det(root / "det" / "det.txt");
        if (!det) throw IoError("cannot write detections under " + dir);
        char buf[256];
        for (const auto& d : seq.detections) {
            std::snprintf(buf, sizeof(buf), "%lld,-1,%.2f,%.2f,%.2f,%.2f,%.2f\n", static_cast<long long>(d.frame),
                          d.box.x, d.box.y, d.box.w, d.box.h, d.confidence);
            det << buf;
        }
    }
    {
        std::ofstream gt(root / "gt" / "gt.txt");
        if (!gt) throw IoError("cannot write ground truth under " + dir);
        char buf[256];
        for (const auto& g : seq.gt) {
            std::snprintf(buf, sizeof(buf), "%lld,%lld,%.2f,%.2f,%.2f,%.2f,1,-1,1.00\n",
                          static_cast<long long>(g.frame), static_cast<long long>(g.id), g.box.x, g.box.y, g.box.w,
                          g.box.h);
            gt << buf;
        }
    }
}

}  // namespace iatrack::io
