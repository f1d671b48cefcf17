// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#include "kcf/kcf.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace iatrack::kcf {
namespace {

double squared_norm(const features::FeatureMap& m) {
    double acc = 0.0;
    for (double v : m.data) acc += v * v;
    return acc;
}

int wrap(int i, int n) {
    i %= n;
    return i < 0 ? i + n : i;
}

}  // namespace

void KcfConfig::validate() const {
    if (!(lambda > 0.0) || !(sigma > 0.0) || !(label_sigma_factor > 0.0)) {
        throw StateError("kcf config values must be positive");
    }
}

std::vector<double> gaussian_kernel_correlation(const features::FeatureMap& z, const features::FeatureMap& zp,
                                                double sigma) {
    if (!z.same_shape(zp)) throw StateError("kernel correlation needs equally shaped feature maps");
    const int h = z.height, w = z.width;
    const std::size_t n = static_cast<std::size_t>(h) * w;

    Spectrum acc(n, {0.0, 0.0});
    for (int c = 0; c < z.channels; ++c) {
        const Spectrum a = fft2(z.plane(c), h, w);
        const Spectrum b = fft2(zp.plane(c), h, w);
        for (std::size_t i = 0; i < n; ++i) acc[i] += a[i] * std::conj(b[i]);
    }
    const std::vector<double> cross = ifft2_real(acc, h, w);

    const double norms = squared_norm(z) + squared_norm(zp);
    const double denom = sigma * sigma * static_cast<double>(n) * z.channels;
    std::vector<double> k(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double arg = std::max(0.0, norms - 2.0 * cross[i]);
        k[i] = std::exp(-arg / denom);
    }
    return k;
}

std::vector<double> regression_labels(int h, int w, double label_sigma) {
    if (h < 1 || w < 1) throw StateError("regression_labels needs h, w >= 1");
    const double s = std::max(label_sigma, 1e-3);
    std::vector<double> y(static_cast<std::size_t>(h) * w);
    for (int r = 0; r < h; ++r) {
        const double dr = std::min(r, h - r);
        for (int c = 0; c < w; ++c) {
            const double dc = std::min(c, w - c);
            y[static_cast<std::size_t>(r) * w + c] = std::exp(-(dr * dr + dc * dc) / (2.0 * s * s));
        }
    }
    return y;
}

DualModel train_model(const features::FeatureMap& z, const KcfConfig& cfg, const BoundingBox& box,
                      std::int64_t frame, double target_area_cells) {
    cfg.validate();
    const int h = z.height, w = z.width;
    const double area = target_area_cells > 0.0 ? target_area_cells : static_cast<double>(h) * w;
    const double label_sigma = cfg.label_sigma_factor * std::sqrt(area);

    const std::vector<double> y = regression_labels(h, w, label_sigma);
    const std::vector<double> k = gaussian_kernel_correlation(z, z, cfg.sigma);

    const Spectrum y_hat = fft2(y.data(), h, w);
    const Spectrum k_hat = fft2(k.data(), h, w);

    DualModel model;
    model.alpha_hat.resize(y_hat.size());
    for (std::size_t i = 0; i < y_hat.size(); ++i) {
        model.alpha_hat[i] = y_hat[i] / (k_hat[i] + cfg.lambda);
    }
    model.tmpl = z;
    model.trained_at = frame;
    model.target_box = box;
    return model;
}

std::vector<double> response_map(const DualModel& model, const features::FeatureMap& z_new, const KcfConfig& cfg) {
    if (!z_new.same_shape(model.tmpl)) throw StateError("response_map input does not match the model template");
    const int h = model.height(), w = model.width();
    const std::vector<double> k = gaussian_kernel_correlation(z_new, model.tmpl, cfg.sigma);
    Spectrum k_hat = fft2(k.data(), h, w);
    for (std::size_t i = 0; i < k_hat.size(); ++i) k_hat[i] *= model.alpha_hat[i];
    return ifft2_real(k_hat, h, w);
}

double ResponseField::value_at_shift(int dy, int dx) const {
    return response[static_cast<std::size_t>(wrap(dy, height)) * width + wrap(dx, width)];
}

BoundingBox ResponseField::predicted_box() const {
    return {anchor.x + peak_dx * cell_px_x, anchor.y + peak_dy * cell_px_y, anchor.w, anchor.h};
}

std::optional<double> ResponseField::score_of(const BoundingBox& candidate_box) const {
    const Point cc = center(candidate_box);
    const Point ac = center(anchor);
    const long dx = std::lround((cc.x - ac.x) / cell_px_x);
    const long dy = std::lround((cc.y - ac.y) / cell_px_y);
    if (std::labs(dx) > width / 2 || std::labs(dy) > height / 2) return std::nullopt;
    return value_at_shift(static_cast<int>(dy), static_cast<int>(dx));
}

ResponseField compute_response_field(const DualModel& model, const Image& image, const BoundingBox& anchor,
                                     const features::FeatureConfig& fcfg, const KcfConfig& kcfg) {
    const features::FeatureMap z_new = features::extract_fused(image, anchor, fcfg);
    ResponseField field;
    field.response = response_map(model, z_new, kcfg);
    field.height = z_new.height;
    field.width = z_new.width;
    field.anchor = anchor;
    field.cell_px_x = anchor.w * fcfg.padding / fcfg.template_w;
    field.cell_px_y = anchor.h * fcfg.padding / fcfg.template_h;

    std::size_t best = 0;
    for (std::size_t i = 1; i < field.response.size(); ++i) {
        if (field.response[i] > field.response[best]) best = i;
    }
    field.peak_value = field.response[best];
    int r = static_cast<int>(best) / field.width;
    int c = static_cast<int>(best) % field.width;
    field.peak_dy = r <= field.height / 2 ? r : r - field.height;
    field.peak_dx = c <= field.width / 2 ? c : c - field.width;
    return field;
}

std::pair<BoundingBox, double> predict(const DualModel& model, const Image& image, const BoundingBox& prev_box,
                                       const features::FeatureConfig& fcfg, const KcfConfig& kcfg) {
    const ResponseField field = compute_response_field(model, image, prev_box, fcfg, kcfg);
    return {field.predicted_box(), field.peak_value};
}

std::optional<double> score_at(const DualModel& model, const Image& image, const BoundingBox& candidate_box,
                               const BoundingBox& anchor_box, const features::FeatureConfig& fcfg,
                               const KcfConfig& kcfg) {
    const ResponseField field = compute_response_field(model, image, anchor_box, fcfg, kcfg);
    return field.score_of(candidate_box);
}

DualModel train_model_at(const Image& image, const BoundingBox& box, std::int64_t frame,
                         const features::FeatureConfig& fcfg, const KcfConfig& kcfg) {
    const features::FeatureMap z = features::extract_fused(image, box, fcfg);
    const double target_area =
        (fcfg.template_h / fcfg.padding) * (fcfg.template_w / fcfg.padding);
    return train_model(z, kcfg, box, frame, target_area);
}

}  // namespace iatrack::kcf
