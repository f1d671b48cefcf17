// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "core/geometry.hpp"
#include "core/image.hpp"
#include "features/features.hpp"
#include "kcf/fft2d.hpp"

namespace iatrack::kcf {

struct KcfConfig {
    double lambda = 1e-4;             // ridge regularizer
    double sigma = 0.5;               // gaussian kernel bandwidth
    double label_sigma_factor = 0.1;  // label spread = factor * sqrt(target cells)

    void validate() const;
};

/// Fourier-domain dual coefficients of one target's ridge regression,
/// together with the feature template they were trained on. Immutable
/// after training; replaced wholesale on refresh.
struct DualModel {
    Spectrum alpha_hat;              // H x W complex, dims equal the template's spatial dims
    features::FeatureMap tmpl;       // stored training features
    std::int64_t trained_at = 0;     // frame index
    BoundingBox target_box;          // box at training time

    int height() const { return tmpl.height; }
    int width() const { return tmpl.width; }
};

/// Gaussian kernel correlation of two equally shaped feature maps over all
/// circular shifts: k(u) = exp(-max(0, |z|^2 + |zp|^2 - 2*cc(u)) / (sigma^2 * H*W*C))
/// with cc(u) = sum_c sum_n z_c(n+u) * zp_c(n), evaluated in the Fourier domain.
std::vector<double> gaussian_kernel_correlation(const features::FeatureMap& z, const features::FeatureMap& zp,
                                                double sigma);

/// Wrap-around-centered 2-D Gaussian regression labels, peak value 1 at (0,0).
std::vector<double> regression_labels(int h, int w, double label_sigma);

/// Ridge-regression training in the Fourier domain:
/// alpha_hat = DFT(y) / (DFT(k^::zz) + lambda).
/// `target_area_cells` drives the label spread (factor * sqrt(area)); when
/// negative the full template area is used, which matches training on an
/// unpadded map. Callers that extract with padding pass
/// (H/padding) * (W/padding).
DualModel train_model(const features::FeatureMap& z, const KcfConfig& cfg, const BoundingBox& box,
                      std::int64_t frame, double target_area_cells = -1.0);

/// Response of a trained model to new features of the same shape:
/// real(F^-1(DFT(k^(z_new, template)) .* alpha_hat)).
std::vector<double> response_map(const DualModel& model, const features::FeatureMap& z_new, const KcfConfig& cfg);

/// One target's per-frame response field: the response map over the padded
/// window at `anchor`, plus the geometry to convert cells to pixels. Built
/// once per target per frame and shared by prediction and candidate scoring.
struct ResponseField {
    std::vector<double> response;  // H x W, wrap-around shift indexing
    int height = 0;
    int width = 0;
    BoundingBox anchor;
    double cell_px_x = 0.0;  // image pixels per cell shift, x axis
    double cell_px_y = 0.0;
    double peak_value = 0.0;
    int peak_dy = 0;  // signed cell shift of the best response
    int peak_dx = 0;

    double value_at_shift(int dy, int dx) const;
    BoundingBox predicted_box() const;
    /// Response at the cell nearest the candidate center, or nullopt when the
    /// center lies outside the half-window shift range.
    std::optional<double> score_of(const BoundingBox& candidate_box) const;
};

ResponseField compute_response_field(const DualModel& model, const Image& image, const BoundingBox& anchor,
                                     const features::FeatureConfig& fcfg, const KcfConfig& kcfg);

/// Translate `prev_box` by the argmax shift of the response field; the box
/// size is kept (scale changes happen through model refresh only). Returns
/// the moved box and the peak response value.
std::pair<BoundingBox, double> predict(const DualModel& model, const Image& image, const BoundingBox& prev_box,
                                       const features::FeatureConfig& fcfg, const KcfConfig& kcfg);

/// Response value for a candidate box against a model anchored at
/// `anchor_box`; nullopt when the candidate is outside the search window.
std::optional<double> score_at(const DualModel& model, const Image& image, const BoundingBox& candidate_box,
                               const BoundingBox& anchor_box, const features::FeatureConfig& fcfg,
                               const KcfConfig& kcfg);

/// Train a model from the image content at `box` (padded window extraction).
DualModel train_model_at(const Image& image, const BoundingBox& box, std::int64_t frame,
                         const features::FeatureConfig& fcfg, const KcfConfig& kcfg);

}  // namespace iatrack::kcf
