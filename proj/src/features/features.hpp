// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#pragma once

#include <vector>

#include "core/geometry.hpp"
#include "core/image.hpp"

namespace iatrack::features {

/// H x W x C real tensor, stored as C contiguous H*W planes.
/// Channels [0, det_channels) hold the detectability block, the rest the
/// identity block; the split is fixed so the two score terms stay separable.
struct FeatureMap {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;

    FeatureMap() = default;
    FeatureMap(int h, int w, int c) : height(h), width(w), channels(c), data(static_cast<std::size_t>(h) * w * c, 0.0) {}

    double at(int y, int x, int c) const { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }
    double& at(int y, int x, int c) { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }

    const double* plane(int c) const { return data.data() + static_cast<std::size_t>(c) * height * width; }
    double* plane(int c) { return data.data() + static_cast<std::size_t>(c) * height * width; }

    std::size_t size() const { return data.size(); }
    bool same_shape(const FeatureMap& o) const { return height == o.height && width == o.width && channels == o.channels; }
};

struct FeatureConfig {
    int template_h = 24;       // cells
    int template_w = 24;       // cells
    int cell_size = 4;         // pixels per cell
    int det_channels = 9;      // gradient orientation bins
    int id_channels = 3;       // per-cell color statistics (3 = means, 6 = means + stddevs)
    double padding = 2.5;      // search window scale relative to the target box
    double det_gain = 1.0;     // per-block gains applied after normalization;
    double id_gain = 1.0;      // the paper never states the blocks' relative scaling

    void validate() const;
    int total_channels() const { return det_channels + id_channels; }
};

/// Separable raised-cosine weights, peak 1 at the center, 0 at the borders.
/// A 1-cell axis degenerates to weight 1.
FeatureMap hann_window(int h, int w);

/// Fused feature map over the padded search window around `window`:
/// detectability block = per-cell gradient-orientation histograms of the
/// grayscale patch, identity block = per-cell color statistics, both
/// L2-normalized per cell (exactly 0 for empty cells), gains applied, then
/// every channel multiplied by the cosine window.
///
/// Out-of-image regions are edge-replicated. Throws StateError when `window`
/// has no overlap with the image at all.
FeatureMap extract_fused(const Image& image, const BoundingBox& window, const FeatureConfig& cfg);

/// Same extraction without the cosine window. Used for pooled descriptors
/// and by shift-equivariance checks.
FeatureMap extract_fused_raw(const Image& image, const BoundingBox& window, const FeatureConfig& cfg);

}  // namespace iatrack::features
