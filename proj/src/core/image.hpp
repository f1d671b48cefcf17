// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#pragma once

#include <cstdint>
#include <vector>

#include "core/geometry.hpp"

namespace iatrack {

/// 8-bit raster, interleaved, 1 (gray) or 3 (RGB) channels.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> data;

    Image() = default;
    Image(int w, int h, int c);

    std::uint8_t at(int x, int y, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
    std::uint8_t& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }

    /// Clamped lookup (edge replication outside the raster).
    std::uint8_t at_clamped(int x, int y, int c) const;

    /// Bilinear sample of one channel at continuous coordinates, edge-replicated.
    double sample(double x, double y, int c) const;

    bool contains(double x, double y) const { return x >= 0.0 && y >= 0.0 && x < width && y < height; }
};

/// True when the box has any overlap with the image rectangle.
bool intersects_image(const Image& img, const BoundingBox& box);

}  // namespace iatrack
