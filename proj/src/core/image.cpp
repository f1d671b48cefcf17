// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#include "core/image.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace iatrack {

Image::Image(int w, int h, int c) : width(w), height(h), channels(c) {
    if (w <= 0 || h <= 0 || (c != 1 && c != 3)) {
        throw StateError("image dimensions must be positive with 1 or 3 channels");
    }
    data.assign(static_cast<std::size_t>(w) * h * c, 0);
}

std::uint8_t Image::at_clamped(int x, int y, int c) const {
    x = std::clamp(x, 0, width - 1);
    y = std::clamp(y, 0, height - 1);
    return at(x, y, c);
}

double Image::sample(double x, double y, int c) const {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0;
    const double fy = y - y0;
    const double v00 = at_clamped(x0, y0, c);
    const double v10 = at_clamped(x0 + 1, y0, c);
    const double v01 = at_clamped(x0, y0 + 1, c);
    const double v11 = at_clamped(x0 + 1, y0 + 1, c);
    return (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
}

bool intersects_image(const Image& img, const BoundingBox& box) {
    return box.x < img.width && box.y < img.height && box.right() > 0.0 && box.bottom() > 0.0;
}

}  // namespace iatrack
