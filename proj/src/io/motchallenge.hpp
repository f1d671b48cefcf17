// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/geometry.hpp"
#include "core/image.hpp"
#include "metrics/clear_mot.hpp"

namespace iatrack::io {

/// Detection file: lines "frame,id,x,y,w,h,conf[,...]", id -1 by convention,
/// 1-based frames, extra trailing columns ignored. Returned sorted by frame.
/// Malformed lines raise ParseError naming the line number.
std::vector<Detection> parse_detections(const std::string& path);

/// Ground-truth / result file: same layout with real ids (a trailing
/// visibility column, when present, is ignored). Sorted by frame.
std::vector<metrics::TrackedBox> parse_tracked_boxes(const std::string& path);

/// Result lines "frame,id,x,y,w,h,-1,-1,-1,-1" with two fractional digits,
/// sorted by frame then id.
void write_results(const std::vector<metrics::TrackedBox>& boxes, const std::string& path);

/// Binary PPM (P6, RGB) or PGM (P5, gray) with maxval 255.
Image load_image(const std::string& path);
void save_image(const Image& image, const std::string& path);

enum class FrameSource { directory, synthetic };

struct SequenceSpec {
    std::string name;
    std::int64_t frame_count = 0;
    int width = 0;
    int height = 0;
    FrameSource source = FrameSource::directory;
};

/// A sequence directory: img1/NNNNNN.ppm (or .pgm), det/det.txt, gt/gt.txt.
struct Sequence {
    SequenceSpec spec;
    std::vector<std::string> frame_paths;  // 1-based frame f at index f-1

    Image frame(std::int64_t f) const;
};

Sequence open_sequence(const std::string& dir);

}  // namespace iatrack::io
