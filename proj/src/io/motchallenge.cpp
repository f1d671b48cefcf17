// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#include "io/motchallenge.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace iatrack::io {
namespace {

namespace fs = std::filesystem;

struct CsvRow {
    std::int64_t frame = 0;
    std::int64_t id = 0;
    double x = 0, y = 0, w = 0, h = 0;
    double conf = 0;
};

std::vector<CsvRow> parse_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    std::vector<CsvRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        CsvRow row;
        if (!(ls >> row.frame >> row.id >> row.x >> row.y >> row.w >> row.h >> row.conf)) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": malformed line");
        }
        if (row.frame < 1) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": frame index must be >= 1");
        }
        if (!(row.w > 0.0 && row.h > 0.0)) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": box needs positive width and height");
        }
        rows.push_back(row);
    }
    std::stable_sort(rows.begin(), rows.end(), [](const CsvRow& a, const CsvRow& b) { return a.frame < b.frame; });
    return rows;
}

}  // namespace

std::vector<Detection> parse_detections(const std::string& path) {
    std::vector<Detection> out;
    for (const CsvRow& row : parse_csv(path)) {
        out.push_back({row.frame, BoundingBox(row.x, row.y, row.w, row.h), row.conf});
    }
    return out;
}

std::vector<metrics::TrackedBox> parse_tracked_boxes(const std::string& path) {
    std::vector<metrics::TrackedBox> out;
    for (const CsvRow& row : parse_csv(path)) {
        out.push_back({row.frame, row.id, BoundingBox(row.x, row.y, row.w, row.h)});
    }
    return out;
}

void write_results(const std::vector<metrics::TrackedBox>& boxes, const std::string& path) {
    std::vector<metrics::TrackedBox> sorted = boxes;
    std::sort(sorted.begin(), sorted.end(), [](const metrics::TrackedBox& a, const metrics::TrackedBox& b) {
        if (a.frame != b.frame) return a.frame < b.frame;
        return a.id < b.id;
    });
    std::ofstream out(path);
    if (!out) throw IoError("cannot write results file: " + path);
    char buf[256];
    for (const auto& tb : sorted) {
        std::snprintf(buf, sizeof(buf), "%lld,%lld,%.2f,%.2f,%.2f,%.2f,-1,-1,-1,-1\n",
                      static_cast<long long>(tb.frame), static_cast<long long>(tb.id), tb.box.x, tb.box.y, tb.box.w,
                      tb.box.h);
        out << buf;
    }
    if (!out) throw IoError("failed writing results file: " + path);
}

Image load_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open image: " + path);
    std::string magic;
    in >> magic;
    if (magic != "P5" && magic != "P6") throw ParseError(path + ": only binary PGM (P5) and PPM (P6) are supported");
    auto next_int = [&]() {
        // Skip whitespace and '#' comments.
        for (;;) {
            const int c = in.peek();
            if (c == '#') {
                std::string comment;
                std::getline(in, comment);
            } else if (std::isspace(c)) {
                in.get();
            } else {
                break;
            }
        }
        long v = -1;
        in >> v;
        return v;
    };
    const long w = next_int();
    const long h = next_int();
    const long maxval = next_int();
    if (w <= 0 || h <= 0 || maxval != 255 || !in) throw ParseError(path + ": bad raster header");
    in.get();  // single whitespace after header
    Image img(static_cast<int>(w), static_cast<int>(h), magic == "P6" ? 3 : 1);
    in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.data.size())) {
        throw ParseError(path + ": truncated raster data");
    }
    return img;
}

void save_image(const Image& image, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write image: " + path);
    out << (image.channels == 3 ? "P6" : "P5") << "\n" << image.width << " " << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.data.data()), static_cast<std::streamsize>(image.data.size()));
    if (!out) throw IoError("failed writing image: " + path);
}

Image Sequence::frame(std::int64_t f) const {
    if (f < 1 || f > static_cast<std::int64_t>(frame_paths.size())) {
        throw InputError("frame index out of range: " + std::to_string(f));
    }
    return load_image(frame_paths[static_cast<std::size_t>(f - 1)]);
}

Sequence open_sequence(const std::string& dir) {
    const fs::path img_dir = fs::path(dir) / "img1";
    if (!fs::is_directory(img_dir)) throw IoError("sequence has no img1/ directory: " + dir);
    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(img_dir)) {
        const std::string ext = entry.path().extension().string();
        if (ext == ".ppm" || ext == ".pgm") paths.push_back(entry.path().string());
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw IoError("sequence img1/ holds no .ppm/.pgm frames: " + dir);

    Sequence seq;
    seq.spec.name = fs::path(dir).filename().string();
    seq.spec.frame_count = static_cast<std::int64_t>(paths.size());
    seq.spec.source = FrameSource::directory;
    seq.frame_paths = std::move(paths);
    const Image first = load_image(seq.frame_paths.front());
    seq.spec.width = first.width;
    seq.spec.height = first.height;
    return seq;
}

}  // namespace iatrack::io
