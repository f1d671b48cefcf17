// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "core/error.hpp"
#include "doctest.h"
#include "features/features.hpp"

using namespace iatrack;
using features::FeatureConfig;
using features::FeatureMap;

namespace {

Image textured_image(int w, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> v(0, 255);
    Image img(w, h, 3);
    for (auto& px : img.data) px = static_cast<std::uint8_t>(v(rng));
    return img;
}

}  // namespace

TEST_CASE("hann window endpoints and peak") {
    const FeatureMap one = features::hann_window(1, 1);
    CHECK(one.at(0, 0, 0) == doctest::Approx(1.0));

    const FeatureMap win = features::hann_window(7, 9);
    CHECK(win.at(0, 0, 0) == doctest::Approx(0.0));
    CHECK(win.at(0, 8, 0) == doctest::Approx(0.0));
    CHECK(win.at(6, 0, 0) == doctest::Approx(0.0));
    for (std::size_t i = 0; i < win.size(); ++i) {
        CHECK(win.data[i] >= 0.0);
        CHECK(win.data[i] <= 1.0);
    }
    CHECK(win.at(3, 4, 0) == doctest::Approx(1.0));
}

TEST_CASE("hann window 1-D length 5 evaluates the raised cosine") {
    const FeatureMap w = features::hann_window(1, 5);
    const double expected[5] = {0.0, 0.5, 1.0, 0.5, 0.0};
    for (int x = 0; x < 5; ++x) CHECK(w.at(0, x, 0) == doctest::Approx(expected[x]).epsilon(1e-12));
}

TEST_CASE("constant image yields exactly zero detectability channels") {
    Image img(64, 64, 3);
    std::fill(img.data.begin(), img.data.end(), std::uint8_t(137));
    FeatureConfig cfg;
    cfg.template_h = cfg.template_w = 8;
    cfg.cell_size = 4;
    const FeatureMap map = features::extract_fused(img, BoundingBox(16, 16, 12, 12), cfg);
    for (int c = 0; c < cfg.det_channels; ++c) {
        for (int y = 0; y < map.height; ++y) {
            for (int x = 0; x < map.width; ++x) CHECK(map.at(y, x, c) == 0.0);
        }
    }
}

TEST_CASE("output shape follows the config") {
    const Image img = textured_image(100, 80, 3);
    FeatureConfig cfg;
    cfg.template_h = 6;
    cfg.template_w = 10;
    cfg.det_channels = 5;
    cfg.id_channels = 6;
    const FeatureMap map = features::extract_fused(img, BoundingBox(30, 30, 20, 16), cfg);
    CHECK(map.height == 6);
    CHECK(map.width == 10);
    CHECK(map.channels == 11);
}

TEST_CASE("identity block cells are unit or zero norm") {
    const Image img = textured_image(120, 90, 11);
    FeatureConfig cfg;
    cfg.template_h = cfg.template_w = 8;
    const FeatureMap map = features::extract_fused_raw(img, BoundingBox(20, 20, 30, 24), cfg);
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            double norm2 = 0.0;
            for (int c = cfg.det_channels; c < cfg.det_channels + cfg.id_channels; ++c) {
                norm2 += map.at(y, x, c) * map.at(y, x, c);
            }
            const double norm = std::sqrt(norm2);
            CHECK((std::abs(norm - 1.0) < 1e-6 || norm < 1e-6));
        }
    }
}

TEST_CASE("integer-cell window shifts circularly shift detectability cells") {
    // padding 1 and a window matching the template pixel size make the
    // mapping pixel-exact, so a one-cell move of the window shifts the
    // content by exactly one cell.
    const Image img = textured_image(160, 120, 5);
    FeatureConfig cfg;
    cfg.template_h = cfg.template_w = 8;
    cfg.cell_size = 4;
    cfg.padding = 1.0;
    const double side = cfg.template_w * cfg.cell_size;  // 32 px
    const BoundingBox w1(40, 40, side, side);
    const BoundingBox w2(40 + cfg.cell_size, 40, side, side);
    const FeatureMap a = features::extract_fused_raw(img, w1, cfg);
    const FeatureMap b = features::extract_fused_raw(img, w2, cfg);
    // Interior cells only; border cells see different replication.
    for (int y = 1; y < a.height - 1; ++y) {
        for (int x = 1; x < a.width - 2; ++x) {
            for (int c = 0; c < cfg.det_channels; ++c) {
                CHECK(a.at(y, x + 1, c) == doctest::Approx(b.at(y, x, c)).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("window outside the image is an error") {
    const Image img = textured_image(50, 50, 2);
    FeatureConfig cfg;
    CHECK_THROWS_AS(features::extract_fused(img, BoundingBox(500, 500, 10, 10), cfg), StateError);
}

TEST_CASE("block gains scale the blocks") {
    const Image img = textured_image(100, 100, 9);
    FeatureConfig cfg;
    cfg.template_h = cfg.template_w = 6;
    FeatureConfig boosted = cfg;
    boosted.id_gain = 0.0;
    const FeatureMap base = features::extract_fused(img, BoundingBox(30, 30, 20, 20), cfg);
    const FeatureMap zeroed = features::extract_fused(img, BoundingBox(30, 30, 20, 20), boosted);
    bool id_nonzero = false;
    for (int c = cfg.det_channels; c < cfg.total_channels(); ++c) {
        for (int y = 0; y < base.height; ++y) {
            for (int x = 0; x < base.width; ++x) {
                if (base.at(y, x, c) != 0.0) id_nonzero = true;
                CHECK(zeroed.at(y, x, c) == 0.0);
            }
        }
    }
    CHECK(id_nonzero);
    // Detectability block unchanged by the identity gain.
    for (int c = 0; c < cfg.det_channels; ++c) {
        for (int y = 0; y < base.height; ++y) {
            for (int x = 0; x < base.width; ++x) CHECK(base.at(y, x, c) == doctest::Approx(zeroed.at(y, x, c)));
        }
    }
}

TEST_CASE("config validation rejects nonsense") {
    FeatureConfig cfg;
    cfg.padding = 0.5;
    CHECK_THROWS_AS(cfg.validate(), StateError);
    cfg = FeatureConfig{};
    cfg.id_channels = 4;
    CHECK_THROWS_AS(cfg.validate(), StateError);
}
