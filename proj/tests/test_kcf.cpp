// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "core/error.hpp"
#include "doctest.h"
#include "features/features.hpp"
#include "io/synthetic.hpp"
#include "kcf/kcf.hpp"
#include "oracles.hpp"

using namespace iatrack;
using features::FeatureMap;

namespace {

FeatureMap circular_shift(const FeatureMap& in, int dy, int dx) {
    FeatureMap out(in.height, in.width, in.channels);
    for (int c = 0; c < in.channels; ++c) {
        for (int y = 0; y < in.height; ++y) {
            for (int x = 0; x < in.width; ++x) {
                out.at((y + dy) % in.height, (x + dx) % in.width, c) = in.at(y, x, c);
            }
        }
    }
    return out;
}

}  // namespace

TEST_CASE("kernel correlation self peak is exactly one") {
    const FeatureMap z = oracle::random_map(8, 8, 2, 1);
    const std::vector<double> k = kcf::gaussian_kernel_correlation(z, z, 0.5);
    CHECK(k[0] == doctest::Approx(1.0).epsilon(1e-12));
    for (double v : k) {
        CHECK(v > 0.0);
        CHECK(v <= 1.0 + 1e-12);
    }
}

TEST_CASE("kernel correlation against an all-zero map is constant") {
    const FeatureMap z = oracle::random_map(6, 7, 3, 2);
    FeatureMap zero(6, 7, 3);
    double norm2 = 0.0;
    for (double v : z.data) norm2 += v * v;
    const double sigma = 0.5;
    const double expected = std::exp(-norm2 / (sigma * sigma * 6 * 7 * 3));
    const std::vector<double> k = kcf::gaussian_kernel_correlation(z, zero, sigma);
    for (double v : k) CHECK(v == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("kernel correlation matches the spatial brute force") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const FeatureMap z = oracle::random_map(8, 8, 2, 100 + seed);
        const FeatureMap zp = oracle::random_map(8, 8, 2, 200 + seed);
        const std::vector<double> fast = kcf::gaussian_kernel_correlation(z, zp, 0.5);
        const std::vector<double> slow = oracle::kernel_correlation_bruteforce(z, zp, 0.5);
        for (std::size_t i = 0; i < fast.size(); ++i) {
            CHECK(std::abs(fast[i] - slow[i]) < 1e-6);
        }
    }
}

TEST_CASE("kernel correlation rejects shape mismatches") {
    const FeatureMap a = oracle::random_map(8, 8, 2, 1);
    const FeatureMap b = oracle::random_map(8, 4, 2, 1);
    CHECK_THROWS_AS(kcf::gaussian_kernel_correlation(a, b, 0.5), StateError);
}

TEST_CASE("regression labels peak at the origin and reflect circularly") {
    const std::vector<double> y = kcf::regression_labels(16, 16, 2.0);
    CHECK(y[0] == doctest::Approx(1.0));
    for (double v : y) CHECK(v <= 1.0 + 1e-15);
    for (int r = 0; r < 16; ++r) {
        for (int c = 0; c < 16; ++c) {
            const int rr = (16 - r) % 16, cc = (16 - c) % 16;
            CHECK(y[static_cast<std::size_t>(r) * 16 + c] ==
                  doctest::Approx(y[static_cast<std::size_t>(rr) * 16 + cc]).epsilon(1e-12));
        }
    }
}

TEST_CASE("regression label sum matches the closed form") {
    const std::vector<double> y = kcf::regression_labels(16, 16, 2.0);
    double sum = 0.0;
    for (double v : y) sum += v;
    double expected = 0.0;
    for (int r = 0; r < 16; ++r) {
        for (int c = 0; c < 16; ++c) {
            const double dr = std::min(r, 16 - r), dc = std::min(c, 16 - c);
            expected += std::exp(-(dr * dr + dc * dc) / (2.0 * 4.0));
        }
    }
    CHECK(sum == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("larger regularizers shrink the dual coefficients monotonically") {
    const FeatureMap z = oracle::random_map(8, 8, 2, 5);
    double prev = std::numeric_limits<double>::infinity();
    for (const double lambda : {1e-4, 1e-2, 1.0, 100.0, 1e4}) {
        kcf::KcfConfig cfg;
        cfg.lambda = lambda;
        const kcf::DualModel m = kcf::train_model(z, cfg, BoundingBox(0, 0, 8, 8), 1);
        double max_mag = 0.0;
        for (const auto& a : m.alpha_hat) max_mag = std::max(max_mag, std::abs(a));
        CHECK(max_mag < prev);
        prev = max_mag;
    }
}

TEST_CASE("training is deterministic") {
    const FeatureMap z = oracle::random_map(8, 8, 2, 9);
    kcf::KcfConfig cfg;
    const kcf::DualModel a = kcf::train_model(z, cfg, BoundingBox(0, 0, 8, 8), 3);
    const kcf::DualModel b = kcf::train_model(z, cfg, BoundingBox(0, 0, 8, 8), 3);
    REQUIRE(a.alpha_hat.size() == b.alpha_hat.size());
    for (std::size_t i = 0; i < a.alpha_hat.size(); ++i) CHECK(a.alpha_hat[i] == b.alpha_hat[i]);
}

TEST_CASE("ridge training reproduces the labels on the training sample") {
    kcf::KcfConfig cfg;
    cfg.lambda = 1e-4;
    for (const int side : {4, 16}) {
        const FeatureMap z = oracle::random_map(side, side, 1, 77 + static_cast<std::uint64_t>(side));
        const kcf::DualModel model = kcf::train_model(z, cfg, BoundingBox(0, 0, side, side), 1);
        const std::vector<double> resp = kcf::response_map(model, z, cfg);
        const double label_sigma = cfg.label_sigma_factor * side;
        const std::vector<double> y = kcf::regression_labels(side, side, label_sigma);
        for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::abs(resp[i] - y[i]) < 1e-3);
    }
}

TEST_CASE("ridge training agrees with the dense circulant oracle") {
    kcf::KcfConfig cfg;
    cfg.lambda = 1e-4;
    const FeatureMap z = oracle::random_map(4, 4, 1, 123);
    const kcf::DualModel model = kcf::train_model(z, cfg, BoundingBox(0, 0, 4, 4), 1);
    const std::vector<double> resp = kcf::response_map(model, z, cfg);
    const std::vector<double> y = kcf::regression_labels(4, 4, cfg.label_sigma_factor * 4.0);
    const std::vector<double> dense = oracle::ridge_predict_circulant(z, cfg.sigma, cfg.lambda, y);
    for (std::size_t i = 0; i < resp.size(); ++i) CHECK(resp[i] == doctest::Approx(dense[i]).epsilon(1e-8));
}

TEST_CASE("response peaks at zero shift for the training sample") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const FeatureMap z = oracle::random_map(8, 8, 3, 500 + seed);
        kcf::KcfConfig cfg;
        const kcf::DualModel model = kcf::train_model(z, cfg, BoundingBox(0, 0, 8, 8), 1);
        const std::vector<double> resp = kcf::response_map(model, z, cfg);
        std::size_t best = 0;
        for (std::size_t i = 1; i < resp.size(); ++i)
            if (resp[i] > resp[best]) best = i;
        CHECK(best == 0);
    }
}

TEST_CASE("response argmax follows circular shifts of the template") {
    const FeatureMap z = oracle::random_map(8, 8, 2, 31);
    kcf::KcfConfig cfg;
    const kcf::DualModel model = kcf::train_model(z, cfg, BoundingBox(0, 0, 8, 8), 1);
    for (const auto& [dy, dx] : std::vector<std::pair<int, int>>{{0, 3}, {2, 0}, {5, 6}}) {
        const FeatureMap shifted = circular_shift(z, dy, dx);
        const std::vector<double> resp = kcf::response_map(model, shifted, cfg);
        std::size_t best = 0;
        for (std::size_t i = 1; i < resp.size(); ++i)
            if (resp[i] > resp[best]) best = i;
        CHECK(static_cast<int>(best) / 8 == dy);
        CHECK(static_cast<int>(best) % 8 == dx);
    }
}

TEST_CASE("response map equals the spatial dual-form evaluation") {
    const FeatureMap z = oracle::random_map(8, 8, 2, 61);
    const FeatureMap z_new = oracle::random_map(8, 8, 2, 62);
    kcf::KcfConfig cfg;
    const kcf::DualModel model = kcf::train_model(z, cfg, BoundingBox(0, 0, 8, 8), 1);
    const std::vector<double> fast = kcf::response_map(model, z_new, cfg);

    // Spatial alpha from a naive inverse DFT, then circular convolution.
    const auto alpha_full = oracle::naive_dft2(model.alpha_hat, 8, 8, true);
    std::vector<double> alpha(64);
    for (std::size_t i = 0; i < 64; ++i) alpha[i] = alpha_full[i].real();
    const std::vector<double> k = oracle::kernel_correlation_bruteforce(z_new, z, cfg.sigma);
    const std::vector<double> slow = oracle::circular_convolve(alpha, k, 8, 8);
    for (std::size_t i = 0; i < 64; ++i) CHECK(std::abs(fast[i] - slow[i]) < 1e-6);
}

TEST_CASE("predict finds a translated synthetic target") {
    io::SyntheticConfig scfg;
    scfg.n_targets = 1;
    scfg.frame_count = 2;
    scfg.width = 200;
    scfg.height = 150;
    scfg.target_w = 40;
    scfg.target_h = 40;
    scfg.rng_seed = 3;
    // 12 px over one step: 3 cells of 4 px at scale 1.
    scfg.waypoints = {{{60, 75}, {72, 75}}};
    const io::SyntheticSequence seq = io::generate_synthetic(scfg);

    features::FeatureConfig fcfg;
    fcfg.template_h = fcfg.template_w = 20;
    fcfg.cell_size = 4;
    fcfg.padding = 2.0;  // window = 80 px = template pixels, scale 1
    kcf::KcfConfig kcfg;

    const BoundingBox b0 = seq.gt[0].box;
    const kcf::DualModel model = kcf::train_model_at(seq.frames[0], b0, 1, fcfg, kcfg);

    // Stationary check: predicting on the training frame keeps the box.
    const auto [same_box, same_peak] = kcf::predict(model, seq.frames[0], b0, fcfg, kcfg);
    CHECK(center(same_box).x == doctest::Approx(center(b0).x));
    CHECK(center(same_box).y == doctest::Approx(center(b0).y));

    const auto [moved_box, peak] = kcf::predict(model, seq.frames[1], b0, fcfg, kcfg);
    CHECK(std::abs(center(moved_box).x - (center(b0).x + 12.0)) <= fcfg.cell_size + 1e-9);
    CHECK(std::abs(center(moved_box).y - center(b0).y) <= fcfg.cell_size + 1e-9);

    // The true location outscores a background location.
    const std::optional<double> at_target = kcf::score_at(model, seq.frames[1], seq.gt[1].box, b0, fcfg, kcfg);
    const BoundingBox background(140, 40, 40, 40);
    const std::optional<double> at_background = kcf::score_at(model, seq.frames[1], background, b0, fcfg, kcfg);
    REQUIRE(at_target.has_value());
    if (at_background.has_value()) CHECK(*at_target > *at_background);
    CHECK(*at_target > 0.1);
}

TEST_CASE("score_at agrees with the response field lookup") {
    io::SyntheticConfig scfg;
    scfg.n_targets = 1;
    scfg.frame_count = 1;
    scfg.width = 160;
    scfg.height = 120;
    scfg.rng_seed = 8;
    scfg.waypoints = {{{80, 60}}};
    const io::SyntheticSequence seq = io::generate_synthetic(scfg);

    features::FeatureConfig fcfg;
    fcfg.template_h = fcfg.template_w = 16;
    kcf::KcfConfig kcfg;
    const BoundingBox anchor = seq.gt[0].box;
    const kcf::DualModel model = kcf::train_model_at(seq.frames[0], anchor, 1, fcfg, kcfg);
    const kcf::ResponseField field = kcf::compute_response_field(model, seq.frames[0], anchor, fcfg, kcfg);

    BoundingBox candidate = anchor;
    candidate.x += 2 * field.cell_px_x;
    candidate.y -= field.cell_px_y;
    const std::optional<double> direct = kcf::score_at(model, seq.frames[0], candidate, anchor, fcfg, kcfg);
    const std::optional<double> via_field = field.score_of(candidate);
    REQUIRE(direct.has_value());
    REQUIRE(via_field.has_value());
    CHECK(*direct == doctest::Approx(*via_field).epsilon(1e-9));
    CHECK(*via_field == doctest::Approx(field.value_at_shift(-1, 2)).epsilon(1e-12));

    // Outside the half-window range there is no score.
    BoundingBox far = anchor;
    far.x += anchor.w * fcfg.padding;
    CHECK_FALSE(field.score_of(far).has_value());
}
