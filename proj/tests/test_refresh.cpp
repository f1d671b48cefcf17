// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <random>

#include "core/error.hpp"
#include "doctest.h"
#include "io/synthetic.hpp"
#include "oracles.hpp"
#include "refresh/refresh.hpp"

using namespace iatrack;
using refresh::Decision;
using refresh::Episode;
using refresh::RefreshClassifier;

namespace {

Image textured(int w, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> v(0, 255);
    Image img(w, h, 3);
    for (auto& px : img.data) px = static_cast<std::uint8_t>(v(rng));
    return img;
}

// Separable toy episodes: class is encoded in one descriptor coordinate,
// gt/pred/det boxes are arranged so the correct label matches it.
std::vector<Episode> toy_episodes(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.1);
    std::vector<Episode> out;
    for (int i = 0; i < n; ++i) {
        Episode ep;
        const bool refresh_correct = i % 2 == 0;
        ep.gt_box = BoundingBox(10, 10, 10, 10);
        ep.det_box = refresh_correct ? BoundingBox(10.5, 10, 10, 10) : BoundingBox(14, 14, 10, 10);
        ep.pred_box = refresh_correct ? BoundingBox(15, 15, 10, 10) : BoundingBox(10.2, 10, 10, 10);
        ep.descriptor = {refresh_correct ? 1.0 + noise(rng) : -1.0 + noise(rng), noise(rng), 1.0};
        out.push_back(std::move(ep));
    }
    return out;
}

}  // namespace

TEST_CASE("descriptor blocks mirror the input boxes") {
    const Image img = textured(120, 100, 21);
    features::FeatureConfig cfg;
    const BoundingBox a(10, 10, 24, 30);
    const BoundingBox b(60, 40, 30, 24);

    const std::vector<double> same = refresh::refresh_descriptor(img, a, a, cfg);
    CHECK(same.size() == 2u * 4 * 4 * static_cast<std::size_t>(cfg.total_channels()));
    const std::size_t half = same.size() / 2;
    for (std::size_t i = 0; i < half; ++i) CHECK(same[i] == doctest::Approx(same[half + i]));

    const std::vector<double> ab = refresh::refresh_descriptor(img, a, b, cfg);
    const std::vector<double> ba = refresh::refresh_descriptor(img, b, a, cfg);
    for (std::size_t i = 0; i < half; ++i) {
        CHECK(ab[i] == doctest::Approx(ba[half + i]));
        CHECK(ab[half + i] == doctest::Approx(ba[i]));
    }
}

TEST_CASE("zero classifier scores one half and keeps") {
    RefreshClassifier clf;
    clf.weights = {0.0, 0.0, 0.0};
    const auto [decision, score] = refresh::classify(clf, {1.0, -2.0, 3.0});
    CHECK(score == doctest::Approx(0.5));
    CHECK(decision == Decision::keep);
}

TEST_CASE("classifier score is monotone in the linear response") {
    RefreshClassifier clf;
    clf.weights = {1.0};
    double prev = -1.0;
    for (double x = -5.0; x <= 5.0; x += 0.5) {
        const auto [decision, score] = refresh::classify(clf, {x});
        CHECK(score > prev);
        prev = score;
        CHECK(decision == (score > 0.5 ? Decision::refresh : Decision::keep));
    }
}

TEST_CASE("classifier rejects descriptor length mismatch") {
    RefreshClassifier clf;
    clf.weights = {1.0, 2.0};
    CHECK_THROWS_AS(refresh::classify(clf, {1.0}), StateError);
}

TEST_CASE("a perfect classifier is returned unchanged with an empty pool") {
    std::vector<Episode> episodes = toy_episodes(10, 3);
    RefreshClassifier clf;
    clf.weights = {10.0, 0.0, 0.0};  // matches the toy encoding
    clf.bias = 0.0;
    const refresh::TrainPolicyResult result = refresh::train_policy(clf, episodes, 1);
    CHECK(result.converged);
    CHECK(result.pool_size == 0);
    CHECK(result.epochs_run == 1);
    CHECK(result.classifier.weights == clf.weights);
    CHECK(result.classifier.bias == clf.bias);
}

TEST_CASE("first mistake of type i adds exactly one positive sample") {
    Episode ep;
    ep.gt_box = BoundingBox(0, 0, 10, 10);
    ep.det_box = BoundingBox(0.5, 0, 10, 10);  // better IoU than pred
    ep.pred_box = BoundingBox(6, 6, 10, 10);
    ep.descriptor = {1.0, 0.0};
    RefreshClassifier clf;  // zero init decides keep -> mistake type i
    const refresh::TrainPolicyResult result = refresh::train_policy(clf, {ep}, 1, 1);
    CHECK(result.pool_size == 1);
    CHECK(result.epochs_run == 1);
}

TEST_CASE("mistake-driven training converges on the separable toy set") {
    const std::vector<Episode> episodes = toy_episodes(40, 7);
    RefreshClassifier clf;
    clf.learning_rate = 0.05;  // toy descriptors are tiny; speed convergence up
    const refresh::TrainPolicyResult result = refresh::train_policy(clf, episodes, 7, 50);
    CHECK(result.converged);
    CHECK(result.epochs_run <= 50);
    int correct = 0;
    for (const Episode& ep : episodes) {
        const Decision want = iou(ep.det_box, ep.gt_box) > iou(ep.pred_box, ep.gt_box) ? Decision::refresh
                                                                                       : Decision::keep;
        if (refresh::classify(result.classifier, ep.descriptor).first == want) ++correct;
    }
    CHECK(correct == static_cast<int>(episodes.size()));
}

TEST_CASE("training is deterministic for a fixed seed") {
    const std::vector<Episode> episodes = toy_episodes(30, 9);
    RefreshClassifier clf;
    clf.learning_rate = 0.05;
    const auto a = refresh::train_policy(clf, episodes, 1234, 50);
    const auto b = refresh::train_policy(clf, episodes, 1234, 50);
    REQUIRE(a.classifier.weights.size() == b.classifier.weights.size());
    for (std::size_t i = 0; i < a.classifier.weights.size(); ++i) {
        CHECK(a.classifier.weights[i] == b.classifier.weights[i]);
    }
    CHECK(a.classifier.bias == b.classifier.bias);
    CHECK(a.pool_size == b.pool_size);
}

TEST_CASE("apply_refresh keeps or retrains and backs up") {
    const Image img = textured(160, 120, 33);
    features::FeatureConfig fcfg;
    fcfg.template_h = fcfg.template_w = 12;
    kcf::KcfConfig kcfg;
    const kcf::DualModel model = kcf::train_model_at(img, BoundingBox(30, 30, 24, 24), 1, fcfg, kcfg);
    const Detection det{2, BoundingBox(34, 32, 30, 30), 0.9};

    const auto [kept, no_backup] = refresh::apply_refresh(model, img, det, Decision::keep, fcfg, kcfg, 2);
    CHECK_FALSE(no_backup.has_value());
    CHECK(kept.trained_at == model.trained_at);
    CHECK(kept.alpha_hat == model.alpha_hat);

    const auto [fresh, backup] = refresh::apply_refresh(model, img, det, Decision::refresh, fcfg, kcfg, 2);
    CHECK(fresh.trained_at == 2);
    CHECK(fresh.target_box.x == doctest::Approx(det.box.x));
    CHECK(fresh.target_box.w == doctest::Approx(det.box.w));
    REQUIRE(backup.has_value());
    CHECK(backup->saved_at == 2);
    CHECK(backup->previous.tmpl.data == model.tmpl.data);
}

TEST_CASE("refresh on a doubled target quadruples the trained box area") {
    io::SyntheticConfig scfg;
    scfg.n_targets = 1;
    scfg.frame_count = 10;
    scfg.width = 240;
    scfg.height = 180;
    scfg.target_w = 24;
    scfg.target_h = 24;
    scfg.size_growth = 2.0;
    scfg.waypoints = {{{120, 90}}};
    scfg.rng_seed = 5;
    const io::SyntheticSequence seq = io::generate_synthetic(scfg);

    features::FeatureConfig fcfg;
    fcfg.template_h = fcfg.template_w = 12;
    kcf::KcfConfig kcfg;
    const kcf::DualModel first = kcf::train_model_at(seq.frames[0], seq.gt[0].box, 1, fcfg, kcfg);
    const BoundingBox last_gt = seq.gt.back().box;
    const Detection det{10, last_gt, 1.0};
    const auto [fresh, backup] = refresh::apply_refresh(first, seq.frames[9], det, Decision::refresh, fcfg, kcfg, 10);
    CHECK(fresh.target_box.area() == doctest::Approx(4.0 * first.target_box.area()).epsilon(0.1));
}

TEST_CASE("restore_backup swaps the model once") {
    const Image img = textured(120, 100, 55);
    features::FeatureConfig fcfg;
    fcfg.template_h = fcfg.template_w = 10;
    kcf::KcfConfig kcfg;
    auto old_model = std::make_shared<const kcf::DualModel>(
        kcf::train_model_at(img, BoundingBox(20, 20, 20, 20), 1, fcfg, kcfg));
    auto new_model = std::make_shared<const kcf::DualModel>(
        kcf::train_model_at(img, BoundingBox(50, 50, 20, 20), 2, fcfg, kcfg));

    std::shared_ptr<const kcf::DualModel> active = new_model;
    std::optional<refresh::ModelBackup> backup = refresh::ModelBackup{*old_model, 2};
    CHECK(refresh::restore_backup(active, backup));
    CHECK(active->trained_at == 1);
    CHECK_FALSE(backup.has_value());

    // Second restore is a no-op.
    CHECK_FALSE(refresh::restore_backup(active, backup));
    CHECK(active->trained_at == 1);
}

TEST_CASE("weights files round trip bit-exactly") {
    const std::string path = (std::filesystem::temp_directory_path() / "iatrack_test_weights.txt").string();
    const std::vector<double> weights = {0.1, -2.5e-7, 3.14159265358979312, 0.0};
    refresh::save_weights(path, "refresh_policy", weights, -0.75);
    const refresh::LoadedWeights loaded = refresh::load_weights(path);
    CHECK(loaded.kind == "refresh_policy");
    REQUIRE(loaded.weights.size() == weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) CHECK(loaded.weights[i] == weights[i]);
    CHECK(loaded.bias == -0.75);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(refresh::load_weights(path), IoError);
}
