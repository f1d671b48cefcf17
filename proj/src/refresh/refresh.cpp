// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#include "refresh/refresh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "core/error.hpp"

namespace iatrack::refresh {
namespace {

void sgd_step(RefreshClassifier& clf, const std::vector<const RefreshSample*>& batch) {
    std::vector<double> grad(clf.weights.size(), 0.0);
    double grad_b = 0.0;
    for (const RefreshSample* s : batch) {
        double lin = clf.bias;
        for (std::size_t i = 0; i < clf.weights.size(); ++i) lin += clf.weights[i] * s->descriptor[i];
        const double score = 1.0 / (1.0 + std::exp(-lin));
        const double err = score - (s->label == Decision::refresh ? 1.0 : 0.0);
        for (std::size_t i = 0; i < clf.weights.size(); ++i) grad[i] += err * s->descriptor[i];
        grad_b += err;
    }
    const double scale = clf.learning_rate / static_cast<double>(batch.size());
    for (std::size_t i = 0; i < clf.weights.size(); ++i) clf.weights[i] -= scale * grad[i];
    clf.bias -= scale * grad_b;
}

}  // namespace

std::vector<double> refresh_descriptor(const Image& image, const BoundingBox& pred_box, const BoundingBox& det_box,
                                       const features::FeatureConfig& cfg, int pooled_grid) {
    features::FeatureConfig pooled = cfg;
    pooled.template_h = pooled_grid;
    pooled.template_w = pooled_grid;
    pooled.padding = 1.0;  // the descriptor covers the boxes themselves

    const features::FeatureMap a = features::extract_fused_raw(image, pred_box, pooled);
    const features::FeatureMap b = features::extract_fused_raw(image, det_box, pooled);
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.data.begin(), a.data.end());
    out.insert(out.end(), b.data.begin(), b.data.end());
    return out;
}

std::pair<Decision, double> classify(const RefreshClassifier& clf, const std::vector<double>& descriptor) {
    if (!clf.weights.empty() && clf.weights.size() != descriptor.size()) {
        throw StateError("refresh descriptor length does not match the classifier");
    }
    double lin = clf.bias;
    for (std::size_t i = 0; i < clf.weights.size(); ++i) lin += clf.weights[i] * descriptor[i];
    const double score = 1.0 / (1.0 + std::exp(-lin));
    return {score > 0.5 ? Decision::refresh : Decision::keep, score};
}

TrainPolicyResult train_policy(const RefreshClassifier& clf, const std::vector<Episode>& episodes,
                               std::uint64_t rng_seed, int max_epochs) {
    TrainPolicyResult result;
    result.classifier = clf;
    if (episodes.empty()) {
        result.converged = true;
        return result;
    }
    if (result.classifier.weights.empty()) {
        result.classifier.weights.assign(episodes.front().descriptor.size(), 0.0);
    }

    std::mt19937_64 rng(rng_seed);
    std::vector<RefreshSample> pool;
    for (int epoch = 0; epoch < max_epochs; ++epoch) {
        bool any_mistake = false;
        for (const Episode& ep : episodes) {
            const Decision correct =
                iou(ep.det_box, ep.gt_box) > iou(ep.pred_box, ep.gt_box) ? Decision::refresh : Decision::keep;
            const auto [decision, score] = classify(result.classifier, ep.descriptor);
            if (decision == correct) continue;

            any_mistake = true;
            pool.push_back({ep.descriptor, correct});
            const RefreshSample* fresh = &pool.back();
            for (int it = 0; it < result.classifier.iters_per_mistake; ++it) {
                std::vector<const RefreshSample*> batch{fresh};
                if (pool.size() > 1) {
                    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 2);
                    const int fill = std::max(0, result.classifier.batch_size - 1);
                    for (int k = 0; k < fill; ++k) batch.push_back(&pool[pick(rng)]);
                }
                sgd_step(result.classifier, batch);
            }
        }
        result.epochs_run = epoch + 1;
        if (!any_mistake) {
            result.converged = true;
            break;
        }
    }
    result.pool_size = pool.size();
    return result;
}

std::pair<kcf::DualModel, std::optional<ModelBackup>> apply_refresh(const kcf::DualModel& model, const Image& image,
                                                                    const Detection& detection, Decision decision,
                                                                    const features::FeatureConfig& fcfg,
                                                                    const kcf::KcfConfig& kcfg,
                                                                    std::int64_t frame) {
    if (decision == Decision::keep) return {model, std::nullopt};
    kcf::DualModel fresh = kcf::train_model_at(image, detection.box, frame, fcfg, kcfg);
    ModelBackup backup{model, frame};
    return {std::move(fresh), std::move(backup)};
}

bool restore_backup(std::shared_ptr<const kcf::DualModel>& active, std::optional<ModelBackup>& backup) {
    if (!backup.has_value()) return false;
    active = std::make_shared<const kcf::DualModel>(std::move(backup->previous));
    backup.reset();
    return true;
}

void save_weights(const std::string& path, const std::string& kind, const std::vector<double>& weights, double bias) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write weights file: " + path);
    out << "IATRACK_WEIGHTS 1 " << kind << "\n";
    out << "dim " << weights.size() << "\n";
    char buf[64];
    for (const double w : weights) {
        std::snprintf(buf, sizeof(buf), "%.17g", w);
        out << buf << "\n";
    }
    std::snprintf(buf, sizeof(buf), "%.17g", bias);
    out << "bias " << buf << "\n";
    if (!out) throw IoError("failed writing weights file: " + path);
}

LoadedWeights load_weights(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read weights file: " + path);
    std::string magic;
    int version = 0;
    LoadedWeights out;
    if (!(in >> magic >> version >> out.kind) || magic != "IATRACK_WEIGHTS" || version != 1) {
        throw ParseError("bad weights file header: " + path);
    }
    std::string token;
    std::size_t dim = 0;
    if (!(in >> token >> dim) || token != "dim") throw ParseError("bad weights file dim line: " + path);
    out.weights.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        if (!(in >> out.weights[i])) throw ParseError("truncated weights file: " + path);
    }
    if (!(in >> token >> out.bias) || token != "bias") throw ParseError("bad weights file bias line: " + path);
    return out;
}

}  // namespace iatrack::refresh
