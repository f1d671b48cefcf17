// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 iatrack contributors

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>

#include "config/run_config.hpp"
#include "core/error.hpp"
#include "doctest.h"

using namespace iatrack;
using config::RunConfig;
namespace fs = std::filesystem;

TEST_CASE("defaults carry the documented values") {
    const RunConfig cfg;
    CHECK(cfg.pipe.t_v == 4);
    CHECK(cfg.pipe.kcf.lambda == doctest::Approx(1e-4));
    CHECK(cfg.pipe.kcf.sigma == doctest::Approx(0.5));
    CHECK(cfg.pipe.kcf.label_sigma_factor == doctest::Approx(0.1));
    CHECK(cfg.pipe.feature.padding == doctest::Approx(2.5));
    CHECK(cfg.pipe.big_c == doctest::Approx(1e6));
    CHECK(cfg.pipe.score_floor == doctest::Approx(0.0));
    CHECK(cfg.pipe.refresh_batch_size == 32);
    CHECK(cfg.pipe.refresh_iters_per_mistake == 5);
    CHECK(cfg.pipe.refresh_learning_rate == doctest::Approx(0.001));
    CHECK(cfg.pipe.refresh_max_epochs == 50);
    CHECK(cfg.pipe.retrack_iou_gate == doctest::Approx(0.3));
}

TEST_CASE("config round trips exactly through save and load") {
    RunConfig cfg;
    cfg.seed = 987654321;
    cfg.mode = pipeline::AblationMode::no_target_awareness;
    cfg.pipe.kcf.sigma = 0.123456789012345;
    cfg.pipe.feature.padding = 2.7500000000000004;
    cfg.pipe.t_v = 9;
    cfg.paths.sequence = "/tmp/some sequence dir";
    cfg.paths.output = "/tmp/out.txt";
    cfg.allow_untrained = true;
    cfg.synth.layout = "crossing";
    cfg.synth.fn_rate = 0.19999999999999998;

    const std::string path = (fs::temp_directory_path() / "iatrack_cfg_roundtrip.cfg").string();
    config::save_config(cfg, path);
    const RunConfig back = config::load_config(path);
    for (const std::string& key : config::list_keys()) {
        CHECK(config::get_key(cfg, key) == config::get_key(back, key));
    }
    fs::remove(path);
}

TEST_CASE("unknown keys and malformed lines are rejected with line numbers") {
    const std::string path = (fs::temp_directory_path() / "iatrack_cfg_bad.cfg").string();
    {
        std::ofstream out(path);
        out << "# comment\n\nseed = 5\nnot_a_key = 1\n";
    }
    CHECK_THROWS_WITH_AS(config::load_config(path), doctest::Contains(":4:"), ParseError);
    {
        std::ofstream out(path);
        out << "seed 5\n";
    }
    CHECK_THROWS_AS(config::load_config(path), ParseError);
    {
        std::ofstream out(path);
        out << "pipeline.t_v = soon\n";
    }
    CHECK_THROWS_AS(config::load_config(path), ParseError);
    fs::remove(path);
    CHECK_THROWS_AS(config::load_config(path), IoError);
}

TEST_CASE("key access reads and writes fields") {
    RunConfig cfg;
    config::set_key(cfg, "pipeline.t_v", "7");
    CHECK(cfg.pipe.t_v == 7);
    config::set_key(cfg, "mode", "no_refresh");
    CHECK(cfg.mode == pipeline::AblationMode::no_refresh);
    CHECK(config::get_key(cfg, "mode") == "no_refresh");
    CHECK_THROWS_AS(config::set_key(cfg, "mode", "everything_off"), ParseError);
    CHECK_THROWS_AS(config::get_key(cfg, "nope"), ParseError);
}

TEST_CASE("derived paths default into the sequence directory") {
    RunConfig cfg;
    cfg.paths.sequence = "/data/seq7";
    CHECK(cfg.detections_path() == "/data/seq7/det/det.txt");
    CHECK(cfg.ground_truth_path() == "/data/seq7/gt/gt.txt");
    cfg.paths.detections = "/elsewhere/det.txt";
    CHECK(cfg.detections_path() == "/elsewhere/det.txt");
}

TEST_CASE("synthetic section converts to a generator config") {
    RunConfig cfg;
    cfg.seed = 77;
    cfg.synth.layout = "crossing";
    cfg.synth.n_targets = 6;
    cfg.synth.fn_rate = 0.25;
    const io::SyntheticConfig s = cfg.synthetic_config();
    CHECK(s.rng_seed == 77);
    CHECK(s.n_targets == 6);
    CHECK(s.layout == io::SyntheticLayout::crossing);
    CHECK(s.fn_rate == doctest::Approx(0.25));
}
