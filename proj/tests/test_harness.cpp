// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "splitpriv/harness.hpp"

using namespace splitpriv;
namespace fs = std::filesystem;

namespace {

std::string micro_config_json(const std::string& out_dir, const std::string& method = "private") {
  return R"({
    "dataset": {"type": "synthetic", "image_size": 8, "sizes": [96, 96, 48]},
    "arch": {"family": "tiny-cnn", "split_point": 2, "input_shape": [3, 8, 8], "base_width": 8},
    "privacy": {"epsilon": 1.0, "threshold": 20.0},
    "method": ")" +
         method + R"(",
    "train": {"n_p": 1, "n_t": 2, "lambda": 6.0, "m_a": 2, "batch_size": 32},
    "attack": {"enabled": true, "batch_size": 32, "whitebox_steps": 60, "whitebox_images": 2},
    "output_dir": ")" +
         out_dir + R"(",
    "seed": 3
  })";
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("splitpriv_harness_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("run config defaults carry the published constants") {
  RunConfig cfg;
  CHECK(cfg.privacy.threshold == 20.0);
  CHECK(cfg.privacy.epsilon == 1.0);
  CHECK(cfg.train.n_p == 5);
  CHECK(cfg.train.n_t == 50);
  CHECK(cfg.train.lambda == 6.0);
  CHECK(cfg.train.m_a == 10);
  CHECK(cfg.sweep_epsilons == std::vector<double>{0.5, 1.0, 2.0});
}

TEST_CASE("config parsing is strict about unknown keys and bad values") {
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"unknown_section": {}})"), SchemaError);
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"train": {"n_p": 5, "mystery": 1}})"), SchemaError);
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"dataset": {"type": "webcam"}})"), SchemaError);
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"dataset": {"sizes": [1, 2]}})"), SchemaError);
  CHECK_THROWS_AS(RunConfig::from_json_text("not json"), SchemaError);
  CHECK_THROWS_AS(RunConfig::from_json_text(R"({"method": "mystery"})"), SchemaError);

  auto cfg = RunConfig::from_json_text(R"({"train": {"n_p": 2}, "seed": 9})");
  CHECK(cfg.train.n_p == 2);
  CHECK(cfg.seed == 9);
  CHECK(cfg.train.seed == 9);  // run seed propagates

  // config snapshot round-trips through the same strict parser
  auto again = RunConfig::from_json_text(cfg.to_json_text());
  CHECK(again.train.n_p == 2);
  CHECK(again.seed == 9);
}

TEST_CASE("cmd_train writes the full run directory and is deterministic") {
  const auto dir1 = fresh_dir("train1");
  auto cfg = RunConfig::from_json_text(micro_config_json(dir1.string()));
  const auto art = cmd_train(cfg);

  for (const char* f : {"config.json", "epochs.csv", "epochs.json", "metrics.json", "checkpoint_final.ckpt",
                        "recon_grid.png", "attack_cls_acc.png", "attack_rec_mse.png"})
    CHECK_MESSAGE(fs::exists(fs::path(art.run_dir) / f), f);

  // attack columns are filled for every cloud epoch
  int cloud_epochs = 0;
  for (const auto& l : art.train.logs)
    if (l.phase == "cloud") {
      ++cloud_epochs;
      CHECK_FALSE(std::isnan(l.attack_cls_acc));
      CHECK_FALSE(std::isnan(l.attack_rec_mse));
    }
  CHECK(cloud_epochs == cfg.train.n_t);

  // identical config + seed => identical metrics and epoch logs
  const auto dir2 = fresh_dir("train2");
  auto cfg2 = RunConfig::from_json_text(micro_config_json(dir2.string()));
  const auto art2 = cmd_train(cfg2);
  CHECK(read_file(fs::path(art.run_dir) / "metrics.json") == read_file(fs::path(art2.run_dir) / "metrics.json"));
  CHECK(read_file(fs::path(art.run_dir) / "epochs.csv") == read_file(fs::path(art2.run_dir) / "epochs.csv"));
}

TEST_CASE("cmd_evaluate matches the training-time evaluation and rejects mismatched specs") {
  const auto dir = fresh_dir("eval");
  auto cfg = RunConfig::from_json_text(micro_config_json(dir.string()));
  const auto art = cmd_train(cfg);

  auto cfg_eval = cfg;
  cfg_eval.output_dir = (fs::path(dir) / "eval_out").string();
  const auto rep = cmd_evaluate(cfg_eval, art.run_dir + "/checkpoint_final.ckpt");
  CHECK(rep.analyzer_acc == doctest::Approx(art.eval.analyzer_acc));
  CHECK(rep.attacker_acc == doctest::Approx(art.eval.attacker_acc));
  CHECK(rep.deep_recon.ssim == doctest::Approx(art.eval.deep_recon.ssim).epsilon(1e-9));

  auto wrong = cfg_eval;
  wrong.arch.base_width = 16;
  CHECK_THROWS_AS(cmd_evaluate(wrong, art.run_dir + "/checkpoint_final.ckpt"), ConfigError);
}

TEST_CASE("cmd_whitebox produces a similarity report and a grid") {
  const auto dir = fresh_dir("wb");
  auto cfg = RunConfig::from_json_text(micro_config_json(dir.string()));
  const auto art = cmd_train(cfg);

  auto cfg_wb = cfg;
  cfg_wb.output_dir = (fs::path(dir) / "wb_out").string();
  const auto rep = cmd_whitebox(cfg_wb, art.run_dir + "/checkpoint_final.ckpt");
  CHECK(rep.n_images == 2);
  CHECK(rep.similarity.ssim >= -1.0);
  CHECK(rep.similarity.ssim <= 1.0);
  CHECK(fs::exists(fs::path(cfg_wb.output_dir) / "whitebox.json"));
  CHECK(fs::exists(fs::path(cfg_wb.output_dir) / "whitebox_grid.png"));
}

TEST_CASE("cmd_dp_verify passes on the default privacy config") {
  const auto dir = fresh_dir("dp");
  auto cfg = RunConfig::from_json_text(micro_config_json(dir.string()));
  cfg.output_dir = (dir / "dp_out").string();
  const auto rep = cmd_dp_verify(cfg);
  CHECK(rep.pass);
  CHECK(fs::exists(fs::path(cfg.output_dir) / "dp_report.json"));
}

TEST_CASE("a single-element sweep reproduces the direct train+evaluate outcome") {
  const auto dir = fresh_dir("sweep");
  auto cfg = RunConfig::from_json_text(micro_config_json(dir.string()));
  cfg.output_dir = (dir / "sweep_out").string();
  const auto sweep = cmd_sweep_epsilon(cfg, {1.0});

  REQUIRE(sweep.rows.size() == 2);  // baseline + eps=1
  CHECK(sweep.rows[0].label == "baseline");
  CHECK(sweep.rows[1].label == "eps_1");

  // the private sub-run equals a direct cmd_train with the same seed
  const auto direct_dir = fresh_dir("sweep_direct");
  auto direct_cfg = RunConfig::from_json_text(micro_config_json(direct_dir.string()));
  direct_cfg.privacy.epsilon = 1.0;
  const auto direct = cmd_train(direct_cfg);
  CHECK(sweep.rows[1].analyzer_acc == doctest::Approx(direct.eval.analyzer_acc));
  CHECK(sweep.rows[1].attacker_acc == doctest::Approx(direct.eval.attacker_acc));

  for (const char* f : {"sweep.json", "sweep.csv", "tradeoff.png", "recon_grid.png"})
    CHECK_MESSAGE(fs::exists(fs::path(sweep.sweep_dir) / f), f);
}
