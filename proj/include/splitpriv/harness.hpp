// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors
//
// Orchestration of the execution steps: edge pre-training, joint edge-cloud
// training with the simultaneous attack suite, held-out evaluation, the
// white-box attack, the DP verifier, and the epsilon sweep. Each command
// writes its artifacts (config snapshot, per-epoch CSV/JSON, metrics JSON,
// checkpoints, image grids, plots) under the run directory.

#pragma once

#include <optional>
#include <string>

#include "splitpriv/checkpoint.hpp"
#include "splitpriv/config.hpp"
#include "splitpriv/metrics.hpp"

namespace splitpriv {

DatasetBundle make_bundle(const RunConfig& cfg);
SplitModelF make_model(const RunConfig& cfg);

struct EvalReport {
  double analyzer_acc = 0;
  double attacker_acc = 0;
  double trivial_desired = 0;
  double trivial_sensitive = 0;
  SimilarityReport deep_recon;

  // first up-to-8 test originals/reconstructions, for grid images
  TensorF sample_originals;
  TensorF sample_recons;

  std::string to_json_text() const;
};

/// Step-3 evaluation on the unseen test split: the analyzer and both trained
/// attackers consume the same released feature maps.
EvalReport evaluate_split_model(const RunConfig& cfg, const DatasetBundle& bundle, SplitModelF& model,
                                AttackerModelsF& attackers);

/// Resolves cfg.output_dir (falling back to $SPLITPRIV_OUTPUT_ROOT or ./runs)
/// and creates it.
std::string prepare_run_dir(const RunConfig& cfg, const std::string& subdir = "");

struct RunArtifacts {
  std::string run_dir;
  TrainResult train;
  EvalReport eval;
};

/// Fig.-1 step 1 only: adversarial edge pre-training; writes the edge
/// checkpoint.
std::string cmd_pretrain(const RunConfig& cfg);

/// Steps 2-1/2-2/2-3: full training with per-epoch simultaneous attacks,
/// then step-3 evaluation. Writes logs, checkpoints, metrics, plots.
RunArtifacts cmd_train(const RunConfig& cfg);

/// Step 3 on an existing checkpoint. Refuses checkpoints whose embedded
/// architecture spec disagrees with the config.
EvalReport cmd_evaluate(const RunConfig& cfg, const std::string& checkpoint_path);

struct WhiteBoxReport {
  SimilarityReport similarity;
  double final_objective = 0;
  double nonincreasing_fraction = 1.0;
  int64_t n_images = 0;

  std::string to_json_text() const;
};

WhiteBoxReport cmd_whitebox(const RunConfig& cfg, const std::string& checkpoint_path);

DpTestReport cmd_dp_verify(const RunConfig& cfg);

struct SweepRow {
  std::string label;  // "baseline" or "eps=<v>"
  double epsilon = 0;  // 0 for baseline
  double analyzer_acc = 0;
  double attacker_acc = 0;
  double recon_ssim = 0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::string sweep_dir;
};

/// One full run per epsilon plus one baseline; emits the aggregated table,
/// the analyzer-vs-attacker trade-off plot, and the combined reconstruction
/// grid. A sub-run failure aborts the sweep after writing partial results.
SweepReport cmd_sweep_epsilon(const RunConfig& cfg, const std::vector<double>& eps_list);

}  // namespace splitpriv
