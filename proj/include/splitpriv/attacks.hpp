// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors
//
// The malicious-cloud attack suite: a sensitive-content classifier and a deep
// reconstructor co-trained on the attacker's own labeled data passed through
// the released extractor, each evaluated once per epoch on the user's
// released feature maps. Plus the white-box inversion that assumes leaked
// extractor parameters and optimizes an input to match a released feature
// map under a total-variation prior.

#pragma once

#include <vector>

#include "splitpriv/datasets.hpp"
#include "splitpriv/models.hpp"
#include "splitpriv/optim.hpp"
#include "splitpriv/training.hpp"

namespace splitpriv {

struct AttackConfig {
  int batch_size = 64;
  double lr = 1e-3;  // same pace as the cloud analyzer
  uint64_t seed = 1;
};

struct EpochAttackMetrics {
  int epoch = 0;
  double cls_acc = 0;   // A's accuracy on the user's released features (oracle-scored)
  double rec_mse = 0;   // R's pixel MSE against the user's originals
};

/// Attacker-side state. The attackers never see raw user images or sensitive
/// labels; user data enters only the post-update evaluation below.
struct AttackState {
  AttackerModelsF models;
  Adam<float> opt_classifier;
  Adam<float> opt_reconstructor;
  SplitModelF edge_replica;  // rebuilt from the public spec; E1 weights loaded per release
  Rng noise_rng;             // attacker-side draws for its own E(x') queries
  Rng shuffle_rng;
  AttackConfig cfg;
  std::vector<EpochAttackMetrics> history;
};

AttackState build_attack_state(const ArchitectureSpec& spec, const PrivacyConfig& privacy, bool privacy_enabled,
                               const AttackConfig& cfg);

/// One simultaneous-attack epoch: trains A on (E(x'), z') and R on (E(x'), x')
/// for one pass over the attacker split, then scores both on the user's
/// released features. The ground-truth z of the user split is used only to
/// score the attack (the deployed attacker would not hold it), and the user
/// images only to compute the reconstruction error.
EpochAttackMetrics attack_epoch(AttackState& state, const ReleasedEpoch& release, const SampleSet& attacker_data,
                                const SampleSet& user_ref);

/// Anisotropic L1 total variation of a [C,H,W] image: absolute horizontal
/// plus vertical neighbor differences summed over channels.
double tv_loss(const TensorF& u);

struct WhiteBoxConfig {
  int steps = 2000;
  double alpha = 1e-4;     // TV weight relative to the per-element feature MSE
  double step_size = 0.05;
  std::string init = "uniform";  // uniform | zeros
  uint64_t seed = 1;

  void validate() const {
    if (steps < 1) throw ConfigError("whitebox: steps must be >= 1");
    if (alpha < 0) throw ConfigError("whitebox: alpha must be >= 0");
    if (step_size <= 0) throw ConfigError("whitebox: step size must be > 0");
    if (init != "uniform" && init != "zeros") throw ConfigError("whitebox: init must be uniform or zeros");
  }
};

struct WhiteBoxResult {
  TensorF images;                 // [N,C,H,W], clipped to [0,1]
  std::vector<double> objective;  // per-step mean objective (feature MSE + alpha*TV)
  int64_t increase_steps = 0;     // steps where the objective went up
};

/// Gradient-descent inversion of released feature maps given leaked extractor
/// parameters. The attacker replicates the deterministic layers (E1 + clip)
/// but not the victim's noise draw, so its own forward runs noise-free.
WhiteBoxResult whitebox_reconstruct(SplitModelF& model, const TensorF& x_e, const WhiteBoxConfig& cfg);

}  // namespace splitpriv
