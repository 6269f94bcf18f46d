// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors
//
// Edge pre-training (adversarial early exits over the clipped+noised release)
// and the edge-cloud phase where the cloud analyzer replaces the edge analyzer
// exit. Per mini-batch the ordering contract is: one analyzer step updating
// E and G (or E and the remote analyzer), then m_a adversary steps updating
// only D on fresh noise draws, then the epoch's feature release for attacks.

#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "splitpriv/channel.hpp"
#include "splitpriv/datasets.hpp"
#include "splitpriv/models.hpp"
#include "splitpriv/optim.hpp"

namespace splitpriv {

struct TrainConfig {
  int n_p = 5;   // pre-training epochs
  int n_t = 50;  // edge-cloud epochs
  double lambda = 6.0;
  int m_a = 10;  // adversary steps per analyzer step
  int batch_size = 64;
  std::string optimizer = "adam";
  double lr_edge = 1e-3;
  double lr_cloud = 1e-3;
  double lr_adversary = 2e-3;
  uint64_t seed = 1;
  bool noise_on = true;        // Laplace release noise during training forwards
  bool verify_freeze = false;  // checksum instrumentation of the update-freeze contract
  double divergence_abs = 1e4;
  int divergence_patience = 3;

  void validate() const {
    if (n_p < 0 || n_t < 0) throw ConfigError("train: epoch counts must be >= 0");
    if (lambda < 0) throw ConfigError("train: lambda must be >= 0");
    if (m_a < 1) throw ConfigError("train: m_a must be >= 1");
    if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (optimizer != "adam") throw ConfigError("train: unknown optimizer " + optimizer);
  }
};

struct EpochLog {
  int epoch = 0;              // contiguous across pre-training and edge-cloud
  std::string phase;          // "pretrain" | "cloud"
  double analyzer_acc = 0;    // G during pre-training, cloud analyzer afterwards
  double exit_adv_acc = 0;
  double loss_g = 0;
  double loss_d = 0;
  double attack_cls_acc = std::nan("");  // filled by the attack suite
  double attack_rec_mse = std::nan("");
};

void write_epoch_csv(const std::string& path, const std::vector<EpochLog>& logs);
std::string epoch_logs_json(const std::vector<EpochLog>& logs);

/// The per-epoch feature release the attack suite consumes: every x_E batch
/// the edge produced this epoch (the exact bytes that crossed the channel),
/// the user-sample indices they correspond to, and a snapshot of the
/// extractor parameters at release time.
struct ReleasedEpoch {
  int epoch = 0;
  TensorF features;                    // [N_user, ...feature dims]
  std::vector<int64_t> sample_indices;
  std::vector<TensorF> extractor_params;  // E1 parameter values
};

/// Called once per edge-cloud epoch, after the adversary steps. May fill the
/// attack fields of the log entry.
using EpochObserver = std::function<void(const ReleasedEpoch&, EpochLog&)>;

struct TrainResult {
  std::vector<EpochLog> logs;
  std::vector<double> step_losses;  // analyzer-path loss per optimizer step
  int64_t freeze_violations = 0;
  int transport_retries = 0;
};

/// Single-sample Algorithm-1 losses on probability vectors. Both validate
/// that probabilities sum to 1 (1e-6) and labels are one-hot; logs are
/// clamped at 1e-12.
double analyzer_loss(const std::vector<double>& y_onehot, const std::vector<double>& y_prob,
                     const std::vector<double>& z_onehot, const std::vector<double>& z_prob, double lambda);
double adversary_loss(const std::vector<double>& z_onehot, const std::vector<double>& z_prob);

/// Edge pre-training: per mini-batch one L_G step updating E and G (D held
/// fixed), then m_a adversary steps updating only D on freshly noised
/// releases. n_p == 0 leaves the model untouched and returns an empty log.
TrainResult pretrain_edge(SplitModelF& model, const DatasetBundle& bundle, const TrainConfig& cfg);

/// Serves the cloud party on a connected transport until an end-of-run
/// control frame arrives: consumes feature+label frames, steps the analyzer,
/// returns the gradient w.r.t. the received features plus a stats frame.
/// Snapshots analyzer+optimizer state at each epoch boundary so an epoch
/// replay after a transport failure is exact.
void run_cloud_party(Transport& channel, SplitModelF& model, const TrainConfig& cfg);

/// Edge side of the edge-cloud phase. Features, desired labels, and returned
/// gradients cross the channel; sensitive labels and raw images never do.
/// On transport failure the epoch is retried once from a snapshot, then the
/// error is surfaced.
TrainResult train_edge_cloud(SplitModelF& model, const DatasetBundle& bundle, const TrainConfig& cfg,
                             Transport& channel, const EpochObserver& observer = {},
                             const std::function<std::unique_ptr<Transport>()>& reconnect = {});

struct TransportConfig {
  std::string mode = "loopback";  // loopback | socket
  std::string host = "127.0.0.1";
  int port = 0;  // 0 = ephemeral
  double timeout_s = 30.0;

  void validate() const {
    if (mode != "loopback" && mode != "socket") throw ConfigError("transport: mode must be loopback or socket");
    if (timeout_s <= 0) throw ConfigError("transport: timeout must be positive");
  }
};

/// Orchestrates one full run: optional pre-training, then the edge-cloud
/// phase with the cloud party served on a background thread over the chosen
/// transport. Returns the combined logs.
TrainResult run_split_training(SplitModelF& model, const DatasetBundle& bundle, const TrainConfig& cfg,
                               const TransportConfig& transport, const EpochObserver& observer = {});

/// Baseline: identical split architecture, no clip, no noise, no adversary
/// exit, plain cross-entropy through the channel.
struct BaselineRun {
  SplitModelF model;
  TrainResult result;
};
BaselineRun train_baseline(const ArchitectureSpec& spec, const DatasetBundle& bundle, const TrainConfig& cfg,
                           const TransportConfig& transport, const EpochObserver& observer = {});

}  // namespace splitpriv
