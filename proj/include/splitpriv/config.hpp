// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors
//
// Run configuration: one JSON file with sections, validated strictly against
// the schema in docs/config-schema.json (unknown keys are rejected).

#pragma once

#include <string>
#include <vector>

#include "splitpriv/attacks.hpp"
#include "splitpriv/datasets.hpp"
#include "splitpriv/models.hpp"
#include "splitpriv/training.hpp"

namespace splitpriv {

struct RunConfig {
  // dataset
  std::string dataset_type = "synthetic";  // synthetic | external
  SyntheticAttributeSpec synthetic;
  std::string external_path;
  std::string desired_attr = "Smiling";
  std::string sensitive_attr = "Male";
  int external_image_size = 0;
  SplitSizes sizes{2000, 2000, 1000};

  ArchitectureSpec arch;
  PrivacyConfig privacy{1.0, 20.0};      // paper defaults: eps=1, T=20
  std::string method = "private";       // private | baseline

  TrainConfig train;                     // n_p=5, n_t=50, lambda=6, m_a=10 defaults
  int checkpoint_every = 0;              // epochs; 0 = final only

  bool attacks_enabled = true;
  AttackConfig attack;
  WhiteBoxConfig whitebox;
  int whitebox_images = 16;
  bool eval_noise_on = true;             // keep the release noise at inference

  TransportConfig transport;
  std::vector<double> sweep_epsilons{0.5, 1.0, 2.0};

  std::string output_dir;
  uint64_t seed = 1;

  void validate() const;

  static RunConfig from_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text);
  std::string to_json_text() const;
};

}  // namespace splitpriv
