// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors
//
// Attribute-labeled image data: a deterministic synthetic generator (shape
// class = desired attribute, dominant hue = sensitive attribute) and a loader
// for external image folders with a CSV attribute table. Bundles are
// immutable after construction and safe to share across threads.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "splitpriv/errors.hpp"
#include "splitpriv/rng.hpp"
#include "splitpriv/tensor.hpp"

namespace splitpriv {

enum class SplitRole { UserTrain, AttackerTrain, Test };

std::string split_role_name(SplitRole r);

struct SampleSet {
  TensorF images;  // [N,C,H,W] in [0,1], values on the 8-bit grid
  std::vector<int> y;
  std::vector<int> z;
  std::vector<std::string> ids;
  SplitRole role = SplitRole::UserTrain;

  int64_t size() const { return images.shape.empty() ? 0 : images.shape[0]; }

  /// Access guard: training code must fetch samples through here, which
  /// rejects the held-out test split.
  const SampleSet& for_training() const {
    if (role == SplitRole::Test)
      throw ConfigError("the test split is reserved for evaluation and cannot feed a training loop");
    return *this;
  }

  TensorF image(int64_t i) const;  // copy of sample i as [C,H,W]
};

struct DatasetDescriptor {
  std::string name;
  int64_t channels = 3, height = 16, width = 16;
  int K_y = 2, K_z = 2;
  std::array<int64_t, 3> split_sizes{0, 0, 0};
};

struct DatasetBundle {
  SampleSet user_train;
  SampleSet attacker_train;
  SampleSet test;
  int K_y = 2, K_z = 2;
  DatasetDescriptor descriptor;
};

struct SyntheticAttributeSpec {
  int image_size = 16;
  int K_y = 2;                             // shape classes: disk, ring, cross, checker
  int K_z = 2;                             // hue classes: warm, cool, green
  std::string desired_factor = "shape";
  std::string sensitive_factor = "hue";
  double correlation = 0.0;                // P(z tied to y); 0 = independent
  uint64_t seed = 0;
  std::vector<double> y_probs;             // optional class skew, empty = balanced
  double background = 0.12;
  double background_noise = 0.04;

  void validate() const;
};

using SplitSizes = std::array<int64_t, 3>;  // user, attacker, test

/// Pure function of (spec, sizes): the same arguments always produce a
/// byte-identical bundle. Pixel values are quantized to the 8-bit grid so a
/// PNG round trip is exact.
DatasetBundle generate_synthetic(const SyntheticAttributeSpec& spec, const SplitSizes& sizes);

struct LoadOptions {
  int image_size = 0;  // 0 keeps the native resolution of the first image
  uint64_t seed = 0;   // split shuffling
};

/// Loads `dir/attributes.csv` (header row; first column image filename;
/// attribute values in {-1,1} or {0,1}, mapped to {0,1}) plus the referenced
/// images. Splits are disjoint and shuffled with the run seed.
DatasetBundle load_external(const std::string& dir, const std::string& desired_attr, const std::string& sensitive_attr,
                            const SplitSizes& sizes, const LoadOptions& opts = {});

/// Writes PNGs plus attributes.csv in the schema load_external reads. Binary
/// attributes become one +/-aware {0,1} column; K>2 attributes become one-hot
/// {0,1} columns (attr_0, attr_1, ...).
void save_bundle(const DatasetBundle& bundle, const std::string& dir);

enum class Attribute { Desired, Sensitive };

/// Majority-class rate: the majority label is chosen on user_train (ties
/// toward the lower class index) and its frequency is measured on the test
/// split.
double trivial_classifier(const DatasetBundle& bundle, Attribute which);

}  // namespace splitpriv
