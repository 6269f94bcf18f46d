// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors
//
// Single-file model archive: "PHCK" magic, a JSON header embedding the
// architecture spec, privacy config, and per-party tensor index (canonical
// layer names + shapes), followed by the raw f32 blobs in index order.

#pragma once

#include <optional>
#include <string>

#include "splitpriv/attacks.hpp"
#include "splitpriv/models.hpp"

namespace splitpriv {

void save_checkpoint(const std::string& path, const SplitModelF& model, const AttackerModelsF* attackers = nullptr);

struct Checkpoint {
  ArchitectureSpec spec;
  PrivacyConfig privacy;
  bool privacy_enabled = true;
  SplitModelF model;
  std::optional<AttackerModelsF> attackers;
};

/// Rebuilds the model from the embedded spec and loads every blob by name.
/// Throws ConfigError on format or name/shape mismatches.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace splitpriv
