// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors
//
// Split architectures: an edge feature extractor whose released output is
// clipped to an L-inf ball and Laplace-noised, tiny early-exit heads for the
// edge analyzer/adversary, the cloud analyzer, and the attacker pair (a
// sensitive-content classifier shadowing the cloud analyzer and a decoder
// mirroring the edge stack).

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>

#include "splitpriv/errors.hpp"
#include "splitpriv/layers.hpp"
#include "splitpriv/privacy.hpp"

namespace splitpriv {

enum class Family { TinyCnn, Vgg11Like, Resnet18Like };

Family family_from_string(const std::string& s);
std::string family_to_string(Family f);

struct ArchitectureSpec {
  Family family = Family::TinyCnn;
  int split_point = 2;                       // convs (tiny/vgg) or residual blocks (resnet) on the edge
  std::array<int64_t, 3> input_shape{3, 16, 16};  // C,H,W
  int K_y = 2;
  int K_z = 2;
  int base_width = 16;                       // tiny-cnn channel scale

  bool operator==(const ArchitectureSpec&) const = default;
  void validate() const;
};

enum class Party { Edge, Cloud };

template <typename S>
struct SplitModel {
  ArchitectureSpec spec;
  PrivacyConfig privacy;
  bool privacy_enabled = true;

  Sequential<S> edge;            // E1 layers, then clip + noise when enabled
  ClipInf<S>* clip = nullptr;    // borrowed from `edge`; null when privacy disabled
  AddLaplace<S>* noise = nullptr;
  Sequential<S> exit_analyzer;   // G
  Sequential<S> exit_adversary;  // D
  Sequential<S> cloud_analyzer;

  Shape feature_shape() const { return edge.output_shape({1, spec.input_shape[0], spec.input_shape[1], spec.input_shape[2]}); }
};

using SplitModelF = SplitModel<float>;

/// Builds the partitioned network with all parameters drawn from `seed`.
/// privacy_enabled=false builds the same stack without the clip/noise layers
/// (the non-private baseline); parameter initialization order is unchanged.
template <typename S>
SplitModel<S> build_split_model(const ArchitectureSpec& spec, const PrivacyConfig& privacy, uint64_t seed,
                                bool privacy_enabled = true);

extern template SplitModel<float> build_split_model<float>(const ArchitectureSpec&, const PrivacyConfig&, uint64_t, bool);
extern template SplitModel<double> build_split_model<double>(const ArchitectureSpec&, const PrivacyConfig&, uint64_t, bool);

/// x_E = noise(clip(E1(x))). noise_on=false releases the pre-noise clipped
/// map. Throws NumericError on non-finite activations.
template <typename S>
Tensor<S> forward_edge(SplitModel<S>& model, const Tensor<S>& batch, bool noise_on, Rng& rng);

extern template Tensor<float> forward_edge<float>(SplitModel<float>&, const Tensor<float>&, bool, Rng&);
extern template Tensor<double> forward_edge<double>(SplitModel<double>&, const Tensor<double>&, bool, Rng&);

template <typename S>
struct AttackerModels {
  Sequential<S> classifier;     // A: cloud-analyzer topology, K_z logits
  Sequential<S> reconstructor;  // R: transposed/upsampling mirror of E1
};

using AttackerModelsF = AttackerModels<float>;

template <typename S>
AttackerModels<S> build_attackers(const ArchitectureSpec& spec, const SplitModel<S>& model, uint64_t seed);

extern template AttackerModels<float> build_attackers<float>(const ArchitectureSpec&, const SplitModel<float>&, uint64_t);

/// Trainable parameters per party. Edge counts E1 + both exit heads (the clip
/// and noise blocks carry no parameters); Cloud counts the analyzer.
template <typename S>
int64_t count_parameters(const SplitModel<S>& model, Party party);

extern template int64_t count_parameters<float>(const SplitModel<float>&, Party);
extern template int64_t count_parameters<double>(const SplitModel<double>&, Party);

enum class AttackerKind { Classifier, Reconstructor };

template <typename S>
int64_t count_parameters(const AttackerModels<S>& attackers, AttackerKind kind);

extern template int64_t count_parameters<float>(const AttackerModels<float>&, AttackerKind);

/// Per-sample multiply-accumulate count for one training step. Convention:
/// the backward pass is charged at twice the forward pass, so a training step
/// costs 3x forward MACCs. Clip, noise, pooling and activations count zero.
template <typename S>
uint64_t estimate_maccs(const SplitModel<S>& model, Party party);

extern template uint64_t estimate_maccs<float>(const SplitModel<float>&, Party);

/// Copies of the current edge-party parameter values (E1 + heads), in layer
/// order; used to snapshot the released extractor for the attack suite.
template <typename S>
std::vector<Tensor<S>> edge_param_values(const SplitModel<S>& model);

extern template std::vector<Tensor<float>> edge_param_values<float>(const SplitModel<float>&);

template <typename S>
void load_param_values(const std::vector<Param<S>*>& params, const std::vector<Tensor<S>>& values);

extern template void load_param_values<float>(const std::vector<Param<float>*>&, const std::vector<Tensor<float>>&);

}  // namespace splitpriv
