// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors

#include <doctest.h>

#include <filesystem>
#include <set>

#include "splitpriv/checkpoint.hpp"
#include "splitpriv/models.hpp"

using namespace splitpriv;

namespace {

ArchitectureSpec tiny_spec() {
  ArchitectureSpec s;
  s.family = Family::TinyCnn;
  s.split_point = 2;
  s.input_shape = {3, 16, 16};
  s.base_width = 16;
  return s;
}

PrivacyConfig default_privacy() { return PrivacyConfig{1.0, 20.0}; }

}  // namespace

TEST_CASE("tiny-cnn parameter counts match hand-computed closed forms exactly") {
  auto model = build_split_model<float>(tiny_spec(), default_privacy(), 1);

  // edge trunk: conv1 3->16, conv2 16->32, both 3x3
  const int64_t conv1 = 3 * 9 * 16 + 16;
  const int64_t conv2 = 16 * 9 * 32 + 32;
  // exits at 32x4x4: conv 32->8 3x3 + linear 128->2
  const int64_t exit_head = (32 * 9 * 8 + 8) + (8 * 4 * 4 * 2 + 2);
  // cloud: conv3 32->64, conv4 64->64, fc1 256->128, fc2 128->2
  const int64_t cloud = (32 * 9 * 64 + 64) + (64 * 9 * 64 + 64) + (64 * 2 * 2 * 128 + 128) + (128 * 2 + 2);

  CHECK(count_parameters(model, Party::Edge) == conv1 + conv2 + 2 * exit_head);
  CHECK(count_parameters(model, Party::Cloud) == cloud);

  // whole-network consistency: E1 + cloud equals the unsplit stack
  const int64_t e1 = param_count(model.edge.params());
  CHECK(e1 == conv1 + conv2);
  CHECK(e1 + cloud == conv1 + conv2 + cloud);
}

TEST_CASE("identical spec and seed give identical initial parameters") {
  auto a = build_split_model<float>(tiny_spec(), default_privacy(), 42);
  auto b = build_split_model<float>(tiny_spec(), default_privacy(), 42);
  auto c = build_split_model<float>(tiny_spec(), default_privacy(), 43);
  CHECK(param_checksum(a.edge.params()) == param_checksum(b.edge.params()));
  CHECK(param_checksum(a.cloud_analyzer.params()) == param_checksum(b.cloud_analyzer.params()));
  CHECK(param_checksum(a.edge.params()) != param_checksum(c.edge.params()));

  // privacy on/off does not shift the init stream (clip/noise are paramless)
  auto base = build_split_model<float>(tiny_spec(), default_privacy(), 42, /*privacy_enabled=*/false);
  CHECK(param_checksum(base.edge.params()) == param_checksum(a.edge.params()));
}

TEST_CASE("split_point=0 makes the edge clip+noise only") {
  auto spec = tiny_spec();
  spec.split_point = 0;
  auto model = build_split_model<float>(spec, default_privacy(), 3);
  CHECK(param_count(model.edge.params()) == 0);

  // inputs in [0,1] are inside the T=20 ball, so the noiseless release is the input
  TensorF x({2, 3, 16, 16});
  Rng rng(5);
  for (auto& v : x.data) v = static_cast<float>(rng.uniform());
  Rng noise(6);
  auto out = forward_edge(model, x, /*noise_on=*/false, noise);
  CHECK(out.data == x.data);
}

TEST_CASE("released maps respect the clip bound for random inputs and thresholds") {
  for (double t : {0.5, 2.0, 20.0}) {
    PrivacyConfig privacy{1.0, t};
    auto model = build_split_model<float>(tiny_spec(), privacy, 9);
    Rng rng(10), noise(11);
    for (int it = 0; it < 50; ++it) {
      TensorF x({4, 3, 16, 16});
      for (auto& v : x.data) v = static_cast<float>(rng.uniform(-3.0, 3.0));
      auto out = forward_edge(model, x, /*noise_on=*/false, noise);
      float mx = 0;
      for (float v : out.data) mx = std::max(mx, std::abs(v));
      CHECK(mx <= static_cast<float>(t) * (1.f + 1e-6f));
    }
  }
}

TEST_CASE("noisy release is centered on the noiseless release") {
  auto spec = tiny_spec();
  spec.split_point = 0;  // edge = clip + noise, keeps the draw loop cheap
  spec.input_shape = {3, 8, 8};
  PrivacyConfig privacy{2.0, 1.0};  // b = 1
  auto model = build_split_model<float>(spec, privacy, 3);

  TensorF x({1, 3, 8, 8});
  Rng rng(5);
  for (auto& v : x.data) v = static_cast<float>(rng.uniform());
  Rng noise(6);
  const auto x0 = forward_edge(model, x, false, noise);

  const int draws = 100000;
  std::vector<double> acc(static_cast<size_t>(x0.size()), 0.0);
  for (int i = 0; i < draws; ++i) {
    const auto noisy = forward_edge(model, x, true, noise);
    for (int64_t k = 0; k < x0.size(); ++k) acc[static_cast<size_t>(k)] += noisy[k];
  }
  const double sigma_mean = std::sqrt(2.0 * 1.0 * 1.0 / draws);  // Var Lap(0,1) = 2
  int outside = 0;
  for (int64_t k = 0; k < x0.size(); ++k) {
    const double mean = acc[static_cast<size_t>(k)] / draws;
    if (std::abs(mean - x0[k]) > 3 * sigma_mean) ++outside;
  }
  CHECK(outside <= 4);  // 3-sigma band, 192 elements, a few excursions allowed
}

TEST_CASE("vgg11-like replication lands near the reference parameter counts") {
  ArchitectureSpec spec;
  spec.family = Family::Vgg11Like;
  spec.split_point = 3;
  spec.input_shape = {3, 64, 64};
  auto model = build_split_model<float>(spec, default_privacy(), 1);

  const auto edge = static_cast<double>(count_parameters(model, Party::Edge));
  const auto cloud = static_cast<double>(count_parameters(model, Party::Cloud));
  CHECK(std::abs(edge - 0.46e6) / 0.46e6 < 0.10);
  CHECK(std::abs(cloud - 10.17e6) / 10.17e6 < 0.10);
  CHECK(edge < 0.10 * cloud);  // reference table ordering

  const auto maccs = static_cast<double>(estimate_maccs(model, Party::Edge));
  CHECK(std::abs(maccs - 533.39e6) / 533.39e6 < 0.15);
}

TEST_CASE("resnet18-like split keeps the edge under a tenth of the cloud") {
  ArchitectureSpec spec;
  spec.family = Family::Resnet18Like;
  spec.split_point = 3;
  spec.input_shape = {3, 64, 64};
  auto model = build_split_model<float>(spec, default_privacy(), 1);
  const auto edge = static_cast<double>(count_parameters(model, Party::Edge));
  const auto cloud = static_cast<double>(count_parameters(model, Party::Cloud));
  CHECK(edge < 0.10 * cloud);
  CHECK(std::abs(edge - 0.43e6) / 0.43e6 < 0.10);
  CHECK(std::abs(cloud - 10.79e6) / 10.79e6 < 0.10);

  // the stack is trainable end to end
  TensorF x({2, 3, 64, 64});
  Rng rng(4), noise(5);
  for (auto& v : x.data) v = static_cast<float>(rng.uniform());
  auto feat = forward_edge(model, x, true, noise);
  auto logits = model.cloud_analyzer.forward(feat);
  CHECK(logits.shape == Shape{2, 2});
}

TEST_CASE("macc closed forms: linear and one hand-counted conv layer") {
  Linear<float> lin("l", 256, 128);
  CHECK(lin.forward_maccs({1, 256}) == 256u * 128u);

  // conv maccs = out_ch * out_h * out_w * in_ch * k^2
  Conv2d<float> conv("c", 16, 32, 3, 2, 1);
  const Shape in{1, 16, 16, 16};
  const auto out = conv.output_shape(in);
  CHECK(out == Shape{1, 32, 8, 8});
  CHECK(conv.forward_maccs(in) == 32u * 8u * 8u * 16u * 9u);

  // training convention: one step costs 3x forward
  auto model = build_split_model<float>(tiny_spec(), default_privacy(), 1);
  const Shape in_full{1, 3, 16, 16};
  const uint64_t fwd = model.edge.forward_maccs(in_full) +
                       model.exit_analyzer.forward_maccs(model.edge.output_shape(in_full)) +
                       model.exit_adversary.forward_maccs(model.edge.output_shape(in_full));
  CHECK(estimate_maccs(model, Party::Edge) == 3 * fwd);
}

TEST_CASE("attacker classifier mirrors the cloud analyzer") {
  auto spec = tiny_spec();  // K_z == K_y
  auto model = build_split_model<float>(spec, default_privacy(), 1);
  auto attackers = build_attackers(spec, model, 1);
  CHECK(count_parameters(attackers, AttackerKind::Classifier) == count_parameters(model, Party::Cloud));
}

TEST_CASE("reconstructor inverts the edge stack shape") {
  auto spec = tiny_spec();
  auto model = build_split_model<float>(spec, default_privacy(), 1);
  auto attackers = build_attackers(spec, model, 1);

  // two stride-2 edge convs -> two upsampling stages
  int upsampling = 0;
  for (size_t i = 0; i < attackers.reconstructor.size(); ++i)
    if (attackers.reconstructor[i]->name().find("atk_r.up") == 0) ++upsampling;
  CHECK(upsampling == 2);

  TensorF x({3, 3, 16, 16});
  Rng rng(2), noise(3);
  for (auto& v : x.data) v = static_cast<float>(rng.uniform());
  auto feat = forward_edge(model, x, false, noise);
  auto rec = attackers.reconstructor.forward(feat);
  CHECK(rec.shape == x.shape);

  // vgg and resnet mirrors restore the input shape as well
  for (Family fam : {Family::Vgg11Like, Family::Resnet18Like}) {
    ArchitectureSpec s2;
    s2.family = fam;
    s2.split_point = 3;
    s2.input_shape = {3, 64, 64};
    auto m2 = build_split_model<float>(s2, default_privacy(), 1);
    auto a2 = build_attackers(s2, m2, 1);
    CHECK(a2.reconstructor.output_shape(m2.feature_shape()) == Shape{1, 3, 64, 64});
  }
}

TEST_CASE("parameter sets of the parties are disjoint") {
  auto model = build_split_model<float>(tiny_spec(), default_privacy(), 1);
  std::set<const Param<float>*> seen;
  for (auto* p : model.edge.params()) CHECK(seen.insert(p).second);
  for (auto* p : model.exit_analyzer.params()) CHECK(seen.insert(p).second);
  for (auto* p : model.exit_adversary.params()) CHECK(seen.insert(p).second);
  for (auto* p : model.cloud_analyzer.params()) CHECK(seen.insert(p).second);
}

TEST_CASE("invalid architecture specs are configuration errors") {
  auto bad = tiny_spec();
  bad.split_point = 9;
  CHECK_THROWS_AS(build_split_model<float>(bad, default_privacy(), 1), ConfigError);
  auto bad2 = tiny_spec();
  bad2.input_shape = {3, 10, 10};
  CHECK_THROWS_AS(build_split_model<float>(bad2, default_privacy(), 1), ConfigError);
  CHECK_THROWS_AS(build_split_model<float>(tiny_spec(), PrivacyConfig{-1.0, 20.0}, 1), std::invalid_argument);
}

TEST_CASE("checkpoints round-trip parameters and reject spec mismatches") {
  namespace fs = std::filesystem;
  auto model = build_split_model<float>(tiny_spec(), default_privacy(), 77);
  auto attackers = build_attackers(tiny_spec(), model, 77);
  const auto path = (fs::temp_directory_path() / "splitpriv_test_ckpt.bin").string();
  save_checkpoint(path, model, &attackers);

  auto ck = load_checkpoint(path);
  CHECK(ck.spec == model.spec);
  CHECK(ck.attackers.has_value());
  CHECK(param_checksum(ck.model.edge.params()) == param_checksum(model.edge.params()));
  CHECK(param_checksum(ck.model.cloud_analyzer.params()) == param_checksum(model.cloud_analyzer.params()));
  CHECK(param_checksum(ck.attackers->classifier.params()) == param_checksum(attackers.classifier.params()));

  CHECK_THROWS_AS(load_checkpoint("/nonexistent/file.ckpt"), ConfigError);
}
