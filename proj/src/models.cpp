// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors

#include "splitpriv/models.hpp"

#include <cmath>

namespace splitpriv {

Family family_from_string(const std::string& s) {
  if (s == "tiny-cnn") return Family::TinyCnn;
  if (s == "vgg11-like") return Family::Vgg11Like;
  if (s == "resnet18-like") return Family::Resnet18Like;
  throw ConfigError("unknown architecture family: " + s);
}

std::string family_to_string(Family f) {
  switch (f) {
    case Family::TinyCnn: return "tiny-cnn";
    case Family::Vgg11Like: return "vgg11-like";
    case Family::Resnet18Like: return "resnet18-like";
  }
  return "?";
}

void ArchitectureSpec::validate() const {
  if (K_y < 2 || K_z < 2) throw ConfigError("architecture: class counts must be >= 2");
  if (input_shape[0] < 1) throw ConfigError("architecture: need at least one input channel");
  const int64_t h = input_shape[1], w = input_shape[2];
  switch (family) {
    case Family::TinyCnn:
      if (split_point < 0 || split_point > 4) throw ConfigError("tiny-cnn: split_point must be in [0,4]");
      if (base_width < 2) throw ConfigError("tiny-cnn: base_width must be >= 2");
      if (h % 4 != 0 || w % 4 != 0 || h < 8 || w < 8)
        throw ConfigError("tiny-cnn: input H,W must be multiples of 4 and >= 8");
      break;
    case Family::Vgg11Like:
      if (split_point < 1 || split_point > 8) throw ConfigError("vgg11-like: split_point must be in [1,8]");
      if (h % 32 != 0 || w % 32 != 0) throw ConfigError("vgg11-like: input H,W must be multiples of 32");
      break;
    case Family::Resnet18Like:
      if (split_point < 1 || split_point > 8) throw ConfigError("resnet18-like: split_point must be in [1,8]");
      if (h % 32 != 0 || w % 32 != 0) throw ConfigError("resnet18-like: input H,W must be multiples of 32");
      break;
  }
}

namespace {

template <typename S>
using LayerPtr = std::unique_ptr<Layer<S>>;

// One conv+ReLU pair appended to a stack.
template <typename S>
void push_conv_relu(Sequential<S>& seq, const std::string& name, int64_t in, int64_t out, int64_t k, int64_t stride,
                    int64_t pad) {
  seq.add(std::make_unique<Conv2d<S>>(name, in, out, k, stride, pad));
  seq.add(std::make_unique<ReLU<S>>(name + ".relu"));
}

struct ConvDesc {
  int64_t in, out, k, stride, pad;
  bool pool_after;  // vgg-style 2x2 maxpool following the conv
};

// VGG-11 conv trunk; pools follow convs 1, 2, 4, 6, 8.
std::vector<ConvDesc> vgg11_convs(int64_t in_ch) {
  return {
      {in_ch, 64, 3, 1, 1, true},  {64, 128, 3, 1, 1, true},  {128, 256, 3, 1, 1, false},
      {256, 256, 3, 1, 1, true},   {256, 512, 3, 1, 1, false}, {512, 512, 3, 1, 1, true},
      {512, 512, 3, 1, 1, false},  {512, 512, 3, 1, 1, true},
  };
}

struct BlockDesc {
  int64_t in, out, stride;
};

std::vector<BlockDesc> resnet18_blocks() {
  return {{64, 64, 1},   {64, 64, 1},   {64, 128, 2},  {128, 128, 1},
          {128, 256, 2}, {256, 256, 1}, {256, 512, 2}, {512, 512, 1}};
}

// tiny-cnn: 4 convs (w, 2w, 4w, 4w; the first three stride 2) + 2 linears.
struct TinyPlan {
  std::vector<ConvDesc> convs;
  int64_t fc_hidden;
};

TinyPlan tiny_plan(int64_t in_ch, int64_t w) {
  TinyPlan p;
  p.convs = {{in_ch, w, 3, 2, 1, false}, {w, 2 * w, 3, 2, 1, false}, {2 * w, 4 * w, 3, 2, 1, false},
             {4 * w, 4 * w, 3, 1, 1, false}};
  p.fc_hidden = 8 * w;
  return p;
}

// Early exit head: conv to 8 channels, ReLU, flatten, linear to K logits.
template <typename S>
Sequential<S> build_exit_head(const std::string& name, const Shape& feat_shape, int64_t k_out) {
  Sequential<S> head;
  const int64_t ch = feat_shape[1];
  head.add(std::make_unique<Conv2d<S>>(name + ".conv", ch, 8, 3, 1, 1));
  head.add(std::make_unique<ReLU<S>>(name + ".relu"));
  head.add(std::make_unique<Flatten<S>>(name + ".flatten"));
  const int64_t flat = 8 * feat_shape[2] * feat_shape[3];
  head.add(std::make_unique<Linear<S>>(name + ".fc", flat, k_out));
  return head;
}

// Layers of the base architecture past the split, ending in k_out logits.
// Shared by the cloud analyzer and the attacker classifier.
template <typename S>
Sequential<S> build_tail(const ArchitectureSpec& spec, const Shape& feat_shape, int64_t k_out,
                         const std::string& prefix) {
  Sequential<S> tail;
  Shape cur = feat_shape;
  switch (spec.family) {
    case Family::TinyCnn: {
      auto plan = tiny_plan(spec.input_shape[0], spec.base_width);
      for (size_t i = static_cast<size_t>(spec.split_point); i < plan.convs.size(); ++i) {
        const auto& c = plan.convs[i];
        push_conv_relu(tail, prefix + ".conv" + std::to_string(i + 1), c.in, c.out, c.k, c.stride, c.pad);
      }
      tail.add(std::make_unique<Flatten<S>>(prefix + ".flatten"));
      cur = tail.output_shape(cur);
      tail.add(std::make_unique<Linear<S>>(prefix + ".fc1", cur[1], plan.fc_hidden));
      tail.add(std::make_unique<ReLU<S>>(prefix + ".fc1.relu"));
      tail.add(std::make_unique<Linear<S>>(prefix + ".fc2", plan.fc_hidden, k_out));
      break;
    }
    case Family::Vgg11Like: {
      auto convs = vgg11_convs(spec.input_shape[0]);
      for (size_t i = static_cast<size_t>(spec.split_point); i < convs.size(); ++i) {
        const auto& c = convs[i];
        const std::string nm = prefix + ".conv" + std::to_string(i + 1);
        push_conv_relu(tail, nm, c.in, c.out, c.k, c.stride, c.pad);
        if (c.pool_after) tail.add(std::make_unique<MaxPool2d<S>>(nm + ".pool", 2, 2, 0));
      }
      tail.add(std::make_unique<Flatten<S>>(prefix + ".flatten"));
      cur = tail.output_shape(cur);
      tail.add(std::make_unique<Linear<S>>(prefix + ".fc1", cur[1], 640));
      tail.add(std::make_unique<ReLU<S>>(prefix + ".fc1.relu"));
      tail.add(std::make_unique<Linear<S>>(prefix + ".fc2", 640, k_out));
      break;
    }
    case Family::Resnet18Like: {
      auto blocks = resnet18_blocks();
      for (size_t i = static_cast<size_t>(spec.split_point); i < blocks.size(); ++i) {
        const auto& b = blocks[i];
        tail.add(std::make_unique<BasicBlock<S>>(prefix + ".block" + std::to_string(i + 1), b.in, b.out, b.stride));
      }
      tail.add(std::make_unique<GlobalAvgPool<S>>(prefix + ".gap"));
      tail.add(std::make_unique<Linear<S>>(prefix + ".fc", 512, k_out));
      break;
    }
  }
  return tail;
}

// E1: layers of the base architecture up to and including the split point.
template <typename S>
Sequential<S> build_trunk(const ArchitectureSpec& spec) {
  Sequential<S> trunk;
  switch (spec.family) {
    case Family::TinyCnn: {
      // The released map is the signed pre-activation of the last edge conv,
      // pushed into the clip's rescaling regime by a constant gain: the
      // antipodal full-range code survives the Laplace release noise far
      // better than a one-sided O(1) activation.
      auto plan = tiny_plan(spec.input_shape[0], spec.base_width);
      for (int i = 0; i < spec.split_point; ++i) {
        const auto& c = plan.convs[static_cast<size_t>(i)];
        const std::string nm = "edge.conv" + std::to_string(i + 1);
        trunk.add(std::make_unique<Conv2d<S>>(nm, c.in, c.out, c.k, c.stride, c.pad));
        if (i + 1 < spec.split_point) trunk.add(std::make_unique<ReLU<S>>(nm + ".relu"));
      }
      if (spec.split_point > 0) trunk.add(std::make_unique<FixedScale<S>>("edge.scale", S(16)));
      break;
    }
    case Family::Vgg11Like: {
      auto convs = vgg11_convs(spec.input_shape[0]);
      for (int i = 0; i < spec.split_point; ++i) {
        const auto& c = convs[static_cast<size_t>(i)];
        const std::string nm = "edge.conv" + std::to_string(i + 1);
        push_conv_relu(trunk, nm, c.in, c.out, c.k, c.stride, c.pad);
        if (c.pool_after) trunk.add(std::make_unique<MaxPool2d<S>>(nm + ".pool", 2, 2, 0));
      }
      break;
    }
    case Family::Resnet18Like: {
      push_conv_relu(trunk, "edge.stem", spec.input_shape[0], 64, 7, 2, 3);
      trunk.add(std::make_unique<MaxPool2d<S>>("edge.stem.pool", 3, 2, 1));
      auto blocks = resnet18_blocks();
      for (int i = 0; i < spec.split_point; ++i) {
        const auto& b = blocks[static_cast<size_t>(i)];
        trunk.add(std::make_unique<BasicBlock<S>>("edge.block" + std::to_string(i + 1), b.in, b.out, b.stride));
      }
      break;
    }
  }
  return trunk;
}

}  // namespace

template <typename S>
SplitModel<S> build_split_model(const ArchitectureSpec& spec, const PrivacyConfig& privacy, uint64_t seed,
                                bool privacy_enabled) {
  spec.validate();
  if (privacy_enabled) privacy.validate();

  SplitModel<S> m;
  m.spec = spec;
  m.privacy = privacy;
  m.privacy_enabled = privacy_enabled;

  m.edge = build_trunk<S>(spec);
  const Shape in{1, spec.input_shape[0], spec.input_shape[1], spec.input_shape[2]};
  const Shape feat = m.edge.output_shape(in);

  if (privacy_enabled) {
    auto clip = std::make_unique<ClipInf<S>>("edge.clip", static_cast<S>(privacy.threshold));
    m.clip = clip.get();
    m.edge.add(std::move(clip));
    auto noise = std::make_unique<AddLaplace<S>>("edge.noise", privacy.scale_b());
    m.noise = noise.get();
    m.edge.add(std::move(noise));
  }

  m.exit_analyzer = build_exit_head<S>("exit_g", feat, spec.K_y);
  m.exit_adversary = build_exit_head<S>("exit_d", feat, spec.K_z);
  m.cloud_analyzer = build_tail<S>(spec, feat, spec.K_y, "cloud");

  // One init stream; clip/noise own no parameters, so the draw sequence is
  // identical with privacy on or off.
  Rng init = Rng(seed).fork(0xA11C);
  m.edge.init(init);
  m.exit_analyzer.init(init);
  m.exit_adversary.init(init);
  m.cloud_analyzer.init(init);
  return m;
}

template SplitModel<float> build_split_model<float>(const ArchitectureSpec&, const PrivacyConfig&, uint64_t, bool);
template SplitModel<double> build_split_model<double>(const ArchitectureSpec&, const PrivacyConfig&, uint64_t, bool);

template <typename S>
Tensor<S> forward_edge(SplitModel<S>& model, const Tensor<S>& batch, bool noise_on, Rng& rng) {
  if (model.noise) {
    model.noise->set_rng(&rng);
    model.noise->set_mode(noise_on ? NoiseMode::Fresh : NoiseMode::Off);
  }
  Tensor<S> out = model.edge.forward(batch);
  for (const S v : out.data)
    if (!std::isfinite(static_cast<double>(v))) throw NumericError("forward_edge: non-finite activation");
  return out;
}

template Tensor<float> forward_edge<float>(SplitModel<float>&, const Tensor<float>&, bool, Rng&);
template Tensor<double> forward_edge<double>(SplitModel<double>&, const Tensor<double>&, bool, Rng&);

template <typename S>
AttackerModels<S> build_attackers(const ArchitectureSpec& spec, const SplitModel<S>& model, uint64_t seed) {
  AttackerModels<S> a;
  const Shape feat = model.feature_shape();
  a.classifier = build_tail<S>(spec, feat, spec.K_z, "atk_a");

  // R mirrors E1 layer by layer: stride-2 convs and pools become upsampling
  // transposed convs, the channel order reverses, sigmoid maps to [0,1].
  Sequential<S>& r = a.reconstructor;
  int idx = 0;
  auto nm = [&] { return "atk_r.up" + std::to_string(++idx); };
  switch (spec.family) {
    case Family::TinyCnn: {
      auto plan = tiny_plan(spec.input_shape[0], spec.base_width);
      if (spec.split_point == 0) {
        r.add(std::make_unique<Conv2d<S>>(nm(), spec.input_shape[0], spec.input_shape[0], 3, 1, 1));
      } else {
        for (int i = spec.split_point - 1; i >= 0; --i) {
          const auto& c = plan.convs[static_cast<size_t>(i)];
          r.add(std::make_unique<ConvTranspose2d<S>>(nm(), c.out, c.in, 3, c.stride, 1, c.stride == 2 ? 1 : 0));
          if (i > 0) r.add(std::make_unique<ReLU<S>>("atk_r.relu" + std::to_string(idx)));
        }
      }
      break;
    }
    case Family::Vgg11Like: {
      auto convs = vgg11_convs(spec.input_shape[0]);
      for (int i = spec.split_point - 1; i >= 0; --i) {
        const auto& c = convs[static_cast<size_t>(i)];
        if (c.pool_after) r.add(std::make_unique<ConvTranspose2d<S>>(nm(), c.out, c.out, 2, 2, 0, 0));
        r.add(std::make_unique<ConvTranspose2d<S>>(nm(), c.out, c.in, 3, 1, 1, 0));
        if (i > 0) r.add(std::make_unique<ReLU<S>>("atk_r.relu" + std::to_string(idx)));
      }
      break;
    }
    case Family::Resnet18Like: {
      auto blocks = resnet18_blocks();
      for (int i = spec.split_point - 1; i >= 0; --i) {
        const auto& b = blocks[static_cast<size_t>(i)];
        r.add(std::make_unique<ConvTranspose2d<S>>(nm(), b.out, b.in, 3, b.stride, 1, b.stride == 2 ? 1 : 0));
        r.add(std::make_unique<ReLU<S>>("atk_r.relu" + std::to_string(idx)));
      }
      r.add(std::make_unique<ConvTranspose2d<S>>(nm(), 64, 64, 2, 2, 0, 0));  // maxpool mirror
      r.add(std::make_unique<ReLU<S>>("atk_r.relu" + std::to_string(idx)));
      r.add(std::make_unique<ConvTranspose2d<S>>(nm(), 64, spec.input_shape[0], 7, 2, 3, 1));  // stem mirror
      break;
    }
  }
  r.add(std::make_unique<Sigmoid<S>>("atk_r.sigmoid"));

  Rng init = Rng(seed).fork(0xA77A);
  a.classifier.init(init);
  a.reconstructor.init(init);

  const Shape out = r.output_shape(feat);
  const Shape want{feat[0], spec.input_shape[0], spec.input_shape[1], spec.input_shape[2]};
  if (out != want)
    throw ConfigError("reconstructor does not restore the input shape: " + shape_str(out) + " vs " + shape_str(want));
  return a;
}

template AttackerModels<float> build_attackers<float>(const ArchitectureSpec&, const SplitModel<float>&, uint64_t);

template <typename S>
int64_t count_parameters(const SplitModel<S>& model, Party party) {
  if (party == Party::Cloud) return param_count(model.cloud_analyzer.params());
  return param_count(model.edge.params()) + param_count(model.exit_analyzer.params()) +
         param_count(model.exit_adversary.params());
}

template int64_t count_parameters<float>(const SplitModel<float>&, Party);
template int64_t count_parameters<double>(const SplitModel<double>&, Party);

template <typename S>
int64_t count_parameters(const AttackerModels<S>& attackers, AttackerKind kind) {
  return param_count(kind == AttackerKind::Classifier ? attackers.classifier.params()
                                                      : attackers.reconstructor.params());
}

template int64_t count_parameters<float>(const AttackerModels<float>&, AttackerKind);

template <typename S>
uint64_t estimate_maccs(const SplitModel<S>& model, Party party) {
  const Shape in{1, model.spec.input_shape[0], model.spec.input_shape[1], model.spec.input_shape[2]};
  uint64_t fwd = 0;
  if (party == Party::Edge) {
    const Shape feat = model.edge.output_shape(in);
    fwd = model.edge.forward_maccs(in) + model.exit_analyzer.forward_maccs(feat) +
          model.exit_adversary.forward_maccs(feat);
  } else {
    fwd = model.cloud_analyzer.forward_maccs(model.edge.output_shape(in));
  }
  return 3 * fwd;  // forward + backward at 2x forward
}

template uint64_t estimate_maccs<float>(const SplitModel<float>&, Party);

template <typename S>
std::vector<Tensor<S>> edge_param_values(const SplitModel<S>& model) {
  std::vector<Tensor<S>> out;
  for (const auto& seq : {&model.edge, &model.exit_analyzer, &model.exit_adversary})
    for (auto* p : seq->params()) out.push_back(p->value);
  return out;
}

template std::vector<Tensor<float>> edge_param_values<float>(const SplitModel<float>&);

template <typename S>
void load_param_values(const std::vector<Param<S>*>& params, const std::vector<Tensor<S>>& values) {
  if (params.size() != values.size()) throw std::invalid_argument("load_param_values: count mismatch");
  for (size_t i = 0; i < params.size(); ++i) {
    check_same_shape(params[i]->value.shape, values[i].shape, "load_param_values");
    params[i]->value = values[i];
  }
}

template void load_param_values<float>(const std::vector<Param<float>*>&, const std::vector<Tensor<float>>&);

}  // namespace splitpriv
