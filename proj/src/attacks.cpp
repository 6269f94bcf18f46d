// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors

#include "splitpriv/attacks.hpp"

#include <numeric>

#include "splitpriv/losses.hpp"
#include "splitpriv/metrics.hpp"

namespace splitpriv {

AttackState build_attack_state(const ArchitectureSpec& spec, const PrivacyConfig& privacy, bool privacy_enabled,
                               const AttackConfig& cfg) {
  AttackState st{AttackerModelsF{},
                 Adam<float>{},
                 Adam<float>{},
                 build_split_model<float>(spec, privacy, cfg.seed, privacy_enabled),
                 Rng(cfg.seed).fork(31),
                 Rng(cfg.seed).fork(32),
                 cfg,
                 {}};
  st.models = build_attackers(spec, st.edge_replica, cfg.seed);
  st.opt_classifier = Adam<float>(st.models.classifier.params(), cfg.lr);
  st.opt_reconstructor = Adam<float>(st.models.reconstructor.params(), cfg.lr);
  return st;
}

namespace {

TensorF gather(const TensorF& images, const std::vector<int64_t>& order, int64_t from, int64_t to) {
  const int64_t stride = images.size() / images.shape[0];
  TensorF out({to - from, images.shape[1], images.shape[2], images.shape[3]});
  for (int64_t i = from; i < to; ++i)
    std::copy_n(images.ptr() + order[static_cast<size_t>(i)] * stride, stride, out.ptr() + (i - from) * stride);
  return out;
}

}  // namespace

EpochAttackMetrics attack_epoch(AttackState& state, const ReleasedEpoch& release, const SampleSet& attacker_data,
                                const SampleSet& user_ref) {
  const SampleSet& own = attacker_data.for_training();
  load_param_values(state.edge_replica.edge.params(), release.extractor_params);

  check_same_shape(Shape{release.features.shape[1], release.features.shape[2], release.features.shape[3]},
                   Shape{state.edge_replica.feature_shape()[1], state.edge_replica.feature_shape()[2],
                         state.edge_replica.feature_shape()[3]},
                   "attack_epoch: released features vs replica output");

  std::vector<int64_t> order(static_cast<size_t>(own.size()));
  std::iota(order.begin(), order.end(), 0);
  state.shuffle_rng.shuffle(order.begin(), order.end());

  // One training epoch for both attackers on the attacker's own split.
  for (int64_t from = 0; from < own.size(); from += state.cfg.batch_size) {
    const int64_t to = std::min<int64_t>(from + state.cfg.batch_size, own.size());
    const TensorF batch = gather(own.images, order, from, to);
    std::vector<int> zb(static_cast<size_t>(to - from));
    for (int64_t i = from; i < to; ++i)
      zb[static_cast<size_t>(i - from)] = own.z[static_cast<size_t>(order[static_cast<size_t>(i)])];

    const TensorF x_e = forward_edge(state.edge_replica, batch, state.edge_replica.privacy_enabled, state.noise_rng);

    state.opt_classifier.zero_grad();
    const TensorF logits = state.models.classifier.forward(x_e);
    const TensorF pz = softmax(logits);
    state.models.classifier.backward(softmax_ce_backward(pz, zb));
    state.opt_classifier.step();

    state.opt_reconstructor.zero_grad();
    const TensorF recon = state.models.reconstructor.forward(x_e);
    state.models.reconstructor.backward(mse_backward(recon, batch));
    state.opt_reconstructor.step();
  }

  // Simultaneous attack on the user's released feature maps of this epoch.
  // Scored against ground truth as an oracle evaluation.
  EpochAttackMetrics m;
  m.epoch = release.epoch;
  std::vector<int> z_user(release.sample_indices.size());
  for (size_t i = 0; i < z_user.size(); ++i)
    z_user[i] = user_ref.z[static_cast<size_t>(release.sample_indices[i])];

  const TensorF user_logits = state.models.classifier.forward(release.features);
  m.cls_acc = accuracy(user_logits, z_user);

  const TensorF user_recon = state.models.reconstructor.forward(release.features);
  const TensorF originals = gather(user_ref.images, release.sample_indices, 0,
                                   static_cast<int64_t>(release.sample_indices.size()));
  m.rec_mse = mean_squared_error(user_recon, originals);

  state.history.push_back(m);
  return m;
}

double tv_loss(const TensorF& u) {
  if (u.rank() != 3) throw std::invalid_argument("tv_loss: expected [C,H,W]");
  const int64_t c = u.shape[0], h = u.shape[1], w = u.shape[2];
  double acc = 0;
  for (int64_t ch = 0; ch < c; ++ch) {
    const float* p = u.ptr() + ch * h * w;
    for (int64_t i = 0; i < h; ++i)
      for (int64_t j = 0; j + 1 < w; ++j) acc += std::abs(static_cast<double>(p[i * w + j + 1]) - p[i * w + j]);
    for (int64_t i = 0; i + 1 < h; ++i)
      for (int64_t j = 0; j < w; ++j) acc += std::abs(static_cast<double>(p[(i + 1) * w + j]) - p[i * w + j]);
  }
  return acc;
}

namespace {

// d TV / d u, sign convention matching the anisotropic L1 sum above.
void tv_grad_accum(const TensorF& u, float coeff, TensorF& grad) {
  const int64_t c = u.shape[1], h = u.shape[2], w = u.shape[3];
  for (int64_t n = 0; n < u.shape[0]; ++n)
    for (int64_t ch = 0; ch < c; ++ch) {
      const float* p = u.ptr() + (n * c + ch) * h * w;
      float* g = grad.ptr() + (n * c + ch) * h * w;
      for (int64_t i = 0; i < h; ++i)
        for (int64_t j = 0; j + 1 < w; ++j) {
          const float d = p[i * w + j + 1] - p[i * w + j];
          const float s = d > 0 ? 1.f : (d < 0 ? -1.f : 0.f);
          g[i * w + j + 1] += coeff * s;
          g[i * w + j] -= coeff * s;
        }
      for (int64_t i = 0; i + 1 < h; ++i)
        for (int64_t j = 0; j < w; ++j) {
          const float d = p[(i + 1) * w + j] - p[i * w + j];
          const float s = d > 0 ? 1.f : (d < 0 ? -1.f : 0.f);
          g[(i + 1) * w + j] += coeff * s;
          g[i * w + j] -= coeff * s;
        }
    }
}

}  // namespace

WhiteBoxResult whitebox_reconstruct(SplitModelF& model, const TensorF& x_e, const WhiteBoxConfig& cfg) {
  cfg.validate();
  if (x_e.rank() != 4) throw std::invalid_argument("whitebox_reconstruct: expected [N,...] feature batch");
  const int64_t n = x_e.shape[0];
  const auto& in = model.spec.input_shape;
  TensorF u({n, in[0], in[1], in[2]});
  if (cfg.init == "uniform") {
    Rng rng = Rng(cfg.seed).fork(41);
    for (auto& v : u.data) v = static_cast<float>(rng.uniform());
  }

  // The descent runs on the sum-form objective (feature SSE + alpha*K*TV) so
  // the fixed step size is resolution-independent; the reported objective is
  // the per-element mean form. A proposed step that would increase the
  // objective is rejected and the step size halved, which keeps the descent
  // monotone on edges whose active clip rescaling steepens the landscape.
  const int64_t k_feat = x_e.size() / n;
  const float tv_coeff = static_cast<float>(cfg.alpha) * static_cast<float>(k_feat);
  const double norm = static_cast<double>(k_feat) * static_cast<double>(n);
  Rng noise_unused(0);

  auto objective_diff = [&](const TensorF& cand, TensorF* diff_out) {
    const TensorF feat = forward_edge(model, cand, /*noise_on=*/false, noise_unused);
    TensorF diff = feat;
    kern::axpy(-1.f, x_e.ptr(), diff.ptr(), diff.size());
    double sse = 0;
    for (const float v : diff.data) sse += static_cast<double>(v) * v;
    double tv_sum = 0;
    for (int64_t i = 0; i < n; ++i) {
      TensorF one({in[0], in[1], in[2]});
      std::copy_n(cand.ptr() + i * numel(one.shape), numel(one.shape), one.ptr());
      tv_sum += tv_loss(one);
    }
    if (diff_out) *diff_out = std::move(diff);
    return (sse + static_cast<double>(tv_coeff) * tv_sum) / norm;
  };

  WhiteBoxResult res;
  res.objective.reserve(static_cast<size_t>(cfg.steps));
  double step = cfg.step_size;
  TensorF diff;
  double obj = objective_diff(u, &diff);  // leaves edge forward caches at u
  int consecutive_bad = 0;

  for (int it = 0; it < cfg.steps; ++it) {
    res.objective.push_back(obj);
    TensorF dsum = diff;
    kern::scale(2.f, dsum.ptr(), dsum.size());
    TensorF grad = model.edge.backward(dsum);
    tv_grad_accum(u, tv_coeff, grad);

    TensorF u_next = u;
    kern::axpy(static_cast<float>(-step), grad.ptr(), u_next.ptr(), u_next.size());
    TensorF diff_next;
    const double obj_next = objective_diff(u_next, &diff_next);

    if (!std::isfinite(obj_next) || obj_next > obj) {
      if (!std::isfinite(obj_next)) {
        if (++consecutive_bad > 1)
          throw NumericError("whitebox_reconstruct: non-finite objective after step halving");
      } else {
        consecutive_bad = 0;
      }
      ++res.increase_steps;
      step /= 2;
      (void)objective_diff(u, &diff);  // restore caches at the kept iterate
      if (step < cfg.step_size * 1e-10) break;  // at float resolution
      continue;
    }
    consecutive_bad = 0;
    u = std::move(u_next);
    obj = obj_next;
    diff = std::move(diff_next);
  }

  for (auto& v : u.data) v = std::min(1.f, std::max(0.f, v));
  res.images = std::move(u);
  return res;
}

}  // namespace splitpriv
