// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors

#include "splitpriv/training.hpp"

#include <atomic>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "splitpriv/losses.hpp"
#include "splitpriv/metrics.hpp"

namespace splitpriv {

namespace {

constexpr float kControlEndRun = 0.f;
constexpr float kControlRestartEpoch = 1.f;
constexpr float kControlStats = 2.f;

TensorF gather_images(const SampleSet& s, const std::vector<int64_t>& order, int64_t from, int64_t to) {
  const int64_t n = to - from;
  const int64_t stride = s.images.size() / s.size();
  TensorF out({n, s.images.shape[1], s.images.shape[2], s.images.shape[3]});
  for (int64_t i = 0; i < n; ++i)
    std::copy_n(s.images.ptr() + order[static_cast<size_t>(from + i)] * stride, stride, out.ptr() + i * stride);
  return out;
}

std::vector<int> gather_labels(const std::vector<int>& labels, const std::vector<int64_t>& order, int64_t from,
                               int64_t to) {
  std::vector<int> out(static_cast<size_t>(to - from));
  for (int64_t i = from; i < to; ++i) out[static_cast<size_t>(i - from)] = labels[static_cast<size_t>(order[static_cast<size_t>(i)])];
  return out;
}

class DivergenceGuard {
 public:
  explicit DivergenceGuard(const TrainConfig& cfg) : abs_(cfg.divergence_abs), patience_(cfg.divergence_patience) {}

  void check(double loss, const char* what) {
    if (!std::isfinite(loss)) throw DivergenceError(std::string(what) + ": non-finite loss");
    if (std::abs(loss) > abs_) {
      if (++streak_ >= patience_)
        throw DivergenceError(std::string(what) + ": |loss| > " + std::to_string(abs_) + " for " +
                              std::to_string(streak_) + " consecutive steps");
    } else {
      streak_ = 0;
    }
  }

 private:
  double abs_;
  int patience_;
  int streak_ = 0;
};

void check_bundle_shape(const SplitModelF& model, const SampleSet& s) {
  if (s.size() == 0) throw ConfigError("training: empty sample set");
  const auto& in = model.spec.input_shape;
  if (s.images.shape[1] != in[0] || s.images.shape[2] != in[1] || s.images.shape[3] != in[2])
    throw ConfigError("training: dataset shape " + shape_str(s.images.shape) + " does not match architecture input");
}

// Pre-noise release bound: the clip layer guarantees |x_E2|_inf <= T; this is
// the hooked assertion that it held on the actual tensors.
void assert_release_bound(const SplitModelF& model) {
  if (!model.noise || !model.clip) return;
  const float t = model.clip->threshold();
  if (model.noise->last_input_linf() > t * (1.f + 1e-5f))
    throw NumericError("release bound violated: pre-noise L-inf " + std::to_string(model.noise->last_input_linf()) +
                       " > T=" + std::to_string(t));
}

// Fresh Laplace noise added to a copy of the pre-noise release; the adversary
// steps reuse the cached x_E2 because E1 is frozen while D trains.
TensorF noised_release(const TensorF& x_e2, const SplitModelF& model, bool noise_on, Rng& rng) {
  if (!noise_on || !model.noise) return x_e2;
  TensorF x = x_e2;
  const double b = model.noise->scale_b();
  for (auto& v : x.data) v += static_cast<float>(rng.laplace(b));
  return x;
}

struct EpochStats {
  int64_t analyzer_hits = 0, analyzer_total = 0;
  int64_t adv_hits = 0, adv_total = 0;
  double loss_g_sum = 0;
  int64_t loss_g_n = 0;
  double loss_d_sum = 0;
  int64_t loss_d_n = 0;

  void fill(EpochLog& log) const {
    log.analyzer_acc = analyzer_total ? static_cast<double>(analyzer_hits) / static_cast<double>(analyzer_total) : 0;
    log.exit_adv_acc = adv_total ? static_cast<double>(adv_hits) / static_cast<double>(adv_total) : 0;
    log.loss_g = loss_g_n ? loss_g_sum / static_cast<double>(loss_g_n) : 0;
    log.loss_d = loss_d_n ? loss_d_sum / static_cast<double>(loss_d_n) : 0;
  }
};

int64_t argmax_hits(const TensorF& logits, const std::vector<int>& labels) {
  const int64_t n = logits.shape[0], k = logits.shape[1];
  int64_t hits = 0;
  for (int64_t i = 0; i < n; ++i) {
    const float* row = logits.ptr() + i * k;
    int best = 0;
    for (int j = 1; j < k; ++j)
      if (row[j] > row[best]) best = j;
    if (best == labels[static_cast<size_t>(i)]) ++hits;
  }
  return hits;
}

// m_a adversary steps on one mini-batch: recompute the pre-noise release once
// (E1 is fixed during these steps), then per step draw fresh noise, update D
// only. Returns the adversary-loss sum for logging.
void adversary_steps(SplitModelF& model, Adam<float>& opt_d, const TensorF& batch, const std::vector<int>& zb,
                     const TrainConfig& cfg, Rng& noise_rng, DivergenceGuard& guard, EpochStats& stats,
                     TrainResult& res) {
  if (model.noise) model.noise->set_mode(NoiseMode::Off);
  const TensorF x_e2 = model.edge.forward(batch);

  const uint64_t eg_sum = cfg.verify_freeze
                              ? param_checksum(model.edge.params()) ^ param_checksum(model.exit_analyzer.params())
                              : 0;
  for (int j = 0; j < cfg.m_a; ++j) {
    const TensorF x_adv = noised_release(x_e2, model, cfg.noise_on, noise_rng);
    opt_d.zero_grad();
    const TensorF logits = model.exit_adversary.forward(x_adv);
    const TensorF pz = softmax(logits);
    const double loss_d = cross_entropy(pz, zb);
    guard.check(loss_d, "adversary step");
    model.exit_adversary.backward(softmax_ce_backward(pz, zb));
    opt_d.step();
    stats.adv_hits += argmax_hits(logits, zb);
    stats.adv_total += logits.shape[0];
    stats.loss_d_sum += loss_d;
    ++stats.loss_d_n;
  }
  if (cfg.verify_freeze) {
    const uint64_t now = param_checksum(model.edge.params()) ^ param_checksum(model.exit_analyzer.params());
    if (now != eg_sum) ++res.freeze_violations;
  }
}

}  // namespace

double adversary_loss(const std::vector<double>& z_onehot, const std::vector<double>& z_prob) {
  if (z_onehot.size() != z_prob.size()) throw std::invalid_argument("adversary_loss: size mismatch");
  double sum = 0;
  int ones = 0;
  double loss = 0;
  for (size_t k = 0; k < z_prob.size(); ++k) {
    if (z_prob[k] < 0) throw std::invalid_argument("adversary_loss: negative probability");
    sum += z_prob[k];
    if (z_onehot[k] == 1.0)
      ++ones;
    else if (z_onehot[k] != 0.0)
      throw std::invalid_argument("adversary_loss: labels must be one-hot");
    loss -= z_onehot[k] * std::log(std::max(z_prob[k], kLogFloor));
  }
  if (std::abs(sum - 1.0) > 1e-6) throw std::invalid_argument("adversary_loss: probabilities must sum to 1");
  if (ones != 1) throw std::invalid_argument("adversary_loss: labels must be one-hot");
  return loss;
}

double analyzer_loss(const std::vector<double>& y_onehot, const std::vector<double>& y_prob,
                     const std::vector<double>& z_onehot, const std::vector<double>& z_prob, double lambda) {
  return adversary_loss(y_onehot, y_prob) - lambda * adversary_loss(z_onehot, z_prob);
}

void write_epoch_csv(const std::string& path, const std::vector<EpochLog>& logs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_epoch_csv: cannot open " + path);
  out << "epoch,analyzer_acc,exit_adv_acc,L_G,L_D,attack_cls_acc,attack_rec_mse\n";
  out.precision(9);
  for (const auto& l : logs)
    out << l.epoch << "," << l.analyzer_acc << "," << l.exit_adv_acc << "," << l.loss_g << "," << l.loss_d << ","
        << l.attack_cls_acc << "," << l.attack_rec_mse << "\n";
}

std::string epoch_logs_json(const std::vector<EpochLog>& logs) {
  std::ostringstream os;
  os.precision(10);
  os << "[";
  for (size_t i = 0; i < logs.size(); ++i) {
    const auto& l = logs[i];
    auto num = [](double v) {
      if (std::isnan(v)) return std::string("null");
      std::ostringstream t;
      t.precision(10);
      t << v;
      return t.str();
    };
    os << (i ? "," : "") << "{\"epoch\":" << l.epoch << ",\"phase\":\"" << l.phase
       << "\",\"analyzer_acc\":" << num(l.analyzer_acc) << ",\"exit_adv_acc\":" << num(l.exit_adv_acc)
       << ",\"L_G\":" << num(l.loss_g) << ",\"L_D\":" << num(l.loss_d)
       << ",\"attack_cls_acc\":" << num(l.attack_cls_acc) << ",\"attack_rec_mse\":" << num(l.attack_rec_mse) << "}";
  }
  os << "]";
  return os.str();
}

TrainResult pretrain_edge(SplitModelF& model, const DatasetBundle& bundle, const TrainConfig& cfg) {
  cfg.validate();
  TrainResult res;
  if (cfg.n_p == 0) return res;
  const SampleSet& train = bundle.user_train.for_training();
  check_bundle_shape(model, train);

  Rng shuffle_rng = Rng(cfg.seed).fork(11);
  Rng noise_rng = Rng(cfg.seed).fork(12);

  auto eg_params = model.edge.params();
  {
    auto g = model.exit_analyzer.params();
    eg_params.insert(eg_params.end(), g.begin(), g.end());
  }
  Adam<float> opt_eg(eg_params, cfg.lr_edge);
  Adam<float> opt_d(model.exit_adversary.params(), cfg.lr_adversary);
  DivergenceGuard guard(cfg);

  std::vector<int64_t> order(static_cast<size_t>(train.size()));
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= cfg.n_p; ++epoch) {
    shuffle_rng.shuffle(order.begin(), order.end());
    EpochStats stats;
    for (int64_t from = 0; from < train.size(); from += cfg.batch_size) {
      const int64_t to = std::min<int64_t>(from + cfg.batch_size, train.size());
      const TensorF batch = gather_images(train, order, from, to);
      const auto yb = gather_labels(train.y, order, from, to);
      const auto zb = gather_labels(train.z, order, from, to);

      // Analyzer step: L_G = CE(y, G(x_E)) - lambda * CE(z, D(x_E)); updates
      // E and G, D is read-only here.
      opt_eg.zero_grad();
      zero_grads(model.exit_adversary.params());
      const TensorF x_e = forward_edge(model, batch, cfg.noise_on, noise_rng);
      assert_release_bound(model);
      const TensorF y_logits = model.exit_analyzer.forward(x_e);
      const TensorF py = softmax(y_logits);
      const double ce_y = cross_entropy(py, yb);
      double loss_g = ce_y;
      TensorF dx = model.exit_analyzer.backward(softmax_ce_backward(py, yb));
      if (cfg.lambda != 0.0) {
        const TensorF z_logits = model.exit_adversary.forward(x_e);
        const TensorF pz = softmax(z_logits);
        loss_g -= cfg.lambda * cross_entropy(pz, zb);
        const TensorF dx_adv = model.exit_adversary.backward(softmax_ce_backward(pz, zb, -cfg.lambda));
        kern::axpy(1.f, dx_adv.ptr(), dx.ptr(), dx.size());
      }
      guard.check(loss_g, "analyzer step");
      res.step_losses.push_back(loss_g);
      model.edge.backward(dx);

      const uint64_t d_sum = cfg.verify_freeze ? param_checksum(model.exit_adversary.params()) : 0;
      opt_eg.step();
      if (cfg.verify_freeze && param_checksum(model.exit_adversary.params()) != d_sum) ++res.freeze_violations;

      stats.analyzer_hits += argmax_hits(y_logits, yb);
      stats.analyzer_total += y_logits.shape[0];
      stats.loss_g_sum += loss_g;
      ++stats.loss_g_n;

      adversary_steps(model, opt_d, batch, zb, cfg, noise_rng, guard, stats, res);
    }
    EpochLog log;
    log.epoch = epoch;
    log.phase = "pretrain";
    stats.fill(log);
    res.logs.push_back(log);
  }
  return res;
}

// ---------------------------------------------------------------------------
// cloud party

namespace {

/// Cloud analyzer service state that survives re-connections.
class CloudParty {
 public:
  CloudParty(SplitModelF& model, const TrainConfig& cfg)
      : model_(model), cfg_(cfg), opt_(model.cloud_analyzer.params(), cfg.lr_cloud) {}

  // Serves one connection; returns true when the run is complete.
  bool serve(Transport& channel) {
    while (true) {
      Frame f = channel.recv();
      switch (f.type) {
        case MsgType::Features: {
          if (static_cast<int64_t>(f.epoch) != snap_epoch_) {
            snapshot_ = opt_.snapshot();
            snap_epoch_ = f.epoch;
          }
          pending_ = f;
          break;
        }
        case MsgType::Labels: {
          if (pending_.dims.empty() || pending_.epoch != f.epoch || pending_.batch_id != f.batch_id)
            throw ProtocolError("cloud: labels frame without matching features");
          handle_batch(channel, f);
          break;
        }
        case MsgType::Control: {
          if (f.payload.empty()) throw ProtocolError("cloud: empty control frame");
          if (f.payload[0] == kControlEndRun) return true;
          if (f.payload[0] == kControlRestartEpoch) {
            if (snap_epoch_ == static_cast<int64_t>(f.epoch)) opt_.restore(snapshot_);
            pending_ = Frame{};
            break;
          }
          throw ProtocolError("cloud: unknown control opcode");
        }
        default:
          throw ProtocolError("cloud: unexpected frame type");
      }
    }
  }

 private:
  void handle_batch(Transport& channel, const Frame& labels) {
    const TensorF x = pending_.to_tensor();
    std::vector<int> yb(labels.payload.size());
    for (size_t i = 0; i < yb.size(); ++i) yb[i] = static_cast<int>(labels.payload[i]);
    if (static_cast<int64_t>(yb.size()) != x.shape[0]) throw ProtocolError("cloud: label count != batch size");

    const TensorF logits = model_.cloud_analyzer.forward(x);
    const TensorF p = softmax(logits);
    const double loss = cross_entropy(p, yb);
    opt_.zero_grad();
    const TensorF dx = model_.cloud_analyzer.backward(softmax_ce_backward(p, yb));
    opt_.step();

    channel.send(Frame::tensor(MsgType::Gradient, pending_.epoch, pending_.batch_id, dx));
    Frame stats;
    stats.type = MsgType::Control;
    stats.epoch = pending_.epoch;
    stats.batch_id = pending_.batch_id;
    stats.dims = {4};
    stats.payload = {kControlStats, static_cast<float>(loss), static_cast<float>(argmax_hits(logits, yb)),
                     static_cast<float>(x.shape[0])};
    channel.send(stats);
    pending_ = Frame{};
  }

  SplitModelF& model_;
  TrainConfig cfg_;
  Adam<float> opt_;
  Adam<float>::Snapshot snapshot_;
  int64_t snap_epoch_ = -1;
  Frame pending_;
};

}  // namespace

void run_cloud_party(Transport& channel, SplitModelF& model, const TrainConfig& cfg) {
  CloudParty party(model, cfg);
  party.serve(channel);
}

TrainResult train_edge_cloud(SplitModelF& model, const DatasetBundle& bundle, const TrainConfig& cfg,
                             Transport& channel, const EpochObserver& observer,
                             const std::function<std::unique_ptr<Transport>()>& reconnect) {
  cfg.validate();
  TrainResult res;
  if (cfg.n_t == 0) return res;
  const SampleSet& train = bundle.user_train.for_training();
  check_bundle_shape(model, train);
  const bool adversarial = model.privacy_enabled;

  Rng shuffle_rng = Rng(cfg.seed).fork(21);
  Rng noise_rng = Rng(cfg.seed).fork(22);

  Adam<float> opt_e(model.edge.params(), cfg.lr_edge);
  Adam<float> opt_d(model.exit_adversary.params(), cfg.lr_adversary);
  DivergenceGuard guard(cfg);

  std::vector<int64_t> order(static_cast<size_t>(train.size()));
  std::iota(order.begin(), order.end(), 0);

  Transport* chan = &channel;
  std::unique_ptr<Transport> owned_chan;

  const Shape feat_shape = model.feature_shape();
  const int64_t feat_stride = numel(feat_shape) / feat_shape[0];

  for (int epoch = 1; epoch <= cfg.n_t; ++epoch) {
    // Epoch-start snapshots make a one-shot transport retry exact.
    const auto snap_e = opt_e.snapshot();
    const auto snap_d = opt_d.snapshot();
    const Rng snap_shuffle = shuffle_rng;
    const Rng snap_noise = noise_rng;
    bool retried = false;

    while (true) {
      try {
        shuffle_rng.shuffle(order.begin(), order.end());
        EpochStats stats;
        TensorF released({train.size(), feat_shape[1], feat_shape[2], feat_shape[3]});
        uint32_t batch_id = 0;
        for (int64_t from = 0; from < train.size(); from += cfg.batch_size, ++batch_id) {
          const int64_t to = std::min<int64_t>(from + cfg.batch_size, train.size());
          const TensorF batch = gather_images(train, order, from, to);
          const auto yb = gather_labels(train.y, order, from, to);
          const auto zb = gather_labels(train.z, order, from, to);

          opt_e.zero_grad();
          zero_grads(model.exit_adversary.params());
          const TensorF x_e = forward_edge(model, batch, cfg.noise_on, noise_rng);
          assert_release_bound(model);
          std::copy_n(x_e.ptr(), x_e.size(), released.ptr() + from * feat_stride);

          // Only the feature map and desired labels cross the boundary.
          chan->send(Frame::tensor(MsgType::Features, static_cast<uint32_t>(epoch), batch_id, x_e));
          Frame yf;
          yf.type = MsgType::Labels;
          yf.epoch = static_cast<uint32_t>(epoch);
          yf.batch_id = batch_id;
          yf.dims = {to - from};
          yf.payload.resize(static_cast<size_t>(to - from));
          for (size_t i = 0; i < yf.payload.size(); ++i) yf.payload[i] = static_cast<float>(yb[i]);
          chan->send(yf);

          const Frame grad = chan->recv();
          if (grad.type != MsgType::Gradient || grad.epoch != static_cast<uint32_t>(epoch) ||
              grad.batch_id != batch_id || grad.dims != x_e.shape)
            throw ProtocolError("edge: unexpected gradient frame");
          const Frame stat = chan->recv();
          if (stat.type != MsgType::Control || stat.payload.size() != 4 || stat.payload[0] != kControlStats)
            throw ProtocolError("edge: expected stats control frame");

          TensorF dx = grad.to_tensor();
          double loss_g = static_cast<double>(stat.payload[1]);
          if (adversarial && cfg.lambda != 0.0) {
            const TensorF z_logits = model.exit_adversary.forward(x_e);
            const TensorF pz = softmax(z_logits);
            loss_g -= cfg.lambda * cross_entropy(pz, zb);
            const TensorF dx_adv = model.exit_adversary.backward(softmax_ce_backward(pz, zb, -cfg.lambda));
            kern::axpy(1.f, dx_adv.ptr(), dx.ptr(), dx.size());
          }
          guard.check(loss_g, "edge-cloud analyzer step");
          res.step_losses.push_back(loss_g);
          model.edge.backward(dx);

          const uint64_t d_sum = cfg.verify_freeze ? param_checksum(model.exit_adversary.params()) : 0;
          opt_e.step();
          if (cfg.verify_freeze && param_checksum(model.exit_adversary.params()) != d_sum) ++res.freeze_violations;

          stats.analyzer_hits += static_cast<int64_t>(stat.payload[2]);
          stats.analyzer_total += static_cast<int64_t>(stat.payload[3]);
          stats.loss_g_sum += loss_g;
          ++stats.loss_g_n;

          if (adversarial) adversary_steps(model, opt_d, batch, zb, cfg, noise_rng, guard, stats, res);
        }

        EpochLog log;
        log.epoch = cfg.n_p + epoch;
        log.phase = "cloud";
        stats.fill(log);
        if (observer) {
          ReleasedEpoch rel;
          rel.epoch = log.epoch;
          rel.features = std::move(released);
          rel.sample_indices = order;
          rel.extractor_params.reserve(16);
          for (auto* p : model.edge.params()) rel.extractor_params.push_back(p->value);
          observer(rel, log);
        }
        res.logs.push_back(log);
        break;  // epoch done
      } catch (const TransportError& err) {
        if (retried || !reconnect) throw TransportError(std::string(err.what()) + " (epoch retry exhausted)",
                                                        err.retry_count + (retried ? 1 : 0));
        retried = true;
        ++res.transport_retries;
        opt_e.restore(snap_e);
        opt_d.restore(snap_d);
        shuffle_rng = snap_shuffle;
        noise_rng = snap_noise;
        owned_chan = reconnect();
        chan = owned_chan.get();
        Frame restart;
        restart.type = MsgType::Control;
        restart.epoch = static_cast<uint32_t>(epoch);
        restart.dims = {1};
        restart.payload = {kControlRestartEpoch};
        chan->send(restart);
      }
    }
  }

  Frame done;
  done.type = MsgType::Control;
  done.dims = {1};
  done.payload = {kControlEndRun};
  chan->send(done);
  return res;
}

TrainResult run_split_training(SplitModelF& model, const DatasetBundle& bundle, const TrainConfig& cfg,
                               const TransportConfig& transport, const EpochObserver& observer) {
  cfg.validate();
  transport.validate();

  TrainResult total;
  if (model.privacy_enabled && cfg.n_p > 0) total = pretrain_edge(model, bundle, cfg);
  if (cfg.n_t == 0) return total;

  auto merge = [&](TrainResult&& r) {
    total.logs.insert(total.logs.end(), r.logs.begin(), r.logs.end());
    total.step_losses.insert(total.step_losses.end(), r.step_losses.begin(), r.step_losses.end());
    total.freeze_violations += r.freeze_violations;
    total.transport_retries += r.transport_retries;
  };

  std::exception_ptr cloud_err;
  if (transport.mode == "loopback") {
    auto [edge_end, cloud_end] = loopback_transport(transport.timeout_s);
    std::thread cloud_thread([&, cloud = std::move(cloud_end)]() mutable {
      try {
        run_cloud_party(*cloud, model, cfg);
      } catch (...) {
        cloud_err = std::current_exception();
        cloud->close();
      }
    });
    try {
      merge(train_edge_cloud(model, bundle, cfg, *edge_end, observer));
    } catch (...) {
      edge_end->close();
      cloud_thread.join();
      throw;
    }
    cloud_thread.join();
  } else {
    SocketServer server(transport.host, transport.port);
    const int port = server.port();
    std::atomic<bool> stop{false};
    CloudParty* party_raw = nullptr;
    std::thread cloud_thread([&] {
      try {
        CloudParty party(model, cfg);
        party_raw = &party;
        while (!stop.load()) {
          std::unique_ptr<Transport> conn;
          try {
            conn = server.accept(transport.timeout_s);
          } catch (const TransportError&) {
            if (stop.load()) return;
            throw;
          }
          try {
            if (party.serve(*conn)) return;
          } catch (const TransportError&) {
            // connection dropped; the edge may reconnect and replay the epoch
            if (stop.load()) return;
          }
        }
      } catch (...) {
        cloud_err = std::current_exception();
      }
    });
    (void)party_raw;
    auto reconnect = [&, port] { return socket_connect(transport.host, port, transport.timeout_s); };
    try {
      auto edge_chan = reconnect();
      merge(train_edge_cloud(model, bundle, cfg, *edge_chan, observer, reconnect));
    } catch (...) {
      stop.store(true);
      server.close_listener();
      cloud_thread.join();
      throw;
    }
    stop.store(true);
    cloud_thread.join();
  }
  if (cloud_err) std::rethrow_exception(cloud_err);
  return total;
}

BaselineRun train_baseline(const ArchitectureSpec& spec, const DatasetBundle& bundle, const TrainConfig& cfg,
                           const TransportConfig& transport, const EpochObserver& observer) {
  BaselineRun run{build_split_model<float>(spec, PrivacyConfig{}, cfg.seed, /*privacy_enabled=*/false), {}};
  run.result = run_split_training(run.model, bundle, cfg, transport, observer);
  return run;
}

}  // namespace splitpriv
