// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors

#include "splitpriv/harness.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "splitpriv/image_io.hpp"
#include "splitpriv/losses.hpp"
#include "splitpriv/plot.hpp"

namespace fs = std::filesystem;

namespace splitpriv {

using nlohmann::json;

DatasetBundle make_bundle(const RunConfig& cfg) {
  if (cfg.dataset_type == "synthetic") return generate_synthetic(cfg.synthetic, cfg.sizes);
  LoadOptions opts;
  opts.image_size = cfg.external_image_size;
  opts.seed = cfg.seed;
  return load_external(cfg.external_path, cfg.desired_attr, cfg.sensitive_attr, cfg.sizes, opts);
}

SplitModelF make_model(const RunConfig& cfg) {
  return build_split_model<float>(cfg.arch, cfg.privacy, cfg.seed, cfg.method == "private");
}

std::string prepare_run_dir(const RunConfig& cfg, const std::string& subdir) {
  fs::path dir;
  if (!cfg.output_dir.empty()) {
    dir = cfg.output_dir;
  } else {
    const char* root = std::getenv("SPLITPRIV_OUTPUT_ROOT");
    dir = fs::path(root ? root : "runs") / "run";
  }
  if (!subdir.empty()) dir /= subdir;
  fs::create_directories(dir);
  return dir.string();
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

TensorF first_images(const SampleSet& s, int64_t n) {
  n = std::min<int64_t>(n, s.size());
  TensorF out({n, s.images.shape[1], s.images.shape[2], s.images.shape[3]});
  std::copy_n(s.images.ptr(), out.size(), out.ptr());
  return out;
}

std::vector<TensorF> unbatch(const TensorF& batch) {
  std::vector<TensorF> out;
  const Shape sh{batch.shape[1], batch.shape[2], batch.shape[3]};
  for (int64_t i = 0; i < batch.shape[0]; ++i) {
    TensorF img(sh);
    std::copy_n(batch.ptr() + i * numel(sh), numel(sh), img.ptr());
    out.push_back(std::move(img));
  }
  return out;
}

void write_attack_plots(const std::string& dir, const std::vector<EpochLog>& logs, double trivial_sensitive) {
  std::vector<double> ep, cls, mse;
  for (const auto& l : logs) {
    if (l.phase != "cloud") continue;
    ep.push_back(l.epoch);
    cls.push_back(l.attack_cls_acc);
    mse.push_back(l.attack_rec_mse);
  }
  if (ep.empty()) return;
  Series attack{"attack", ep, cls, {200, 40, 40}, false};
  Series trivial{"trivial", {ep.front(), ep.back()}, {trivial_sensitive, trivial_sensitive}, {120, 120, 120}, false};
  render_plot(dir + "/attack_cls_acc.png", "simultaneous attack accuracy", "epoch", "accuracy", {attack, trivial});
  Series rec{"rec mse", ep, mse, {40, 40, 200}, false};
  render_plot(dir + "/attack_rec_mse.png", "simultaneous reconstruction mse", "epoch", "mse", {rec});
}

}  // namespace

std::string EvalReport::to_json_text() const {
  json j;
  j["analyzer_acc"] = analyzer_acc;
  j["attacker_acc"] = attacker_acc;
  j["trivial_desired"] = trivial_desired;
  j["trivial_sensitive"] = trivial_sensitive;
  j["deep_recon"] = {{"mse", deep_recon.mse},
                     {"psnr_db", std::isinf(deep_recon.psnr_db) ? 1e9 : deep_recon.psnr_db},
                     {"ssim", deep_recon.ssim},
                     {"n_images", deep_recon.n_images}};
  return j.dump(2);
}

EvalReport evaluate_split_model(const RunConfig& cfg, const DatasetBundle& bundle, SplitModelF& model,
                                AttackerModelsF& attackers) {
  const SampleSet& test = bundle.test;  // evaluation is the one sanctioned use
  EvalReport rep;
  rep.trivial_desired = trivial_classifier(bundle, Attribute::Desired);
  rep.trivial_sensitive = trivial_classifier(bundle, Attribute::Sensitive);

  Rng eval_rng = Rng(cfg.seed).fork(51);
  const int64_t n = test.size();
  const int64_t bs = cfg.train.batch_size;
  const bool noise_on = cfg.eval_noise_on && model.privacy_enabled;

  int64_t hits_y = 0, hits_z = 0;
  TensorF recons({n, test.images.shape[1], test.images.shape[2], test.images.shape[3]});
  const int64_t stride = recons.size() / n;

  for (int64_t from = 0; from < n; from += bs) {
    const int64_t to = std::min(from + bs, n);
    TensorF batch({to - from, test.images.shape[1], test.images.shape[2], test.images.shape[3]});
    std::copy_n(test.images.ptr() + from * stride, batch.size(), batch.ptr());

    // One release per batch feeds the analyzer and both attackers.
    const TensorF x_e = forward_edge(model, batch, noise_on, eval_rng);
    const TensorF y_logits = model.cloud_analyzer.forward(x_e);
    const TensorF z_logits = attackers.classifier.forward(x_e);
    const TensorF rec = attackers.reconstructor.forward(x_e);
    std::copy_n(rec.ptr(), rec.size(), recons.ptr() + from * stride);

    for (int64_t i = 0; i < to - from; ++i) {
      auto argmax = [](const float* row, int k) {
        int best = 0;
        for (int j = 1; j < k; ++j)
          if (row[j] > row[best]) best = j;
        return best;
      };
      if (argmax(y_logits.ptr() + i * model.spec.K_y, model.spec.K_y) == test.y[static_cast<size_t>(from + i)]) ++hits_y;
      if (argmax(z_logits.ptr() + i * model.spec.K_z, model.spec.K_z) == test.z[static_cast<size_t>(from + i)]) ++hits_z;
    }
  }

  rep.analyzer_acc = static_cast<double>(hits_y) / static_cast<double>(n);
  rep.attacker_acc = static_cast<double>(hits_z) / static_cast<double>(n);
  rep.deep_recon = evaluate_similarity(recons, test.images);
  rep.sample_originals = first_images(test, 8);
  rep.sample_recons = TensorF({rep.sample_originals.shape[0], recons.shape[1], recons.shape[2], recons.shape[3]});
  std::copy_n(recons.ptr(), rep.sample_recons.size(), rep.sample_recons.ptr());
  return rep;
}

std::string cmd_pretrain(const RunConfig& cfg) {
  cfg.validate();
  const std::string dir = prepare_run_dir(cfg);
  write_text(fs::path(dir) / "config.json", cfg.to_json_text());

  DatasetBundle bundle = make_bundle(cfg);
  SplitModelF model = make_model(cfg);
  if (cfg.method != "private") throw ConfigError("pretrain: the baseline has no adversarial pre-training step");

  TrainResult res = pretrain_edge(model, bundle, cfg.train);
  write_epoch_csv(dir + "/epochs.csv", res.logs);
  write_text(fs::path(dir) / "epochs.json", epoch_logs_json(res.logs));
  const std::string ckpt = dir + "/checkpoint_pretrain.ckpt";
  save_checkpoint(ckpt, model);
  return ckpt;
}

RunArtifacts cmd_train(const RunConfig& cfg) {
  cfg.validate();
  RunArtifacts art;
  art.run_dir = prepare_run_dir(cfg);
  const fs::path dir(art.run_dir);
  write_text(dir / "config.json", cfg.to_json_text());

  DatasetBundle bundle = make_bundle(cfg);
  SplitModelF model = make_model(cfg);

  std::optional<AttackState> attacks;
  EpochObserver observer;
  if (cfg.attacks_enabled) {
    attacks.emplace(build_attack_state(cfg.arch, cfg.privacy, cfg.method == "private", cfg.attack));
    observer = [&](const ReleasedEpoch& rel, EpochLog& log) {
      const auto m = attack_epoch(*attacks, rel, bundle.attacker_train, bundle.user_train);
      log.attack_cls_acc = m.cls_acc;
      log.attack_rec_mse = m.rec_mse;
      if (cfg.checkpoint_every > 0 && (rel.epoch % cfg.checkpoint_every) == 0)
        save_checkpoint((dir / ("checkpoint_epoch_" + std::to_string(rel.epoch) + ".ckpt")).string(), model,
                        &attacks->models);
    };
  }

  art.train = run_split_training(model, bundle, cfg.train, cfg.transport, observer);

  write_epoch_csv(art.run_dir + "/epochs.csv", art.train.logs);
  write_text(dir / "epochs.json", epoch_logs_json(art.train.logs));

  if (attacks) {
    art.eval = evaluate_split_model(cfg, bundle, model, attacks->models);
    write_text(dir / "metrics.json", art.eval.to_json_text());
    save_checkpoint((dir / "checkpoint_final.ckpt").string(), model, &attacks->models);
    write_png((dir / "recon_grid.png").string(),
              make_grid({unbatch(art.eval.sample_originals), unbatch(art.eval.sample_recons)}));
    write_attack_plots(art.run_dir, art.train.logs, art.eval.trivial_sensitive);
  } else {
    save_checkpoint((dir / "checkpoint_final.ckpt").string(), model);
  }
  return art;
}

EvalReport cmd_evaluate(const RunConfig& cfg, const std::string& checkpoint_path) {
  cfg.validate();
  Checkpoint ck = load_checkpoint(checkpoint_path);
  if (!(ck.spec == cfg.arch))
    throw ConfigError("evaluate: checkpoint architecture spec disagrees with the config");
  if (!ck.attackers) throw ConfigError("evaluate: checkpoint has no trained attackers (run the train command)");

  DatasetBundle bundle = make_bundle(cfg);
  EvalReport rep = evaluate_split_model(cfg, bundle, ck.model, *ck.attackers);

  const std::string dir = prepare_run_dir(cfg);
  write_text(fs::path(dir) / "metrics.json", rep.to_json_text());
  write_png(dir + "/recon_grid.png", make_grid({unbatch(rep.sample_originals), unbatch(rep.sample_recons)}));
  return rep;
}

std::string WhiteBoxReport::to_json_text() const {
  json j;
  j["similarity"] = {{"mse", similarity.mse},
                     {"psnr_db", std::isinf(similarity.psnr_db) ? 1e9 : similarity.psnr_db},
                     {"ssim", similarity.ssim},
                     {"n_images", similarity.n_images}};
  j["final_objective"] = final_objective;
  j["nonincreasing_fraction"] = nonincreasing_fraction;
  j["n_images"] = n_images;
  return j.dump(2);
}

WhiteBoxReport cmd_whitebox(const RunConfig& cfg, const std::string& checkpoint_path) {
  cfg.validate();
  Checkpoint ck = load_checkpoint(checkpoint_path);
  if (!(ck.spec == cfg.arch)) throw ConfigError("whitebox: checkpoint architecture spec disagrees with the config");

  DatasetBundle bundle = make_bundle(cfg);
  const TensorF originals = first_images(bundle.test, cfg.whitebox_images);

  // The victim releases feature maps of the unseen test inputs; the attacker
  // then inverts them with the leaked extractor parameters.
  Rng eval_rng = Rng(cfg.seed).fork(52);
  const bool noise_on = cfg.eval_noise_on && ck.model.privacy_enabled;
  const TensorF x_e = forward_edge(ck.model, originals, noise_on, eval_rng);

  WhiteBoxResult res = whitebox_reconstruct(ck.model, x_e, cfg.whitebox);

  WhiteBoxReport rep;
  rep.similarity = evaluate_similarity(res.images, originals);
  rep.final_objective = res.objective.empty() ? 0.0 : res.objective.back();
  rep.nonincreasing_fraction =
      res.objective.empty() ? 1.0
                            : 1.0 - static_cast<double>(res.increase_steps) / static_cast<double>(res.objective.size());
  rep.n_images = originals.shape[0];

  const std::string dir = prepare_run_dir(cfg);
  write_text(fs::path(dir) / "whitebox.json", rep.to_json_text());
  write_png(dir + "/whitebox_grid.png", make_grid({unbatch(originals), unbatch(res.images)}));
  return rep;
}

DpTestReport cmd_dp_verify(const RunConfig& cfg) {
  cfg.validate();
  const double t = cfg.privacy.threshold;
  auto rep = dp_ratio_test(t, cfg.privacy.epsilon, t, -t, 1000000, 32, cfg.seed * 1000003 + 17);
  const std::string dir = prepare_run_dir(cfg);
  write_text(fs::path(dir) / "dp_report.json", rep.to_json());
  return rep;
}

SweepReport cmd_sweep_epsilon(const RunConfig& cfg, const std::vector<double>& eps_list) {
  if (eps_list.empty()) throw ConfigError("sweep: epsilon list must be nonempty");
  cfg.validate();

  SweepReport sweep;
  sweep.sweep_dir = prepare_run_dir(cfg);
  const fs::path dir(sweep.sweep_dir);
  write_text(dir / "config.json", cfg.to_json_text());

  std::vector<std::vector<TensorF>> grid_rows;
  auto flush_partial = [&] {
    json rows = json::array();
    for (const auto& r : sweep.rows)
      rows.push_back({{"label", r.label},
                      {"epsilon", r.epsilon},
                      {"analyzer_acc", r.analyzer_acc},
                      {"attacker_acc", r.attacker_acc},
                      {"recon_ssim", r.recon_ssim}});
    write_text(dir / "sweep.json", rows.dump(2));
    std::ofstream csv(dir / "sweep.csv");
    csv << "label,epsilon,analyzer_acc,attacker_acc,recon_ssim\n";
    for (const auto& r : sweep.rows)
      csv << r.label << "," << r.epsilon << "," << r.analyzer_acc << "," << r.attacker_acc << "," << r.recon_ssim
          << "\n";
  };

  auto one_run = [&](const std::string& label, const std::string& method, double epsilon) {
    RunConfig sub = cfg;
    sub.method = method;
    if (epsilon > 0) sub.privacy.epsilon = epsilon;
    sub.output_dir = (dir / label).string();
    RunArtifacts art;
    try {
      art = cmd_train(sub);
    } catch (...) {
      flush_partial();
      throw;  // abort the sweep, partial results stay on disk
    }
    SweepRow row{label, epsilon, art.eval.analyzer_acc, art.eval.attacker_acc, art.eval.deep_recon.ssim};
    sweep.rows.push_back(row);
    if (grid_rows.empty()) grid_rows.push_back(unbatch(art.eval.sample_originals));
    grid_rows.push_back(unbatch(art.eval.sample_recons));
    flush_partial();
  };

  one_run("baseline", "baseline", 0.0);
  for (double eps : eps_list) {
    char label[32];
    std::snprintf(label, sizeof(label), "eps_%g", eps);
    one_run(label, "private", eps);
  }

  // analyzer/attacker accuracy against the privacy budget
  std::vector<double> xs, analyzer, attacker;
  for (const auto& r : sweep.rows) {
    if (r.epsilon <= 0) continue;
    xs.push_back(r.epsilon);
    analyzer.push_back(r.analyzer_acc);
    attacker.push_back(r.attacker_acc);
  }
  const double base_an = sweep.rows.front().analyzer_acc;
  const double base_at = sweep.rows.front().attacker_acc;
  render_plot(sweep.sweep_dir + "/tradeoff.png", "privacy budget trade-off", "epsilon", "accuracy",
              {{"analyzer", xs, analyzer, {40, 120, 40}, false},
               {"attacker", xs, attacker, {200, 40, 40}, false},
               {"baseline analyzer", {xs.front(), xs.back()}, {base_an, base_an}, {120, 180, 120}, false},
               {"baseline attacker", {xs.front(), xs.back()}, {base_at, base_at}, {230, 150, 150}, false}});

  write_png(sweep.sweep_dir + "/recon_grid.png", make_grid(grid_rows));
  return sweep;
}

}  // namespace splitpriv
