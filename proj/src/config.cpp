// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors

#include "splitpriv/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace splitpriv {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& section) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw SchemaError("config: unknown key '" + it.key() + "' in " + section);
}

template <typename T>
void opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void RunConfig::validate() const {
  if (dataset_type != "synthetic" && dataset_type != "external")
    throw SchemaError("config: dataset.type must be synthetic or external");
  if (dataset_type == "external" && external_path.empty())
    throw SchemaError("config: dataset.path required for external datasets");
  if (dataset_type == "synthetic") synthetic.validate();
  for (int64_t s : sizes)
    if (s <= 0) throw SchemaError("config: split sizes must be positive");
  arch.validate();
  privacy.validate();
  if (method != "private" && method != "baseline") throw SchemaError("config: method must be private or baseline");
  train.validate();
  whitebox.validate();
  transport.validate();
  if (whitebox_images < 1) throw SchemaError("config: attack.whitebox_images must be >= 1");
  if (sweep_epsilons.empty()) throw SchemaError("config: sweep.epsilons must be nonempty");
  for (double e : sweep_epsilons)
    if (e <= 0) throw SchemaError("config: sweep epsilons must be positive");
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw SchemaError("config: invalid json");
  reject_unknown(j, {"dataset", "arch", "privacy", "train", "attack", "transport", "sweep", "output_dir", "seed",
                     "method"},
                 "top level");

  RunConfig c;
  opt(j, "output_dir", c.output_dir);
  opt(j, "seed", c.seed);
  opt(j, "method", c.method);
  c.train.seed = c.seed;
  c.attack.seed = c.seed;
  c.whitebox.seed = c.seed;
  c.synthetic.seed = c.seed;

  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    reject_unknown(d,
                   {"type", "path", "desired_attr", "sensitive_attr", "image_size", "sizes", "K_y", "K_z",
                    "correlation", "y_probs", "background", "background_noise"},
                   "dataset");
    opt(d, "type", c.dataset_type);
    opt(d, "path", c.external_path);
    opt(d, "desired_attr", c.desired_attr);
    opt(d, "sensitive_attr", c.sensitive_attr);
    opt(d, "image_size", c.external_image_size);
    if (d.contains("sizes")) {
      const auto v = d.at("sizes").get<std::vector<int64_t>>();
      if (v.size() != 3) throw SchemaError("config: dataset.sizes must be [user, attacker, test]");
      c.sizes = {v[0], v[1], v[2]};
    }
    opt(d, "K_y", c.synthetic.K_y);
    opt(d, "K_z", c.synthetic.K_z);
    opt(d, "correlation", c.synthetic.correlation);
    opt(d, "y_probs", c.synthetic.y_probs);
    opt(d, "background", c.synthetic.background);
    opt(d, "background_noise", c.synthetic.background_noise);
    if (d.contains("image_size") && c.dataset_type == "synthetic") c.synthetic.image_size = d.at("image_size").get<int>();
  }

  if (j.contains("arch")) {
    const auto& a = j.at("arch");
    reject_unknown(a, {"family", "split_point", "input_shape", "base_width"}, "arch");
    if (a.contains("family")) c.arch.family = family_from_string(a.at("family").get<std::string>());
    opt(a, "split_point", c.arch.split_point);
    opt(a, "base_width", c.arch.base_width);
    if (a.contains("input_shape")) {
      const auto v = a.at("input_shape").get<std::vector<int64_t>>();
      if (v.size() != 3) throw SchemaError("config: arch.input_shape must be [C,H,W]");
      c.arch.input_shape = {v[0], v[1], v[2]};
    }
  }

  if (j.contains("privacy")) {
    const auto& p = j.at("privacy");
    reject_unknown(p, {"epsilon", "threshold"}, "privacy");
    opt(p, "epsilon", c.privacy.epsilon);
    opt(p, "threshold", c.privacy.threshold);
  }

  if (j.contains("train")) {
    const auto& t = j.at("train");
    reject_unknown(t,
                   {"n_p", "n_t", "lambda", "m_a", "batch_size", "optimizer", "lr_edge", "lr_cloud", "lr_adversary",
                    "noise_on", "verify_freeze", "checkpoint_every"},
                   "train");
    opt(t, "n_p", c.train.n_p);
    opt(t, "n_t", c.train.n_t);
    opt(t, "lambda", c.train.lambda);
    opt(t, "m_a", c.train.m_a);
    opt(t, "batch_size", c.train.batch_size);
    opt(t, "optimizer", c.train.optimizer);
    opt(t, "lr_edge", c.train.lr_edge);
    opt(t, "lr_cloud", c.train.lr_cloud);
    opt(t, "lr_adversary", c.train.lr_adversary);
    opt(t, "noise_on", c.train.noise_on);
    opt(t, "verify_freeze", c.train.verify_freeze);
    opt(t, "checkpoint_every", c.checkpoint_every);
  }

  if (j.contains("attack")) {
    const auto& a = j.at("attack");
    reject_unknown(a, {"enabled", "batch_size", "lr", "whitebox_steps", "whitebox_alpha", "whitebox_step_size",
                       "whitebox_init", "whitebox_images"},
                   "attack");
    opt(a, "enabled", c.attacks_enabled);
    opt(a, "batch_size", c.attack.batch_size);
    opt(a, "lr", c.attack.lr);
    opt(a, "whitebox_steps", c.whitebox.steps);
    opt(a, "whitebox_alpha", c.whitebox.alpha);
    opt(a, "whitebox_step_size", c.whitebox.step_size);
    opt(a, "whitebox_init", c.whitebox.init);
    opt(a, "whitebox_images", c.whitebox_images);
  }

  if (j.contains("transport")) {
    const auto& t = j.at("transport");
    reject_unknown(t, {"mode", "host", "port", "timeout_s"}, "transport");
    opt(t, "mode", c.transport.mode);
    opt(t, "host", c.transport.host);
    opt(t, "port", c.transport.port);
    opt(t, "timeout_s", c.transport.timeout_s);
  }

  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    reject_unknown(s, {"epsilons"}, "sweep");
    opt(s, "epsilons", c.sweep_epsilons);
  }

  // K_y/K_z flow from the dataset into the architecture heads.
  c.arch.K_y = c.dataset_type == "synthetic" ? c.synthetic.K_y : 2;
  c.arch.K_z = c.dataset_type == "synthetic" ? c.synthetic.K_z : 2;

  c.validate();
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string RunConfig::to_json_text() const {
  json j;
  j["dataset"] = {{"type", dataset_type},
                  {"sizes", sizes},
                  {"image_size", dataset_type == "synthetic" ? synthetic.image_size : external_image_size},
                  {"K_y", synthetic.K_y},
                  {"K_z", synthetic.K_z},
                  {"correlation", synthetic.correlation},
                  {"background", synthetic.background},
                  {"background_noise", synthetic.background_noise}};
  if (dataset_type == "external") {
    j["dataset"]["path"] = external_path;
    j["dataset"]["desired_attr"] = desired_attr;
    j["dataset"]["sensitive_attr"] = sensitive_attr;
  }
  if (!synthetic.y_probs.empty()) j["dataset"]["y_probs"] = synthetic.y_probs;
  j["arch"] = {{"family", family_to_string(arch.family)},
               {"split_point", arch.split_point},
               {"input_shape", arch.input_shape},
               {"base_width", arch.base_width}};
  j["privacy"] = {{"epsilon", privacy.epsilon}, {"threshold", privacy.threshold}};
  j["method"] = method;
  j["train"] = {{"n_p", train.n_p},
                {"n_t", train.n_t},
                {"lambda", train.lambda},
                {"m_a", train.m_a},
                {"batch_size", train.batch_size},
                {"optimizer", train.optimizer},
                {"lr_edge", train.lr_edge},
                {"lr_cloud", train.lr_cloud},
                {"lr_adversary", train.lr_adversary},
                {"noise_on", train.noise_on},
                {"verify_freeze", train.verify_freeze},
                {"checkpoint_every", checkpoint_every}};
  j["attack"] = {{"enabled", attacks_enabled},
                 {"batch_size", attack.batch_size},
                 {"lr", attack.lr},
                 {"whitebox_steps", whitebox.steps},
                 {"whitebox_alpha", whitebox.alpha},
                 {"whitebox_step_size", whitebox.step_size},
                 {"whitebox_init", whitebox.init},
                 {"whitebox_images", whitebox_images}};
  j["transport"] = {{"mode", transport.mode},
                    {"host", transport.host},
                    {"port", transport.port},
                    {"timeout_s", transport.timeout_s}};
  j["sweep"] = {{"epsilons", sweep_epsilons}};
  j["output_dir"] = output_dir;
  j["seed"] = seed;
  return j.dump(2);
}

}  // namespace splitpriv
