// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors

#include "splitpriv/checkpoint.hpp"

#include <json.hpp>

#include <cstring>
#include <fstream>
#include <map>

namespace splitpriv {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'P', 'H', 'C', 'K'};
constexpr uint32_t kVersion = 1;

json spec_to_json(const ArchitectureSpec& s) {
  return json{{"family", family_to_string(s.family)}, {"split_point", s.split_point},
              {"input_shape", s.input_shape},         {"K_y", s.K_y},
              {"K_z", s.K_z},                         {"base_width", s.base_width}};
}

ArchitectureSpec spec_from_json(const json& j) {
  ArchitectureSpec s;
  s.family = family_from_string(j.at("family").get<std::string>());
  s.split_point = j.at("split_point").get<int>();
  const auto sh = j.at("input_shape").get<std::vector<int64_t>>();
  if (sh.size() != 3) throw ConfigError("checkpoint: input_shape must have 3 entries");
  s.input_shape = {sh[0], sh[1], sh[2]};
  s.K_y = j.at("K_y").get<int>();
  s.K_z = j.at("K_z").get<int>();
  s.base_width = j.at("base_width").get<int>();
  return s;
}

struct PartyIndex {
  std::string name;
  std::vector<Param<float>*> params;
};

std::vector<PartyIndex> party_index(SplitModelF& m, AttackerModelsF* attackers) {
  std::vector<PartyIndex> parties{{"edge", m.edge.params()},
                                  {"exit_analyzer", m.exit_analyzer.params()},
                                  {"exit_adversary", m.exit_adversary.params()},
                                  {"cloud_analyzer", m.cloud_analyzer.params()}};
  if (attackers) {
    parties.push_back({"attacker_classifier", attackers->classifier.params()});
    parties.push_back({"attacker_reconstructor", attackers->reconstructor.params()});
  }
  return parties;
}

}  // namespace

void save_checkpoint(const std::string& path, const SplitModelF& model, const AttackerModelsF* attackers) {
  auto& m = const_cast<SplitModelF&>(model);  // params() is non-const; values are not modified
  auto parties = party_index(m, const_cast<AttackerModelsF*>(attackers));

  json header;
  header["spec"] = spec_to_json(model.spec);
  header["privacy"] = {{"epsilon", model.privacy.epsilon}, {"threshold", model.privacy.threshold}};
  header["privacy_enabled"] = model.privacy_enabled;
  json jparties = json::array();
  for (auto& p : parties) {
    json tensors = json::array();
    for (auto* prm : p.params) tensors.push_back({{"name", prm->name}, {"dims", prm->value.shape}});
    jparties.push_back({{"party", p.name}, {"tensors", tensors}});
  }
  header["parties"] = jparties;
  const std::string htext = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  out.write(kMagic, 4);
  const uint32_t ver = kVersion;
  out.write(reinterpret_cast<const char*>(&ver), 4);
  const uint64_t hlen = htext.size();
  out.write(reinterpret_cast<const char*>(&hlen), 8);
  out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
  for (auto& p : parties)
    for (auto* prm : p.params)
      out.write(reinterpret_cast<const char*>(prm->value.ptr()),
                static_cast<std::streamsize>(prm->value.data.size() * 4));
  if (!out) throw std::runtime_error("save_checkpoint: write failed to " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("load_checkpoint: cannot open " + path);
  char magic[4];
  uint32_t ver = 0;
  uint64_t hlen = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&ver), 4);
  in.read(reinterpret_cast<char*>(&hlen), 8);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw ConfigError("load_checkpoint: not a checkpoint file");
  if (ver != kVersion) throw ConfigError("load_checkpoint: unsupported version " + std::to_string(ver));
  std::string htext(hlen, '\0');
  in.read(htext.data(), static_cast<std::streamsize>(hlen));
  if (!in) throw ConfigError("load_checkpoint: truncated header");

  json header = json::parse(htext, nullptr, false);
  if (header.is_discarded()) throw ConfigError("load_checkpoint: bad header json");

  Checkpoint ck;
  ck.spec = spec_from_json(header.at("spec"));
  ck.privacy.epsilon = header.at("privacy").at("epsilon").get<double>();
  ck.privacy.threshold = header.at("privacy").at("threshold").get<double>();
  ck.privacy_enabled = header.at("privacy_enabled").get<bool>();

  ck.model = build_split_model<float>(ck.spec, ck.privacy, /*seed=*/0, ck.privacy_enabled);
  bool has_attackers = false;
  for (const auto& p : header.at("parties"))
    if (p.at("party") == "attacker_classifier") has_attackers = true;
  if (has_attackers) ck.attackers = build_attackers(ck.spec, ck.model, /*seed=*/0);

  auto parties = party_index(ck.model, ck.attackers ? &*ck.attackers : nullptr);
  std::map<std::string, std::vector<Param<float>*>> by_name;
  for (auto& p : parties) by_name[p.name] = p.params;

  for (const auto& jp : header.at("parties")) {
    const std::string pname = jp.at("party").get<std::string>();
    auto it = by_name.find(pname);
    if (it == by_name.end()) throw ConfigError("load_checkpoint: unknown party " + pname);
    const auto& tensors = jp.at("tensors");
    if (tensors.size() != it->second.size())
      throw ConfigError("load_checkpoint: tensor count mismatch for party " + pname);
    for (size_t i = 0; i < it->second.size(); ++i) {
      Param<float>* prm = it->second[i];
      const auto& jt = tensors[i];
      if (jt.at("name").get<std::string>() != prm->name)
        throw ConfigError("load_checkpoint: tensor name mismatch: " + jt.at("name").get<std::string>() + " vs " +
                          prm->name);
      const auto dims = jt.at("dims").get<std::vector<int64_t>>();
      if (dims != prm->value.shape) throw ConfigError("load_checkpoint: shape mismatch for " + prm->name);
      in.read(reinterpret_cast<char*>(prm->value.ptr()), static_cast<std::streamsize>(prm->value.data.size() * 4));
      if (!in) throw ConfigError("load_checkpoint: truncated blob for " + prm->name);
    }
  }
  return ck;
}

}  // namespace splitpriv
