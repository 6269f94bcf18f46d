// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 splitpriv contributors

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "splitpriv/harness.hpp"

using namespace splitpriv;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::string transport;
  int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "run configuration file (json)");
  cmd->add_option("--seed", opts.seed, "override the run seed");
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--transport", opts.transport, "loopback|socket")->check(CLI::IsMember({"loopback", "socket"}));
}

RunConfig load_config(const CommonOpts& opts) {
  RunConfig cfg = opts.config_path.empty() ? RunConfig{} : RunConfig::from_file(opts.config_path);
  if (opts.seed >= 0) {
    cfg.seed = static_cast<uint64_t>(opts.seed);
    cfg.train.seed = cfg.seed;
    cfg.attack.seed = cfg.seed;
    cfg.whitebox.seed = cfg.seed;
    cfg.synthetic.seed = cfg.seed;
  }
  if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
  if (!opts.transport.empty()) cfg.transport.mode = opts.transport;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"splitpriv: privacy-preserving split training testbed"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string checkpoint;
  std::vector<double> eps_list;

  auto* c_pre = app.add_subcommand("pretrain", "adversarial edge pre-training (step 1)");
  add_common(c_pre, opts);
  auto* c_train = app.add_subcommand("train", "full edge-cloud training with simultaneous attacks (step 2)");
  add_common(c_train, opts);
  auto* c_eval = app.add_subcommand("evaluate", "held-out evaluation of a checkpoint (step 3)");
  add_common(c_eval, opts);
  c_eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  auto* c_wb = app.add_subcommand("whitebox", "white-box reconstruction attack on a checkpoint");
  add_common(c_wb, opts);
  c_wb->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  auto* c_dp = app.add_subcommand("dp-verify", "statistical check of the epsilon-DP bound");
  add_common(c_dp, opts);
  auto* c_sweep = app.add_subcommand("sweep", "one run per epsilon plus a baseline");
  add_common(c_sweep, opts);
  c_sweep->add_option("--epsilons", eps_list, "privacy budgets to sweep");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = load_config(opts);

    if (c_pre->parsed()) {
      const std::string ckpt = cmd_pretrain(cfg);
      std::cout << "pretrained edge checkpoint: " << ckpt << "\n";
    } else if (c_train->parsed()) {
      RunArtifacts art = cmd_train(cfg);
      std::cout << "run dir: " << art.run_dir << "\n"
                << "analyzer_acc=" << art.eval.analyzer_acc << " attacker_acc=" << art.eval.attacker_acc
                << " recon_ssim=" << art.eval.deep_recon.ssim << "\n";
    } else if (c_eval->parsed()) {
      EvalReport rep = cmd_evaluate(cfg, checkpoint);
      std::cout << rep.to_json_text() << "\n";
    } else if (c_wb->parsed()) {
      WhiteBoxReport rep = cmd_whitebox(cfg, checkpoint);
      std::cout << rep.to_json_text() << "\n";
    } else if (c_dp->parsed()) {
      DpTestReport rep = cmd_dp_verify(cfg);
      std::cout << rep.to_json() << "\n";
      if (!rep.pass) return 1;
    } else if (c_sweep->parsed()) {
      SweepReport rep = cmd_sweep_epsilon(cfg, eps_list.empty() ? cfg.sweep_epsilons : eps_list);
      std::cout << "sweep dir: " << rep.sweep_dir << "\n";
      for (const auto& r : rep.rows)
        std::cout << r.label << ": analyzer=" << r.analyzer_acc << " attacker=" << r.attacker_acc
                  << " ssim=" << r.recon_ssim << "\n";
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SizeError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 3;
  } catch (const TransportError& e) {
    std::cerr << "transport error: " << e.what() << "\n";
    return 4;
  } catch (const ProtocolError& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
