// Copyright 2026 The Coreaug Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "coreaug/errors.hpp"
#include "coreaug/harness.hpp"

namespace {

using nlohmann::json;

enum class Kind { kString, kInt, kReal, kBool, kIntList, kRealList };

struct FlagSpec {
  const char* flag;
  const char* key;
  Kind kind;
  const char* help;
};

// Flags shared by every experiment command. Values override the config file.
const std::vector<FlagSpec> kFlags = {
    {"--seed", "seed", Kind::kInt, "master seed"},
    {"--seeds", "seeds", Kind::kIntList, "seed list for multi-seed runs"},
    {"--data", "data", Kind::kString, "dataset CSV"},
    {"--test-data", "test_data", Kind::kString, "held-out dataset CSV"},
    {"--test-fraction", "test_fraction", Kind::kReal, "split fraction when no test data given"},
    {"--classes", "classes", Kind::kInt, "class count"},
    {"--kind", "kind", Kind::kString, "generator kind"},
    {"--n", "n", Kind::kInt, "generated points"},
    {"--d", "d", Kind::kInt, "feature dimension"},
    {"--noise", "noise", Kind::kReal, "generator noise"},
    {"--margin", "margin", Kind::kReal, "minimum blob mean separation"},
    {"--stop", "stop", Kind::kString, "xi_threshold | fixed_size"},
    {"--xi", "xi", Kind::kReal, "cover threshold"},
    {"--k-per-class", "k_per_class", Kind::kInt, "fixed budget per class"},
    {"--fraction", "fraction", Kind::kReal, "budget as a fraction of each class"},
    {"--engine", "engine", Kind::kString, "naive | lazy | stochastic"},
    {"--objective", "objective", Kind::kString, "frobenius | facility_location"},
    {"--stochastic-sample", "stochastic_sample", Kind::kInt, "candidates per stochastic step"},
    {"--proxy-mode", "proxy_mode", Kind::kString, "gradient proxy"},
    {"--transform", "transform", Kind::kString, "uniform_ball | gaussian_clipped | pixel_jitter"},
    {"--epsilon0", "epsilon0", Kind::kReal, "perturbation budget"},
    {"--epsilons", "epsilons", Kind::kRealList, "budgets for spectrum runs"},
    {"--r", "r", Kind::kInt, "augmentations per example"},
    {"--regime", "regime", Kind::kString, "coreset_only | full_plus_coreset_aug | random_plus_coreset_aug"},
    {"--baseline", "baseline", Kind::kString, "ours | random | max_loss"},
    {"--refresh-r", "refresh_r", Kind::kInt, "epochs between reselection"},
    {"--epochs", "epochs", Kind::kInt, "training epochs"},
    {"--lr", "lr", Kind::kReal, "learning rate"},
    {"--batch-size", "batch_size", Kind::kInt, "minibatch size, 0 for full batch"},
    {"--hidden", "hidden", Kind::kIntList, "hidden layer widths"},
    {"--activation", "activation", Kind::kString, "tanh | relu"},
    {"--label-noise", "label_noise", Kind::kReal, "fraction of flipped labels"},
    {"--augment", "augment", Kind::kBool, "augment the coreset"},
    {"--pretrain-epochs", "pretrain_epochs", Kind::kInt, "epochs before selection"},
    {"--per-class", "per_class", Kind::kInt, "spectrum subset size per class"},
    {"--compare-untrained", "compare_untrained", Kind::kBool, "also report the untrained net"},
    {"--eigenvalue-draws", "eigenvalue_draws", Kind::kInt, "Monte Carlo draws for the expectation check"},
    {"--instances", "instances", Kind::kInt, "instances per inequality audit"},
    {"--steps", "steps", Kind::kInt, "optimizer steps for envelope checks"},
};

struct Values {
  std::map<std::string, std::string> s;
  std::map<std::string, long long> i;
  std::map<std::string, double> r;
  std::map<std::string, bool> b;
  std::map<std::string, std::vector<long long>> il;
  std::map<std::string, std::vector<double>> rl;
};

void add_flags(CLI::App* cmd, Values& v) {
  for (const auto& f : kFlags) {
    const std::string k = f.key;
    switch (f.kind) {
      case Kind::kString: cmd->add_option(f.flag, v.s[k], f.help); break;
      case Kind::kInt: cmd->add_option(f.flag, v.i[k], f.help); break;
      case Kind::kReal: cmd->add_option(f.flag, v.r[k], f.help); break;
      case Kind::kBool: cmd->add_option(f.flag, v.b[k], f.help); break;
      case Kind::kIntList: cmd->add_option(f.flag, v.il[k], f.help)->delimiter(','); break;
      case Kind::kRealList: cmd->add_option(f.flag, v.rl[k], f.help)->delimiter(','); break;
    }
  }
}

json overlay(const CLI::App* cmd, const Values& v, json cfg) {
  for (const auto& f : kFlags) {
    if (cmd->count(f.flag) == 0) continue;
    const std::string k = f.key;
    switch (f.kind) {
      case Kind::kString: cfg[k] = v.s.at(k); break;
      case Kind::kInt: cfg[k] = v.i.at(k); break;
      case Kind::kReal: cfg[k] = v.r.at(k); break;
      case Kind::kBool: cfg[k] = v.b.at(k); break;
      case Kind::kIntList: cfg[k] = v.il.at(k); break;
      case Kind::kRealList: cfg[k] = v.rl.at(k); break;
    }
  }
  return cfg;
}

int fail(int code, const std::string& kind, const std::string& msg) {
  std::cerr << json{{"error", kind}, {"message", msg}, {"exit_code", code}}.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coreset selection, augmentation and spectrum analysis"};
  app.set_version_flag("--version", std::string(coreaug::kVersion));
  app.require_subcommand(1);

  Values values;
  std::string config_path;
  std::string out_dir;
  std::vector<CLI::App*> experiments;
  for (const char* name : {"gen-data", "select", "train", "spectrum", "bounds"}) {
    CLI::App* cmd = app.add_subcommand(name);
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--out", out_dir, "output directory")->required();
    add_flags(cmd, values);
    experiments.push_back(cmd);
  }
  CLI::App* report = app.add_subcommand("report", "summarize or verify a manifest");
  std::string manifest;
  bool verify = false;
  std::string scratch;
  report->add_option("manifest", manifest, "manifest.json")->required();
  report->add_flag("--verify", verify, "re-run and compare every output");
  report->add_option("--out", scratch, "scratch directory for --verify");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (report->parsed()) {
      const std::filesystem::path m = manifest;
      std::cout << coreaug::summarize_manifest(m);
      if (!verify) return 0;
      const std::filesystem::path dir =
          scratch.empty() ? m.parent_path() / "verify" : std::filesystem::path(scratch);
      const auto diffs = coreaug::verify_manifest(m, dir);
      for (const auto& d : diffs) std::cout << "MISMATCH " << d << "\n";
      std::cout << (diffs.empty() ? "verify: identical\n" : "verify: differences found\n");
      return diffs.empty() ? 0 : 1;
    }
    for (CLI::App* cmd : experiments) {
      if (!cmd->parsed()) continue;
      json cfg = json::object();
      if (!config_path.empty()) cfg = coreaug::load_config(config_path);
      cfg = overlay(cmd, values, cfg);
      cfg["schema_version"] = coreaug::kSchemaVersion;
      const auto res = coreaug::run_command(cmd->get_name(), cfg, out_dir);
      std::cout << res.manifest.string() << "\n";
      return 0;
    }
  } catch (const coreaug::Error& e) {
    const char* kind = e.kind() == coreaug::ErrorKind::kConfig ? "config"
                       : e.kind() == coreaug::ErrorKind::kData ? "data"
                                                               : "numerical";
    return fail(e.exit_code(), kind, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(2, "config", e.what());
  } catch (const std::exception& e) {
    return fail(1, "internal", e.what());
  }
  return 0;
}
