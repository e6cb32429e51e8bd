// Copyright 2026 The MME Authors. All Rights Reserved.
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
// =============================================================================

// Command-line driver. Talks to the library only through the C interface.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mme/mme.h"

namespace {

int report(mme_status status, const char* what) {
  std::cerr << "mme: " << what << ": " << mme_last_error() << "\n";
  switch (status) {
    case MME_ERROR_USAGE: return 2;
    case MME_ERROR_IO: return 3;
    default: return 1;
  }
}

std::string take(char* s) {
  std::string out = s == nullptr ? "" : s;
  mme_string_free(s);
  return out;
}

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream os;
  os << in.rdbuf();
  out = os.str();
  return true;
}

std::vector<int> parse_shape(const std::string& text) {
  std::vector<int> shape;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, 'x')) shape.push_back(std::stoi(part));
  return shape;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimizer-entropy Bayesian optimization benchmarks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mme_version()));

  // ---- run -----------------------------------------------------------------
  CLI::App* run = app.add_subcommand("run", "Run a batch of optimization repetitions");
  std::string config_path;
  run->add_option("--config", config_path, "JSON configuration file; flags given on the command line override it")
      ->check(CLI::ExistingFile);
  // Values are forwarded as text so the library applies one parser to both
  // the config file and the flags.
  std::map<std::string, std::string> values;
  const std::vector<std::pair<std::string, std::string>> flags = {
      {"objective", "toy1d | hosaki | camel6"},
      {"criterion", "mme | fast_mme | mei | pi | variance"},
      {"grid", "grid shape, e.g. 121 or 15x15"},
      {"noise-std", "observation noise standard deviation"},
      {"n-init", "initial design size (default 2 for MME, 10 for baselines)"},
      {"n-iter", "number of sequential evaluations"},
      {"reps", "number of repetitions"},
      {"mc-samples", "Monte Carlo draws per candidate for mme"},
      {"epsilon", "improvement margin for mei and pi"},
      {"cov-mode", "independent | with_covariance"},
      {"seed", "base seed; repetition r uses seed + r"},
      {"refit-every", "refit hyperparameters every k iterations"},
      {"restarts", "random restarts of the hyperparameter fit"},
      {"threads", "worker threads"},
      {"out", "output directory"},
  };
  std::vector<std::pair<std::string, CLI::Option*>> options;
  for (const auto& [name, help] : flags) options.emplace_back(name, run->add_option("--" + name, values[name], help));
  bool timing = false;
  CLI::Option* timing_flag = run->add_flag("--timing", timing, "record wall-clock time per iteration");
  bool quiet = false;
  run->add_flag("-q,--quiet", quiet, "do not print the summary");

  // ---- oracle-check ---------------------------------------------------------
  CLI::App* oracle = app.add_subcommand("oracle-check", "Print continuous and grid minimizers of an objective");
  std::string oracle_name;
  oracle->add_option("--objective", oracle_name, "objective name")->required();
  std::string oracle_grid;
  oracle->add_option("--grid", oracle_grid, "grid shape (default per objective)");

  // ---- selfcheck ------------------------------------------------------------
  CLI::App* selfcheck = app.add_subcommand("selfcheck", "Run numerical property checks");
  std::uint64_t check_seed = 20260101;
  selfcheck->add_option("--seed", check_seed, "random seed");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    mme_experiment* exp = nullptr;
    if (mme_status st = mme_experiment_create(&exp); st != MME_OK) return report(st, "create");
    auto finish = [&](int c) {
      mme_experiment_destroy(exp);
      return c;
    };
    if (!config_path.empty()) {
      std::string text;
      if (!read_file(config_path, text)) {
        std::cerr << "mme: cannot read " << config_path << "\n";
        return finish(3);
      }
      if (mme_status st = mme_experiment_load_json(exp, text.c_str()); st != MME_OK)
        return finish(report(st, "config"));
    }
    for (const auto& [name, opt] : options) {
      if (opt->count() == 0) continue;
      if (mme_status st = mme_experiment_set(exp, name.c_str(), values[name].c_str()); st != MME_OK)
        return finish(report(st, ("--" + name).c_str()));
    }
    if (timing_flag->count() > 0) mme_experiment_set(exp, "record_timing", timing ? "true" : "false");

    if (mme_status st = mme_experiment_run(exp, nullptr); st != MME_OK) return finish(report(st, "run"));
    char* summary = nullptr;
    if (mme_status st = mme_experiment_summary_json(exp, &summary); st != MME_OK)
      return finish(report(st, "summary"));
    if (!quiet) std::cout << take(summary) << "\n";
    else take(summary);
    return finish(0);
  }

  if (oracle->parsed()) {
    char* text = nullptr;
    mme_status st;
    if (oracle_grid.empty()) {
      st = mme_ground_truth_json(oracle_name.c_str(), nullptr, 0, &text);
    } else {
      std::vector<int> shape;
      try {
        shape = parse_shape(oracle_grid);
      } catch (const std::exception&) {
        std::cerr << "mme: malformed grid shape '" << oracle_grid << "'\n";
        return 2;
      }
      st = mme_ground_truth_json(oracle_name.c_str(), shape.data(), shape.size(), &text);
    }
    if (st != MME_OK) return report(st, "oracle-check");
    std::cout << take(text) << "\n";
    return 0;
  }

  if (selfcheck->parsed()) {
    char* text = nullptr;
    int ok = 0;
    if (mme_status st = mme_selfcheck(check_seed, &text, &ok); st != MME_OK) return report(st, "selfcheck");
    std::cout << take(text) << "\n";
    return ok ? 0 : 1;
  }
  return 0;
}
