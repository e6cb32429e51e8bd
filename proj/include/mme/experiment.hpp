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

// Sequential optimization loop, repetition over seeds, and on-disk outputs.

#ifndef MME_EXPERIMENT_HPP_
#define MME_EXPERIMENT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "mme/acquisition.hpp"
#include "mme/gp.hpp"
#include "mme/grid.hpp"
#include "mme/minimizer_posterior.hpp"
#include "mme/testbed.hpp"

namespace mme {

struct ExperimentConfig {
  std::string objective = "toy1d";
  std::vector<int> grid_shape;  // empty: default_grid_shape(objective)
  double noise_std = 0.1;
  AcquisitionConfig acquisition;
  int n_init = -1;  // -1: 2 for MME variants, 10 for baselines
  int n_iter = 50;
  int refit_every = 1;
  int repetitions = 1;
  std::uint64_t base_seed = 1;
  int restarts = 5;
  int threads = 1;
  // Wall-clock timings make outputs non-reproducible, so they are only
  // written when asked for.
  bool record_timing = false;
  std::string output_dir;

  // Copy with every defaulted field made explicit.
  ExperimentConfig resolved() const;
  void validate() const;
};

// Serialization mirrors the field names above; unknown keys are rejected.
std::string config_to_json(const ExperimentConfig& cfg, int indent = 2);
ExperimentConfig config_from_json(const std::string& text, ExperimentConfig base = {});
// Sets one field from its textual form (key as in the JSON schema).
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

struct IterationRecord {
  int iteration = 0;
  std::size_t dataset_size = 0;
  std::size_t chosen_index = 0;
  Point chosen;
  double observed = 0.0;
  std::size_t incumbent_index = 0;
  Point incumbent_point;
  double incumbent_value = 0.0;  // estimated minimum
  double entropy = 0.0;
  double kl = 0.0;
  double wall_ms = 0.0;
  Hyperparameters hyperparameters;

  bool operator==(const IterationRecord& other) const;
};

std::string record_to_json(const IterationRecord& rec, bool include_timing);
IterationRecord record_from_json(const std::string& line);

struct RunResult {
  std::uint64_t seed = 0;
  bool completed = false;
  std::string error;
  std::vector<IterationRecord> records;
  Dataset data;
  MinimizerDistribution final_distribution;
  // Posterior mean at each ground-truth grid minimizer after the last round.
  std::vector<double> minimizer_estimates;
  std::vector<bool> recovered;
};

// Thrown by run_single when a numerical step fails mid-run.
class RunError : public NumericalError {
 public:
  RunError(const std::string& what, int iteration, RunResult partial)
      : NumericalError(what), iteration_(iteration), partial_(std::move(partial)) {}
  int iteration() const { return iteration_; }
  const RunResult& partial() const { return partial_; }

 private:
  int iteration_;
  RunResult partial_;
};

RunResult run_single(const ExperimentConfig& cfg, std::uint64_t seed);
RunResult run_single(const ExperimentConfig& cfg, std::uint64_t seed, const GroundTruth& truth);

// A true grid minimizer counts as recovered when |dist| has a local maximum
// (mass >= every neighbour) within one grid cell of it carrying at least twice
// the uniform mass.
std::vector<bool> recovered_minimizers(const MinimizerDistribution& dist, const Grid& grid,
                                       const std::vector<std::size_t>& grid_minimizers);

// Median; mean of the two middle order statistics for even sizes.
double median(std::vector<double> values);

struct BatchSummary {
  ExperimentConfig config;  // resolved
  GroundTruth truth;
  std::vector<RunResult> runs;
  std::size_t completed = 0;
  // Indexed by iteration - 1.
  std::vector<double> median_entropy;
  std::vector<double> median_kl;
  std::vector<double> median_fmin;
  std::vector<std::size_t> final_modes;
  // Completed runs in which every grid minimizer was recovered.
  std::size_t all_recovered = 0;
};

// Aggregates already-finished runs (completed ones only).
BatchSummary summarize(const ExperimentConfig& cfg, const GroundTruth& truth, std::vector<RunResult> runs);

// Runs cfg.repetitions repetitions with seeds base_seed + r. Repetitions run
// on up to cfg.threads workers; the summary does not depend on scheduling.
BatchSummary run_batch(const ExperimentConfig& cfg);

// Final medians, recovery counts and per-run outcomes.
std::string summary_to_json(const BatchSummary& summary, int indent = 2);

// Writes run_###.jsonl, batch.csv, summary.json and manifest.json under |dir|
// (created if missing). Byte-identical for identical inputs.
void write_outputs(const BatchSummary& summary, const std::string& dir);

// Spearman rank correlation (average ranks for ties).
double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b);

struct FastMmeDiagnostic {
  std::size_t observations = 0;
  int mc_samples = 0;
  std::vector<double> fast_scores;
  std::vector<double> mme_scores;
  double spearman = 0.0;
  bool same_choice = false;
};

// Scores every candidate of |objective|'s default grid under fast_mme and mme
// after |observations| random noisy observations.
FastMmeDiagnostic fast_vs_full_diagnostic(const std::string& objective, std::size_t observations,
                                          int mc_samples, std::uint64_t seed, double noise_std = 0.1);

}  // namespace mme

#endif  // MME_EXPERIMENT_HPP_
