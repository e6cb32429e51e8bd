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

#include "mme/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "mme/errors.hpp"

namespace mme {

using json = nlohmann::ordered_json;

namespace {

bool is_mme(Criterion c) { return c == Criterion::kMme || c == Criterion::kFastMme; }

json point_json(const Point& p) {
  json a = json::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) a.push_back(p[i]);
  return a;
}

Point point_from(const json& a) {
  Point p(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) p[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return p;
}

// Infinite KL values are stored as null.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double from_finite_or_null(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

std::string number_text(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return json(v).dump();
}

json hp_json(const Hyperparameters& hp) {
  return json{{"lengthscale", hp.lengthscale},
              {"signal_variance", hp.signal_variance},
              {"noise_variance", hp.noise_variance},
              {"mean_const", hp.mean_const}};
}

Hyperparameters hp_from(const json& j) {
  return {j.at("lengthscale").get<double>(), j.at("signal_variance").get<double>(),
          j.at("noise_variance").get<double>(), j.at("mean_const").get<double>()};
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) throw std::out_of_range(value);
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw UsageError("invalid integer for " + key + ": '" + value + "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw UsageError("invalid number for " + key + ": '" + value + "'");
  }
}

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

}  // namespace

ExperimentConfig ExperimentConfig::resolved() const {
  ExperimentConfig r = *this;
  const Objective& obj = objective_by_name(objective);
  if (r.grid_shape.empty()) r.grid_shape = default_grid_shape(obj);
  if (r.n_init < 0) r.n_init = is_mme(acquisition.criterion) ? 2 : 10;
  return r;
}

void ExperimentConfig::validate() const {
  const Objective& obj = objective_by_name(objective);
  if (!grid_shape.empty() && grid_shape.size() != static_cast<std::size_t>(obj.dimension))
    throw UsageError("grid shape " + format_grid_shape(grid_shape) + " does not match the " +
                     std::to_string(obj.dimension) + "-dimensional objective " + objective);
  for (int s : grid_shape)
    if (s < 1) throw UsageError("grid shape entries must be positive");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw UsageError("noise_std must be finite and >= 0");
  acquisition.validate();
  if (n_init < -1) throw UsageError("n_init must be >= 0");
  if (n_iter < 1) throw UsageError("n_iter must be >= 1");
  if (refit_every < 1) throw UsageError("refit_every must be >= 1");
  if (repetitions < 1) throw UsageError("reps must be >= 1");
  if (restarts < 1) throw UsageError("restarts must be >= 1");
  if (threads < 1) throw UsageError("threads must be >= 1");
}

namespace {

json config_json(const ExperimentConfig& cfg, bool with_runtime_fields) {
  json j;
  j["objective"] = cfg.objective;
  j["grid"] = format_grid_shape(cfg.grid_shape);
  j["noise_std"] = cfg.noise_std;
  j["criterion"] = to_string(cfg.acquisition.criterion);
  j["mc_samples"] = cfg.acquisition.mc_samples;
  j["epsilon"] = cfg.acquisition.epsilon;
  j["cov_mode"] = to_string(cfg.acquisition.cov_mode);
  j["n_init"] = cfg.n_init;
  j["n_iter"] = cfg.n_iter;
  j["refit_every"] = cfg.refit_every;
  j["reps"] = cfg.repetitions;
  j["seed"] = cfg.base_seed;
  j["restarts"] = cfg.restarts;
  j["record_timing"] = cfg.record_timing;
  if (with_runtime_fields) {
    j["threads"] = cfg.threads;
    j["out"] = cfg.output_dir;
  }
  return j;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& cfg, int indent) {
  return config_json(cfg, true).dump(indent);
}

void set_config_value(ExperimentConfig& cfg, const std::string& raw_key, const std::string& value) {
  const std::string key = normalize_key(raw_key);
  if (key == "objective") {
    objective_by_name(value);
    cfg.objective = value;
  } else if (key == "grid") {
    cfg.grid_shape = value.empty() ? std::vector<int>{} : parse_grid_shape(value);
  } else if (key == "noise_std") {
    cfg.noise_std = parse_double(key, value);
  } else if (key == "criterion") {
    cfg.acquisition.criterion = parse_criterion(value);
  } else if (key == "mc_samples") {
    cfg.acquisition.mc_samples = parse_int(key, value);
  } else if (key == "epsilon") {
    cfg.acquisition.epsilon = parse_double(key, value);
  } else if (key == "cov_mode") {
    cfg.acquisition.cov_mode = parse_covariance_mode(value);
  } else if (key == "n_init") {
    cfg.n_init = parse_int(key, value);
  } else if (key == "n_iter") {
    cfg.n_iter = parse_int(key, value);
  } else if (key == "refit_every") {
    cfg.refit_every = parse_int(key, value);
  } else if (key == "reps") {
    cfg.repetitions = parse_int(key, value);
  } else if (key == "seed") {
    try {
      if (value.empty() || value[0] == '-' || value[0] == '+') throw std::invalid_argument(value);
      std::size_t pos = 0;
      cfg.base_seed = std::stoull(value, &pos);
      if (pos != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw UsageError("invalid seed '" + value + "'");
    }
  } else if (key == "restarts") {
    cfg.restarts = parse_int(key, value);
  } else if (key == "threads") {
    cfg.threads = parse_int(key, value);
  } else if (key == "record_timing") {
    if (value != "true" && value != "false" && value != "1" && value != "0")
      throw UsageError("record_timing expects true|false");
    cfg.record_timing = value == "true" || value == "1";
  } else if (key == "out") {
    cfg.output_dir = value;
  } else {
    throw UsageError("unknown configuration key '" + raw_key + "'");
  }
}

ExperimentConfig config_from_json(const std::string& text, ExperimentConfig base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("configuration is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw UsageError("configuration JSON must be an object");
  for (const auto& [key, value] : j.items()) {
    std::string v;
    if (value.is_string()) {
      v = value.get<std::string>();
    } else if (value.is_boolean()) {
      v = value.get<bool>() ? "true" : "false";
    } else if (value.is_number_integer() || value.is_number_unsigned()) {
      v = value.dump();
    } else if (value.is_number_float()) {
      v = number_text(value.get<double>());
    } else if (value.is_array() && normalize_key(key) == "grid") {
      std::vector<int> shape;
      for (const auto& e : value) shape.push_back(e.get<int>());
      v = format_grid_shape(shape);
    } else {
      throw UsageError("unsupported value for configuration key '" + key + "'");
    }
    set_config_value(base, key, v);
  }
  return base;
}

bool IterationRecord::operator==(const IterationRecord& o) const {
  auto same = [](double a, double b) { return a == b || (std::isinf(a) && std::isinf(b) && (a > 0) == (b > 0)); };
  return iteration == o.iteration && dataset_size == o.dataset_size && chosen_index == o.chosen_index &&
         chosen == o.chosen && observed == o.observed && incumbent_index == o.incumbent_index &&
         incumbent_point == o.incumbent_point && incumbent_value == o.incumbent_value &&
         entropy == o.entropy && same(kl, o.kl) && wall_ms == o.wall_ms && hyperparameters == o.hyperparameters;
}

std::string record_to_json(const IterationRecord& rec, bool include_timing) {
  json j;
  j["iteration"] = rec.iteration;
  j["dataset_size"] = rec.dataset_size;
  j["chosen_index"] = rec.chosen_index;
  j["chosen"] = point_json(rec.chosen);
  j["observed"] = rec.observed;
  j["incumbent_index"] = rec.incumbent_index;
  j["incumbent"] = point_json(rec.incumbent_point);
  j["estimated_minimum"] = rec.incumbent_value;
  j["entropy"] = rec.entropy;
  j["kl"] = finite_or_null(rec.kl);
  j["hyperparameters"] = hp_json(rec.hyperparameters);
  if (include_timing) j["wall_ms"] = rec.wall_ms;
  return j.dump();
}

IterationRecord record_from_json(const std::string& line) {
  try {
    const json j = json::parse(line);
    IterationRecord r;
    r.iteration = j.at("iteration").get<int>();
    r.dataset_size = j.at("dataset_size").get<std::size_t>();
    r.chosen_index = j.at("chosen_index").get<std::size_t>();
    r.chosen = point_from(j.at("chosen"));
    r.observed = j.at("observed").get<double>();
    r.incumbent_index = j.at("incumbent_index").get<std::size_t>();
    r.incumbent_point = point_from(j.at("incumbent"));
    r.incumbent_value = j.at("estimated_minimum").get<double>();
    r.entropy = j.at("entropy").get<double>();
    r.kl = from_finite_or_null(j.at("kl"));
    r.hyperparameters = hp_from(j.at("hyperparameters"));
    if (j.contains("wall_ms")) r.wall_ms = j.at("wall_ms").get<double>();
    return r;
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed iteration record: ") + e.what());
  }
}

std::vector<bool> recovered_minimizers(const MinimizerDistribution& dist, const Grid& grid,
                                       const std::vector<std::size_t>& grid_minimizers) {
  if (dist.size() != grid.size()) throw UsageError("distribution does not match the grid");
  const double threshold = 2.0 / static_cast<double>(grid.size());
  std::vector<std::size_t> peaks;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double p = dist.probabilities[i];
    if (p < threshold) continue;
    bool peak = true;
    for (std::size_t j : grid.neighbors(i)) {
      if (dist.probabilities[j] > p) {
        peak = false;
        break;
      }
    }
    if (peak) peaks.push_back(i);
  }
  std::vector<bool> out;
  for (std::size_t m : grid_minimizers) {
    bool found = false;
    for (std::size_t p : peaks) found = found || grid.index_distance(p, m) <= 1;
    out.push_back(found);
  }
  return out;
}

namespace {

struct Streams {
  Rng design;
  Rng noise;
  Rng fit;
  explicit Streams(std::uint64_t seed)
      : design(derive_seed(seed, 0x64657369676eULL)),
        noise(derive_seed(seed, 0x6e6f697365ULL)),
        fit(derive_seed(seed, 0x666974ULL)) {}
};

Hyperparameters refit(const Dataset& data, const Box& domain, const ExperimentConfig& cfg, Rng& rng,
                      const Hyperparameters* previous) {
  if (data.size() < 2) return default_hyperparameters(data, domain);
  const HyperparameterBounds bounds = default_bounds(data, domain);
  std::vector<Hyperparameters> warm;
  if (previous != nullptr) warm.push_back(*previous);
  return fit_hyperparameters(data, cfg.restarts, bounds, rng, warm);
}

}  // namespace

RunResult run_single(const ExperimentConfig& cfg_in, std::uint64_t seed) {
  const ExperimentConfig cfg = cfg_in.resolved();
  const Objective& obj = objective_by_name(cfg.objective);
  const Grid grid(obj.domain, cfg.grid_shape);
  return run_single(cfg, seed, ground_truth(obj, grid));
}

RunResult run_single(const ExperimentConfig& cfg_in, std::uint64_t seed, const GroundTruth& truth) {
  cfg_in.validate();
  const ExperimentConfig cfg = cfg_in.resolved();
  const Objective& obj = objective_by_name(cfg.objective);
  const Grid grid(obj.domain, cfg.grid_shape);
  if (truth.reference_distribution.size() != grid.size())
    throw UsageError("ground truth was computed on a different grid");

  const NoisyOracle oracle{&obj, cfg.noise_std};
  Streams streams(seed);
  RunResult result;
  result.seed = seed;

  // Initial design: distinct grid points while the grid allows it.
  {
    const std::size_t g = grid.size();
    const auto n_init = static_cast<std::size_t>(cfg.n_init);
    std::vector<std::size_t> order(g);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t k = 0; k < n_init; ++k) {
      std::size_t idx = 0;
      if (k < g) {
        std::uniform_int_distribution<std::size_t> pick(k, g - 1);
        std::swap(order[k], order[pick(streams.design)]);
        idx = order[k];
      } else {
        std::uniform_int_distribution<std::size_t> pick(0, g - 1);
        idx = pick(streams.design);
      }
      result.data.add(grid.point(idx), noisy_query(oracle, grid.point(idx), streams.noise));
    }
  }

  const Direction direction = direction_for(cfg.acquisition.criterion);
  int iteration = 0;
  try {
    Hyperparameters hp = refit(result.data, obj.domain, cfg, streams.fit, nullptr);
    for (iteration = 1; iteration <= cfg.n_iter; ++iteration) {
      const auto t0 = std::chrono::steady_clock::now();
      IterationRecord rec;
      rec.iteration = iteration;
      {
        const PosteriorSnapshot post = build_posterior(result.data, hp);
        const GridPosterior gp(post, grid);
        const std::vector<double> scores =
            score_grid(gp, cfg.acquisition, seed, static_cast<std::uint64_t>(iteration), cfg.threads);
        rec.chosen_index = select_next(scores, direction);
      }
      rec.chosen = grid.point(rec.chosen_index);
      rec.observed = noisy_query(oracle, rec.chosen, streams.noise);
      result.data.add(rec.chosen, rec.observed);
      if (iteration % cfg.refit_every == 0) hp = refit(result.data, obj.domain, cfg, streams.fit, &hp);

      const PosteriorSnapshot post = build_posterior(result.data, hp);
      const Incumbent inc = incumbent(post, grid);
      const MinimizerDistribution dist = proxy_distribution(post, grid, inc, cfg.acquisition.cov_mode);
      rec.dataset_size = result.data.size();
      rec.incumbent_index = inc.index;
      rec.incumbent_point = inc.point;
      rec.incumbent_value = inc.value;
      rec.entropy = entropy(dist);
      rec.kl = kl_divergence(truth.reference_distribution, dist);
      rec.hyperparameters = hp;
      if (cfg.record_timing)
        rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      result.records.push_back(std::move(rec));

      if (iteration == cfg.n_iter) {
        result.final_distribution = dist;
        std::vector<Point> pts;
        for (std::size_t m : truth.grid_minimizers) pts.push_back(grid.point(m));
        if (!pts.empty()) {
          const MarginalPrediction mp = predict_marginal(post, pts);
          result.minimizer_estimates.assign(mp.mean.data(), mp.mean.data() + mp.mean.size());
        }
        result.recovered = recovered_minimizers(dist, grid, truth.grid_minimizers);
      }
    }
  } catch (const NumericalError& e) {
    result.error = e.what();
    throw RunError("run with seed " + std::to_string(seed) + " failed at iteration " +
                       std::to_string(iteration) + ": " + e.what(),
                   iteration, result);
  }
  result.completed = true;
  return result;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  const double a = values[n / 2 - 1];
  const double b = values[n / 2];
  if (std::isinf(a) && std::isinf(b) && (a > 0) == (b > 0)) return a;
  return 0.5 * (a + b);
}

BatchSummary summarize(const ExperimentConfig& cfg, const GroundTruth& truth, std::vector<RunResult> runs) {
  BatchSummary s;
  s.config = cfg.resolved();
  s.truth = truth;
  s.runs = std::move(runs);
  std::vector<const RunResult*> done;
  for (const RunResult& r : s.runs)
    if (r.completed) done.push_back(&r);
  s.completed = done.size();
  if (done.empty()) return s;

  std::size_t iterations = done.front()->records.size();
  for (const RunResult* r : done) iterations = std::min(iterations, r->records.size());
  for (std::size_t k = 0; k < iterations; ++k) {
    std::vector<double> h, kl, fmin;
    for (const RunResult* r : done) {
      h.push_back(r->records[k].entropy);
      kl.push_back(r->records[k].kl);
      fmin.push_back(r->records[k].incumbent_value);
    }
    s.median_entropy.push_back(median(std::move(h)));
    s.median_kl.push_back(median(std::move(kl)));
    s.median_fmin.push_back(median(std::move(fmin)));
  }
  for (const RunResult* r : done) {
    if (!r->final_distribution.probabilities.empty()) s.final_modes.push_back(r->final_distribution.mode());
    const bool all = !r->recovered.empty() && std::all_of(r->recovered.begin(), r->recovered.end(), [](bool b) { return b; });
    if (all) ++s.all_recovered;
  }
  return s;
}

BatchSummary run_batch(const ExperimentConfig& cfg_in) {
  cfg_in.validate();
  const ExperimentConfig cfg = cfg_in.resolved();
  const Objective& obj = objective_by_name(cfg.objective);
  const Grid grid(obj.domain, cfg.grid_shape);
  const GroundTruth truth = ground_truth(obj, grid);

  const auto reps = static_cast<std::size_t>(cfg.repetitions);
  std::vector<RunResult> runs(reps);
  // Repetitions are parallelized; candidate scoring inside a run then stays
  // single-threaded to avoid oversubscription.
  ExperimentConfig inner = cfg;
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), reps);
  if (workers > 1) inner.threads = 1;

  auto run_one = [&](std::size_t r) {
    const std::uint64_t seed = cfg.base_seed + r;
    try {
      runs[r] = run_single(inner, seed, truth);
    } catch (const RunError& e) {
      runs[r] = e.partial();
      runs[r].error = e.what();
    } catch (const NumericalError& e) {
      runs[r].seed = seed;
      runs[r].error = e.what();
    }
  };
  if (workers <= 1) {
    for (std::size_t r = 0; r < reps; ++r) run_one(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < reps; r = next++) run_one(r);
      });
    for (auto& t : pool) t.join();
  }
  return summarize(cfg, truth, std::move(runs));
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string run_file_name(std::size_t r) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "run_%03zu.jsonl", r);
  return buf;
}

}  // namespace

std::string summary_to_json(const BatchSummary& summary, int indent) {
  const Objective& obj = objective_by_name(summary.config.objective);
  const Grid grid(obj.domain, summary.config.grid_shape);
  json truth;
  truth["global_minimum"] = summary.truth.global_minimum;
  truth["global_minimizers"] = json::array();
  for (const Point& p : summary.truth.global_minimizers) truth["global_minimizers"].push_back(point_json(p));
  truth["grid_minimum"] = summary.truth.grid_minimum;
  truth["grid_minimizers"] = json::array();
  for (std::size_t i : summary.truth.grid_minimizers)
    truth["grid_minimizers"].push_back(json{{"index", i}, {"point", point_json(grid.point(i))}});

  json sj;
  sj["objective"] = summary.config.objective;
  sj["criterion"] = to_string(summary.config.acquisition.criterion);
  if (summary.config.acquisition.criterion == Criterion::kVariance)
    sj["note"] = "variance criterion: uncertainty-sampling stand-in for the response-surface baseline";
  sj["completed"] = summary.completed;
  sj["repetitions"] = summary.runs.size();
  sj["all_minimizers_recovered"] = summary.all_recovered;
  sj["truth"] = truth;
  if (!summary.median_fmin.empty()) {
    sj["final_median_entropy"] = finite_or_null(summary.median_entropy.back());
    sj["final_median_kl"] = finite_or_null(summary.median_kl.back());
    sj["final_median_fmin"] = summary.median_fmin.back();
  }
  json per_run = json::array();
  for (std::size_t r = 0; r < summary.runs.size(); ++r) {
    const RunResult& run = summary.runs[r];
    if (!run.completed) continue;
    json e;
    e["run"] = r;
    e["final_mode"] = run.final_distribution.mode();
    e["final_mode_point"] = point_json(grid.point(run.final_distribution.mode()));
    e["recovered"] = run.recovered;
    e["minimizer_estimates"] = run.minimizer_estimates;
    e["final_estimated_minimum"] = run.records.back().incumbent_value;
    per_run.push_back(e);
  }
  sj["runs"] = per_run;
  return sj.dump(indent);
}

void write_outputs(const BatchSummary& summary, const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError("cannot create output directory " + root.string() + ": " + ec.message());

  const bool timing = summary.config.record_timing;
  json runs_meta = json::array();
  for (std::size_t r = 0; r < summary.runs.size(); ++r) {
    const RunResult& run = summary.runs[r];
    std::string lines;
    for (const IterationRecord& rec : run.records) lines += record_to_json(rec, timing) + "\n";
    write_file(root / run_file_name(r), lines);
    json m;
    m["run"] = r;
    m["seed"] = run.seed;
    m["file"] = run_file_name(r);
    m["completed"] = run.completed;
    if (!run.error.empty()) m["error"] = run.error;
    runs_meta.push_back(m);
  }

  std::string csv = "iteration,median_entropy,median_kl,median_fmin\n";
  for (std::size_t k = 0; k < summary.median_entropy.size(); ++k) {
    csv += std::to_string(k + 1) + "," + number_text(summary.median_entropy[k]) + "," +
           number_text(summary.median_kl[k]) + "," + number_text(summary.median_fmin[k]) + "\n";
  }
  write_file(root / "batch.csv", csv);

  write_file(root / "summary.json", summary_to_json(summary) + "\n");

  json manifest;
  manifest["config"] = config_json(summary.config, false);
  manifest["runs"] = runs_meta;
  manifest["files"] = {"batch.csv", "summary.json"};
  write_file(root / "manifest.json", manifest.dump(2) + "\n");
}

double spearman_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw UsageError("spearman_correlation needs equal sizes >= 2");
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const std::vector<double> ra = ranks(a);
  const std::vector<double> rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

FastMmeDiagnostic fast_vs_full_diagnostic(const std::string& objective, std::size_t observations,
                                          int mc_samples, std::uint64_t seed, double noise_std) {
  const Objective& obj = objective_by_name(objective);
  const Grid grid(obj.domain, default_grid_shape(obj));
  Streams streams(seed);
  const NoisyOracle oracle{&obj, noise_std};
  Dataset data;
  std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
  for (std::size_t k = 0; k < observations; ++k) {
    const Point& x = grid.point(pick(streams.design));
    data.add(x, noisy_query(oracle, x, streams.noise));
  }
  ExperimentConfig cfg;
  Hyperparameters hp = refit(data, obj.domain, cfg, streams.fit, nullptr);
  const PosteriorSnapshot post = build_posterior(data, hp);
  const GridPosterior gp(post, grid);

  FastMmeDiagnostic d;
  d.observations = observations;
  d.mc_samples = mc_samples;
  AcquisitionConfig fast;
  fast.criterion = Criterion::kFastMme;
  AcquisitionConfig full;
  full.criterion = Criterion::kMme;
  full.mc_samples = mc_samples;
  d.fast_scores = score_grid(gp, fast, seed, 0);
  d.mme_scores = score_grid(gp, full, seed, 0);
  d.spearman = spearman_correlation(d.fast_scores, d.mme_scores);
  d.same_choice = select_next(d.fast_scores, Direction::kMinimize) == select_next(d.mme_scores, Direction::kMinimize);
  return d;
}

}  // namespace mme
