#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "oamp/amp_engine.hpp"
#include "oamp/model_gen.hpp"

namespace oamp {

struct ExperimentConfig {
  int schema_version = 1;
  std::string name;
  bool rectangular = false;
  int n = 0, m = 0;
  NoiseSpec noise;
  std::vector<Vec> theta_grid;  // one θ vector per grid point
  std::optional<DiscretePrior> u_prior, v_prior;
  std::vector<Algorithm> algorithms;
  int trials = 1;
  int max_iters = 10;
  std::uint64_t base_seed = 0;
  std::string output;
  int threads = 1;
  CumulantSource cumulant_source = CumulantSource::estimated;
  double early_stop_ratio = 1e-9;
  bool schur_early_stop = false;
  int se_samples = 200000;

  int total_trials() const { return trials * static_cast<int>(theta_grid.size()); }
};

// Throws std::invalid_argument with a readable message on malformed input.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

// Resize both dimensions, keeping the noise spec in sync.
void resize_config(ExperimentConfig& cfg, int n, int m);

DiscretePrior parse_prior_name(const std::string& name);

struct MetricRecord {
  int trial;
  int iteration;
  std::string algorithm;
  std::string metric;
  double value;
};

struct TrialIssue {
  int trial;
  std::string algorithm;
  int iteration;  // −1 when not tied to an iteration
  std::string kind;  // failure | subcritical
  std::string message;
};

struct TrialResult {
  std::vector<MetricRecord> records;
  std::vector<TrialIssue> issues;
  std::vector<std::pair<std::string, Trajectory>> trajectories;  // kept only on request
};

struct TrialSetup {
  int trial;
  int grid_point;
  Vec theta;
  std::uint64_t seed;
};

TrialSetup trial_setup(const ExperimentConfig& cfg, int trial);
SpikedInstance make_instance(const ExperimentConfig& cfg, const TrialSetup& setup);
TrialResult run_trial(const ExperimentConfig& cfg, int trial, bool keep_trajectories = false);

struct ExperimentResult {
  std::vector<MetricRecord> records;  // trial order
  std::vector<TrialIssue> issues;
  int failures() const;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// trial,iteration,algorithm,metric,value
void write_records_csv(std::ostream& out, const std::vector<MetricRecord>& records);
// trial,grid_point,seed,theta_1..theta_K
void write_trials_csv(std::ostream& out, const ExperimentConfig& cfg);
// JSON summary of the run and every issue.
std::string issues_json(const ExperimentConfig& cfg, const ExperimentResult& result);

int resolve_threads(int config_threads, const char* env_value, int cli_threads);

} // namespace oamp
