#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "stableband/dataset.hpp"
#include "stableband/env.hpp"
#include "stableband/policies.hpp"

namespace stableband {

struct SyntheticEnvSpec {
  std::size_t arms = 2;
  double alpha = 1.5;
  double beta = 0.0;
  double sigma = 1.0;
  std::pair<double, double> location_range{0.0, 1.0};
  LocationMode location_mode = LocationMode::uniform;
};

enum class ReplayFitMode { pooled, per_arm, manual };

struct ReplayEnvSpec {
  std::string dataset;  // raw csv or a *.manifest.json from `ingest`
  DatasetKind dataset_kind = DatasetKind::generic_matrix;
  char delimiter = ',';
  bool has_header = false;
  std::vector<std::size_t> columns;  // empty = all
  double reward_sign = 1.0;
  ReplayFitMode fit = ReplayFitMode::pooled;
  std::optional<StableParams> manual_params;
};

struct ExperimentConfig {
  std::uint64_t master_seed = 1;
  std::uint64_t horizon = 100;
  std::vector<std::uint64_t> seeds{0};
  int workers = 0;  // 0 = all cores; STABLEBAND_WORKERS overrides
  std::string output_dir;
  bool allow_alpha_2 = false;
  std::variant<SyntheticEnvSpec, ReplayEnvSpec> environment;
  std::vector<PolicyConfig> policies;

  bool is_replay() const {
    return std::holds_alternative<ReplayEnvSpec>(environment);
  }

  void validate() const;

  /// Strict parser: unknown keys are rejected with their field path.
  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);
  std::string to_json_text() const;
};

struct PolicySummary {
  std::string policy;
  std::size_t n_seeds = 0;
  double mean_final_regret = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t truncated_runs = 0;
};

struct ExperimentResult {
  /// One trace per (policy, seed), policies outermost, in config order.
  std::vector<RegretTrace> traces;
  std::vector<PolicySummary> summaries;
  /// Mean curves per policy (only when the config has >= 2 seeds).
  std::vector<RegretCurve> curves;
  std::string trace_path;    // empty when output_dir is empty
  std::string summary_path;

  std::vector<const RegretTrace*> traces_for(const std::string& policy) const;
  const RegretCurve* curve_for(const std::string& policy) const;
  const PolicySummary* summary_for(const std::string& policy) const;
};

/// Runs every (policy, seed) cell, in parallel up to the worker budget, and
/// writes trace.csv / summary.csv under output_dir when it is set. Output
/// is byte-identical for identical configs regardless of thread count.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Re-reads a trace CSV and checks its internal consistency: column layout,
/// per-(policy, seed) round numbering, nonnegative instantaneous regret, and
/// cum_regret equal to the running sum of inst_regret. Returns the number of
/// data rows; throws data_error naming the first bad row otherwise.
std::size_t verify_trace_csv(const std::string& path);

}  // namespace stableband
