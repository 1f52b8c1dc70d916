#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stableband/rng.hpp"
#include "stableband/stable.hpp"

namespace stableband {

enum class LocationMode { uniform, equally_spaced };

/// Synthetic bandit: every arm draws from its own stable law.
struct SyntheticEnv {
  std::vector<StableParams> arms;

  std::vector<double> locations() const;
  double mu_star() const;  // recomputed max over arms
};

/// All arms share (alpha, beta, sigma); locations are drawn uniformly from
/// `location_range` or laid out equally spaced across it.
SyntheticEnv synth_env_from_prior(std::size_t n_arms, double alpha,
                                  double beta, double sigma,
                                  std::pair<double, double> location_range,
                                  LocationMode mode, Rng& rng);

/// One reward from the chosen arm.
double step(const SyntheticEnv& env, std::size_t arm_index, Rng& rng);

/// Replay bandit: columns of a recorded matrix are served in row order, one
/// column per arm. reward = reward_sign * cell; column means of the signed
/// rewards stand in for the true locations in regret accounting.
class ReplayEnv {
 public:
  /// `columns`: row-major matrix columns, all the same length.
  ReplayEnv(std::vector<std::vector<double>> columns, double reward_sign);

  std::size_t n_arms() const { return columns_.size(); }
  std::size_t rows() const { return columns_.empty() ? 0 : columns_[0].size(); }
  const std::vector<double>& column_means() const { return means_; }
  double mu_star() const;
  double reward_sign() const { return sign_; }

  /// nullopt once the chosen column is exhausted (the run then truncates).
  std::optional<double> next(std::size_t arm_index);

  /// Replay is deterministic; this resets the cursors for a fresh run.
  void reset();

 private:
  std::vector<std::vector<double>> columns_;
  std::vector<std::size_t> cursor_;
  std::vector<double> means_;  // signed
  double sign_;
};

std::optional<double> step(ReplayEnv& env, std::size_t arm_index);

/// Long-format per-round log of one simulation.
struct RegretTrace {
  std::string policy;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> arm;
  std::vector<double> reward;
  std::vector<double> inst_regret;
  std::vector<double> cum_regret;
  bool truncated = false;

  std::size_t rounds() const { return arm.size(); }
  double final_regret() const { return cum_regret.empty() ? 0.0 : cum_regret.back(); }
};

/// Appends round t: inst = mu_star - mu_chosen, cum = running sum.
void record_regret(RegretTrace& trace, double mu_star, double mu_chosen,
                   std::size_t arm_index, double reward);
void record_regret(RegretTrace& trace, const SyntheticEnv& env,
                   std::size_t arm_index, double reward);
void record_regret(RegretTrace& trace, const ReplayEnv& env,
                   std::size_t arm_index, double reward);

/// Pointwise mean cumulative regret with a 95% normal CI across seeds.
/// Traces must share a policy id; unequal horizons are aligned to the
/// shortest. Needs at least 2 traces.
struct RegretCurve {
  std::string policy;
  std::vector<double> mean;
  std::vector<double> ci_lo;
  std::vector<double> ci_hi;

  double final_mean() const { return mean.empty() ? 0.0 : mean.back(); }
};

RegretCurve bayes_regret(std::span<const RegretTrace> traces);

}  // namespace stableband
