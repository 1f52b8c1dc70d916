#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stableband/posterior.hpp"
#include "stableband/rng.hpp"
#include "stableband/stable.hpp"

namespace stableband {

enum class PolicyKind {
  asym_ts,              // auxiliary-variable Gibbs posterior on raw rewards
  asym_ts_symmetrized,  // triple-transform pseudo-rewards, symmetric posterior
  sym_ts,               // posterior with beta forced to 0
  greedy,               // epsilon-greedy on running means
  ucb,                  // mean + sqrt(2 log t / n)
  robust_ucb,           // clipped truncated-moment index
  oracle                // knows the true locations (tests and baselines)
};

PolicyKind policy_kind_from_string(const std::string& s);
std::string to_string(PolicyKind k);

struct PolicyConfig {
  PolicyKind kind = PolicyKind::asym_ts;
  std::string name;  // trace id; defaults to the kind name

  double epsilon_explore = 0.1;  // greedy only
  double clip_bound = 1000.0;    // M: index clip and default prior half-width
  // moment order for the truncated index; <= 0 selects 0.9 (alpha - 1)
  double epsilon_moment = 0.0;
  double concentration = 1.0;  // C(1+eps, alpha), user-supplied
  int mcmc_budget = 25;
  int full_refresh_period = 50;  // full-budget sweeps for all arms every k rounds
  // per-sweep auxiliary-refresh block bound for changed arms (0 = whole
  // history); unchanged arms freshen through the collapsed marginal draw
  int y_refresh_cap = 512;
  bool has_prior = false;  // false -> flat on [-M, M]
  PriorSpec prior;

  std::string id() const;
  PriorSpec effective_prior() const;
  double effective_epsilon_moment(double alpha) const;
  void validate(double alpha) const;
};

/// Per-arm bookkeeping shared by every policy.
struct ArmState {
  ArmState(double alpha, Rng chain_rng)
      : symmetrize_carry(alpha), gibbs(chain_rng) {}

  std::uint64_t pull_count = 0;
  std::vector<double> reward_history;
  double running_mean = 0.0;
  Symmetrizer symmetrize_carry;
  std::vector<double> pseudo_rewards;  // completed triple transforms
  GibbsState gibbs;
  bool gibbs_stale = true;

 private:
  double sum_ = 0.0, comp_ = 0.0;  // Neumaier-compensated reward sum
  friend void update(ArmState&, double);
};

/// Appends the reward, keeps the running mean exact (compensated sum), feeds
/// the triple transform, and marks the chain for a full warm-start refresh.
/// Throws data_error on non-finite rewards.
void update(ArmState& arm, double reward);

/// Lowest-index argmax.
std::size_t argmax_lowest(std::span<const double> scores);

/// Thompson selection with the asymmetric posterior: one warm-started chain
/// per arm, full budget for arms whose history changed (and periodically for
/// all), a single freshening sweep otherwise. Chains for different arms run
/// in parallel. Every arm must have been pulled at least once.
std::size_t select_arm_ts_asym(std::span<ArmState> arms,
                               std::span<const StableParams> params,
                               const PolicyConfig& cfg, std::uint64_t t);

/// Same machinery with beta forced to 0.
std::size_t select_arm_ts_sym(std::span<ArmState> arms,
                              std::span<const StableParams> params,
                              const PolicyConfig& cfg, std::uint64_t t);

/// Thompson selection on the symmetrized pseudo-rewards: the posterior runs
/// with beta = 0 and scale 4^(1/alpha) sigma on the de-skewed location scale,
/// and draws are mapped back through mu = theta / (2 - 2^(1/alpha)). Arms
/// with no completed triple yet score by a prior draw.
std::size_t select_arm_ts_symmetrized(std::span<ArmState> arms,
                                      std::span<const StableParams> params,
                                      const PolicyConfig& cfg, std::uint64_t t);

/// With probability epsilon a uniformly random arm, otherwise the best
/// running mean (ties to the lowest index).
std::size_t select_arm_greedy(std::span<const ArmState> arms,
                              const PolicyConfig& cfg, Rng& rng);

/// argmax of running_mean + sqrt(2 log t / pull_count); unpulled arms first
/// in index order.
std::size_t select_arm_ucb(std::span<const ArmState> arms, std::uint64_t t);

/// clip_[-M,M]( mean + sigma^(1/alpha) (2C / n^eps)^(1/(1+eps)) ).
double truncated_ucb_index(const ArmState& arm, const PolicyConfig& cfg,
                           double sigma, double alpha);

std::size_t select_arm_robust_ucb(std::span<const ArmState> arms,
                                  const PolicyConfig& cfg,
                                  std::span<const StableParams> params);

/// Facade used by the simulation harness: owns arm states, handles the
/// round-robin initialization shared by all policies, and dispatches to the
/// policy-specific selector.
class BanditPolicy {
 public:
  /// `arm_params` are the (alpha, beta, sigma) the Thompson policies treat as
  /// known; `oracle_locations` is consulted only by PolicyKind::oracle.
  BanditPolicy(PolicyConfig cfg, std::vector<StableParams> arm_params,
               Rng stream, std::vector<double> oracle_locations = {});

  std::size_t select(std::uint64_t t);
  void update(std::size_t arm, double reward);

  const PolicyConfig& config() const { return cfg_; }
  const std::vector<ArmState>& arms() const { return arms_; }
  std::uint64_t posterior_fallbacks() const;

 private:
  PolicyConfig cfg_;
  std::vector<StableParams> params_;
  std::vector<double> oracle_locations_;
  Rng rng_;
  std::vector<ArmState> arms_;
};

}  // namespace stableband
