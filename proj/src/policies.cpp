#include "stableband/policies.hpp"

#include <cmath>
#include <stdexcept>

#include "stableband/errors.hpp"

namespace stableband {

PolicyKind policy_kind_from_string(const std::string& s) {
  if (s == "asym_ts") return PolicyKind::asym_ts;
  if (s == "asym_ts_symmetrized") return PolicyKind::asym_ts_symmetrized;
  if (s == "sym_ts") return PolicyKind::sym_ts;
  if (s == "greedy") return PolicyKind::greedy;
  if (s == "ucb") return PolicyKind::ucb;
  if (s == "robust_ucb") return PolicyKind::robust_ucb;
  if (s == "oracle") return PolicyKind::oracle;
  throw validation_error("unknown policy kind: " + s);
}

std::string to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::asym_ts: return "asym_ts";
    case PolicyKind::asym_ts_symmetrized: return "asym_ts_symmetrized";
    case PolicyKind::sym_ts: return "sym_ts";
    case PolicyKind::greedy: return "greedy";
    case PolicyKind::ucb: return "ucb";
    case PolicyKind::robust_ucb: return "robust_ucb";
    case PolicyKind::oracle: return "oracle";
  }
  return "unknown";
}

std::string PolicyConfig::id() const {
  return name.empty() ? to_string(kind) : name;
}

PriorSpec PolicyConfig::effective_prior() const {
  if (has_prior) return prior;
  return PriorSpec::flat(-clip_bound, clip_bound);
}

double PolicyConfig::effective_epsilon_moment(double alpha) const {
  return epsilon_moment > 0.0 ? epsilon_moment : 0.9 * (alpha - 1.0);
}

void PolicyConfig::validate(double alpha) const {
  if (!(epsilon_explore >= 0.0) || !(epsilon_explore <= 1.0))
    throw validation_error("PolicyConfig: epsilon_explore must lie in [0, 1]");
  if (!(clip_bound > 0.0))
    throw validation_error("PolicyConfig: clip bound M must be positive");
  if (!(concentration > 0.0))
    throw validation_error("PolicyConfig: concentration C must be positive");
  if (mcmc_budget < 1)
    throw validation_error("PolicyConfig: mcmc_budget must be >= 1");
  if (full_refresh_period < 1)
    throw validation_error("PolicyConfig: full_refresh_period must be >= 1");
  if (y_refresh_cap < 0)
    throw validation_error("PolicyConfig: y_refresh_cap must be >= 0");
  if (epsilon_moment > 0.0 && !(epsilon_moment < alpha - 1.0))
    throw validation_error(
        "PolicyConfig: epsilon_moment must lie in (0, alpha - 1)");
  if (has_prior) prior.validate();
}

void update(ArmState& arm, double reward) {
  if (!std::isfinite(reward))
    throw data_error("update: non-finite reward");
  arm.reward_history.push_back(reward);
  ++arm.pull_count;
  // Neumaier compensation keeps the mean exact over long histories.
  const double t = arm.sum_ + reward;
  if (std::abs(arm.sum_) >= std::abs(reward))
    arm.comp_ += (arm.sum_ - t) + reward;
  else
    arm.comp_ += (reward - t) + arm.sum_;
  arm.sum_ = t;
  arm.running_mean =
      (arm.sum_ + arm.comp_) / static_cast<double>(arm.pull_count);
  if (auto triple = arm.symmetrize_carry.push(reward))
    arm.pseudo_rewards.push_back(triple->value);
  arm.gibbs_stale = true;
}

std::size_t argmax_lowest(std::span<const double> scores) {
  if (scores.empty()) throw validation_error("argmax over empty scores");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

namespace {

// Shared Thompson loop. beta_of(i) lets the symmetric variant zero the skew.
template <typename BetaFn>
std::size_t ts_select(std::span<ArmState> arms,
                      std::span<const StableParams> params,
                      const PolicyConfig& cfg, std::uint64_t t, BetaFn beta_of) {
  if (arms.empty()) throw validation_error("select: no arms");
  if (arms.size() != params.size())
    throw validation_error("select: params size mismatch");
  const PriorSpec prior = cfg.effective_prior();
  const bool full_refresh =
      t % static_cast<std::uint64_t>(cfg.full_refresh_period) == 0;
  std::vector<double> draws(arms.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(arms.size());
       ++i) {
    ArmState& arm = arms[static_cast<std::size_t>(i)];
    const StableParams& p = params[static_cast<std::size_t>(i)];
    const double beta = beta_of(static_cast<std::size_t>(i));
    if (arm.gibbs_stale || full_refresh) {
      draws[static_cast<std::size_t>(i)] =
          posterior_draw(arm.reward_history, p.alpha, beta, p.sigma, prior,
                         cfg.mcmc_budget, arm.gibbs, cfg.y_refresh_cap);
      arm.gibbs_stale = false;
    } else {
      // posterior unchanged since the last pull: a fresh draw from the
      // collapsed marginal, no chain sweeps
      draws[static_cast<std::size_t>(i)] = posterior_draw_marginal(
          arm.reward_history, p.alpha, beta, p.sigma, prior, arm.gibbs);
    }
  }
  return argmax_lowest(draws);
}

}  // namespace

std::size_t select_arm_ts_asym(std::span<ArmState> arms,
                               std::span<const StableParams> params,
                               const PolicyConfig& cfg, std::uint64_t t) {
  return ts_select(arms, params, cfg, t,
                   [&](std::size_t i) { return params[i].beta; });
}

std::size_t select_arm_ts_sym(std::span<ArmState> arms,
                              std::span<const StableParams> params,
                              const PolicyConfig& cfg, std::uint64_t t) {
  return ts_select(arms, params, cfg, t, [](std::size_t) { return 0.0; });
}

std::size_t select_arm_ts_symmetrized(std::span<ArmState> arms,
                                      std::span<const StableParams> params,
                                      const PolicyConfig& cfg,
                                      std::uint64_t t) {
  if (arms.empty()) throw validation_error("select: no arms");
  if (arms.size() != params.size())
    throw validation_error("select: params size mismatch");
  const bool full_refresh =
      t % static_cast<std::uint64_t>(cfg.full_refresh_period) == 0;
  std::vector<double> draws(arms.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(arms.size());
       ++i) {
    ArmState& arm = arms[static_cast<std::size_t>(i)];
    const StableParams& p = params[static_cast<std::size_t>(i)];
    // pseudo-rewards follow S_alpha(4^(1/alpha) sigma, 0, f mu), f = 2 - 2^(1/alpha)
    const double f = 2.0 - std::pow(2.0, 1.0 / p.alpha);
    const PriorSpec prior = cfg.effective_prior().scaled(f);
    double theta;
    if (arm.pseudo_rewards.empty()) {
      theta = prior.sample(arm.gibbs.rng);
    } else if (arm.gibbs_stale || full_refresh) {
      theta = posterior_draw(arm.pseudo_rewards, p.alpha, 0.0,
                             std::pow(4.0, 1.0 / p.alpha) * p.sigma, prior,
                             cfg.mcmc_budget, arm.gibbs, cfg.y_refresh_cap);
      arm.gibbs_stale = false;
    } else {
      theta = posterior_draw_marginal(arm.pseudo_rewards, p.alpha, 0.0,
                                      std::pow(4.0, 1.0 / p.alpha) * p.sigma,
                                      prior, arm.gibbs);
    }
    draws[static_cast<std::size_t>(i)] = theta / f;
  }
  return argmax_lowest(draws);
}

std::size_t select_arm_greedy(std::span<const ArmState> arms,
                              const PolicyConfig& cfg, Rng& rng) {
  if (arms.empty()) throw validation_error("select: no arms");
  if (rng.uniform01() < cfg.epsilon_explore)
    return static_cast<std::size_t>(rng.uniform_index(arms.size()));
  std::vector<double> means(arms.size());
  for (std::size_t i = 0; i < arms.size(); ++i) means[i] = arms[i].running_mean;
  return argmax_lowest(means);
}

std::size_t select_arm_ucb(std::span<const ArmState> arms, std::uint64_t t) {
  if (arms.empty()) throw validation_error("select: no arms");
  if (t < 1) throw validation_error("select_arm_ucb: t must be >= 1");
  for (std::size_t i = 0; i < arms.size(); ++i)
    if (arms[i].pull_count == 0) return i;
  std::vector<double> idx(arms.size());
  for (std::size_t i = 0; i < arms.size(); ++i)
    idx[i] = arms[i].running_mean +
             std::sqrt(2.0 * std::log(static_cast<double>(t)) /
                       static_cast<double>(arms[i].pull_count));
  return argmax_lowest(idx);
}

double truncated_ucb_index(const ArmState& arm, const PolicyConfig& cfg,
                           double sigma, double alpha) {
  if (arm.pull_count < 1)
    throw validation_error("truncated_ucb_index: arm never pulled");
  const double eps = cfg.effective_epsilon_moment(alpha);
  const double bonus =
      std::pow(sigma, 1.0 / alpha) *
      std::pow(2.0 * cfg.concentration /
                   std::pow(static_cast<double>(arm.pull_count), eps),
               1.0 / (1.0 + eps));
  const double raw = arm.running_mean + bonus;
  return std::clamp(raw, -cfg.clip_bound, cfg.clip_bound);
}

std::size_t select_arm_robust_ucb(std::span<const ArmState> arms,
                                  const PolicyConfig& cfg,
                                  std::span<const StableParams> params) {
  if (arms.empty()) throw validation_error("select: no arms");
  for (std::size_t i = 0; i < arms.size(); ++i)
    if (arms[i].pull_count == 0) return i;
  std::vector<double> idx(arms.size());
  for (std::size_t i = 0; i < arms.size(); ++i)
    idx[i] = truncated_ucb_index(arms[i], cfg, params[i].sigma,
                                 params[i].alpha);
  return argmax_lowest(idx);
}

BanditPolicy::BanditPolicy(PolicyConfig cfg,
                           std::vector<StableParams> arm_params, Rng stream,
                           std::vector<double> oracle_locations)
    : cfg_(std::move(cfg)),
      params_(std::move(arm_params)),
      oracle_locations_(std::move(oracle_locations)),
      rng_(stream) {
  if (params_.empty()) throw validation_error("BanditPolicy: no arms");
  cfg_.validate(params_.front().alpha);
  if (cfg_.kind == PolicyKind::oracle &&
      oracle_locations_.size() != params_.size())
    throw validation_error("BanditPolicy: oracle needs one location per arm");
  arms_.reserve(params_.size());
  Rng chains = stream.fork("arm-chains");
  for (std::size_t i = 0; i < params_.size(); ++i)
    arms_.emplace_back(params_[i].alpha, chains.fork(i));
}

std::size_t BanditPolicy::select(std::uint64_t t) {
  // round-robin warm-up shared by all policies
  for (std::size_t i = 0; i < arms_.size(); ++i)
    if (arms_[i].pull_count == 0) return i;
  switch (cfg_.kind) {
    case PolicyKind::asym_ts:
      return select_arm_ts_asym(arms_, params_, cfg_, t);
    case PolicyKind::asym_ts_symmetrized:
      return select_arm_ts_symmetrized(arms_, params_, cfg_, t);
    case PolicyKind::sym_ts:
      return select_arm_ts_sym(arms_, params_, cfg_, t);
    case PolicyKind::greedy:
      return select_arm_greedy(arms_, cfg_, rng_);
    case PolicyKind::ucb:
      return select_arm_ucb(arms_, t);
    case PolicyKind::robust_ucb:
      return select_arm_robust_ucb(arms_, cfg_, params_);
    case PolicyKind::oracle:
      return argmax_lowest(oracle_locations_);
  }
  throw validation_error("BanditPolicy: unhandled kind");
}

void BanditPolicy::update(std::size_t arm, double reward) {
  if (arm >= arms_.size()) throw validation_error("update: arm out of range");
  stableband::update(arms_[arm], reward);
}

std::uint64_t BanditPolicy::posterior_fallbacks() const {
  std::uint64_t n = 0;
  for (const auto& a : arms_) n += a.gibbs.fallback_count;
  return n;
}

}  // namespace stableband
