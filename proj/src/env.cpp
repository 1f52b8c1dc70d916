#include "stableband/env.hpp"

#include <algorithm>
#include <cmath>

#include "stableband/errors.hpp"

namespace stableband {

std::vector<double> SyntheticEnv::locations() const {
  std::vector<double> mu(arms.size());
  for (std::size_t i = 0; i < arms.size(); ++i) mu[i] = arms[i].mu;
  return mu;
}

double SyntheticEnv::mu_star() const {
  if (arms.empty()) throw validation_error("SyntheticEnv: no arms");
  double best = arms[0].mu;
  for (const auto& a : arms) best = std::max(best, a.mu);
  return best;
}

SyntheticEnv synth_env_from_prior(std::size_t n_arms, double alpha,
                                  double beta, double sigma,
                                  std::pair<double, double> location_range,
                                  LocationMode mode, Rng& rng) {
  if (n_arms < 1) throw validation_error("synth_env_from_prior: need >= 1 arm");
  auto [lo, hi] = location_range;
  if (!(lo < hi) && !(n_arms == 1 && lo == hi))
    throw validation_error("synth_env_from_prior: empty location range");
  SyntheticEnv env;
  env.arms.resize(n_arms);
  for (std::size_t i = 0; i < n_arms; ++i) {
    StableParams p;
    p.alpha = alpha;
    p.beta = beta;
    p.sigma = sigma;
    if (mode == LocationMode::uniform) {
      p.mu = rng.uniform(lo, hi);
    } else {
      p.mu = n_arms == 1 ? lo
                         : lo + (hi - lo) * static_cast<double>(i) /
                                    static_cast<double>(n_arms - 1);
    }
    p.validate();
    env.arms[i] = p;
  }
  return env;
}

double step(const SyntheticEnv& env, std::size_t arm_index, Rng& rng) {
  if (arm_index >= env.arms.size())
    throw validation_error("step: arm index out of range");
  return sample_one(env.arms[arm_index], rng);
}

ReplayEnv::ReplayEnv(std::vector<std::vector<double>> columns,
                     double reward_sign)
    : columns_(std::move(columns)), sign_(reward_sign) {
  if (columns_.empty()) throw validation_error("ReplayEnv: no columns");
  const std::size_t len = columns_[0].size();
  if (len == 0) throw data_error("ReplayEnv: empty columns");
  for (const auto& c : columns_) {
    if (c.size() != len)
      throw data_error("ReplayEnv: columns must have equal length");
    for (double v : c)
      if (!std::isfinite(v)) throw data_error("ReplayEnv: non-finite cell");
  }
  cursor_.assign(columns_.size(), 0);
  means_.resize(columns_.size());
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    double s = 0.0;
    for (double v : columns_[j]) s += sign_ * v;
    means_[j] = s / static_cast<double>(len);
  }
}

double ReplayEnv::mu_star() const {
  return *std::max_element(means_.begin(), means_.end());
}

std::optional<double> ReplayEnv::next(std::size_t arm_index) {
  if (arm_index >= columns_.size())
    throw validation_error("ReplayEnv: arm index out of range");
  auto& cur = cursor_[arm_index];
  if (cur >= columns_[arm_index].size()) return std::nullopt;
  return sign_ * columns_[arm_index][cur++];
}

void ReplayEnv::reset() { std::fill(cursor_.begin(), cursor_.end(), 0); }

std::optional<double> step(ReplayEnv& env, std::size_t arm_index) {
  return env.next(arm_index);
}

void record_regret(RegretTrace& trace, double mu_star, double mu_chosen,
                   std::size_t arm_index, double reward) {
  const double inst = mu_star - mu_chosen;
  const double prev = trace.cum_regret.empty() ? 0.0 : trace.cum_regret.back();
  trace.arm.push_back(arm_index);
  trace.reward.push_back(reward);
  trace.inst_regret.push_back(inst);
  trace.cum_regret.push_back(prev + inst);
}

void record_regret(RegretTrace& trace, const SyntheticEnv& env,
                   std::size_t arm_index, double reward) {
  record_regret(trace, env.mu_star(), env.arms.at(arm_index).mu, arm_index,
                reward);
}

void record_regret(RegretTrace& trace, const ReplayEnv& env,
                   std::size_t arm_index, double reward) {
  record_regret(trace, env.mu_star(), env.column_means().at(arm_index),
                arm_index, reward);
}

RegretCurve bayes_regret(std::span<const RegretTrace> traces) {
  if (traces.size() < 2)
    throw validation_error("bayes_regret: need at least 2 traces");
  const std::string& policy = traces.front().policy;
  std::size_t horizon = traces.front().rounds();
  for (const auto& t : traces) {
    if (t.policy != policy)
      throw validation_error("bayes_regret: mixed policy ids (" + policy +
                             " vs " + t.policy + ")");
    horizon = std::min(horizon, t.rounds());
  }
  RegretCurve curve;
  curve.policy = policy;
  curve.mean.resize(horizon);
  curve.ci_lo.resize(horizon);
  curve.ci_hi.resize(horizon);
  const double m = static_cast<double>(traces.size());
  for (std::size_t t = 0; t < horizon; ++t) {
    double mean = 0.0;
    for (const auto& tr : traces) mean += tr.cum_regret[t];
    mean /= m;
    double var = 0.0;
    for (const auto& tr : traces)
      var += (tr.cum_regret[t] - mean) * (tr.cum_regret[t] - mean);
    var /= (m - 1.0);
    const double half = 1.96 * std::sqrt(var / m);
    curve.mean[t] = mean;
    curve.ci_lo[t] = mean - half;
    curve.ci_hi[t] = mean + half;
  }
  return curve;
}

}  // namespace stableband
