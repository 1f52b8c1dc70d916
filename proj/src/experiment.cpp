#include "stableband/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "json.hpp"
#include "stableband/ecf.hpp"
#include "stableband/errors.hpp"

namespace stableband {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& path) {
  if (!j.is_object())
    throw validation_error(path + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw validation_error(path + "." + it.key() + ": unknown key");
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

PriorSpec parse_prior(const json& j, const std::string& path) {
  check_keys(j, {"kind", "lo", "hi", "mean", "std"}, path);
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "flat")
    return PriorSpec::flat(j.at("lo").get<double>(), j.at("hi").get<double>());
  if (kind == "gaussian")
    return PriorSpec::gaussian(j.at("mean").get<double>(),
                               j.at("std").get<double>());
  throw validation_error(path + ".kind: must be 'flat' or 'gaussian'");
}

ordered_json prior_to_json(const PriorSpec& p) {
  ordered_json j;
  if (p.kind == PriorSpec::Kind::flat) {
    j["kind"] = "flat";
    j["lo"] = p.lo;
    j["hi"] = p.hi;
  } else {
    j["kind"] = "gaussian";
    j["mean"] = p.mean;
    j["std"] = p.std;
  }
  return j;
}

PolicyConfig parse_policy(const json& j, const std::string& path) {
  check_keys(j,
             {"kind", "name", "epsilon_explore", "clip_bound",
              "epsilon_moment", "concentration", "mcmc_budget",
              "full_refresh_period", "y_refresh_cap", "prior"},
             path);
  PolicyConfig cfg;
  cfg.kind = policy_kind_from_string(j.at("kind").get<std::string>());
  cfg.name = get_or<std::string>(j, "name", "");
  cfg.epsilon_explore = get_or(j, "epsilon_explore", cfg.epsilon_explore);
  cfg.clip_bound = get_or(j, "clip_bound", cfg.clip_bound);
  cfg.epsilon_moment = get_or(j, "epsilon_moment", cfg.epsilon_moment);
  cfg.concentration = get_or(j, "concentration", cfg.concentration);
  cfg.mcmc_budget = get_or(j, "mcmc_budget", cfg.mcmc_budget);
  cfg.full_refresh_period =
      get_or(j, "full_refresh_period", cfg.full_refresh_period);
  cfg.y_refresh_cap = get_or(j, "y_refresh_cap", cfg.y_refresh_cap);
  if (j.contains("prior")) {
    cfg.has_prior = true;
    cfg.prior = parse_prior(j.at("prior"), path + ".prior");
  }
  return cfg;
}

ordered_json policy_to_json(const PolicyConfig& p) {
  ordered_json j;
  j["kind"] = to_string(p.kind);
  if (!p.name.empty()) j["name"] = p.name;
  j["epsilon_explore"] = p.epsilon_explore;
  j["clip_bound"] = p.clip_bound;
  j["epsilon_moment"] = p.epsilon_moment;
  j["concentration"] = p.concentration;
  j["mcmc_budget"] = p.mcmc_budget;
  j["full_refresh_period"] = p.full_refresh_period;
  j["y_refresh_cap"] = p.y_refresh_cap;
  if (p.has_prior) j["prior"] = prior_to_json(p.prior);
  return j;
}

std::variant<SyntheticEnvSpec, ReplayEnvSpec> parse_environment(
    const json& j) {
  const std::string path = "environment";
  if (!j.is_object() || !j.contains("kind"))
    throw validation_error(path + ": needs a 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "synthetic") {
    check_keys(j,
               {"kind", "arms", "alpha", "beta", "sigma", "location_range",
                "location_mode"},
               path);
    SyntheticEnvSpec s;
    s.arms = j.at("arms").get<std::size_t>();
    s.alpha = j.at("alpha").get<double>();
    s.beta = j.at("beta").get<double>();
    s.sigma = j.at("sigma").get<double>();
    const auto& r = j.at("location_range");
    if (!r.is_array() || r.size() != 2)
      throw validation_error(path + ".location_range: expected [lo, hi]");
    s.location_range = {r[0].get<double>(), r[1].get<double>()};
    const auto mode = get_or<std::string>(j, "location_mode", "uniform");
    if (mode == "uniform")
      s.location_mode = LocationMode::uniform;
    else if (mode == "equally_spaced")
      s.location_mode = LocationMode::equally_spaced;
    else
      throw validation_error(path +
                             ".location_mode: 'uniform' or 'equally_spaced'");
    return s;
  }
  if (kind == "replay") {
    check_keys(j,
               {"kind", "dataset", "dataset_kind", "delimiter", "has_header",
                "columns", "reward_sign", "fit", "manual_params"},
               path);
    ReplayEnvSpec s;
    s.dataset = j.at("dataset").get<std::string>();
    s.dataset_kind = dataset_kind_from_string(
        get_or<std::string>(j, "dataset_kind", "generic-matrix"));
    const auto d = get_or<std::string>(j, "delimiter", ",");
    if (d.size() != 1)
      throw validation_error(path + ".delimiter: one character");
    s.delimiter = d[0];
    s.has_header = get_or(j, "has_header", false);
    if (j.contains("columns"))
      s.columns = j.at("columns").get<std::vector<std::size_t>>();
    s.reward_sign = get_or(j, "reward_sign", 1.0);
    const auto fit = get_or<std::string>(j, "fit", "pooled");
    if (fit == "pooled")
      s.fit = ReplayFitMode::pooled;
    else if (fit == "per_arm")
      s.fit = ReplayFitMode::per_arm;
    else if (fit == "manual")
      s.fit = ReplayFitMode::manual;
    else
      throw validation_error(path + ".fit: 'pooled', 'per_arm' or 'manual'");
    if (s.fit == ReplayFitMode::manual) {
      if (!j.contains("manual_params"))
        throw validation_error(path + ".manual_params: required for fit=manual");
      const auto& mp = j.at("manual_params");
      check_keys(mp, {"alpha", "beta", "sigma"}, path + ".manual_params");
      StableParams p;
      p.alpha = mp.at("alpha").get<double>();
      p.beta = mp.at("beta").get<double>();
      p.sigma = mp.at("sigma").get<double>();
      p.mu = 0.0;
      s.manual_params = p;
    }
    return s;
  }
  throw validation_error(path + ".kind: 'synthetic' or 'replay'");
}

ordered_json environment_to_json(
    const std::variant<SyntheticEnvSpec, ReplayEnvSpec>& env) {
  ordered_json j;
  if (const auto* s = std::get_if<SyntheticEnvSpec>(&env)) {
    j["kind"] = "synthetic";
    j["arms"] = s->arms;
    j["alpha"] = s->alpha;
    j["beta"] = s->beta;
    j["sigma"] = s->sigma;
    j["location_range"] = {s->location_range.first, s->location_range.second};
    j["location_mode"] = s->location_mode == LocationMode::uniform
                             ? "uniform"
                             : "equally_spaced";
  } else {
    const auto& r = std::get<ReplayEnvSpec>(env);
    j["kind"] = "replay";
    j["dataset"] = r.dataset;
    j["dataset_kind"] = to_string(r.dataset_kind);
    j["delimiter"] = std::string(1, r.delimiter);
    j["has_header"] = r.has_header;
    j["columns"] = r.columns;
    j["reward_sign"] = r.reward_sign;
    j["fit"] = r.fit == ReplayFitMode::pooled
                   ? "pooled"
                   : (r.fit == ReplayFitMode::per_arm ? "per_arm" : "manual");
    if (r.manual_params) {
      ordered_json mp;
      mp["alpha"] = r.manual_params->alpha;
      mp["beta"] = r.manual_params->beta;
      mp["sigma"] = r.manual_params->sigma;
      j["manual_params"] = mp;
    }
  }
  return j;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

int resolve_workers(int configured) {
  if (const char* env = std::getenv("STABLEBAND_WORKERS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  if (configured >= 1) return configured;
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

struct ReplayData {
  Matrix matrix;
  std::vector<std::size_t> columns;
  std::vector<StableParams> arm_params;
  std::vector<std::vector<double>> column_values;
};

ReplayData load_replay(const ReplayEnvSpec& spec) {
  ReplayData data;
  if (ends_with(spec.dataset, ".manifest.json")) {
    data.matrix = load_via_manifest(load_manifest(spec.dataset));
  } else {
    data.matrix =
        read_matrix_csv(spec.dataset, spec.delimiter, spec.has_header);
    if (spec.dataset_kind == DatasetKind::price_series)
      data.matrix = log_returns(data.matrix);
  }
  data.columns = spec.columns;
  if (data.columns.empty()) {
    data.columns.resize(data.matrix.cols);
    for (std::size_t c = 0; c < data.matrix.cols; ++c) data.columns[c] = c;
  }
  for (std::size_t c : data.columns)
    if (c >= data.matrix.cols)
      throw validation_error("environment.columns: column " +
                             std::to_string(c) + " out of range (dataset has " +
                             std::to_string(data.matrix.cols) + ")");
  for (std::size_t c : data.columns)
    data.column_values.push_back(data.matrix.column(c));

  const auto signed_values = [&](const std::vector<double>& raw) {
    std::vector<double> v(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
      v[i] = spec.reward_sign * raw[i];
    return v;
  };

  switch (spec.fit) {
    case ReplayFitMode::manual: {
      StableParams p = *spec.manual_params;
      data.arm_params.assign(data.columns.size(), p);
      break;
    }
    case ReplayFitMode::pooled: {
      std::vector<double> pooled;
      for (const auto& col : data.column_values) {
        auto v = signed_values(col);
        pooled.insert(pooled.end(), v.begin(), v.end());
      }
      const FitReport fit = estimate_all(pooled);
      StableParams p = fit.params;
      p.mu = 0.0;
      data.arm_params.assign(data.columns.size(), p);
      break;
    }
    case ReplayFitMode::per_arm: {
      for (const auto& col : data.column_values) {
        const FitReport fit = estimate_all(signed_values(col));
        StableParams p = fit.params;
        p.mu = 0.0;
        data.arm_params.push_back(p);
      }
      break;
    }
  }
  return data;
}

RegretTrace run_synthetic_cell(const SyntheticEnv& env,
                               const PolicyConfig& pcfg,
                               std::uint64_t seed_value, std::uint64_t horizon,
                               Rng policy_stream, Rng reward_stream) {
  BanditPolicy policy(pcfg, env.arms, policy_stream, env.locations());
  RegretTrace trace;
  trace.policy = pcfg.id();
  trace.seed = seed_value;
  for (std::uint64_t t = 1; t <= horizon; ++t) {
    const std::size_t a = policy.select(t);
    const double r = step(env, a, reward_stream);
    policy.update(a, r);
    record_regret(trace, env, a, r);
  }
  return trace;
}

RegretTrace run_replay_cell(const ReplayData& data, const PolicyConfig& pcfg,
                            std::uint64_t seed_value, std::uint64_t horizon,
                            Rng policy_stream, double reward_sign) {
  ReplayEnv env(data.column_values, reward_sign);
  BanditPolicy policy(pcfg, data.arm_params, policy_stream,
                      env.column_means());
  RegretTrace trace;
  trace.policy = pcfg.id();
  trace.seed = seed_value;
  for (std::uint64_t t = 1; t <= horizon; ++t) {
    const std::size_t a = policy.select(t);
    const auto r = step(env, a);
    if (!r) {
      trace.truncated = true;
      break;
    }
    policy.update(a, *r);
    record_regret(trace, env, a, *r);
  }
  return trace;
}

void write_trace_file(const std::vector<RegretTrace>& traces,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write " + path);
  out << "policy,seed,t,arm,reward,inst_regret,cum_regret\n";
  for (const auto& tr : traces) {
    for (std::size_t i = 0; i < tr.rounds(); ++i) {
      out << tr.policy << ',' << tr.seed << ',' << (i + 1) << ',' << tr.arm[i]
          << ',' << format_double(tr.reward[i]) << ','
          << format_double(tr.inst_regret[i]) << ','
          << format_double(tr.cum_regret[i]) << '\n';
    }
  }
}

void write_summary_file(const std::vector<PolicySummary>& summaries,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write " + path);
  out << "policy,n_seeds,mean_final_regret,ci95_lo,ci95_hi,truncated_runs\n";
  for (const auto& s : summaries) {
    out << s.policy << ',' << s.n_seeds << ','
        << format_double(s.mean_final_regret) << ',' << format_double(s.ci_lo)
        << ',' << format_double(s.ci_hi) << ',' << s.truncated_runs << '\n';
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (horizon < 1) throw validation_error("horizon: must be >= 1");
  if (seeds.empty()) throw validation_error("seeds: need at least one");
  if (policies.empty()) throw validation_error("policies: need at least one");
  std::set<std::string> ids;
  for (const auto& p : policies)
    if (!ids.insert(p.id()).second)
      throw validation_error("policies: duplicate id '" + p.id() +
                             "' (give one a 'name')");
  if (const auto* s = std::get_if<SyntheticEnvSpec>(&environment)) {
    StableParams probe{s->alpha, s->beta, s->sigma, 0.0};
    probe.validate();
    if (!allow_alpha_2 && s->alpha >= 2.0)
      throw validation_error(
          "environment.alpha: runtime configs require alpha < 2 "
          "(set allow_alpha_2 to override)");
    if (s->arms < 1) throw validation_error("environment.arms: must be >= 1");
    for (const auto& p : policies) p.validate(s->alpha);
  } else {
    const auto& r = std::get<ReplayEnvSpec>(environment);
    std::ifstream probe(r.dataset);
    if (!probe)
      throw validation_error("environment.dataset: cannot open " + r.dataset);
    for (const auto& p : policies) p.validate(1.5);  // alpha known after fit
  }
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw validation_error(std::string("config: invalid JSON: ") + e.what());
  }
  check_keys(j,
             {"master_seed", "horizon", "seeds", "workers", "output_dir",
              "allow_alpha_2", "environment", "policies"},
             "config");
  ExperimentConfig cfg;
  try {
    cfg.master_seed = get_or<std::uint64_t>(j, "master_seed", 1);
    cfg.horizon = j.at("horizon").get<std::uint64_t>();
    cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    cfg.workers = get_or(j, "workers", 0);
    cfg.output_dir = get_or<std::string>(j, "output_dir", "");
    cfg.allow_alpha_2 = get_or(j, "allow_alpha_2", false);
    cfg.environment = parse_environment(j.at("environment"));
    if (!j.contains("policies") || !j.at("policies").is_array())
      throw validation_error("policies: expected an array");
    std::size_t k = 0;
    for (const auto& pj : j.at("policies"))
      cfg.policies.push_back(
          parse_policy(pj, "policies[" + std::to_string(k++) + "]"));
  } catch (const json::exception& e) {
    throw validation_error(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string ExperimentConfig::to_json_text() const {
  ordered_json j;
  j["master_seed"] = master_seed;
  j["horizon"] = horizon;
  j["seeds"] = seeds;
  j["workers"] = workers;
  j["output_dir"] = output_dir;
  j["allow_alpha_2"] = allow_alpha_2;
  j["environment"] = environment_to_json(environment);
  j["policies"] = ordered_json::array();
  for (const auto& p : policies) j["policies"].push_back(policy_to_json(p));
  return j.dump(2) + "\n";
}

std::vector<const RegretTrace*> ExperimentResult::traces_for(
    const std::string& policy) const {
  std::vector<const RegretTrace*> out;
  for (const auto& t : traces)
    if (t.policy == policy) out.push_back(&t);
  return out;
}

const RegretCurve* ExperimentResult::curve_for(
    const std::string& policy) const {
  for (const auto& c : curves)
    if (c.policy == policy) return &c;
  return nullptr;
}

const PolicySummary* ExperimentResult::summary_for(
    const std::string& policy) const {
  for (const auto& s : summaries)
    if (s.policy == policy) return &s;
  return nullptr;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const Rng master(cfg.master_seed);

  // Per-seed environments are shared across policies so policy comparisons
  // are paired; per-cell streams are keyed by policy id so adding a policy
  // never perturbs the others.
  std::vector<SyntheticEnv> envs;
  ReplayData replay;
  const bool is_replay = cfg.is_replay();
  if (is_replay) {
    replay = load_replay(std::get<ReplayEnvSpec>(cfg.environment));
  } else {
    const auto& spec = std::get<SyntheticEnvSpec>(cfg.environment);
    envs.reserve(cfg.seeds.size());
    for (std::uint64_t seed : cfg.seeds) {
      Rng env_rng = master.fork("env").fork(seed);
      envs.push_back(synth_env_from_prior(
          spec.arms, spec.alpha, spec.beta, spec.sigma, spec.location_range,
          spec.location_mode, env_rng));
    }
  }

  const std::size_t n_cells = cfg.policies.size() * cfg.seeds.size();
  std::vector<RegretTrace> traces(n_cells);
  const int workers = resolve_workers(cfg.workers);

#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (std::ptrdiff_t cell = 0; cell < static_cast<std::ptrdiff_t>(n_cells);
       ++cell) {
    const std::size_t pi = static_cast<std::size_t>(cell) / cfg.seeds.size();
    const std::size_t si = static_cast<std::size_t>(cell) % cfg.seeds.size();
    const PolicyConfig& pcfg = cfg.policies[pi];
    const std::uint64_t seed = cfg.seeds[si];
    Rng policy_stream = master.fork("policy").fork(pcfg.id()).fork(seed);
    if (is_replay) {
      traces[static_cast<std::size_t>(cell)] = run_replay_cell(
          replay, pcfg, seed, cfg.horizon, policy_stream,
          std::get<ReplayEnvSpec>(cfg.environment).reward_sign);
    } else {
      Rng reward_stream = master.fork("rewards").fork(pcfg.id()).fork(seed);
      traces[static_cast<std::size_t>(cell)] =
          run_synthetic_cell(envs[si], pcfg, seed, cfg.horizon, policy_stream,
                             reward_stream);
    }
  }

  ExperimentResult result;
  result.traces = std::move(traces);
  for (std::size_t pi = 0; pi < cfg.policies.size(); ++pi) {
    const std::string id = cfg.policies[pi].id();
    std::vector<RegretTrace> group;
    for (std::size_t si = 0; si < cfg.seeds.size(); ++si)
      group.push_back(result.traces[pi * cfg.seeds.size() + si]);
    PolicySummary s;
    s.policy = id;
    s.n_seeds = group.size();
    std::vector<double> finals;
    for (const auto& t : group) {
      finals.push_back(t.final_regret());
      if (t.truncated) ++s.truncated_runs;
    }
    double mean = 0.0;
    for (double f : finals) mean += f;
    mean /= static_cast<double>(finals.size());
    double var = 0.0;
    for (double f : finals) var += (f - mean) * (f - mean);
    var = finals.size() > 1 ? var / static_cast<double>(finals.size() - 1)
                            : 0.0;
    const double half =
        1.96 * std::sqrt(var / static_cast<double>(finals.size()));
    s.mean_final_regret = mean;
    s.ci_lo = mean - half;
    s.ci_hi = mean + half;
    result.summaries.push_back(s);
    if (group.size() >= 2) result.curves.push_back(bayes_regret(group));
  }

  if (!cfg.output_dir.empty()) {
    std::filesystem::create_directories(cfg.output_dir);
    result.trace_path =
        (std::filesystem::path(cfg.output_dir) / "trace.csv").string();
    result.summary_path =
        (std::filesystem::path(cfg.output_dir) / "summary.csv").string();
    write_trace_file(result.traces, result.trace_path);
    write_summary_file(result.summaries, result.summary_path);
  }
  return result;
}

std::size_t verify_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw data_error(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "policy,seed,t,arm,reward,inst_regret,cum_regret")
    throw data_error(path + ": unexpected header '" + line + "'");
  std::string cur_key;
  double running = 0.0;
  std::uint64_t expected_t = 1;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string policy, seed, t_s, arm_s, reward_s, inst_s, cum_s;
    if (!std::getline(ss, policy, ',') || !std::getline(ss, seed, ',') ||
        !std::getline(ss, t_s, ',') || !std::getline(ss, arm_s, ',') ||
        !std::getline(ss, reward_s, ',') || !std::getline(ss, inst_s, ',') ||
        !std::getline(ss, cum_s, ','))
      throw data_error(path + ": short row at line " +
                       std::to_string(line_no));
    const std::string key = policy + "\x1f" + seed;
    if (key != cur_key) {
      cur_key = key;
      running = 0.0;
      expected_t = 1;
    }
    const std::uint64_t t = std::stoull(t_s);
    if (t != expected_t)
      throw data_error(path + ": line " + std::to_string(line_no) +
                       ": round " + t_s + ", expected " +
                       std::to_string(expected_t));
    ++expected_t;
    const double inst = std::stod(inst_s);
    const double cum = std::stod(cum_s);
    if (inst < 0.0)
      throw data_error(path + ": line " + std::to_string(line_no) +
                       ": negative instantaneous regret");
    running += inst;
    if (running != cum)
      throw data_error(path + ": line " + std::to_string(line_no) +
                       ": cum_regret " + cum_s +
                       " does not equal the running sum " +
                       format_double(running));
    ++rows;
  }
  if (rows == 0) throw data_error(path + ": no data rows");
  return rows;
}

}  // namespace stableband
