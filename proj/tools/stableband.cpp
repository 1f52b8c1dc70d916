#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stableband/dataset.hpp"
#include "stableband/ecf.hpp"
#include "stableband/errors.hpp"
#include "stableband/experiment.hpp"
#include "stableband/stable.hpp"

namespace {

using namespace stableband;

int cmd_sample(const StableParams& params, std::size_t count,
               std::uint64_t seed, const std::string& out_path) {
  params.validate();
  if (count < 1) throw validation_error("sample: --count must be >= 1");
  const auto draws = sample(params, count, Rng(seed));
  std::ofstream out(out_path);
  if (!out) throw data_error("cannot write " + out_path);
  for (double d : draws) out << format_double(d) << '\n';
  out.close();

  std::vector<double> sorted(draws);
  std::sort(sorted.begin(), sorted.end());
  auto q = [&](double p) {
    return sorted[static_cast<std::size_t>(p * (sorted.size() - 1))];
  };
  std::printf("wrote %zu draws to %s\n", draws.size(), out_path.c_str());
  std::printf("quartiles: q25=%g  median=%g  q75=%g\n", q(0.25), q(0.5),
              q(0.75));
  if (count >= 100) {
    const FitReport fit = estimate_all(draws);
    std::printf("ecf quick fit: alpha=%.4f beta=%.4f sigma=%.6g mu=%.6g%s%s\n",
                fit.params.alpha, fit.params.beta, fit.params.sigma,
                fit.params.mu, fit.alpha_clamped ? " [alpha clamped]" : "",
                fit.beta_clamped ? " [beta clamped]" : "");
  }
  return 0;
}

int cmd_estimate(const std::string& data_path, bool log_ret,
                 std::size_t column, char delimiter, bool header,
                 const std::string& out_path) {
  Matrix m = read_matrix_csv(data_path, delimiter, header);
  if (log_ret) m = log_returns(m);
  if (column >= m.cols)
    throw validation_error("estimate: --column out of range (file has " +
                           std::to_string(m.cols) + " columns)");
  const auto series = m.column(column);
  const FitReport fit = estimate_all(series);
  std::printf("n=%zu  sup CF residual=%.4g%s%s\n", fit.n_samples,
              fit.sup_cf_residual, fit.alpha_clamped ? " [alpha clamped]" : "",
              fit.beta_clamped ? " [beta clamped]" : "");
  std::printf("%-12s %-12s %-8s %-8s %-10s\n", "", "Theta", "Alpha", "Beta",
              "Sigma");
  std::printf("%-12s %-12.7g %-8.4g %-8.4g %-10.6g\n", "estimate", fit.theta,
              fit.params.alpha, fit.params.beta, fit.params.sigma);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw data_error("cannot write " + out_path);
    out << "theta,alpha,beta,sigma,mu,n,alpha_clamped,beta_clamped\n"
        << format_double(fit.theta) << ',' << format_double(fit.params.alpha)
        << ',' << format_double(fit.params.beta) << ','
        << format_double(fit.params.sigma) << ','
        << format_double(fit.params.mu) << ',' << fit.n_samples << ','
        << (fit.alpha_clamped ? 1 : 0) << ',' << (fit.beta_clamped ? 1 : 0)
        << '\n';
    std::printf("wrote %s\n", out_path.c_str());
  }
  return 0;
}

void print_summaries(const ExperimentResult& result) {
  std::printf("%-24s %-8s %-16s %-16s %-16s %s\n", "policy", "seeds",
              "mean_final", "ci95_lo", "ci95_hi", "truncated");
  for (const auto& s : result.summaries)
    std::printf("%-24s %-8zu %-16.6g %-16.6g %-16.6g %zu\n", s.policy.c_str(),
                s.n_seeds, s.mean_final_regret, s.ci_lo, s.ci_hi,
                s.truncated_runs);
  if (!result.trace_path.empty())
    std::printf("trace: %s\nsummary: %s\n", result.trace_path.c_str(),
                result.summary_path.c_str());
}

int cmd_run(const std::string& config_path, bool want_replay) {
  const ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
  if (want_replay && !cfg.is_replay())
    throw validation_error(
        "replay: config has a synthetic environment; use `run`");
  if (!want_replay && cfg.is_replay())
    throw validation_error(
        "run: config has a replay environment; use `replay`");
  const ExperimentResult result = run_experiment(cfg);
  print_summaries(result);
  return 0;
}

int cmd_ingest(const std::string& path, const std::string& kind,
               const std::string& out_stem, char delimiter, bool header) {
  const DatasetManifest m = ingest_dataset(
      path, dataset_kind_from_string(kind), out_stem, delimiter, header);
  std::printf("ingested %s: %zu rows x %zu cols\n", path.c_str(), m.rows,
              m.cols);
  std::printf("matrix:   %s\nmanifest: %s.manifest.json\nchecksum: %s\n",
              m.normalized_path.c_str(), out_stem.c_str(), m.checksum.c_str());
  return 0;
}

int cmd_verify(const std::string& trace_path) {
  const std::size_t rows = verify_trace_csv(trace_path);
  std::printf("%s: OK (%zu rows, cum_regret matches running sums)\n",
              trace_path.c_str(), rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"alpha-stable bandit toolkit"};
  app.require_subcommand(1);

  // sample
  auto* sample_cmd =
      app.add_subcommand("sample", "draw variates from a stable law");
  StableParams sp;
  std::size_t count = 1000;
  std::uint64_t seed = 1;
  std::string out_path = "samples.txt";
  sample_cmd->add_option("--alpha", sp.alpha, "tail exponent in (1,2]");
  sample_cmd->add_option("--beta", sp.beta, "skewness in [-1,1]");
  sample_cmd->add_option("--sigma", sp.sigma, "scale > 0");
  sample_cmd->add_option("--mu", sp.mu, "location");
  sample_cmd->add_option("--count", count, "number of draws");
  sample_cmd->add_option("--seed", seed, "stream seed");
  sample_cmd->add_option("--out", out_path, "output file, one draw per line");

  // estimate
  auto* est_cmd = app.add_subcommand(
      "estimate", "fit (alpha, beta, sigma, mu) from a numeric series");
  std::string est_path;
  bool est_logret = false, est_header = false;
  std::size_t est_column = 0;
  std::string est_delim = ",", est_out;
  est_cmd->add_option("data", est_path, "CSV/text file of numbers")
      ->required();
  est_cmd->add_flag("--log-returns", est_logret,
                    "treat input as prices; fit their log returns");
  est_cmd->add_option("--column", est_column, "column to fit (default 0)");
  est_cmd->add_option("--delimiter", est_delim, "cell delimiter");
  est_cmd->add_flag("--header", est_header, "skip the first row");
  est_cmd->add_option("--out", est_out, "also write a CSV result row");

  // run / replay
  auto* run_cmd =
      app.add_subcommand("run", "run a synthetic bandit experiment");
  std::string run_config;
  run_cmd->add_option("--config", run_config, "experiment config JSON")
      ->required();
  auto* replay_cmd =
      app.add_subcommand("replay", "run a dataset-replay bandit experiment");
  std::string replay_config;
  replay_cmd->add_option("--config", replay_config, "experiment config JSON")
      ->required();

  // ingest
  auto* ingest_cmd = app.add_subcommand(
      "ingest", "normalize a dataset to the canonical matrix format");
  std::string ing_path, ing_kind = "generic-matrix", ing_stem = "dataset";
  std::string ing_delim = ",";
  bool ing_header = false;
  ingest_cmd->add_option("data", ing_path, "input file")->required();
  ingest_cmd->add_option("--kind", ing_kind,
                         "price-series | latency-matrix | generic-matrix");
  ingest_cmd->add_option("--out-stem", ing_stem,
                         "output stem for .matrix.csv / .manifest.json");
  ingest_cmd->add_option("--delimiter", ing_delim, "cell delimiter");
  ingest_cmd->add_flag("--header", ing_header, "skip the first row");

  // verify
  auto* verify_cmd =
      app.add_subcommand("verify", "check a trace CSV for self-consistency");
  std::string verify_path;
  verify_cmd->add_option("trace", verify_path, "trace.csv to check")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sample_cmd->parsed())
      return cmd_sample(sp, count, seed, out_path);
    if (est_cmd->parsed())
      return cmd_estimate(est_path, est_logret, est_column, est_delim.at(0),
                          est_header, est_out);
    if (run_cmd->parsed()) return cmd_run(run_config, false);
    if (replay_cmd->parsed()) return cmd_run(replay_config, true);
    if (ingest_cmd->parsed())
      return cmd_ingest(ing_path, ing_kind, ing_stem, ing_delim.at(0),
                        ing_header);
    if (verify_cmd->parsed()) return cmd_verify(verify_path);
  } catch (const validation_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const data_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
