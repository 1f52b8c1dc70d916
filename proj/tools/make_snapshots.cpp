// Regenerates the bundled data snapshots under data/ from fixed seeds.
// See data/README.md for what each file stands in for.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "stableband/dataset.hpp"
#include "stableband/errors.hpp"
#include "stableband/rng.hpp"
#include "stableband/stable.hpp"

using namespace stableband;

namespace {

double location_for_theta(double theta, double alpha) {
  return theta / (2.0 - std::pow(2.0, 1.0 / alpha));
}

void write_series(const std::vector<double>& xs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write " + path);
  for (double x : xs) out << format_double(x) << '\n';
  std::printf("wrote %s (%zu rows)\n", path.c_str(), xs.size());
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "data";

  // Daily close series whose log returns follow the stable law fitted to the
  // published financial row: alpha 1.38, beta -0.21, sigma 0.0011,
  // theta 0.0000771.
  {
    StableParams p;
    p.alpha = 1.38;
    p.beta = -0.21;
    p.sigma = 0.0011;
    p.mu = location_for_theta(0.0000771, p.alpha);
    const auto returns = sample(p, 20000, Rng(90001));
    std::vector<double> prices;
    prices.reserve(returns.size() + 1);
    double log_price = std::log(42.17);
    prices.push_back(std::exp(log_price));
    for (double r : returns) {
      log_price += r;
      prices.push_back(std::exp(log_price));
    }
    write_series(prices, dir + "/financial_prices.csv");
  }

  // Latency-derived series matching the published wireless row: alpha 1.72,
  // beta -0.32, sigma 0.0011, theta 0.0000171.
  {
    StableParams p;
    p.alpha = 1.72;
    p.beta = -0.32;
    p.sigma = 0.0011;
    p.mu = location_for_theta(0.0000171, p.alpha);
    write_series(sample(p, 20000, Rng(90002)), dir + "/wireless_series.csv");
  }

  // Page-load latency matrix (seconds): one column per site, 1361 probes
  // each, heavy-tailed around a per-site base latency.
  {
    const std::size_t rows = 1361, cols = 40;
    Matrix m;
    m.rows = rows;
    m.cols = cols;
    m.values.resize(rows * cols);
    Rng base_rng(90003);
    for (std::size_t c = 0; c < cols; ++c) {
      StableParams p;
      p.alpha = 1.72;
      p.beta = -0.32;
      p.sigma = 0.01;
      p.mu = base_rng.uniform(0.05, 0.15);
      const auto col = sample(p, rows, base_rng.fork(c));
      for (std::size_t r = 0; r < rows; ++r)
        m.at(r, c) = std::max(0.001, col[r]);
    }
    write_matrix_csv(m, dir + "/wireless_latency.csv");
    std::printf("wrote %s/wireless_latency.csv (%zux%zu)\n", dir.c_str(), rows,
                cols);
  }

  // Close-price matrix for the stock-selection replay: 10 tickers, drifts
  // equally spaced, stable log-return noise at the financial-row scale.
  {
    const std::size_t rows = 1001, cols = 10;
    Matrix m;
    m.rows = rows;
    m.cols = cols;
    m.values.resize(rows * cols);
    Rng rng(90004);
    for (std::size_t c = 0; c < cols; ++c) {
      StableParams p;
      p.alpha = 1.38;
      p.beta = -0.21;
      p.sigma = 0.0011;
      p.mu = 2e-4 * static_cast<double>(c) / static_cast<double>(cols - 1);
      const auto returns = sample(p, rows - 1, rng.fork(1000 + c));
      double log_price = std::log(20.0 + 15.0 * static_cast<double>(c));
      m.at(0, c) = std::exp(log_price);
      for (std::size_t r = 1; r < rows; ++r) {
        log_price += returns[r - 1];
        m.at(r, c) = std::exp(log_price);
      }
    }
    write_matrix_csv(m, dir + "/stocks_prices.csv");
    std::printf("wrote %s/stocks_prices.csv (%zux%zu)\n", dir.c_str(), rows,
                cols);
  }
  return 0;
}
