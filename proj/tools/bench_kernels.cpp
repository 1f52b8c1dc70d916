// Timing comparison of the parallel kernels against their serial references:
// batch CMS sampling, ECF evaluation, and the per-arm Gibbs refresh loop.
#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "stableband/ecf.hpp"
#include "stableband/policies.hpp"
#include "stableband/posterior.hpp"
#include "stableband/stable.hpp"

using namespace stableband;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

template <typename F>
double time_best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    f();
    best = std::min(best, ms_since(t0));
  }
  return best;
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (OpenMP disabled)\n");
#endif
  const StableParams p{1.3, -0.5, 1.0, 0.0};
  const std::size_t n = 1'000'000;

  volatile double sink = 0.0;

  const double t_ser = time_best_of(3, [&] {
    auto v = sample_serial(p, n, Rng(7));
    sink = sink + v[0];
  });
  const double t_par = time_best_of(3, [&] {
    auto v = sample(p, n, Rng(7));
    sink = sink + v[0];
  });
  std::printf("cms sample   n=%zu: serial %8.2f ms   parallel %8.2f ms   speedup %.2fx\n",
              n, t_ser, t_par, t_ser / t_par);

  const auto data = sample(p, n, Rng(7));
  const double e_ser = time_best_of(3, [&] {
    sink = sink + ecf_serial(data, 0.5).real();
  });
  const double e_par = time_best_of(3, [&] {
    sink = sink + ecf(data, 0.5).real();
  });
  std::printf("ecf          n=%zu: serial %8.2f ms   parallel %8.2f ms   speedup %.2fx\n",
              n, e_ser, e_par, e_ser / e_par);

  // Gibbs refresh across arms: the loop the Thompson policies run each round.
  const std::size_t n_arms = 30, hist = 100;
  const int budget = 25;
  auto make_arms = [&] {
    std::vector<ArmState> arms;
    Rng chain_rng(11);
    for (std::size_t a = 0; a < n_arms; ++a) {
      arms.emplace_back(p.alpha, chain_rng.fork(a));
      Rng data_rng = Rng(100).fork(a);
      for (std::size_t i = 0; i < hist; ++i)
        update(arms.back(), sample_one(p, data_rng));
    }
    return arms;
  };
  const PriorSpec prior = PriorSpec::flat(-10.0, 10.0);
  auto sweep_all = [&](std::vector<ArmState>& arms, bool parallel) {
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (std::ptrdiff_t a = 0; a < static_cast<std::ptrdiff_t>(arms.size());
         ++a) {
      auto& arm = arms[static_cast<std::size_t>(a)];
      sink = sink + posterior_draw(arm.reward_history, p.alpha, p.beta,
                                   p.sigma, prior, budget, arm.gibbs);
    }
  };
  auto arms1 = make_arms();
  const double g_ser = time_best_of(3, [&] { sweep_all(arms1, false); });
  auto arms2 = make_arms();
  const double g_par = time_best_of(3, [&] { sweep_all(arms2, true); });
  std::printf("gibbs sweep  %zu arms x %zu obs x %d sweeps: serial %8.2f ms   parallel %8.2f ms   speedup %.2fx\n",
              n_arms, hist, budget, g_ser, g_par, g_ser / g_par);
  std::printf("per-observation gibbs cost: %.2f us\n",
              g_ser * 1e3 / static_cast<double>(n_arms * hist * budget));
  return 0;
}
