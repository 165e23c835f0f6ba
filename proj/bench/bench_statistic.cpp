// Timing comparison between the term-by-term reference sum, the factorized
// evaluator, and the batched evaluator at different thread counts.

#include <chrono>
#include <cstdio>
#include <vector>

#include "dhsic/gram.hpp"
#include "dhsic/parallel.hpp"
#include "dhsic/permutation.hpp"
#include "dhsic/rng.hpp"
#include "dhsic/statistic.hpp"

using namespace dhsic;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Dataset random_dataset(std::size_t n, std::size_t d, RngStream& rng) {
  std::vector<Matrix> blocks;
  for (std::size_t j = 0; j < d; ++j) {
    Matrix m(n, 2);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < 2; ++c) m(i, c) = rng.normal();
    blocks.push_back(std::move(m));
  }
  return make_dataset(std::move(blocks));
}

void head_to_head(std::size_t n, std::size_t d, int reps) {
  RngStream rng(derive_seed(1, {n, d}));
  GramStack stack = build_gram_stack(random_dataset(n, d, rng),
                                     std::vector<KernelSpec>(d, KernelSpec::gaussian(1.0)));
  volatile double sink = 0.0;

  auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) sink += dhsic_naive(stack).value;
  double t_naive = seconds_since(t0) / reps;

  t0 = Clock::now();
  for (int r = 0; r < reps; ++r) sink += dhsic_factorized(stack).value;
  double t_fact = seconds_since(t0) / reps;

  std::printf("n=%3zu d=%zu   reference %10.1f us   factorized %8.2f us   speedup %8.1fx\n", n, d,
              t_naive * 1e6, t_fact * 1e6, t_naive / t_fact);
  (void)sink;
}

void batch_scaling(std::size_t n, std::size_t batch) {
  RngStream rng(derive_seed(2, {n}));
  GramStack stack = build_gram_stack(random_dataset(n, 2, rng),
                                     {KernelSpec::gaussian(1.0), KernelSpec::gaussian(1.0)});
  StatisticEvaluator eval(stack);
  std::vector<PermutationVector> psis;
  psis.reserve(batch);
  for (std::size_t i = 0; i < batch; ++i) psis.push_back(sample_permutation_vector(n, 2, rng));

  auto t0 = Clock::now();
  std::vector<double> serial = eval.evaluate_batch(psis, 1);
  double t1 = seconds_since(t0);

  const int max_threads = resolve_threads(0);
  t0 = Clock::now();
  std::vector<double> parallel = eval.evaluate_batch(psis, max_threads);
  double tp = seconds_since(t0);

  bool identical = serial == parallel;
  std::printf("n=%3zu batch=%zu   1 thread %7.1f ms   %d threads %7.1f ms   identical=%s\n", n,
              batch, t1 * 1e3, max_threads, tp * 1e3, identical ? "yes" : "NO");
}

}  // namespace

int main() {
  std::printf("single evaluation, reference vs factorized\n");
  head_to_head(6, 2, 200);
  head_to_head(8, 2, 100);
  head_to_head(6, 3, 20);
  head_to_head(10, 2, 20);

  std::printf("\nbatched permutation evaluation\n");
  batch_scaling(100, 2000);
  batch_scaling(200, 500);
  return 0;
}
