#include "dhsic/simulate.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numbers>
#include <ostream>

#include "dhsic/bplanner.hpp"
#include "dhsic/errors.hpp"
#include "dhsic/gram.hpp"
#include "dhsic/parallel.hpp"
#include "dhsic/permutation.hpp"
#include "dhsic/rng.hpp"
#include "dhsic/statistic.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dhsic {

const char* scenario_kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Scenario1: return "scenario1";
    case ScenarioKind::Scenario2: return "scenario2";
    case ScenarioKind::NullGaussian: return "null_gaussian";
    case ScenarioKind::Custom: return "custom";
  }
  return "unknown";
}

ScenarioKind scenario_kind_from_name(const std::string& s) {
  if (s == "scenario1") return ScenarioKind::Scenario1;
  if (s == "scenario2") return ScenarioKind::Scenario2;
  if (s == "null_gaussian") return ScenarioKind::NullGaussian;
  if (s == "custom") return ScenarioKind::Custom;
  throw DomainError("unknown scenario kind '" + s + "'");
}

Dataset generate_scenario1(double theta, std::size_t n, std::uint64_t seed) {
  if (n < 2) throw DomainError("need at least 2 samples");
  constexpr std::size_t kDim = 5;
  RngStream rng(seed);
  Matrix x1(n, kDim);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < kDim; ++c) x1(i, c) = rng.normal();
  Matrix x2(n, kDim);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < kDim; ++c) x2(i, c) = theta * x1(i, c) + rng.normal();
  return make_dataset({std::move(x1), std::move(x2)});
}

Dataset generate_scenario2(double theta, std::size_t n) {
  if (n < 2) throw DomainError("need at least 2 samples");
  Matrix x1(n, 1);
  Matrix x2(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i + 1) * 2.0 * std::numbers::pi / static_cast<double>(n);
    x1(i, 0) = x;
    x2(i, 0) = std::sin(theta * x);
  }
  return make_dataset({std::move(x1), std::move(x2)});
}

Dataset generate_null_gaussian(std::size_t n, const std::vector<std::size_t>& dims,
                               std::uint64_t seed) {
  if (n < 2) throw DomainError("need at least 2 samples");
  if (dims.size() < 2) throw DimensionMismatch("need at least 2 variables");
  RngStream rng(seed);
  std::vector<Matrix> blocks;
  blocks.reserve(dims.size());
  for (std::size_t width : dims) {
    if (width == 0) throw DomainError("variable width must be positive");
    Matrix b(n, width);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < width; ++c) b(i, c) = rng.normal();
    blocks.push_back(std::move(b));
  }
  return make_dataset(std::move(blocks));
}

void ScenarioSpec::validate() const {
  if (thetas.empty()) throw DomainError("need at least one theta");
  if (replications < 1) throw DomainError("need at least 1 replication");
  if (B_list.empty()) throw DomainError("need at least one entry in B_list");
  for (std::uint64_t b : B_list)
    if (b < 1) throw DomainError("every B must be at least 1");
  if (n < 2) throw DomainError("need at least 2 samples");
  if (kind == ScenarioKind::NullGaussian || kind == ScenarioKind::Custom) {
    if (dims.size() < 2) throw DomainError("need at least 2 variables");
    for (std::size_t w : dims)
      if (w == 0) throw DomainError("variable width must be positive");
  }
  if (kind == ScenarioKind::Custom && !generator)
    throw DomainError("custom scenario needs a generator");
}

std::vector<double> default_thetas(ScenarioKind kind) {
  std::vector<double> out;
  switch (kind) {
    case ScenarioKind::Scenario1:
      for (int k = 0; k <= 10; ++k) out.push_back(static_cast<double>(k) / 20.0);
      break;
    case ScenarioKind::Scenario2:
      for (int k = 1; k <= 20; ++k) out.push_back(static_cast<double>(k));
      break;
    default:
      out.push_back(0.0);
      break;
  }
  return out;
}

namespace {

// Seed-path purpose tags; must stay distinct across uses of the same master
// seed.
constexpr std::uint64_t kTagCurves = 3;
constexpr std::uint64_t kTagShrinkData = 4;
constexpr std::uint64_t kTagShrinkPerms = 5;
constexpr std::uint64_t kTagPowerData = 10;
constexpr std::uint64_t kTagPowerTest = 11;

std::vector<KernelSpec> median_gaussian_specs(std::size_t d) {
  return std::vector<KernelSpec>(d, KernelSpec::gaussian_median());
}

double binomial_stderr(double rate, std::uint64_t count) {
  return std::sqrt(rate * (1.0 - rate) / static_cast<double>(count));
}

}  // namespace

std::vector<PowerRow> power_sweep(const ScenarioSpec& spec) {
  spec.validate();
  const int nthreads = resolve_threads(spec.threads);
  const std::uint64_t reps = spec.replications;
  std::vector<PowerRow> rows;
  rows.reserve(spec.thetas.size() * spec.B_list.size());

  for (std::size_t ti = 0; ti < spec.thetas.size(); ++ti) {
    const double theta = spec.thetas[ti];

    // The deterministic scenario shares one gram stack across replications.
    GramStack shared;
    const bool fixed_data = spec.kind == ScenarioKind::Scenario2;
    if (fixed_data)
      shared = build_gram_stack(generate_scenario2(theta, spec.n), median_gaussian_specs(2));

    for (std::size_t bi = 0; bi < spec.B_list.size(); ++bi) {
      const std::uint64_t B = spec.B_list[bi];
      std::vector<std::uint8_t> rejected(static_cast<std::size_t>(reps), 0);
      std::exception_ptr err = nullptr;
      std::atomic<bool> failed{false};

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
#endif
      for (std::ptrdiff_t ri = 0; ri < static_cast<std::ptrdiff_t>(reps); ++ri) {
        if (failed.load(std::memory_order_relaxed)) continue;
        try {
          TestConfig cfg;
          cfg.method = spec.method;
          cfg.num_permutations = B;
          cfg.tie_policy = spec.tie_policy;
          cfg.alpha = spec.alpha;
          cfg.enumeration_cap = spec.enumeration_cap;
          cfg.threads = 1;
          cfg.seed = derive_seed(spec.master_seed,
                                 {kTagPowerTest, ti, bi, static_cast<std::uint64_t>(ri)});
          TestResult res;
          if (fixed_data) {
            res = independence_test(shared, cfg);
          } else {
            const std::uint64_t dseed = derive_seed(
                spec.master_seed, {kTagPowerData, ti, bi, static_cast<std::uint64_t>(ri)});
            Dataset data = spec.kind == ScenarioKind::Scenario1
                               ? generate_scenario1(theta, spec.n, dseed)
                           : spec.kind == ScenarioKind::NullGaussian
                               ? generate_null_gaussian(spec.n, spec.dims, dseed)
                               : spec.generator(theta, spec.n, dseed);
            res = independence_test(build_gram_stack(data, median_gaussian_specs(data.d())), cfg);
          }
          rejected[static_cast<std::size_t>(ri)] = res.reject ? 1 : 0;
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
          {
            if (!err) err = std::current_exception();
          }
          failed.store(true, std::memory_order_relaxed);
        }
      }
      if (err) std::rethrow_exception(err);

      std::uint64_t hits = 0;
      for (std::uint8_t r : rejected) hits += r;
      const double rate = static_cast<double>(hits) / static_cast<double>(reps);
      rows.push_back({scenario_kind_name(spec.kind), theta, spec.n, B, spec.alpha.str(), reps,
                      hits, rate, binomial_stderr(rate, reps)});
    }
  }
  (void)nthreads;
  return rows;
}

std::vector<CurveCell> rejection_curve_empirical(const std::vector<double>& p_grid,
                                                 const std::vector<std::uint64_t>& B_list,
                                                 const Alpha& alpha, std::uint64_t trials,
                                                 std::uint64_t seed, int threads) {
  if (p_grid.empty()) throw DomainError("need at least one grid point");
  for (double p : p_grid)
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("grid values must lie in [0, 1]");
  if (B_list.empty()) throw DomainError("need at least one entry in B_list");
  for (std::uint64_t b : B_list)
    if (b < 1) throw DomainError("every B must be at least 1");
  if (trials < 1) throw DomainError("need at least 1 trial");

  const std::size_t cells = p_grid.size() * B_list.size();
  std::vector<CurveCell> out(cells);
  const int nthreads = resolve_threads(threads);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
#endif
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(cells); ++c) {
    const std::size_t pi = static_cast<std::size_t>(c) / B_list.size();
    const std::size_t bi = static_cast<std::size_t>(c) % B_list.size();
    const double p = p_grid[pi];
    const std::uint64_t B = B_list[bi];
    RngStream rng(derive_seed(seed, {kTagCurves, pi, bi}));
    std::uint64_t hits = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
      std::uint64_t z = 0;
      for (std::uint64_t b = 0; b < B; ++b) z += rng.uniform01() < p ? 1 : 0;
      if (alpha.admits(z + 1, B + 1)) ++hits;
    }
    const double rate = static_cast<double>(hits) / static_cast<double>(trials);
    out[static_cast<std::size_t>(c)] = {p,
                                        B,
                                        alpha.str(),
                                        trials,
                                        hits,
                                        rate,
                                        rejection_probability(B, p, alpha),
                                        binomial_stderr(rate, trials)};
  }
  (void)nthreads;
  return out;
}

std::vector<ShrinkageRow> permuted_statistic_shrinkage(const std::vector<std::size_t>& n_list,
                                                       ScenarioKind kind, double theta,
                                                       std::size_t perms_per_n,
                                                       std::uint64_t seed) {
  if (n_list.empty()) throw DomainError("need at least one sample size");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] <= n_list[i - 1]) throw DomainError("sample sizes must be ascending");
  if (perms_per_n < 1) throw DomainError("need at least 1 assignment per sample size");
  if (kind == ScenarioKind::Custom)
    throw DomainError("shrinkage supports the built-in scenarios only");

  std::vector<ShrinkageRow> rows;
  rows.reserve(n_list.size());
  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    const std::size_t n = n_list[ni];
    const std::uint64_t dseed = derive_seed(seed, {kTagShrinkData, ni});
    Dataset data = kind == ScenarioKind::Scenario1 ? generate_scenario1(theta, n, dseed)
                   : kind == ScenarioKind::Scenario2
                       ? generate_scenario2(theta, n)
                       : generate_null_gaussian(n, {1, 1}, dseed);
    StatisticEvaluator eval(build_gram_stack(data, median_gaussian_specs(data.d())));
    RngStream rng(derive_seed(seed, {kTagShrinkPerms, ni}));
    double sum = 0.0;
    for (std::size_t k = 0; k < perms_per_n; ++k)
      sum += eval.evaluate(sample_permutation_vector(n, data.d(), rng)).value;
    rows.push_back({n, sum / static_cast<double>(perms_per_n)});
  }
  return rows;
}

void write_power_csv(std::ostream& os, const std::vector<PowerRow>& rows) {
  os << "kind,theta,n,B,alpha,replications,rejections,rate,mc_stderr\n";
  char buf[256];
  for (const PowerRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%zu,%llu,%s,%llu,%llu,%.17g,%.17g\n",
                  r.kind.c_str(), r.theta, r.n, static_cast<unsigned long long>(r.B),
                  r.alpha.c_str(), static_cast<unsigned long long>(r.replications),
                  static_cast<unsigned long long>(r.rejections), r.rate, r.mc_stderr);
    os << buf;
  }
}

void write_curve_csv(std::ostream& os, const std::vector<CurveCell>& cells) {
  os << "p_exceed,B,alpha,trials,rejections,empirical_rate,analytic_rate,mc_stderr\n";
  char buf[256];
  for (const CurveCell& c : cells) {
    std::snprintf(buf, sizeof(buf), "%.17g,%llu,%s,%llu,%llu,%.17g,%.17g,%.17g\n", c.p_exceed,
                  static_cast<unsigned long long>(c.B), c.alpha.c_str(),
                  static_cast<unsigned long long>(c.trials),
                  static_cast<unsigned long long>(c.rejections), c.empirical_rate,
                  c.analytic_rate, c.mc_stderr);
    os << buf;
  }
}

}  // namespace dhsic
