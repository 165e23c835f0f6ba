#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "dhsic/alpha.hpp"
#include "dhsic/dataset.hpp"
#include "dhsic/perm_test.hpp"

namespace dhsic {

enum class ScenarioKind { Scenario1, Scenario2, NullGaussian, Custom };

const char* scenario_kind_name(ScenarioKind k);
ScenarioKind scenario_kind_from_name(const std::string& s);

// Linear dependence in five dimensions: second variable = theta * first + noise.
Dataset generate_scenario1(double theta, std::size_t n, std::uint64_t seed);

// Fixed sinusoid on the grid x_i = i * 2pi / n, i = 1..n; no randomness.
Dataset generate_scenario2(double theta, std::size_t n = 100);

// Independent standard normal blocks with the given widths.
Dataset generate_null_gaussian(std::size_t n, const std::vector<std::size_t>& dims,
                               std::uint64_t seed);

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::NullGaussian;
  std::vector<double> thetas = {0.0};
  std::size_t n = 100;
  std::vector<std::size_t> dims = {1, 1};  // NullGaussian and Custom only
  std::uint64_t replications = 100;
  std::vector<std::uint64_t> B_list = {199};
  Alpha alpha = Alpha();
  TiePolicy tie_policy = TiePolicy::Conservative;
  TestMethod method = TestMethod::Sampled;
  std::uint64_t enumeration_cap = 1000000;
  std::uint64_t master_seed = 0;
  int threads = 0;
  // Only read when kind == Custom: (theta, n, seed) -> data.
  std::function<Dataset(double, std::size_t, std::uint64_t)> generator;

  void validate() const;
};

std::vector<double> default_thetas(ScenarioKind kind);

struct PowerRow {
  std::string kind;
  double theta;
  std::size_t n;
  std::uint64_t B;
  std::string alpha;
  std::uint64_t replications;
  std::uint64_t rejections;
  double rate;
  double mc_stderr;  // sqrt(rate * (1 - rate) / replications)
};

// One row per (theta, B). Scenario2 keeps its deterministic dataset fixed and
// varies only permutation seeds; the other kinds draw fresh data every
// replication. Replication r of cell (ti, bi) always uses the same derived
// seeds, so the output does not depend on the thread count.
std::vector<PowerRow> power_sweep(const ScenarioSpec& spec);

struct CurveCell {
  double p_exceed;
  std::uint64_t B;
  std::string alpha;
  std::uint64_t trials;
  std::uint64_t rejections;
  double empirical_rate;
  double analytic_rate;
  double mc_stderr;
};

// Simulates the sampled test's rejection indicator directly: each trial draws
// the replicate-exceedance count as a sum of Bernoulli(p) draws and applies
// the rank rule. The analytic column comes from the binomial tail.
std::vector<CurveCell> rejection_curve_empirical(const std::vector<double>& p_grid,
                                                 const std::vector<std::uint64_t>& B_list,
                                                 const Alpha& alpha, std::uint64_t trials,
                                                 std::uint64_t seed, int threads = 0);

struct ShrinkageRow {
  std::size_t n;
  double mean_permuted;
};

// Mean statistic under random index assignments, one dataset per sample size.
std::vector<ShrinkageRow> permuted_statistic_shrinkage(const std::vector<std::size_t>& n_list,
                                                       ScenarioKind kind, double theta,
                                                       std::size_t perms_per_n,
                                                       std::uint64_t seed);

void write_power_csv(std::ostream& os, const std::vector<PowerRow>& rows);
void write_curve_csv(std::ostream& os, const std::vector<CurveCell>& cells);

}  // namespace dhsic
