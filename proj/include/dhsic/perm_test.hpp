#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dhsic/alpha.hpp"
#include "dhsic/gram.hpp"
#include "dhsic/rng.hpp"
#include "dhsic/statistic.hpp"

namespace dhsic {

enum class TiePolicy { Conservative, Random };
enum class TestMethod { Exhaustive, Sampled };

const char* tie_policy_name(TiePolicy p);
const char* test_method_name(TestMethod m);
TiePolicy tie_policy_from_name(const std::string& s);
TestMethod test_method_from_name(const std::string& s);

// Rank of the observed value among observed + replicates, 1-based.
// Conservative counts every replicate >= observed against it. Random places
// the observed value uniformly within its tie block, which needs a stream.
struct RankResult {
  std::uint64_t rank;
  std::uint64_t num_greater;  // replicates strictly above the observed value
  std::uint64_t num_ties;     // replicates exactly equal to it
};

RankResult rank_with_ties(double observed, const std::vector<double>& replicates,
                          TiePolicy policy, RngStream* rng = nullptr);

struct TestConfig {
  TestMethod method = TestMethod::Sampled;
  std::uint64_t num_permutations = 999;  // sampled draws; ignored when exhaustive
  TiePolicy tie_policy = TiePolicy::Conservative;
  Alpha alpha = Alpha();
  std::uint64_t seed = 0;
  std::uint64_t enumeration_cap = 1000000;
  int threads = 0;
  bool keep_replicates = false;
};

struct TestResult {
  StatisticValue statistic;
  TestMethod method;
  TiePolicy tie_policy;
  std::uint64_t rank;
  std::uint64_t total;  // replicates + 1
  double p_value;
  bool reject;
  Alpha alpha;
  std::uint64_t num_ties_at_statistic;
  std::uint64_t seed;
  std::vector<double> resolved_bandwidths;
  std::string warning;                  // empty when none
  std::vector<double> replicate_values; // populated only on request
};

// Ranks the observed statistic against every permutation vector. Refuses via
// GuardExceeded when the group size exceeds cfg.enumeration_cap.
TestResult test_exhaustive(const GramStack& stack, const TestConfig& cfg);

// Ranks the observed statistic against cfg.num_permutations uniform draws.
// Replicate i always uses the stream derived from (seed, 1, i), so results do
// not depend on thread count or schedule.
TestResult test_sampled(const GramStack& stack, const TestConfig& cfg);

TestResult independence_test(const GramStack& stack, const TestConfig& cfg);

}  // namespace dhsic
