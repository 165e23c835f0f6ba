#pragma once

#include <cstdint>
#include <vector>

#include "dhsic/gram.hpp"
#include "dhsic/permutation.hpp"

namespace dhsic {

enum class EvalPath { Naive, Factorized };

const char* eval_path_name(EvalPath path);

// V-statistic estimate of joint dependence across the d variables of a gram
// stack. The estimator is nonnegative in exact arithmetic; tiny negative
// round-off is clamped to zero in `value` while `raw_value` keeps the
// computed number.
struct StatisticValue {
  double value;
  double raw_value;
  std::size_t n;
  std::size_t d;
  EvalPath path;
};

inline constexpr double kNegativeClampThreshold = 1e-10;

// Term-by-term summation over all index tuples. Cost is dominated by the
// n^(2d) tuples of the second term; refuses when that count exceeds the guard.
inline constexpr std::uint64_t kNaiveTupleGuard = 100000000;

StatisticValue dhsic_naive(const GramStack& stack);
StatisticValue dhsic_naive(const GramStack& stack, const IndexAssignment& assignment);

StatisticValue dhsic_factorized(const GramStack& stack);
StatisticValue dhsic_factorized(const GramStack& stack, const IndexAssignment& assignment);

// Two-variable case.
StatisticValue hsic(const GramStack& stack);

// Precomputes row and grand sums of each gram matrix so that repeated
// evaluation under different index assignments costs one pass over the
// first term only.
class StatisticEvaluator {
 public:
  explicit StatisticEvaluator(GramStack stack);

  const GramStack& stack() const { return stack_; }
  std::size_t n() const { return stack_.n; }
  std::size_t d() const { return stack_.d; }

  StatisticValue unpermuted() const;
  StatisticValue evaluate(const IndexAssignment& assignment) const;
  StatisticValue evaluate(const PermutationVector& psi) const;

  // Clamped statistic for each permutation vector. threads == 1 runs the
  // plain serial loop; other values use the parallel loop. Both orderings
  // produce bitwise identical output.
  std::vector<double> evaluate_batch(const std::vector<PermutationVector>& psis,
                                     int threads = 0) const;

 private:
  GramStack stack_;
  std::vector<std::vector<double>> row_means_;
  std::vector<double> grand_means_;
  double second_term_;

  // maps[j] indexes variable j's gram; nullptr stands for the identity.
  StatisticValue evaluate_maps(const std::uint32_t* const* maps) const;
  double first_term(const std::uint32_t* const* maps) const;
  double third_term(const std::uint32_t* const* maps) const;
};

}  // namespace dhsic
