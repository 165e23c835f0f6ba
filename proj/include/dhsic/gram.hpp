#pragma once

#include <cstddef>
#include <vector>

#include "dhsic/dataset.hpp"
#include "dhsic/matrix.hpp"

namespace dhsic {

enum class KernelFamily { Gaussian, Linear, UserTabulated };

// Kernel choice for one variable. The Gaussian kernel is
// k(x, y) = exp(-||x - y||^2 / sigma^2); sigma comes either from the caller
// or from the median heuristic at Gram-build time.
struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  double bandwidth = 0.0;
  bool median_heuristic = false;
  Matrix tabulated;  // n x n, UserTabulated only

  static KernelSpec gaussian_median() {
    KernelSpec s;
    s.median_heuristic = true;
    return s;
  }
  static KernelSpec gaussian(double sigma) {
    KernelSpec s;
    s.bandwidth = sigma;
    return s;
  }
  static KernelSpec linear() {
    KernelSpec s;
    s.family = KernelFamily::Linear;
    return s;
  }
  static KernelSpec user_tabulated(Matrix gram) {
    KernelSpec s;
    s.family = KernelFamily::UserTabulated;
    s.tabulated = std::move(gram);
    return s;
  }
};

// The d symmetric n x n kernel matrices, one per variable, plus the specs
// that produced them. Immutable after construction; safe for concurrent
// read-only use.
struct GramStack {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<Matrix> mats;
  std::vector<KernelSpec> specs;
  // Post-heuristic sigma per variable; 0 for non-Gaussian families.
  std::vector<double> resolved_bandwidths;
};

// Median of the n(n-1)/2 pairwise Euclidean row distances, zero distances
// excluded (an even count takes the mean of the two central order
// statistics). Throws AllPointsIdentical when every distance is zero and
// DomainError when n < 2.
double median_heuristic_bandwidth(const Matrix& block);

GramStack build_gram_stack(const Dataset& data, const std::vector<KernelSpec>& specs);

// Builds a stack directly from precomputed kernel matrices (non-Euclidean
// inputs); validates squareness, shared size, symmetry and finiteness.
GramStack build_gram_stack_tabulated(std::vector<Matrix> grams);

}  // namespace dhsic
