#include "dhsic/gram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dhsic/errors.hpp"

namespace dhsic {

void Dataset::validate() const {
  if (blocks.size() < 2) throw DimensionMismatch("dataset needs at least 2 variables");
  const std::size_t rows = blocks.front().rows();
  if (rows == 0) throw DomainError("dataset needs at least 1 sample");
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    const Matrix& b = blocks[j];
    if (b.rows() != rows)
      throw DimensionMismatch("block " + std::to_string(j) + " has " +
                              std::to_string(b.rows()) + " rows, expected " +
                              std::to_string(rows));
    if (b.cols() == 0) throw DomainError("block " + std::to_string(j) + " has no columns");
    const double* p = b.data();
    for (std::size_t k = 0; k < b.rows() * b.cols(); ++k)
      if (!std::isfinite(p[k]))
        throw DomainError("block " + std::to_string(j) + " contains a non-finite entry");
  }
}

Dataset make_dataset(std::vector<Matrix> blocks) {
  Dataset data{std::move(blocks)};
  data.validate();
  return data;
}

Matrix reorder_rows(const Matrix& block, const std::vector<std::uint32_t>& perm) {
  if (perm.size() != block.rows())
    throw DimensionMismatch("permutation length " + std::to_string(perm.size()) + " for " +
                            std::to_string(block.rows()) + " rows");
  Matrix nb(block.rows(), block.cols());
  for (std::size_t i = 0; i < block.rows(); ++i)
    std::copy(block.row(perm[i]), block.row(perm[i]) + block.cols(), nb.row(i));
  return nb;
}

Dataset reorder_rows(const Dataset& data, const std::vector<std::uint32_t>& perm) {
  Dataset out;
  out.blocks.reserve(data.d());
  for (const Matrix& b : data.blocks) out.blocks.push_back(reorder_rows(b, perm));
  return out;
}

namespace {

double squared_row_distance(const Matrix& block, std::size_t a, std::size_t b) {
  const double* ra = block.row(a);
  const double* rb = block.row(b);
  double s = 0.0;
  for (std::size_t k = 0; k < block.cols(); ++k) {
    double diff = ra[k] - rb[k];
    s += diff * diff;
  }
  return s;
}

Matrix gaussian_gram(const Matrix& block, double sigma) {
  const std::size_t n = block.rows();
  const double inv_s2 = 1.0 / (sigma * sigma);
  // Entries stay strictly positive: clamp underflow to the smallest normal.
  const double floor_val = std::numeric_limits<double>::min();
  Matrix k(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    k(a, a) = 1.0;
    for (std::size_t b = a + 1; b < n; ++b) {
      double v = std::exp(-squared_row_distance(block, a, b) * inv_s2);
      if (v < floor_val) v = floor_val;
      k(a, b) = v;
      k(b, a) = v;
    }
  }
  return k;
}

Matrix linear_gram(const Matrix& block) {
  const std::size_t n = block.rows();
  Matrix k(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      const double* ra = block.row(a);
      const double* rb = block.row(b);
      double s = 0.0;
      for (std::size_t c = 0; c < block.cols(); ++c) s += ra[c] * rb[c];
      k(a, b) = s;
      k(b, a) = s;
    }
  }
  return k;
}

void check_tabulated(const Matrix& m, std::size_t n, std::size_t j) {
  if (m.rows() != n || m.cols() != n)
    throw DimensionMismatch("tabulated gram " + std::to_string(j) + " is " +
                            std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                            ", expected " + std::to_string(n) + "x" + std::to_string(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      if (!std::isfinite(m(a, b)) || !std::isfinite(m(b, a)))
        throw DomainError("tabulated gram " + std::to_string(j) + " has a non-finite entry");
      if (std::abs(m(a, b) - m(b, a)) > 1e-12)
        throw DomainError("tabulated gram " + std::to_string(j) + " is not symmetric at (" +
                          std::to_string(a) + "," + std::to_string(b) + ")");
    }
}

}  // namespace

double median_heuristic_bandwidth(const Matrix& block) {
  const std::size_t n = block.rows();
  if (n < 2) throw DomainError("median heuristic needs at least 2 samples");
  std::vector<double> dists;
  dists.reserve(n * (n - 1) / 2);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      double d2 = squared_row_distance(block, a, b);
      if (d2 > 0.0) dists.push_back(std::sqrt(d2));
    }
  if (dists.empty()) throw AllPointsIdentical("all pairwise distances are zero");

  const std::size_t m = dists.size();
  if (m % 2 == 1) {
    std::nth_element(dists.begin(), dists.begin() + m / 2, dists.end());
    return dists[m / 2];
  }
  std::nth_element(dists.begin(), dists.begin() + m / 2, dists.end());
  double hi = dists[m / 2];
  std::nth_element(dists.begin(), dists.begin() + m / 2 - 1, dists.begin() + m / 2);
  double lo = dists[m / 2 - 1];
  return 0.5 * (lo + hi);
}

GramStack build_gram_stack(const Dataset& data, const std::vector<KernelSpec>& specs) {
  data.validate();
  if (specs.size() != data.d())
    throw DimensionMismatch("got " + std::to_string(specs.size()) + " kernel specs for " +
                            std::to_string(data.d()) + " variables");

  GramStack stack;
  stack.n = data.n();
  stack.d = data.d();
  stack.specs = specs;
  stack.mats.resize(stack.d);
  stack.resolved_bandwidths.assign(stack.d, 0.0);

  for (std::size_t j = 0; j < stack.d; ++j) {
    const KernelSpec& spec = specs[j];
    switch (spec.family) {
      case KernelFamily::Gaussian: {
        double sigma = spec.bandwidth;
        if (spec.median_heuristic) {
          sigma = median_heuristic_bandwidth(data.blocks[j]);
        } else if (!(sigma > 0.0)) {
          throw DomainError("variable " + std::to_string(j) +
                            ": Gaussian bandwidth must be positive");
        }
        stack.resolved_bandwidths[j] = sigma;
        stack.mats[j] = gaussian_gram(data.blocks[j], sigma);
        break;
      }
      case KernelFamily::Linear:
        if (spec.median_heuristic)
          throw DomainError("median heuristic applies to the Gaussian family only");
        stack.mats[j] = linear_gram(data.blocks[j]);
        break;
      case KernelFamily::UserTabulated:
        if (spec.median_heuristic)
          throw DomainError("median heuristic applies to the Gaussian family only");
        check_tabulated(spec.tabulated, stack.n, j);
        stack.mats[j] = spec.tabulated;
        break;
    }
  }
  return stack;
}

GramStack build_gram_stack_tabulated(std::vector<Matrix> grams) {
  if (grams.size() < 2) throw DimensionMismatch("need at least 2 gram matrices");
  const std::size_t n = grams.front().rows();
  if (n == 0) throw DomainError("empty gram matrix");
  GramStack stack;
  stack.n = n;
  stack.d = grams.size();
  stack.resolved_bandwidths.assign(stack.d, 0.0);
  for (std::size_t j = 0; j < grams.size(); ++j) {
    check_tabulated(grams[j], n, j);
    stack.specs.push_back(KernelSpec::user_tabulated(Matrix()));
  }
  stack.mats = std::move(grams);
  return stack;
}

}  // namespace dhsic
