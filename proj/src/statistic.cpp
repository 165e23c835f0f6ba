#include "dhsic/statistic.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "dhsic/errors.hpp"
#include "dhsic/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dhsic {

namespace {

struct KahanSum {
  double s = 0.0;
  double c = 0.0;
  void add(double x) {
    double y = x - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
};

double clamp_noise(double raw) {
  return (raw > -kNegativeClampThreshold && raw < 0.0) ? 0.0 : raw;
}

std::uint64_t pow_saturating(std::uint64_t base, std::uint64_t exp) {
  std::uint64_t r = 1;
  for (std::uint64_t k = 0; k < exp; ++k) {
    if (base != 0 && r > std::numeric_limits<std::uint64_t>::max() / base)
      return std::numeric_limits<std::uint64_t>::max();
    r *= base;
  }
  return r;
}

void check_assignment(const GramStack& stack, const IndexAssignment& a) {
  if (a.d() != stack.d)
    throw DimensionMismatch("assignment covers " + std::to_string(a.d()) +
                            " variables, stack has " + std::to_string(stack.d));
  for (const auto& m : a.maps)
    if (m.size() != stack.n)
      throw DimensionMismatch("assignment map length " + std::to_string(m.size()) +
                              ", stack has " + std::to_string(stack.n) + " samples");
}

IndexAssignment identity_assignment(std::size_t n, std::size_t d) {
  return to_assignment(identity_permutation_vector(n, d), n);
}

// Advances a base-n odometer; returns false after the last tuple.
bool advance(std::vector<std::size_t>& idx, std::size_t n) {
  for (std::size_t pos = 0; pos < idx.size(); ++pos) {
    if (++idx[pos] < n) return true;
    idx[pos] = 0;
  }
  return false;
}

StatisticValue naive_impl(const GramStack& stack, const IndexAssignment& a) {
  check_assignment(stack, a);
  const std::size_t n = stack.n;
  const std::size_t d = stack.d;

  const std::uint64_t tuples = pow_saturating(n, 2 * static_cast<std::uint64_t>(d));
  if (tuples > kNaiveTupleGuard)
    throw GuardExceeded("term-by-term evaluation needs " + std::to_string(tuples) +
                            " index tuples, limit " + std::to_string(kNaiveTupleGuard),
                        tuples);

  KahanSum first;
  for (std::size_t i1 = 0; i1 < n; ++i1)
    for (std::size_t i2 = 0; i2 < n; ++i2) {
      double prod = 1.0;
      for (std::size_t j = 0; j < d; ++j) prod *= stack.mats[j](a.maps[j][i1], a.maps[j][i2]);
      first.add(prod);
    }

  KahanSum second;
  {
    std::vector<std::size_t> idx(2 * d, 0);
    do {
      double prod = 1.0;
      for (std::size_t j = 0; j < d; ++j)
        prod *= stack.mats[j](a.maps[j][idx[2 * j]], a.maps[j][idx[2 * j + 1]]);
      second.add(prod);
    } while (advance(idx, n));
  }

  KahanSum third;
  {
    std::vector<std::size_t> idx(d + 1, 0);
    do {
      double prod = 1.0;
      for (std::size_t j = 0; j < d; ++j)
        prod *= stack.mats[j](a.maps[j][idx[0]], a.maps[j][idx[j + 1]]);
      third.add(prod);
    } while (advance(idx, n));
  }

  const double nd = static_cast<double>(n);
  const double raw = first.s / (nd * nd) + second.s / std::pow(nd, 2.0 * static_cast<double>(d)) -
                     2.0 * third.s / std::pow(nd, static_cast<double>(d) + 1.0);
  return StatisticValue{clamp_noise(raw), raw, n, d, EvalPath::Naive};
}

}  // namespace

const char* eval_path_name(EvalPath path) {
  switch (path) {
    case EvalPath::Naive: return "naive";
    case EvalPath::Factorized: return "factorized";
  }
  return "unknown";
}

StatisticValue dhsic_naive(const GramStack& stack) {
  return naive_impl(stack, identity_assignment(stack.n, stack.d));
}

StatisticValue dhsic_naive(const GramStack& stack, const IndexAssignment& assignment) {
  return naive_impl(stack, assignment);
}

StatisticValue dhsic_factorized(const GramStack& stack) {
  return StatisticEvaluator(stack).unpermuted();
}

StatisticValue dhsic_factorized(const GramStack& stack, const IndexAssignment& assignment) {
  return StatisticEvaluator(stack).evaluate(assignment);
}

StatisticValue hsic(const GramStack& stack) {
  if (stack.d != 2)
    throw WrongArity("pairwise statistic needs exactly 2 variables, got " +
                     std::to_string(stack.d));
  return dhsic_factorized(stack);
}

StatisticEvaluator::StatisticEvaluator(GramStack stack) : stack_(std::move(stack)) {
  const std::size_t n = stack_.n;
  const std::size_t d = stack_.d;
  if (d < 2) throw WrongArity("need at least 2 variables");
  if (n == 0) throw DomainError("need at least 1 sample");

  row_means_.resize(d);
  grand_means_.resize(d);
  second_term_ = 1.0;
  for (std::size_t j = 0; j < d; ++j) {
    const Matrix& k = stack_.mats[j];
    row_means_[j].resize(n);
    KahanSum grand;
    for (std::size_t i = 0; i < n; ++i) {
      KahanSum row;
      const double* r = k.row(i);
      for (std::size_t b = 0; b < n; ++b) row.add(r[b]);
      row_means_[j][i] = row.s / static_cast<double>(n);
      grand.add(row.s);
    }
    grand_means_[j] = grand.s / (static_cast<double>(n) * static_cast<double>(n));
    second_term_ *= grand_means_[j];
  }
}

namespace {

inline std::size_t mapped(const std::uint32_t* m, std::size_t i) {
  return m ? m[i] : i;
}

bool is_identity(const std::vector<std::uint32_t>& m) {
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i] != i) return false;
  return true;
}

}  // namespace

// Plain sums within each row, compensated across rows. A row holds at most a
// few thousand terms in [0, 1], so the uncompensated part stays tiny.
double StatisticEvaluator::first_term(const std::uint32_t* const* maps) const {
  const std::size_t n = stack_.n;
  const std::size_t d = stack_.d;
  KahanSum sum;
  if (d == 2 && maps[0] == nullptr) {
    const Matrix& k0 = stack_.mats[0];
    const Matrix& k1 = stack_.mats[1];
    const std::uint32_t* s1 = maps[1];
    if (s1 == nullptr) {
      for (std::size_t i1 = 0; i1 < n; ++i1) {
        const double* r0 = k0.row(i1);
        const double* r1 = k1.row(i1);
        double row = 0.0;
        for (std::size_t i2 = 0; i2 < n; ++i2) row += r0[i2] * r1[i2];
        sum.add(row);
      }
    } else {
      for (std::size_t i1 = 0; i1 < n; ++i1) {
        const double* r0 = k0.row(i1);
        const double* r1 = k1.row(s1[i1]);
        double row = 0.0;
        for (std::size_t i2 = 0; i2 < n; ++i2) row += r0[i2] * r1[s1[i2]];
        sum.add(row);
      }
    }
  } else {
    std::vector<const double*> rows(d);
    for (std::size_t i1 = 0; i1 < n; ++i1) {
      for (std::size_t j = 0; j < d; ++j) rows[j] = stack_.mats[j].row(mapped(maps[j], i1));
      double row = 0.0;
      for (std::size_t i2 = 0; i2 < n; ++i2) {
        double prod = rows[0][mapped(maps[0], i2)];
        for (std::size_t j = 1; j < d; ++j) prod *= rows[j][mapped(maps[j], i2)];
        row += prod;
      }
      sum.add(row);
    }
  }
  return sum.s / (static_cast<double>(n) * static_cast<double>(n));
}

double StatisticEvaluator::third_term(const std::uint32_t* const* maps) const {
  const std::size_t n = stack_.n;
  const std::size_t d = stack_.d;
  KahanSum sum;
  for (std::size_t i = 0; i < n; ++i) {
    double prod = row_means_[0][mapped(maps[0], i)];
    for (std::size_t j = 1; j < d; ++j) prod *= row_means_[j][mapped(maps[j], i)];
    sum.add(prod);
  }
  return sum.s / static_cast<double>(n);
}

StatisticValue StatisticEvaluator::evaluate_maps(const std::uint32_t* const* maps) const {
  const double raw = first_term(maps) + second_term_ - 2.0 * third_term(maps);
  return StatisticValue{clamp_noise(raw), raw, stack_.n, stack_.d, EvalPath::Factorized};
}

StatisticValue StatisticEvaluator::unpermuted() const {
  std::vector<const std::uint32_t*> maps(stack_.d, nullptr);
  return evaluate_maps(maps.data());
}

StatisticValue StatisticEvaluator::evaluate(const IndexAssignment& assignment) const {
  check_assignment(stack_, assignment);
  std::vector<const std::uint32_t*> maps(stack_.d);
  for (std::size_t j = 0; j < stack_.d; ++j)
    maps[j] = is_identity(assignment.maps[j]) ? nullptr : assignment.maps[j].data();
  return evaluate_maps(maps.data());
}

StatisticValue StatisticEvaluator::evaluate(const PermutationVector& psi) const {
  if (psi.d() != stack_.d)
    throw DimensionMismatch("permutation vector covers " + std::to_string(psi.d()) +
                            " variables, stack has " + std::to_string(stack_.d));
  for (const auto& p : psi.perms)
    if (p.size() != stack_.n)
      throw DimensionMismatch("permutation length " + std::to_string(p.size()) +
                              ", stack has " + std::to_string(stack_.n) + " samples");
  std::vector<const std::uint32_t*> maps(stack_.d);
  maps[0] = nullptr;
  for (std::size_t j = 1; j < stack_.d; ++j) maps[j] = psi.perms[j - 1].data();
  return evaluate_maps(maps.data());
}

std::vector<double> StatisticEvaluator::evaluate_batch(const std::vector<PermutationVector>& psis,
                                                       int threads) const {
  const int nthreads = resolve_threads(threads);
  std::vector<double> out(psis.size());
  if (nthreads == 1) {
    for (std::size_t i = 0; i < psis.size(); ++i) out[i] = evaluate(psis[i]).value;
    return out;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8) num_threads(nthreads)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(psis.size()); ++i)
    out[static_cast<std::size_t>(i)] = evaluate(psis[static_cast<std::size_t>(i)]).value;
#else
  for (std::size_t i = 0; i < psis.size(); ++i) out[i] = evaluate(psis[i]).value;
#endif
  return out;
}

}  // namespace dhsic
