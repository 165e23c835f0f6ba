#include "dhsic/permutation.hpp"

#include <limits>
#include <numeric>
#include <string>

#include "dhsic/errors.hpp"

namespace dhsic {

namespace {

std::vector<std::uint32_t> identity_perm(std::size_t n) {
  std::vector<std::uint32_t> p(n);
  std::iota(p.begin(), p.end(), 0u);
  return p;
}

std::uint64_t factorial_saturating(std::size_t n) {
  std::uint64_t f = 1;
  for (std::size_t k = 2; k <= n; ++k) {
    if (f > std::numeric_limits<std::uint64_t>::max() / k)
      return std::numeric_limits<std::uint64_t>::max();
    f *= k;
  }
  return f;
}

// Unrank in [0, n!) to a permutation via the factorial number system. Rank 0
// is the identity; ranks increase in lexicographic order of the permutation.
std::vector<std::uint32_t> unrank_permutation(std::uint64_t rank, std::size_t n) {
  std::vector<std::uint64_t> digits(n, 0);
  for (std::size_t pos = n; pos-- > 0;) {
    digits[pos] = rank % (n - pos);
    rank /= (n - pos);
  }
  // digits are now most-significant first: digits[i] in [0, n-i).
  std::vector<std::uint32_t> pool = identity_perm(n);
  std::vector<std::uint32_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t pick = static_cast<std::size_t>(digits[i]);
    out[i] = pool[pick];
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return out;
}

void check_arity(std::size_t n, std::size_t d) {
  if (d < 2) throw WrongArity("need at least 2 variables, got " + std::to_string(d));
  if (n == 0) throw DomainError("need at least 1 sample");
}

}  // namespace

PermutationVector identity_permutation_vector(std::size_t n, std::size_t d) {
  check_arity(n, d);
  PermutationVector psi;
  psi.perms.assign(d - 1, identity_perm(n));
  return psi;
}

PermutationVector sample_permutation_vector(std::size_t n, std::size_t d, RngStream& rng) {
  check_arity(n, d);
  PermutationVector psi;
  psi.perms.reserve(d - 1);
  for (std::size_t j = 0; j + 1 < d; ++j) {
    std::vector<std::uint32_t> p = identity_perm(n);
    for (std::size_t i = n; i-- > 1;) {
      std::uint64_t k = rng.uniform_below(static_cast<std::uint64_t>(i) + 1);
      std::swap(p[i], p[static_cast<std::size_t>(k)]);
    }
    psi.perms.push_back(std::move(p));
  }
  return psi;
}

IndexAssignment to_assignment(const PermutationVector& psi, std::size_t n) {
  if (psi.n() != n)
    throw DimensionMismatch("permutation vector is over " + std::to_string(psi.n()) +
                            " samples, expected " + std::to_string(n));
  IndexAssignment a;
  a.maps.reserve(psi.d());
  a.maps.push_back(identity_perm(n));
  for (const auto& p : psi.perms) a.maps.push_back(p);
  return a;
}

std::uint64_t permutation_vector_count(std::size_t n, std::size_t d) {
  check_arity(n, d);
  const std::uint64_t f = factorial_saturating(n);
  std::uint64_t total = 1;
  for (std::size_t j = 0; j + 1 < d; ++j) {
    if (f != 0 && total > std::numeric_limits<std::uint64_t>::max() / f)
      return std::numeric_limits<std::uint64_t>::max();
    total *= f;
  }
  return total;
}

PermutationEnumeration::PermutationEnumeration(std::size_t n, std::size_t d) : n_(n), d_(d) {
  check_arity(n, d);
  per_var_ = factorial_saturating(n);
  total_ = permutation_vector_count(n, d);
  if (per_var_ == std::numeric_limits<std::uint64_t>::max() ||
      total_ == std::numeric_limits<std::uint64_t>::max())
    throw GuardExceeded("permutation space overflows a 64-bit count",
                        std::numeric_limits<std::uint64_t>::max());
}

PermutationVector PermutationEnumeration::at(std::uint64_t rank) const {
  if (rank >= total_)
    throw DomainError("rank " + std::to_string(rank) + " out of range, size " +
                      std::to_string(total_));
  // Mixed-radix digits base n!, variable 2 most significant.
  PermutationVector psi;
  psi.perms.resize(d_ - 1);
  for (std::size_t j = d_ - 1; j-- > 0;) {
    psi.perms[j] = unrank_permutation(rank % per_var_, n_);
    rank /= per_var_;
  }
  return psi;
}

std::vector<PermutationVector> enumerate_permutation_vectors(std::size_t n, std::size_t d,
                                                             std::uint64_t cap) {
  PermutationEnumeration en(n, d);
  if (en.size() > cap)
    throw GuardExceeded("enumeration of " + std::to_string(en.size()) +
                            " permutation vectors exceeds cap " + std::to_string(cap),
                        en.size());
  std::vector<PermutationVector> out;
  out.reserve(static_cast<std::size_t>(en.size()));
  for (std::uint64_t r = 0; r < en.size(); ++r) out.push_back(en.at(r));
  return out;
}

}  // namespace dhsic
