#pragma once

#include <cstdint>
#include <vector>

#include "dhsic/rng.hpp"

namespace dhsic {

// Resampling unit for a joint test on d variables: one permutation of the
// sample indices per variable 2..d. Variable 1 is never permuted.
struct PermutationVector {
  // perms[j] reorders variable j+2; each entry is a permutation of 0..n-1.
  std::vector<std::vector<std::uint32_t>> perms;

  std::size_t n() const { return perms.empty() ? 0 : perms.front().size(); }
  std::size_t d() const { return perms.size() + 1; }

  bool operator==(const PermutationVector&) const = default;
};

// Per-variable index maps with the identity prepended for variable 1.
// maps[j][i] is the row of variable j+1 paired with sample slot i.
struct IndexAssignment {
  std::vector<std::vector<std::uint32_t>> maps;

  std::size_t n() const { return maps.empty() ? 0 : maps.front().size(); }
  std::size_t d() const { return maps.size(); }
};

PermutationVector identity_permutation_vector(std::size_t n, std::size_t d);

// Uniform draw over all (n!)^(d-1) permutation vectors.
PermutationVector sample_permutation_vector(std::size_t n, std::size_t d, RngStream& rng);

IndexAssignment to_assignment(const PermutationVector& psi, std::size_t n);

// (n!)^(d-1), saturating at UINT64_MAX.
std::uint64_t permutation_vector_count(std::size_t n, std::size_t d);

// Lexicographic enumeration of all permutation vectors; rank 0 is the
// identity. Individual permutations are ordered by their factorial-number
// representation, and the vector orders variable 2 as the most significant
// position.
class PermutationEnumeration {
 public:
  PermutationEnumeration(std::size_t n, std::size_t d);

  std::uint64_t size() const { return total_; }
  PermutationVector at(std::uint64_t rank) const;

 private:
  std::size_t n_;
  std::size_t d_;
  std::uint64_t per_var_;  // n!
  std::uint64_t total_;    // (n!)^(d-1)
};

// Materializes the full enumeration; refuses when the count exceeds cap.
std::vector<PermutationVector> enumerate_permutation_vectors(std::size_t n, std::size_t d,
                                                             std::uint64_t cap = 1000000);

}  // namespace dhsic
