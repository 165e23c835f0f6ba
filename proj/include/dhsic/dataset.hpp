#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dhsic/matrix.hpp"

namespace dhsic {

// A sample of n observations of a d-tuple of real vectors. Block j holds the
// n observations of variable j as rows (n x m_j). Blocks share the row count;
// column counts may differ per variable.
struct Dataset {
  std::vector<Matrix> blocks;

  std::size_t n() const { return blocks.empty() ? 0 : blocks.front().rows(); }
  std::size_t d() const { return blocks.size(); }

  // Throws DimensionMismatch on ragged blocks or d < 2, DomainError on
  // non-finite entries or empty blocks.
  void validate() const;
};

Dataset make_dataset(std::vector<Matrix> blocks);

// Reorders rows so that new row i is old row perm[i].
Matrix reorder_rows(const Matrix& block, const std::vector<std::uint32_t>& perm);

// The same common permutation applied to every variable.
Dataset reorder_rows(const Dataset& data, const std::vector<std::uint32_t>& perm);

}  // namespace dhsic
