#pragma once

#include <cstdint>
#include <string>

namespace dhsic {

// Test level held as an exact rational num/den parsed from a decimal string.
// Rejection decisions and binomial thresholds sit exactly on lattice points
// of the p-value (rank/total), so comparisons like p <= alpha and
// floor(alpha*(B+1) - 1) are done in integer arithmetic, never through a
// rounded double.
class Alpha {
 public:
  Alpha() = default;

  // Accepts plain decimals in (0, 1): "0.05", ".1", "0.025". At most 18
  // fractional digits. Throws DomainError otherwise.
  static Alpha parse(const std::string& decimal);

  static Alpha from_parts(std::uint64_t num, std::uint64_t den);

  double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  const std::string& str() const { return text_; }
  std::uint64_t num() const { return num_; }
  std::uint64_t den() const { return den_; }

  // Exact test of rank/total <= num/den.
  bool admits(std::uint64_t rank, std::uint64_t total) const;

  // floor(alpha*(B+1) - 1), the largest permuted-exceedance count that still
  // rejects. Returns -1 when the rejection region is empty.
  std::int64_t rejection_threshold(std::uint64_t B) const;

  bool operator==(const Alpha& other) const {
    return static_cast<unsigned __int128>(num_) * other.den_ ==
           static_cast<unsigned __int128>(other.num_) * den_;
  }

 private:
  std::uint64_t num_ = 1;
  std::uint64_t den_ = 20;
  std::string text_ = "0.05";
};

}  // namespace dhsic
