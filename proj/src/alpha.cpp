#include "dhsic/alpha.hpp"

#include <cctype>

#include "dhsic/errors.hpp"

namespace dhsic {

Alpha Alpha::parse(const std::string& decimal) {
  std::uint64_t int_part = 0;
  std::uint64_t frac = 0;
  std::uint64_t den = 1;
  bool seen_digit = false;
  bool seen_dot = false;
  for (char c : decimal) {
    if (c == '.') {
      if (seen_dot) throw DomainError("alpha: malformed decimal '" + decimal + "'");
      seen_dot = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw DomainError("alpha: malformed decimal '" + decimal + "'");
    seen_digit = true;
    if (!seen_dot) {
      int_part = int_part * 10 + static_cast<std::uint64_t>(c - '0');
      if (int_part > 1) throw DomainError("alpha must lie in (0,1): '" + decimal + "'");
    } else {
      if (den >= 1000000000000000000ULL)
        throw DomainError("alpha: too many fractional digits in '" + decimal + "'");
      frac = frac * 10 + static_cast<std::uint64_t>(c - '0');
      den *= 10;
    }
  }
  if (!seen_digit) throw DomainError("alpha: malformed decimal '" + decimal + "'");
  std::uint64_t num = int_part * den + frac;
  if (num == 0 || num >= den) throw DomainError("alpha must lie in (0,1): '" + decimal + "'");
  Alpha a;
  a.num_ = num;
  a.den_ = den;
  a.text_ = decimal;
  return a;
}

Alpha Alpha::from_parts(std::uint64_t num, std::uint64_t den) {
  if (den == 0 || num == 0 || num >= den) throw DomainError("alpha must lie in (0,1)");
  Alpha a;
  a.num_ = num;
  a.den_ = den;
  a.text_ = std::to_string(num) + "/" + std::to_string(den);
  return a;
}

bool Alpha::admits(std::uint64_t rank, std::uint64_t total) const {
  return static_cast<unsigned __int128>(rank) * den_ <=
         static_cast<unsigned __int128>(num_) * total;
}

std::int64_t Alpha::rejection_threshold(std::uint64_t B) const {
  // floor((num*(B+1) - den) / den) with a signed numerator.
  __int128 numer = static_cast<__int128>(num_) * (static_cast<__int128>(B) + 1) -
                   static_cast<__int128>(den_);
  __int128 d = static_cast<__int128>(den_);
  __int128 q = numer / d;
  if (numer % d != 0 && numer < 0) --q;
  if (q < -1) q = -1;
  return static_cast<std::int64_t>(q);
}

}  // namespace dhsic
