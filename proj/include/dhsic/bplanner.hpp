#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dhsic/alpha.hpp"

namespace dhsic {

// Z counts sampled replicates at or above the observed statistic, so
// Z ~ Binomial(B, p) given the data, and the reported p-value is (Z+1)/(B+1).

double binomial_log_pmf(std::uint64_t B, std::uint64_t k, double p);

// P(Z <= k); negative k gives 0.
double binomial_cdf(std::uint64_t B, std::int64_t k, double p);

// P(lo <= Z <= hi) with bounds clamped to [0, B]; empty window gives 0.
double binomial_window(std::uint64_t B, std::int64_t lo, std::int64_t hi, double p);

// Chance the sampled test rejects at level alpha when each replicate
// exceeds the observed value with probability p_exceed.
double rejection_probability(std::uint64_t B, double p_exceed, const Alpha& alpha);

// Chance that |(Z+1)/(B+1) - p| <= eps.
double ci_coverage(std::uint64_t B, double p, double eps);

struct BPlanRequest {
  Alpha alpha = Alpha();
  double epsilon = 0.005;     // target half-width of the p-value interval
  double confidence = 0.99;
  double p_max = 0.10;        // protect every p in [0, p_max]
  std::uint64_t max_B = std::uint64_t(1) << 34;
};

struct BPlan {
  BPlanRequest request;
  std::uint64_t B_min;
  bool certified;               // B_min passes and B_min - 1 fails
  double min_coverage;          // worst coverage over the protected grid at B_min
  double max_half_width_above;  // worst minimal eps over p in (p_max, 1] at B_min
  std::string note;
};

// Smallest B whose coverage over the grid p = 0, eps/10, 2*eps/10, ..., p_max
// stays at or above the requested confidence.
BPlan minimal_B(const BPlanRequest& req);

// Smallest half-width reaching the confidence at this p and B.
double minimal_half_width(std::uint64_t B, double p, double confidence);

struct CoverageRow {
  double p;
  double coverage;        // at the requested half-width
  double min_half_width;  // smallest half-width reaching the confidence
};

// One row per grid point: the protected grid below p_max, then steps of 0.01
// up to 1.
std::vector<CoverageRow> coverage_table(const BPlan& plan);

void write_coverage_csv(std::ostream& os, const std::vector<CoverageRow>& rows);

}  // namespace dhsic
