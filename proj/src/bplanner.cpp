#include "dhsic/bplanner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include "dhsic/errors.hpp"

namespace dhsic {

namespace {

void check_prob(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError(std::string(what) + " must lie in [0, 1]");
}

// Grid protected by the plan: 0, eps/10, ..., p_max (p_max always included).
std::vector<double> protected_grid(double eps, double p_max) {
  const double step = eps / 10.0;
  std::vector<double> grid;
  const auto count = static_cast<std::uint64_t>(std::floor(p_max / step + 1e-9));
  grid.reserve(static_cast<std::size_t>(count) + 2);
  for (std::uint64_t k = 0; k <= count; ++k) grid.push_back(std::min(1.0, static_cast<double>(k) * step));
  if (std::abs(grid.back() - p_max) > 1e-12) grid.push_back(p_max);
  return grid;
}

}  // namespace

double binomial_log_pmf(std::uint64_t B, std::uint64_t k, double p) {
  check_prob(p, "success probability");
  if (k > B) return -std::numeric_limits<double>::infinity();
  if (p == 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (p == 1.0) return k == B ? 0.0 : -std::numeric_limits<double>::infinity();
  const double bd = static_cast<double>(B);
  const double kd = static_cast<double>(k);
  return std::lgamma(bd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(bd - kd + 1.0) +
         kd * std::log(p) + (bd - kd) * std::log1p(-p);
}

double binomial_window(std::uint64_t B, std::int64_t lo, std::int64_t hi, double p) {
  check_prob(p, "success probability");
  if (lo < 0) lo = 0;
  if (hi > static_cast<std::int64_t>(B)) hi = static_cast<std::int64_t>(B);
  if (lo > hi) return 0.0;
  if (lo == 0 && hi == static_cast<std::int64_t>(B)) return 1.0;
  const auto ulo = static_cast<std::uint64_t>(lo);
  const auto uhi = static_cast<std::uint64_t>(hi);
  if (p == 0.0) return ulo == 0 ? 1.0 : 0.0;
  if (p == 1.0) return uhi == B ? 1.0 : 0.0;

  // Walk the pmf in log space; each step multiplies by (B-z)p / ((z+1)(1-p)).
  double lpmf = binomial_log_pmf(B, ulo, p);
  double sum = std::exp(lpmf);
  for (std::uint64_t z = ulo; z < uhi; ++z) {
    lpmf += std::log(static_cast<double>(B - z) * p) -
            std::log(static_cast<double>(z + 1) * (1.0 - p));
    sum += std::exp(lpmf);
  }
  return std::min(sum, 1.0);
}

double binomial_cdf(std::uint64_t B, std::int64_t k, double p) {
  return binomial_window(B, 0, k, p);
}

double rejection_probability(std::uint64_t B, double p_exceed, const Alpha& alpha) {
  if (B < 1) throw DomainError("B must be at least 1");
  check_prob(p_exceed, "exceedance probability");
  const std::int64_t t = alpha.rejection_threshold(B);
  if (t < 0) return 0.0;
  return binomial_cdf(B, t, p_exceed);
}

double ci_coverage(std::uint64_t B, double p, double eps) {
  if (B < 1) throw DomainError("B must be at least 1");
  check_prob(p, "target probability");
  if (!(eps > 0.0)) throw DomainError("half-width must be positive");
  const double scale = static_cast<double>(B) + 1.0;
  const auto lo = static_cast<std::int64_t>(std::ceil((p - eps) * scale - 1.0));
  const auto hi = static_cast<std::int64_t>(std::floor((p + eps) * scale - 1.0));
  return binomial_window(B, lo, hi, p);
}

double minimal_half_width(std::uint64_t B, double p, double confidence) {
  check_prob(p, "target probability");
  if (!(confidence >= 0.0 && confidence < 1.0))
    throw DomainError("confidence must lie in [0, 1)");
  if (confidence == 0.0) return 0.0;
  // Coverage grows with the half-width and reaches 1 at eps = 1.
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (ci_coverage(B, p, mid) >= confidence) hi = mid;
    else lo = mid;
  }
  return hi;
}

BPlan minimal_B(const BPlanRequest& req) {
  if (!(req.epsilon > 0.0 && req.epsilon < 1.0))
    throw DomainError("half-width must lie in (0, 1)");
  if (!(req.confidence >= 0.0 && req.confidence < 1.0))
    throw DomainError("confidence must lie in [0, 1)");
  if (!(req.p_max > 0.0 && req.p_max < 1.0)) throw DomainError("p_max must lie in (0, 1)");
  if (!(req.epsilon < req.p_max))
    throw DomainError("half-width must be smaller than the protected range p_max");
  if (!(req.alpha.value() < req.p_max))
    throw DomainError("p_max must exceed alpha");
  if (req.max_B < 1) throw DomainError("search bound must be at least 1");

  const std::vector<double> grid = protected_grid(req.epsilon, req.p_max);
  auto worst_coverage = [&](std::uint64_t B) {
    double worst = 1.0;
    for (double p : grid) worst = std::min(worst, ci_coverage(B, p, req.epsilon));
    return worst;
  };
  auto ok = [&](std::uint64_t B) {
    for (double p : grid)
      if (ci_coverage(B, p, req.epsilon) < req.confidence) return false;
    return true;
  };

  std::uint64_t hi = 1;
  while (!ok(hi)) {
    if (hi >= req.max_B)
      throw SearchExhausted("no replicate count up to " + std::to_string(req.max_B) +
                            " reaches the requested coverage");
    hi = std::min(hi * 2, req.max_B);
  }
  std::uint64_t lo = hi / 2;  // hi == 1 leaves lo == 0, which always fails
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (ok(mid)) hi = mid;
    else lo = mid;
  }
  // Coverage is not exactly monotone in B, so nudge down while the
  // predecessor still passes.
  while (hi > 1 && ok(hi - 1)) --hi;

  BPlan plan;
  plan.request = req;
  plan.B_min = hi;
  plan.certified = ok(hi) && (hi == 1 || !ok(hi - 1));
  plan.min_coverage = worst_coverage(hi);

  double worst_eps = 0.0;
  const auto steps = static_cast<std::uint64_t>(std::llround((1.0 - req.p_max) / 0.01));
  for (std::uint64_t k = 1; k <= steps; ++k) {
    const double p = std::min(1.0, req.p_max + static_cast<double>(k) * 0.01);
    worst_eps = std::max(worst_eps, minimal_half_width(hi, p, req.confidence));
  }
  plan.max_half_width_above = worst_eps;

  plan.note = "reported p-values lie on the lattice k/(B+1); with B = " +
              std::to_string(hi) + " the spacing is " +
              std::to_string(1.0 / (static_cast<double>(hi) + 1.0));
  return plan;
}

std::vector<CoverageRow> coverage_table(const BPlan& plan) {
  std::vector<CoverageRow> rows;
  const std::vector<double> grid = protected_grid(plan.request.epsilon, plan.request.p_max);
  for (double p : grid)
    rows.push_back({p, ci_coverage(plan.B_min, p, plan.request.epsilon),
                    minimal_half_width(plan.B_min, p, plan.request.confidence)});
  const auto steps =
      static_cast<std::uint64_t>(std::llround((1.0 - plan.request.p_max) / 0.01));
  for (std::uint64_t k = 1; k <= steps; ++k) {
    const double p = std::min(1.0, plan.request.p_max + static_cast<double>(k) * 0.01);
    rows.push_back({p, ci_coverage(plan.B_min, p, plan.request.epsilon),
                    minimal_half_width(plan.B_min, p, plan.request.confidence)});
  }
  return rows;
}

void write_coverage_csv(std::ostream& os, const std::vector<CoverageRow>& rows) {
  os << "p,coverage,min_half_width\n";
  char buf[128];
  for (const CoverageRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", r.p, r.coverage, r.min_half_width);
    os << buf;
  }
}

}  // namespace dhsic
