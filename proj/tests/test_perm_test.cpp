#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "dhsic/errors.hpp"
#include "dhsic/gram.hpp"
#include "dhsic/perm_test.hpp"
#include "dhsic/serialize.hpp"
#include "dhsic/statistic.hpp"
#include "support/test_util.hpp"

using namespace dhsic;

namespace {

Matrix column(std::initializer_list<double> vals) {
  Matrix m(vals.size(), 1);
  std::size_t i = 0;
  for (double v : vals) m(i++, 0) = v;
  return m;
}

GramStack gaussian_stack(const Dataset& data, double sigma) {
  return build_gram_stack(data, std::vector<KernelSpec>(data.d(), KernelSpec::gaussian(sigma)));
}

// Full-group p-value by brute force: walk all n! permutations of the second
// block with std::next_permutation, physically reorder the rows, and count
// values at or above the observed one.
double brute_force_p(const Dataset& data, double sigma) {
  GramStack stack = gaussian_stack(data, sigma);
  double observed = dhsic_naive(stack).value;
  std::vector<std::uint32_t> perm(data.n());
  std::iota(perm.begin(), perm.end(), 0u);
  std::uint64_t at_or_above = 0, total = 0;
  do {
    Dataset moved = make_dataset({data.blocks[0], reorder_rows(data.blocks[1], perm)});
    double v = dhsic_naive(gaussian_stack(moved, sigma)).value;
    if (v >= observed) ++at_or_above;
    ++total;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(at_or_above) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("rank of an untied maximum is 1 under both policies") {
  std::vector<double> reps{1.0, 2.0, 3.0};
  RankResult c = rank_with_ties(5.0, reps, TiePolicy::Conservative);
  CHECK(c.rank == 1);
  CHECK(c.num_greater == 0);
  CHECK(c.num_ties == 0);
  RngStream rng(1);
  RankResult r = rank_with_ties(5.0, reps, TiePolicy::Random, &rng);
  CHECK(r.rank == 1);
}

TEST_CASE("conservative rank counts ties against the observed value") {
  RankResult r = rank_with_ties(2.0, {2.0, 2.0, 1.0}, TiePolicy::Conservative);
  CHECK(r.rank == 3);
  CHECK(r.num_greater == 0);
  CHECK(r.num_ties == 2);
  CHECK(rank_with_ties(2.0, {3.0, 2.0, 1.0}, TiePolicy::Conservative).rank == 3);
}

TEST_CASE("random rank is uniform over the tie block") {
  RngStream rng(derive_seed(31, {1}));
  std::vector<std::uint64_t> counts(4, 0);
  const int trials = 30000;
  for (int t = 0; t < trials; ++t) {
    RankResult r = rank_with_ties(2.0, {2.0, 2.0, 1.0}, TiePolicy::Random, &rng);
    REQUIRE(r.rank >= 1);
    REQUIRE(r.rank <= 3);
    counts[r.rank]++;
  }
  for (int k = 1; k <= 3; ++k)
    CHECK(std::abs(counts[k] / static_cast<double>(trials) - 1.0 / 3.0) <= 0.02);
}

TEST_CASE("random tie policy needs a stream") {
  CHECK_THROWS_AS(rank_with_ties(1.0, {1.0}, TiePolicy::Random, nullptr), DomainError);
}

TEST_CASE("full-group test on 4 samples matches brute force") {
  RngStream rng(derive_seed(31, {2}));
  for (int rep = 0; rep < 8; ++rep) {
    Dataset data = testutil::random_dataset(4, 2, 1, rng);
    double want = brute_force_p(data, 1.0);

    TestConfig cfg;
    cfg.method = TestMethod::Exhaustive;
    GramStack stack = gaussian_stack(data, 1.0);
    TestResult res = test_exhaustive(stack, cfg);

    CHECK(res.total == 24);
    CHECK(res.p_value == doctest::Approx(want).epsilon(1e-15));
    CHECK(res.rank >= 1);
    CHECK(res.p_value * 24 == doctest::Approx(std::round(res.p_value * 24)).epsilon(1e-12));
  }
}

TEST_CASE("two samples can never separate: full-group p is 1") {
  Dataset data = make_dataset({column({0.0, 1.0}), column({0.0, 1.0})});
  GramStack stack = gaussian_stack(data, 1.0);
  TestConfig cfg;
  cfg.method = TestMethod::Exhaustive;
  TestResult res = test_exhaustive(stack, cfg);
  CHECK(res.total == 2);
  CHECK(res.p_value == 1.0);
  CHECK(!res.reject);
  CHECK(res.num_ties_at_statistic == 1);
}

TEST_CASE("constant data yields p 1 under the conservative policy") {
  Matrix ones(5, 5);
  for (std::size_t a = 0; a < 5; ++a)
    for (std::size_t b = 0; b < 5; ++b) ones(a, b) = 1.0;
  GramStack stack = build_gram_stack_tabulated({ones, ones});
  TestConfig cfg;
  cfg.method = TestMethod::Exhaustive;
  TestResult res = test_exhaustive(stack, cfg);
  CHECK(res.statistic.value == 0.0);
  CHECK(res.p_value == 1.0);
  CHECK(!res.reject);
}

TEST_CASE("sampled p approaches the full-group p") {
  RngStream rng(derive_seed(31, {3}));
  Dataset data = testutil::random_dataset(4, 2, 1, rng);
  double exact = brute_force_p(data, 1.0);

  GramStack stack = gaussian_stack(data, 1.0);
  TestConfig cfg;
  cfg.num_permutations = 10000;
  cfg.seed = 90210;
  TestResult res = test_sampled(stack, cfg);
  CHECK(std::abs(res.p_value - exact) <= 0.02);
}

TEST_CASE("sampled agreement tightens as draws increase") {
  RngStream rng(derive_seed(31, {4}));
  Dataset data = testutil::random_dataset(5, 2, 1, rng);
  double exact = brute_force_p(data, 1.0);
  GramStack stack = gaussian_stack(data, 1.0);

  std::vector<std::uint64_t> ladder{100, 1000, 10000};
  std::vector<double> med_err;
  for (std::uint64_t B : ladder) {
    std::vector<double> errs;
    for (std::uint64_t s = 0; s < 11; ++s) {
      TestConfig cfg;
      cfg.num_permutations = B;
      cfg.seed = 1000 + s;
      errs.push_back(std::abs(test_sampled(stack, cfg).p_value - exact));
    }
    std::sort(errs.begin(), errs.end());
    med_err.push_back(errs[errs.size() / 2]);
  }
  CHECK(med_err[2] <= med_err[0]);
  CHECK(med_err[2] <= 0.01);
}

TEST_CASE("sampled runs are reproducible and thread-count independent") {
  RngStream rng(derive_seed(31, {5}));
  Dataset data = testutil::random_dataset(20, 3, 1, rng);
  GramStack stack = gaussian_stack(data, 1.0);

  TestConfig cfg;
  cfg.num_permutations = 499;
  cfg.seed = 77;
  cfg.keep_replicates = true;

  cfg.threads = 1;
  TestResult a = test_sampled(stack, cfg);
  cfg.threads = 3;
  TestResult b = test_sampled(stack, cfg);
  TestResult c = test_sampled(stack, cfg);

  CHECK(a.rank == b.rank);
  CHECK(a.p_value == b.p_value);
  CHECK(a.replicate_values == b.replicate_values);
  CHECK(b.rank == c.rank);
  CHECK(b.replicate_values == c.replicate_values);
}

TEST_CASE("warns when the draw count cannot resolve the level") {
  RngStream rng(derive_seed(31, {6}));
  Dataset data = testutil::random_dataset(10, 2, 1, rng);
  GramStack stack = gaussian_stack(data, 1.0);

  TestConfig cfg;
  cfg.num_permutations = 9;
  cfg.alpha = Alpha::parse("0.01");
  CHECK(!test_sampled(stack, cfg).warning.empty());

  cfg.num_permutations = 19;
  cfg.alpha = Alpha::parse("0.05");
  CHECK(test_sampled(stack, cfg).warning.empty());
}

TEST_CASE("rejection matches the rational level decision exactly") {
  // rank 1 of 20 sits exactly on alpha = 0.05 and must reject
  Matrix x(20, 1), y(20, 1);
  for (std::size_t i = 0; i < 20; ++i) {
    x(i, 0) = static_cast<double>(i);
    y(i, 0) = static_cast<double>(i);
  }
  GramStack stack = gaussian_stack(make_dataset({x, y}), 5.0);
  TestConfig cfg;
  cfg.num_permutations = 19;
  cfg.seed = 5;
  TestResult res = test_sampled(stack, cfg);
  CHECK(res.rank == 1);
  CHECK(res.p_value == 0.05);
  CHECK(res.reject);
}

TEST_CASE("null p-values are stochastically no smaller than uniform") {
  const int m = 400;
  const std::uint64_t B = 99;
  std::vector<double> pvals;
  for (int i = 0; i < m; ++i) {
    RngStream rng(derive_seed(31, {7, static_cast<std::uint64_t>(i)}));
    Dataset data = testutil::random_dataset(20, 2, 1, rng);
    TestConfig cfg;
    cfg.num_permutations = B;
    cfg.seed = derive_seed(31, {8, static_cast<std::uint64_t>(i)});
    pvals.push_back(test_sampled(gaussian_stack(data, 1.0), cfg).p_value);
  }
  for (double t : {0.05, 0.1, 0.2, 0.5, 0.9}) {
    double cdf = std::count_if(pvals.begin(), pvals.end(), [t](double p) { return p <= t; }) /
                 static_cast<double>(m);
    CHECK(cdf <= t + 4.0 * std::sqrt(t * (1.0 - t) / m));
  }
}

TEST_CASE("random tie ranks are exchangeable across the whole range") {
  // Constant data makes every replicate tie the observed value, so the rank
  // must be uniform on 1..B+1.
  Matrix ones(6, 6);
  for (std::size_t a = 0; a < 6; ++a)
    for (std::size_t b = 0; b < 6; ++b) ones(a, b) = 1.0;
  GramStack stack = build_gram_stack_tabulated({ones, ones});

  const std::uint64_t B = 9;
  const int m = 3000;
  std::vector<std::uint64_t> counts(B + 2, 0);
  for (int i = 0; i < m; ++i) {
    TestConfig cfg;
    cfg.num_permutations = B;
    cfg.tie_policy = TiePolicy::Random;
    cfg.seed = derive_seed(31, {9, static_cast<std::uint64_t>(i)});
    TestResult res = test_sampled(stack, cfg);
    REQUIRE(res.rank >= 1);
    REQUIRE(res.rank <= B + 1);
    counts[res.rank]++;
  }
  double chi2 = 0.0;
  const double expect = static_cast<double>(m) / (B + 1);
  for (std::uint64_t r = 1; r <= B + 1; ++r) {
    double dev = counts[r] - expect;
    chi2 += dev * dev / expect;
  }
  CHECK(chi2 < 27.88);  // 0.999 quantile, 9 degrees of freedom
}

TEST_CASE("dispatcher routes on the configured method") {
  RngStream rng(derive_seed(31, {10}));
  Dataset data = testutil::random_dataset(5, 2, 1, rng);
  GramStack stack = gaussian_stack(data, 1.0);

  TestConfig cfg;
  cfg.method = TestMethod::Exhaustive;
  CHECK(independence_test(stack, cfg).total == 120);
  cfg.method = TestMethod::Sampled;
  cfg.num_permutations = 49;
  CHECK(independence_test(stack, cfg).total == 50);
}

TEST_CASE("exhaustive refuses oversized groups through the configured cap") {
  RngStream rng(derive_seed(31, {11}));
  Dataset data = testutil::random_dataset(12, 2, 1, rng);
  GramStack stack = gaussian_stack(data, 1.0);
  TestConfig cfg;
  cfg.method = TestMethod::Exhaustive;
  CHECK_THROWS_AS(test_exhaustive(stack, cfg), GuardExceeded);
}

TEST_CASE("result json carries the decision fields") {
  RngStream rng(derive_seed(31, {12}));
  Dataset data = testutil::random_dataset(8, 2, 1, rng);
  GramStack stack = build_gram_stack(
      data, {KernelSpec::gaussian_median(), KernelSpec::gaussian_median()});
  TestConfig cfg;
  cfg.num_permutations = 99;
  cfg.seed = 3;
  TestResult res = test_sampled(stack, cfg);
  nlohmann::json j = to_json(res);
  CHECK(j["B"] == 99);
  CHECK(j["total"] == 100);
  CHECK(j["p_value"] == res.p_value);
  CHECK(j["alpha"] == "0.05");
  CHECK(j["method"] == "sampled");
  CHECK(j["tie_policy"] == "conservative");
  CHECK(j["resolved_bandwidths"].size() == 2);
  CHECK(j.contains("library_version"));
  CHECK(j["reject"].is_boolean());
}
