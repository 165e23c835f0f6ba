#include <CLI11.hpp>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>
#include <vector>

#include "dhsic/alpha.hpp"
#include "dhsic/bplanner.hpp"
#include "dhsic/csv_io.hpp"
#include "dhsic/errors.hpp"
#include "dhsic/gram.hpp"
#include "dhsic/manifest.hpp"
#include "dhsic/perm_test.hpp"
#include "dhsic/serialize.hpp"
#include "dhsic/simulate.hpp"
#include "dhsic/version.hpp"

namespace {

using nlohmann::json;

struct TestOptions {
  std::string input;
  std::string vars;
  std::string kernel = "gaussian";
  std::vector<std::string> bandwidths;
  std::vector<std::string> gram_files;
  std::string method = "sampled";
  std::uint64_t B = 999;
  std::string alpha = "0.05";
  std::string ties = "conservative";
  std::uint64_t seed = 0;
  std::uint64_t cap = 1000000;
  int threads = 0;
  std::string out = ".";
};

struct BplanOptions {
  std::string alpha = "0.05";
  double epsilon = 0.005;
  double confidence = 0.99;
  double C = 0.10;
  std::uint64_t max_B = std::uint64_t(1) << 34;
  std::string out = ".";
};

struct PowerOptions {
  std::string config;
  std::string scenario;
  std::vector<double> thetas;
  std::uint64_t n = 0;
  std::vector<std::size_t> dims;
  std::uint64_t reps = 0;
  std::vector<std::uint64_t> B_list;
  std::string alpha;
  std::string method;
  std::string ties;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::uint64_t cap = 0;
  int threads = -1;
  std::string out = ".";
};

struct CurvesOptions {
  std::vector<double> p_grid;
  double grid_max = 0.12;
  double grid_step = 0.005;
  std::vector<std::uint64_t> B_list = {99, 999, 9999};
  std::string alpha = "0.05";
  std::uint64_t trials = 2000;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out = ".";
};

double parse_positive_real(const std::string& s, const std::string& what) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !(v > 0.0))
    throw dhsic::DomainError(what + ": '" + s + "' is not a positive real");
  return v;
}

dhsic::RunManifest start_manifest(const std::string& subcommand, int argc, char** argv) {
  dhsic::RunManifest m;
  m.subcommand = subcommand;
  m.argv.assign(argv, argv + argc);
  m.library_version = dhsic::kLibraryVersion;
  m.started_at = dhsic::iso8601_utc_now();
  return m;
}

void finish_manifest(dhsic::RunManifest m, const json& resolved_config,
                     const std::string& out_dir) {
  m.resolved_config_json = resolved_config.dump();
  m.finished_at = dhsic::iso8601_utc_now();
  std::filesystem::create_directories(out_dir);
  const std::string path = out_dir + "/" + m.subcommand + "_manifest.json";
  std::ofstream os(path);
  if (!os) throw dhsic::DomainError("cannot write '" + path + "'");
  os << dhsic::to_json(m).dump(2) << "\n";
  std::cerr << "wrote " << path << "\n";
}

std::ofstream open_output(const std::string& out_dir, const std::string& name) {
  std::filesystem::create_directories(out_dir);
  const std::string path = out_dir + "/" + name;
  std::ofstream os(path);
  if (!os) throw dhsic::DomainError("cannot write '" + path + "'");
  std::cerr << "wrote " << path << "\n";
  return os;
}

int run_test(const TestOptions& opt, dhsic::RunManifest manifest) {
  dhsic::GramStack stack;
  json cfg;
  if (opt.kernel == "gram-file") {
    if (opt.gram_files.size() < 2)
      throw dhsic::DomainError("gram-file kernel needs at least two --gram files");
    if (!opt.input.empty())
      throw dhsic::DomainError("--input does not combine with --kernel gram-file");
    std::vector<dhsic::Matrix> grams;
    for (const std::string& path : opt.gram_files) {
      grams.push_back(dhsic::read_gram_csv_file(path));
      manifest.inputs.push_back({path, dhsic::fnv1a64_hex(dhsic::fnv1a64_file(path))});
    }
    stack = dhsic::build_gram_stack_tabulated(std::move(grams));
    cfg["grams"] = opt.gram_files;
  } else if (opt.kernel == "gaussian" || opt.kernel == "linear") {
    if (opt.input.empty()) throw dhsic::DomainError("--input is required");
    if (!opt.gram_files.empty())
      throw dhsic::DomainError("--gram requires --kernel gram-file");
    const dhsic::Matrix table = dhsic::read_numeric_csv_file(opt.input);
    manifest.inputs.push_back({opt.input, dhsic::fnv1a64_hex(dhsic::fnv1a64_file(opt.input))});
    const dhsic::ColumnGroups groups = opt.vars.empty()
                                           ? dhsic::default_column_groups(table.cols())
                                           : dhsic::parse_column_groups(opt.vars);
    const dhsic::Dataset data = dhsic::dataset_from_columns(table, groups);

    std::vector<std::string> bw = opt.bandwidths;
    if (opt.kernel == "linear" && !bw.empty())
      throw dhsic::DomainError("the linear kernel takes no --bandwidth");
    if (bw.empty()) bw.assign(data.d(), "median");
    if (bw.size() == 1) bw.assign(data.d(), bw.front());
    if (bw.size() != data.d())
      throw dhsic::DomainError("got " + std::to_string(bw.size()) + " bandwidths for " +
                               std::to_string(data.d()) + " variables");

    std::vector<dhsic::KernelSpec> specs;
    for (std::size_t j = 0; j < data.d(); ++j) {
      if (opt.kernel == "linear") specs.push_back(dhsic::KernelSpec::linear());
      else if (bw[j] == "median") specs.push_back(dhsic::KernelSpec::gaussian_median());
      else specs.push_back(dhsic::KernelSpec::gaussian(parse_positive_real(bw[j], "--bandwidth")));
    }
    stack = dhsic::build_gram_stack(data, specs);
    cfg["input"] = opt.input;
    cfg["vars"] = dhsic::column_groups_string(groups);
    cfg["bandwidths"] = bw;
  } else {
    throw dhsic::DomainError("unknown kernel '" + opt.kernel + "'");
  }

  dhsic::TestConfig tc;
  tc.method = dhsic::test_method_from_name(opt.method);
  tc.num_permutations = opt.B;
  tc.tie_policy = dhsic::tie_policy_from_name(opt.ties);
  tc.alpha = dhsic::Alpha::parse(opt.alpha);
  tc.seed = opt.seed;
  tc.enumeration_cap = opt.cap;
  tc.threads = opt.threads;

  const dhsic::TestResult result = dhsic::independence_test(stack, tc);
  if (!result.warning.empty()) std::cerr << "warning: " << result.warning << "\n";
  std::cout << dhsic::to_json(result).dump(2) << "\n";

  cfg["kernel"] = opt.kernel;
  cfg["method"] = opt.method;
  cfg["B"] = opt.B;
  cfg["alpha"] = tc.alpha.str();
  cfg["ties"] = opt.ties;
  cfg["seed"] = opt.seed;
  cfg["cap"] = opt.cap;
  cfg["threads"] = opt.threads;
  cfg["out"] = opt.out;
  manifest.master_seed = opt.seed;
  finish_manifest(std::move(manifest), cfg, opt.out);
  return 0;
}

int run_bplan(const BplanOptions& opt, dhsic::RunManifest manifest) {
  dhsic::BPlanRequest req;
  req.alpha = dhsic::Alpha::parse(opt.alpha);
  req.epsilon = opt.epsilon;
  req.confidence = opt.confidence;
  req.p_max = opt.C;
  req.max_B = opt.max_B;

  const dhsic::BPlan plan = dhsic::minimal_B(req);
  std::cout << dhsic::to_json(plan).dump(2) << "\n";
  {
    std::ofstream os = open_output(opt.out, "coverage.csv");
    dhsic::write_coverage_csv(os, dhsic::coverage_table(plan));
  }

  const json cfg{{"alpha", req.alpha.str()},   {"epsilon", opt.epsilon},
                 {"confidence", opt.confidence}, {"C", opt.C},
                 {"max_B", opt.max_B},           {"out", opt.out}};
  finish_manifest(std::move(manifest), cfg, opt.out);
  return 0;
}

int run_power(const PowerOptions& opt, dhsic::RunManifest manifest) {
  dhsic::ScenarioSpec spec;
  bool have_spec = false;
  if (!opt.config.empty()) {
    std::ifstream in(opt.config);
    if (!in) throw dhsic::DomainError("cannot open '" + opt.config + "'");
    spec = dhsic::scenario_spec_from_json(json::parse(in));
    manifest.inputs.push_back({opt.config, dhsic::fnv1a64_hex(dhsic::fnv1a64_file(opt.config))});
    have_spec = true;
  }
  if (!opt.scenario.empty()) {
    spec.kind = dhsic::scenario_kind_from_name(opt.scenario);
    if (!have_spec) spec.thetas = dhsic::default_thetas(spec.kind);
    have_spec = true;
  }
  if (!have_spec) throw dhsic::DomainError("power needs --config or --scenario");
  if (!opt.thetas.empty()) spec.thetas = opt.thetas;
  if (opt.n > 0) spec.n = opt.n;
  if (!opt.dims.empty()) spec.dims = opt.dims;
  if (opt.reps > 0) spec.replications = opt.reps;
  if (!opt.B_list.empty()) spec.B_list = opt.B_list;
  if (!opt.alpha.empty()) spec.alpha = dhsic::Alpha::parse(opt.alpha);
  if (!opt.method.empty()) spec.method = dhsic::test_method_from_name(opt.method);
  if (!opt.ties.empty()) spec.tie_policy = dhsic::tie_policy_from_name(opt.ties);
  if (opt.seed_given) spec.master_seed = opt.seed;
  if (opt.cap > 0) spec.enumeration_cap = opt.cap;
  if (opt.threads >= 0) spec.threads = opt.threads;
  spec.validate();

  const std::vector<dhsic::PowerRow> rows = dhsic::power_sweep(spec);
  {
    std::ofstream os = open_output(opt.out, "power.csv");
    dhsic::write_power_csv(os, rows);
  }
  manifest.master_seed = spec.master_seed;
  finish_manifest(std::move(manifest), dhsic::scenario_spec_to_json(spec), opt.out);
  return 0;
}

int run_curves(const CurvesOptions& opt, dhsic::RunManifest manifest) {
  std::vector<double> grid = opt.p_grid;
  if (grid.empty()) {
    if (!(opt.grid_step > 0.0)) throw dhsic::DomainError("--grid-step must be positive");
    if (!(opt.grid_max >= 0.0 && opt.grid_max <= 1.0))
      throw dhsic::DomainError("--grid-max must lie in [0, 1]");
    for (double p = 0.0; p <= opt.grid_max + 1e-12; p += opt.grid_step)
      grid.push_back(std::min(p, 1.0));
  }
  const dhsic::Alpha alpha = dhsic::Alpha::parse(opt.alpha);
  const std::vector<dhsic::CurveCell> cells = dhsic::rejection_curve_empirical(
      grid, opt.B_list, alpha, opt.trials, opt.seed, opt.threads);
  {
    std::ofstream os = open_output(opt.out, "curves.csv");
    dhsic::write_curve_csv(os, cells);
  }

  const json cfg{{"p_grid", grid},       {"B_list", opt.B_list}, {"alpha", alpha.str()},
                 {"trials", opt.trials}, {"seed", opt.seed},     {"threads", opt.threads},
                 {"out", opt.out}};
  manifest.master_seed = opt.seed;
  finish_manifest(std::move(manifest), cfg, opt.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint independence testing via kernel permutation tests"};
  app.set_version_flag("--version", dhsic::kLibraryVersion);
  app.require_subcommand(1);

  TestOptions t;
  CLI::App* test_cmd = app.add_subcommand("test", "Run one independence test on CSV data");
  test_cmd->add_option("--input", t.input, "CSV file of observations (rows = samples)");
  test_cmd->add_option("--vars", t.vars, "column groups 'a:b,c:d' (0-based, half-open)");
  test_cmd->add_option("--kernel", t.kernel, "gaussian|linear|gram-file")
      ->check(CLI::IsMember({"gaussian", "linear", "gram-file"}));
  test_cmd->add_option("--bandwidth", t.bandwidths,
                       "'median' or a positive sigma; repeat per variable");
  test_cmd->add_option("--gram", t.gram_files, "precomputed n x n gram CSV; repeat per variable");
  test_cmd->add_option("--method", t.method, "sampled|exhaustive")
      ->check(CLI::IsMember({"sampled", "exhaustive"}));
  test_cmd->add_option("--B", t.B, "sampled permutation count");
  test_cmd->add_option("--alpha", t.alpha, "level as a decimal string");
  test_cmd->add_option("--ties", t.ties, "conservative|random")
      ->check(CLI::IsMember({"conservative", "random"}));
  test_cmd->add_option("--seed", t.seed, "master seed");
  test_cmd->add_option("--cap", t.cap, "exhaustive enumeration cap");
  test_cmd->add_option("--threads", t.threads, "worker cap (0 = auto)");
  test_cmd->add_option("--out", t.out, "directory for the run manifest");

  BplanOptions b;
  CLI::App* bplan_cmd = app.add_subcommand("bplan", "Plan the sampled permutation count B");
  bplan_cmd->add_option("--alpha", b.alpha, "level as a decimal string");
  bplan_cmd->add_option("--epsilon", b.epsilon, "target half-width of the p-value interval");
  bplan_cmd->add_option("--confidence", b.confidence, "coverage target in [0, 1)");
  bplan_cmd->add_option("--C", b.C, "protect every p in [0, C]");
  bplan_cmd->add_option("--max-B", b.max_B, "search bound");
  bplan_cmd->add_option("--out", b.out, "directory for coverage.csv and the manifest");

  PowerOptions p;
  CLI::App* power_cmd = app.add_subcommand("power", "Rejection-rate sweep over theta and B");
  power_cmd->add_option("--config", p.config, "JSON scenario config");
  power_cmd->add_option("--scenario", p.scenario, "scenario1|scenario2|null_gaussian")
      ->check(CLI::IsMember({"scenario1", "scenario2", "null_gaussian"}));
  power_cmd->add_option("--thetas", p.thetas, "dependence strengths")->delimiter(',');
  power_cmd->add_option("--n", p.n, "sample size");
  power_cmd->add_option("--dims", p.dims, "variable widths (null_gaussian)")->delimiter(',');
  power_cmd->add_option("--reps", p.reps, "replications per cell");
  power_cmd->add_option("--B-list", p.B_list, "permutation counts")->delimiter(',');
  power_cmd->add_option("--alpha", p.alpha, "level as a decimal string");
  power_cmd->add_option("--method", p.method, "sampled|exhaustive")
      ->check(CLI::IsMember({"sampled", "exhaustive"}));
  power_cmd->add_option("--ties", p.ties, "conservative|random")
      ->check(CLI::IsMember({"conservative", "random"}));
  CLI::Option* seed_opt = power_cmd->add_option("--seed", p.seed, "master seed");
  power_cmd->add_option("--cap", p.cap, "exhaustive enumeration cap");
  power_cmd->add_option("--threads", p.threads, "worker cap (0 = auto)");
  power_cmd->add_option("--out", p.out, "directory for power.csv and the manifest");

  CurvesOptions c;
  CLI::App* curves_cmd =
      app.add_subcommand("curves", "Rejection probability of the sampled test vs p_exceed");
  curves_cmd->add_option("--p-grid", c.p_grid, "explicit grid of exceedance probabilities")
      ->delimiter(',');
  curves_cmd->add_option("--grid-max", c.grid_max, "grid end when --p-grid is absent");
  curves_cmd->add_option("--grid-step", c.grid_step, "grid step when --p-grid is absent");
  curves_cmd->add_option("--B-list", c.B_list, "permutation counts")->delimiter(',');
  curves_cmd->add_option("--alpha", c.alpha, "level as a decimal string");
  curves_cmd->add_option("--trials", c.trials, "simulated tests per grid cell");
  curves_cmd->add_option("--seed", c.seed, "master seed");
  curves_cmd->add_option("--threads", c.threads, "worker cap (0 = auto)");
  curves_cmd->add_option("--out", c.out, "directory for curves.csv and the manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  p.seed_given = seed_opt->count() > 0;

  try {
    if (test_cmd->parsed()) return run_test(t, start_manifest("test", argc, argv));
    if (bplan_cmd->parsed()) return run_bplan(b, start_manifest("bplan", argc, argv));
    if (power_cmd->parsed()) return run_power(p, start_manifest("power", argc, argv));
    if (curves_cmd->parsed()) return run_curves(c, start_manifest("curves", argc, argv));
  } catch (const dhsic::GuardExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const dhsic::AllPointsIdentical& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const dhsic::SearchExhausted& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
