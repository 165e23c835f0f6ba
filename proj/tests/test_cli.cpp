#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "dhsic/csv_io.hpp"
#include "dhsic/bplanner.hpp"
#include "dhsic/gram.hpp"
#include "dhsic/manifest.hpp"
#include "dhsic/simulate.hpp"
#include "support/test_util.hpp"

using namespace dhsic;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string cli_bin() {
  if (const char* env = std::getenv("DHSIC_CLI_BIN")) return env;
  return DHSIC_CLI_BIN_PATH;
}

struct RunOut {
  int code;
  std::string out;
};

RunOut run(const std::string& args) {
  std::string cmd = cli_bin() + " " + args + " 2>/dev/null";
  FILE* f = popen(cmd.c_str(), "r");
  REQUIRE(f != nullptr);
  std::string out;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, got);
  int status = pclose(f);
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code, out};
}

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path p = fs::temp_directory_path() /
                 ("dhsic_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string file_text(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_gram_csv(const fs::path& p, const Matrix& m) {
  std::ofstream os(p);
  char buf[64];
  for (std::size_t a = 0; a < m.rows(); ++a) {
    for (std::size_t b = 0; b < m.cols(); ++b) {
      std::snprintf(buf, sizeof buf, "%.17g", m(a, b));
      os << (b ? "," : "") << buf;
    }
    os << "\n";
  }
}

fs::path null_csv() {
  static fs::path p = [] {
    RngStream rng(derive_seed(404, {1}));
    fs::path path = work_dir() / "null20.csv";
    write_dataset_csv_file(path.string(), testutil::random_dataset(20, 2, 1, rng));
    return path;
  }();
  return p;
}

}  // namespace

TEST_CASE("version flag") {
  RunOut r = run("--version");
  CHECK(r.code == 0);
  CHECK(r.out.find("0.1.0") != std::string::npos);
}

TEST_CASE("test run emits a complete, reproducible decision document") {
  std::string args = "test --input " + null_csv().string() +
                     " --B 199 --seed 42 --out " + (work_dir() / "t1").string();
  RunOut a = run(args);
  REQUIRE(a.code == 0);
  RunOut b = run(args);
  CHECK(a.out == b.out);

  json j = json::parse(a.out);
  CHECK(j["total"] == 200);
  CHECK(j["B"] == 199);
  CHECK(j["method"] == "sampled");
  CHECK(j["statistic"]["path"] == "factorized");
  CHECK(j["statistic"]["n"] == 20);
  double p = j["p_value"].get<double>();
  std::uint64_t rank = j["rank"].get<std::uint64_t>();
  CHECK(p == static_cast<double>(rank) / 200.0);
  CHECK(j["resolved_bandwidths"].size() == 2);
  CHECK(j["resolved_bandwidths"][0].get<double>() > 0.0);
}

TEST_CASE("column groups split a wide table into blocks") {
  RngStream rng(derive_seed(404, {2}));
  fs::path p = work_dir() / "wide.csv";
  write_dataset_csv_file(p.string(), testutil::random_dataset(15, 2, 5, rng));

  RunOut r = run("test --input " + p.string() + " --vars 0:5,5:10 --B 99 --seed 1 --out " +
                 (work_dir() / "t2").string());
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["statistic"]["d"] == 2);
  CHECK(j["resolved_bandwidths"].size() == 2);

  // same table split three ways instead
  RunOut r3 = run("test --input " + p.string() + " --vars 0:5,5:8,8:10 --B 99 --seed 1 --out " +
                  (work_dir() / "t3").string());
  REQUIRE(r3.code == 0);
  CHECK(json::parse(r3.out)["statistic"]["d"] == 3);
}

TEST_CASE("csv export and re-ingest reproduce every bit") {
  RngStream rng(derive_seed(404, {3}));
  Dataset data = testutil::random_dataset(12, 3, 2, rng);
  fs::path p = work_dir() / "roundtrip.csv";
  write_dataset_csv_file(p.string(), data);
  Dataset back = read_dataset_csv_file(p.string(), dataset_column_groups(data));
  REQUIRE(back.d() == 3);
  for (std::size_t j = 0; j < 3; ++j) CHECK(back.blocks[j] == data.blocks[j]);
}

TEST_CASE("exported sinusoid data is flagged dependent") {
  fs::path p = work_dir() / "scenario2_theta2.csv";
  write_dataset_csv_file(p.string(), generate_scenario2(2.0, 100));
  RunOut r = run("test --input " + p.string() + " --B 999 --seed 11 --out " +
                 (work_dir() / "t4").string());
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["p_value"].get<double>() <= 0.05);
  CHECK(j["reject"] == true);
}

TEST_CASE("full-group method reports the whole group size") {
  RngStream rng(derive_seed(404, {4}));
  fs::path p = work_dir() / "tiny.csv";
  write_dataset_csv_file(p.string(), testutil::random_dataset(5, 2, 1, rng));
  RunOut r = run("test --input " + p.string() + " --method exhaustive --out " +
                 (work_dir() / "t5").string());
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["total"] == 120);
  CHECK(!j.contains("B"));
}

TEST_CASE("precomputed gram route agrees with the in-process kernels") {
  RngStream rng(derive_seed(404, {5}));
  Dataset data = testutil::random_dataset(18, 2, 2, rng);
  fs::path dcsv = work_dir() / "gdata.csv";
  write_dataset_csv_file(dcsv.string(), data);

  GramStack stack =
      build_gram_stack(data, {KernelSpec::gaussian_median(), KernelSpec::gaussian_median()});
  fs::path g0 = work_dir() / "g0.csv", g1 = work_dir() / "g1.csv";
  write_gram_csv(g0, stack.mats[0]);
  write_gram_csv(g1, stack.mats[1]);

  RunOut via_data = run("test --input " + dcsv.string() + " --vars 0:2,2:4 --B 99 --seed 6 --out " +
                        (work_dir() / "t6a").string());
  RunOut via_gram = run("test --kernel gram-file --gram " + g0.string() + " --gram " + g1.string() +
                        " --B 99 --seed 6 --out " + (work_dir() / "t6b").string());
  REQUIRE(via_data.code == 0);
  REQUIRE(via_gram.code == 0);
  json a = json::parse(via_data.out), b = json::parse(via_gram.out);
  CHECK(a["statistic"]["value"] == b["statistic"]["value"]);
  CHECK(a["p_value"] == b["p_value"]);
  CHECK(a["rank"] == b["rank"]);
}

TEST_CASE("manifests record the run and digest the inputs") {
  fs::path out = work_dir() / "manifest_run";
  RunOut r = run("test --input " + null_csv().string() + " --B 49 --seed 2 --out " + out.string());
  REQUIRE(r.code == 0);

  fs::path mpath = out / "test_manifest.json";
  REQUIRE(fs::exists(mpath));
  json m = json::parse(file_text(mpath));
  CHECK(m["subcommand"] == "test");
  CHECK(m["library_version"] == "0.1.0");
  CHECK(m["resolved_config"]["B"] == 49);
  CHECK(m["master_seed"] == 2);
  REQUIRE(m["inputs"].size() == 1);
  CHECK(m["inputs"][0]["path"] == null_csv().string());
  CHECK(m["inputs"][0]["fnv1a64"] == fnv1a64_hex(fnv1a64_file(null_csv().string())));
  CHECK(m["argv"].is_array());
  CHECK(m["started_at"].get<std::string>().size() == 20);  // ISO-8601 Z form
}

TEST_CASE("draw planner run writes the plan and the coverage table") {
  fs::path out = work_dir() / "plan_run";
  RunOut r = run("bplan --alpha 0.05 --epsilon 0.005 --confidence 0.99 --C 0.10 --out " +
                 out.string());
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  std::uint64_t bmin = j["B_min"].get<std::uint64_t>();
  CHECK(bmin >= 18000);
  CHECK(bmin <= 28000);
  CHECK(j["certified"] == true);

  std::string cov = file_text(out / "coverage.csv");
  CHECK(cov.rfind("p,coverage,min_half_width", 0) == 0);
  REQUIRE(fs::exists(out / "bplan_manifest.json"));
}

TEST_CASE("power sweep runs are reproducible files") {
  fs::path out1 = work_dir() / "pw1", out2 = work_dir() / "pw2";
  std::string base = "power --scenario scenario1 --thetas 0,0.5 --n 20 --reps 20 "
                     "--B-list 49 --seed 3 --out ";
  REQUIRE(run(base + out1.string()).code == 0);
  REQUIRE(run(base + out2.string()).code == 0);
  std::string a = file_text(out1 / "power.csv");
  CHECK(a == file_text(out2 / "power.csv"));
  CHECK(a.rfind("kind,theta,n,B,alpha,replications,rejections,rate,mc_stderr", 0) == 0);
  CHECK(std::count(a.begin(), a.end(), '\n') == 3);  // header + 2 cells
}

TEST_CASE("power config file drives the sweep and rejects unknown keys") {
  fs::path cfg = work_dir() / "sweep.json";
  {
    std::ofstream os(cfg);
    os << R"({"kind":"scenario1","thetas":[0.0],"n":15,"replications":5,"B_list":[19],"master_seed":4})";
  }
  fs::path out = work_dir() / "pwc";
  RunOut r = run("power --config " + cfg.string() + " --out " + out.string());
  REQUIRE(r.code == 0);
  CHECK(fs::exists(out / "power.csv"));

  fs::path bad = work_dir() / "sweep_bad.json";
  {
    std::ofstream os(bad);
    os << R"({"kind":"scenario1","mystery":1})";
  }
  CHECK(run("power --config " + bad.string() + " --out " + out.string()).code == 2);
}

TEST_CASE("curve table matches the analytic tail after the csv round trip") {
  fs::path out = work_dir() / "curves_run";
  RunOut r = run("curves --p-grid 0.02,0.05,0.08 --B-list 99 --trials 400 --seed 9 --out " +
                 out.string());
  REQUIRE(r.code == 0);
  std::istringstream is(file_text(out / "curves.csv"));
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line == "p_exceed,B,alpha,trials,rejections,empirical_rate,analytic_rate,mc_stderr");
  int rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    ++rows;
    std::vector<std::string> fields;
    std::stringstream fs_(line);
    std::string f;
    while (std::getline(fs_, f, ',')) fields.push_back(f);
    REQUIRE(fields.size() == 8);
    double p_exceed = std::stod(fields[0]);
    std::uint64_t B = std::stoull(fields[1]);
    double analytic = std::stod(fields[6]);
    CHECK(analytic == rejection_probability(B, p_exceed, Alpha::parse(fields[2])));
  }
  CHECK(rows == 3);
}

TEST_CASE("failure modes map to distinct exit codes") {
  // unknown flag
  CHECK(run("test --input nowhere.csv --frobnicate").code == 2);
  // missing file
  CHECK(run("test --input " + (work_dir() / "does_not_exist.csv").string() + " --out " +
            (work_dir() / "x1").string())
            .code == 2);

  // malformed csv
  fs::path badcsv = work_dir() / "bad.csv";
  {
    std::ofstream os(badcsv);
    os << "1.0,2.0\n3.0,banana\n";
  }
  CHECK(run("test --input " + badcsv.string() + " --out " + (work_dir() / "x2").string()).code == 2);

  // ragged csv
  fs::path ragged = work_dir() / "ragged.csv";
  {
    std::ofstream os(ragged);
    os << "1.0,2.0\n3.0\n";
  }
  CHECK(run("test --input " + ragged.string() + " --out " + (work_dir() / "x3").string()).code == 2);

  // full enumeration of an astronomically large group
  CHECK(run("test --input " + null_csv().string() + " --method exhaustive --out " +
            (work_dir() / "x4").string())
            .code == 3);

  // all points identical: no bandwidth scale
  fs::path flat = work_dir() / "flat.csv";
  {
    std::ofstream os(flat);
    for (int i = 0; i < 10; ++i) os << "1.0,2.0\n";
  }
  CHECK(run("test --input " + flat.string() + " --out " + (work_dir() / "x5").string()).code == 4);

  // planner budget too small
  CHECK(run("bplan --max-B 100 --out " + (work_dir() / "x6").string()).code == 5);

  // planner parameter ordering
  CHECK(run("bplan --epsilon 0.2 --C 0.1 --out " + (work_dir() / "x7").string()).code == 2);
}
