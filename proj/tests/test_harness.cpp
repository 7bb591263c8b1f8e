#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "floquet/errors.hpp"
#include "floquet/harness.hpp"

using namespace floquet;
using namespace floquet::harness;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::string scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("floquet_test_" + name);
  std::filesystem::remove_all(dir);
  return dir.string();
}

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.n_list = {4, 8};
  cfg.h_list = {0.4, 0.3};
  cfg.order = 30;
  cfg.deterministic = true;
  cfg.resolve();
  return cfg;
}

}  // namespace

TEST_CASE("configuration defaults", "[harness]") {
  ExperimentConfig cfg;
  cfg.resolve();
  CHECK(cfg.surface == "gamma1");
  CHECK(cfg.k == 1.0);
  CHECK(cfg.height == 3.0);
  CHECK(cfg.order == 80);
  CHECK(cfg.source.x1 == -1.0);
  CHECK(cfg.source.x2 == 0.4);
  CHECK(cfg.n_list == std::vector<int>{20, 40, 80});
  CHECK(cfg.h_list == std::vector<double>{0.16, 0.08, 0.04});
  CHECK_THAT(cfg.c0, WithinRel(2.0 / (5.0 * std::sqrt(5.0)), 1e-15));

  ExperimentConfig full;
  full.profile = "full";
  full.k = 10.0;
  full.source = {0.5, 0.2};
  full.resolve();
  CHECK(full.n_list == std::vector<int>{20, 40, 80, 160, 320});
  CHECK(full.h_list == std::vector<double>{0.08, 0.04, 0.02, 0.01});
}

TEST_CASE("configuration file and overrides", "[harness]") {
  std::istringstream file(
      "# example\n"
      "surface = gamma2\n"
      "k = 10   # wavenumber\n"
      "source = 0.5, 0.2\n"
      "N = 20,40\n"
      "h = 0.08\n"
      "workers = 3\n");
  ExperimentConfig cfg;
  read_config(file, cfg);
  CHECK(cfg.surface == "gamma2");
  CHECK(cfg.k == 10.0);
  CHECK(cfg.source.x1 == 0.5);
  CHECK(cfg.n_list == std::vector<int>{20, 40});
  CHECK(cfg.h_list == std::vector<double>{0.08});
  apply_setting(cfg, "k", "1");
  CHECK(cfg.k == 1.0);
  CHECK_NOTHROW(cfg.resolve());

  std::istringstream bad_key("colour = red\n");
  CHECK_THROWS_AS(read_config(bad_key, cfg), ConfigError);
  std::istringstream bad_value("k = fast\n");
  CHECK_THROWS_AS(read_config(bad_value, cfg), ConfigError);
  std::istringstream no_eq("k 1\n");
  CHECK_THROWS_AS(read_config(no_eq, cfg), ConfigError);
}

TEST_CASE("configuration invariants", "[harness]") {
  auto expect_invalid = [](auto mutate) {
    ExperimentConfig cfg;
    mutate(cfg);
    CHECK_THROWS_AS(cfg.resolve(), ConfigError);
  };
  expect_invalid([](ExperimentConfig& c) { c.n_list = {0}; });
  expect_invalid([](ExperimentConfig& c) { c.h_list = {-0.1}; });
  expect_invalid([](ExperimentConfig& c) { c.height = 2.0; });
  expect_invalid([](ExperimentConfig& c) { c.source = {0.0, 1.8}; });
  expect_invalid([](ExperimentConfig& c) { c.mode = qpfem::Mode::A; });
  expect_invalid([](ExperimentConfig& c) { c.surface = "gamma9"; });
  expect_invalid([](ExperimentConfig& c) { c.profile = "huge"; });
  expect_invalid([](ExperimentConfig& c) { c.workers = 0; });
}

TEST_CASE("tabulated surface file", "[harness]") {
  const auto dir = scratch("surface");
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/surface.txt";
  {
    std::ofstream os(path);
    os << "# heights\n";
    for (int i = 0; i < 64; ++i) os << 1.9 + 0.2 * std::sin(2.0 * std::numbers::pi * i / 64.0) << "\n";
  }
  ExperimentConfig cfg;
  cfg.surface = "file";
  cfg.surface_file = path;
  const auto p = make_profile(cfg);
  CHECK_THAT(p.max_height(), WithinAbs(2.1, 1e-3));
  cfg.surface_file = dir + "/missing.txt";
  CHECK_THROWS_AS(make_profile(cfg), IoError);
}

TEST_CASE("balanced pairs", "[harness]") {
  ExperimentConfig cfg;
  const auto ci = balanced_pairs(cfg);
  REQUIRE(ci.size() == 2);
  CHECK(ci[0] == std::pair<int, double>{20, 0.04});
  CHECK(ci[1] == std::pair<int, double>{80, 0.02});
  cfg.profile = "full";
  const auto full = balanced_pairs(cfg);
  REQUIRE(full.size() == 3);
  CHECK(full[2] == std::pair<int, double>{320, 0.01});
}

TEST_CASE("CSV output round trips", "[harness]") {
  const auto cfg = small_config();
  std::vector<ErrorRecord> records;
  records.push_back({"gamma1", 1.0, 20, 0.16, 0.22, 80, 0.012603014794206155, 0.047319291316803527, 1.25, "ok"});
  records.push_back({"gamma1", 1.0, 40, 0.08, 0.11, 80, 1.0 / 3.0, 2.0 / 7.0, 0.0, "failed: residual"});
  std::stringstream ss;
  write_csv(ss, records, cfg);
  const auto back = read_csv(ss);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].surface == records[i].surface);
    CHECK(back[i].k == records[i].k);
    CHECK(back[i].n == records[i].n);
    CHECK(back[i].h == records[i].h);
    CHECK(back[i].order == records[i].order);
    CHECK(back[i].rel_l2 == records[i].rel_l2);
    CHECK(back[i].rel_h1 == records[i].rel_h1);
    CHECK(back[i].runtime == records[i].runtime);
    CHECK(back[i].status == records[i].status);
  }
  std::istringstream broken("surface,k\n");
  CHECK_THROWS_AS(read_csv(broken), IoError);
}

TEST_CASE("output files", "[harness]") {
  auto cfg = small_config();
  cfg.out_dir = scratch("outputs");
  CHECK_THROWS_AS(emit_outputs({}, cfg), ArgumentError);

  std::vector<ErrorRecord> records{{"gamma1", 1.0, 20, 0.16, 0.22, 80, 1e-2, 3e-2, 0.0, "ok"}};
  const auto paths = emit_outputs(records, cfg, -1.5);
  const auto json = nlohmann::json::parse(slurp(paths.json));
  CHECK(json["records"].size() == 1);
  CHECK(json["records"][0]["N"] == 20);
  CHECK(json["config"]["surface"] == "gamma1");
  CHECK(json["slope"] == -1.5);
  CHECK(slurp(paths.csv).find("# surface=gamma1") == 0);
  CHECK(slurp(paths.rate).find("20 0.16 0.01 ") != std::string::npos);

  cfg.out_dir = "/proc/floquet-cannot-write";
  CHECK_THROWS_AS(emit_outputs(records, cfg), IoError);
}

TEST_CASE("convergence runs", "[harness]") {
  auto cfg = small_config();
  const auto records = run_convergence(cfg);
  REQUIRE(records.size() == 4);
  CHECK(records[0].n == 4);
  CHECK(records[0].h == 0.4);
  CHECK(records[3].n == 8);
  CHECK(records[3].h == 0.3);
  for (const auto& r : records) {
    CHECK(r.status == "ok");
    CHECK(r.rel_l2 > 0.0);
    CHECK(r.runtime == 0.0);
  }
  CHECK(records[1].rel_l2 < records[0].rel_l2);

  SECTION("worker count does not change the numbers") {
    auto threaded = cfg;
    threaded.workers = 4;
    const auto again = run_convergence(threaded);
    for (std::size_t i = 0; i < records.size(); ++i) {
      CHECK(again[i].rel_l2 == records[i].rel_l2);
      CHECK(again[i].rel_h1 == records[i].rel_h1);
    }
  }
  SECTION("restart from dumps reproduces the run") {
    auto dumped = cfg;
    dumped.out_dir = scratch("dumps");
    dumped.dump_solutions = true;
    const auto first = run_convergence(dumped);
    std::size_t files = 0;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dumped.out_dir + "/solutions")) {
      files += e.is_regular_file();
    }
    CHECK(files == 2 * 8);  // the N = 4 samples are a subset of the N = 8 samples
    const auto second = run_convergence(dumped);
    for (std::size_t i = 0; i < records.size(); ++i) {
      CHECK(first[i].rel_l2 == records[i].rel_l2);
      CHECK(second[i].rel_l2 == records[i].rel_l2);
    }
  }
}

TEST_CASE("solver failures are recorded per cell", "[harness]") {
  auto cfg = small_config();
  cfg.residual_tolerance = 1e-300;
  const auto records = run_convergence(cfg);
  REQUIRE(records.size() == 4);
  for (const auto& r : records) CHECK(r.status.rfind("failed", 0) == 0);
}

TEST_CASE("Mode A self-convergence", "[harness]") {
  ExperimentConfig cfg;
  cfg.incident = "herglotz";
  cfg.mode = qpfem::Mode::A;
  cfg.herglotz_center = 0.2;
  cfg.herglotz_width = 0.4;
  cfg.n_list = {4, 8};
  cfg.h_list = {0.4, 0.2};
  cfg.order = 30;
  cfg.resolve();
  const auto records = run_convergence(cfg);
  REQUIRE(records.size() == 4);
  CHECK(records[3].status == "reference");
  for (int i = 0; i < 3; ++i) {
    CHECK(records[i].status == "ok");
    CHECK(records[i].rel_l2 > 0.0);
  }
  CHECK(records[1].rel_l2 < records[0].rel_l2);  // (N 8, h 0.4) beats (N 4, h 0.4)
}
