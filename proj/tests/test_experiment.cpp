#include <doctest.h>

#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "expcs/error.hpp"
#include "expcs/experiment.hpp"
#include "expcs/io.hpp"
#include "oracles.hpp"

using namespace expcs;

namespace {

ExperimentConfig small() {
  ExperimentConfig c;
  c.n = 300;
  c.m = 120;
  c.d = 6;
  c.k_list = {2, 4};
  c.intensity_list = {10, 1000};
  c.trials = 3;
  c.seed = 5;
  return c;
}

// Drops the trailing wall_time_ms column.
std::string without_times(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + '\n';
  return out;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(ExperimentConfig{}.validate());
  auto c = small();
  c.k_list = {};
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = small();
  c.k_list = {200};
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = small();
  c.intensity_list = {0.0};
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = small();
  c.trials = 0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = small();
  c.penalty = "uniform:1";
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = small();
  c.d = 500;
  CHECK_THROWS_AS(c.validate(), ParameterError);
}

TEST_CASE("config from json") {
  const auto c = ExperimentConfig::from_json(
      R"({"n": 100, "m": 40, "d": 4, "k_list": [1, 3], "intensity_list": [5, 50.5],
          "trials": 2, "lambda": "auto", "penalty": "l1:0.01", "seed": 9})");
  CHECK(c.n == 100);
  CHECK(c.k_list == std::vector<std::size_t>{1, 3});
  CHECK(c.intensity_list[1] == 50.5);
  CHECK_FALSE(c.lambda.has_value());
  CHECK(c.penalty == "l1:0.01");
  CHECK(c.seed == 9);
  CHECK(c.max_iters == 2000);
  CHECK(ExperimentConfig::from_json(R"({"lambda": 0.001})").lambda == 0.001);
  CHECK_THROWS_AS(ExperimentConfig::from_json("{"), ParseError);
  CHECK_THROWS_AS(ExperimentConfig::from_json("[1]"), ParseError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"n": "ten"})"), ParseError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"colour": 1})"), ParameterError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"lambda": "big"})"), ParameterError);
}

TEST_CASE("experiment output shape") {
  const auto cfg = small();
  const auto r = run_experiment(cfg);
  CHECK(r.records.size() == 2 * 2 * 3);
  CHECK(r.cells.size() == 4);
  CHECK(r.records.front().k == 2);
  CHECK(r.records.back().k == 4);
  for (const auto& cell : r.cells) {
    CHECK(cell.pilot_errors.size() == std::size(kPilotTaus));
    CHECK(cell.trials == 3);
    double mean = 0.0;
    for (const auto& t : r.records)
      if (t.k == cell.k && t.intensity == cell.intensity) mean += t.normalized_l1_error / 3.0;
    CHECK(cell.mean_error == doctest::Approx(mean));
  }
  const auto trials = trials_csv(r);
  CHECK(trials.rfind("k,I,trial,normalized_l1_error,iters,wall_time_ms\n", 0) == 0);
  CHECK(trials.find("\n2,10,0,") != std::string::npos);
  const auto summary = summary_csv(r);
  CHECK(summary.rfind("k,I,mean_error,stderr,trials\n", 0) == 0);
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 5);
  const auto j = nlohmann::json::parse(run_json(cfg, r));
  CHECK(j.contains("cells"));
}

TEST_CASE("experiment is reproducible") {
  const auto cfg = small();
  const auto a = run_experiment(cfg);
  const auto b = run_experiment(cfg);
  CHECK(without_times(trials_csv(a)) == without_times(trials_csv(b)));
  CHECK(summary_csv(a) == summary_csv(b));

  const auto dir = oracle::scratch("experiment");
  write_experiment(dir.string(), cfg, a);
  for (const char* f : {"trials.csv", "summary.csv", "run.json"})
    CHECK(std::filesystem::exists(std::filesystem::path(dir) / f));
  CHECK(read_file((std::filesystem::path(dir) / "summary.csv").string()) == summary_csv(a));
}

TEST_CASE("single spike at very high intensity is recovered") {
  ExperimentConfig c;
  c.n = 2000;
  c.m = 800;
  c.d = 8;
  c.k_list = {1};
  c.intensity_list = {1e6};
  c.trials = 3;
  const auto r = run_experiment(c);
  CHECK(r.cells.front().mean_error < 0.05);
}
