#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace expcs {

/// Sparsity/intensity sweep. JSON field names match the member names.
struct ExperimentConfig {
  std::size_t n = 2000;
  std::size_t m = 800;
  std::size_t d = 8;
  std::vector<std::size_t> k_list{5};
  std::vector<double> intensity_list{10.0};  ///< intensity of every nonzero entry
  std::size_t trials = 10;
  std::optional<double> lambda;  ///< default_lambda(k, n) when absent
  std::string penalty = "l1:auto";  ///< "l1:auto" runs the pilot grid
  double tol = 1e-8;
  std::size_t max_iters = 2000;
  std::uint64_t seed = 1;
  std::string out_dir = "experiment_out";

  /// Throws ParameterError on any infeasible setting.
  void validate() const;
  static ExperimentConfig from_json(const std::string& text);
};

/// Candidate tau values tried on the held-out pilot trial.
inline constexpr double kPilotTaus[] = {0.001, 0.01, 0.1};

struct TrialRecord {
  std::size_t k = 0;
  double intensity = 0.0;
  std::size_t trial = 0;
  double normalized_l1_error = 0.0;  ///< ||a - x_hat||_1 / ||a||_1
  double f_error = 0.0;              ///< same with f_hat
  std::size_t iters = 0;
  double wall_time_ms = 0.0;
};

struct CellSummary {
  std::size_t k = 0;
  double intensity = 0.0;
  double mean_error = 0.0;
  double stderr_error = 0.0;
  double mean_f_error = 0.0;
  std::size_t trials = 0;
  double tau = 0.0;
  double lambda = 0.0;
  std::vector<double> pilot_errors;  ///< one per kPilotTaus entry, empty if tau was fixed
};

struct ExperimentResult {
  std::vector<TrialRecord> records;  ///< (k, I, trial) order
  std::vector<CellSummary> cells;    ///< (k, I) order
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

std::string trials_csv(const ExperimentResult& r);
std::string summary_csv(const ExperimentResult& r);
std::string run_json(const ExperimentConfig& cfg, const ExperimentResult& r);

/// trials.csv, summary.csv and run.json into `dir` (created if missing).
void write_experiment(const std::string& dir, const ExperimentConfig& cfg,
                      const ExperimentResult& r);

}  // namespace expcs
