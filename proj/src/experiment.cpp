#include "expcs/experiment.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "expcs/channel.hpp"
#include "expcs/error.hpp"
#include "expcs/expander.hpp"
#include "expcs/io.hpp"
#include "expcs/recon.hpp"
#include "expcs/rng.hpp"

namespace expcs {

namespace {

constexpr std::uint64_t kPilotTrial = std::numeric_limits<std::uint64_t>::max();

bool auto_tau(const std::string& penalty) { return penalty == "l1:auto"; }

std::string format_intensity(double v) {
  if (v == std::floor(v) && v < 1e15) return std::to_string(static_cast<std::uint64_t>(v));
  return format_double(v);
}

struct TrialOutcome {
  double error = 0.0;
  double f_error = 0.0;
  std::size_t iters = 0;
};

TrialOutcome run_trial(const SensingMatrix& phi, const CoverSet& cover, std::size_t k,
                       double intensity, std::uint64_t trial, const ReconConfig& rc,
                       std::uint64_t seed) {
  Rng rng = Rng::stream(seed, {k, std::bit_cast<std::uint64_t>(intensity), trial});
  const auto support = sample_without_replacement(rng, static_cast<std::uint32_t>(phi.n()),
                                                  static_cast<std::uint32_t>(k));
  Signal alpha(phi.n(), 0.0);
  for (auto i : support) alpha[i] = intensity;
  const auto y = sample_poisson(phi.apply(alpha), rng());
  const auto res = solve_map(phi, y, rc, cover);
  const double norm = l1_norm(alpha);
  return {l1_distance(alpha, res.x_hat) / norm, l1_distance(alpha, res.f_hat) / norm, res.iters};
}

}  // namespace

void ExperimentConfig::validate() const {
  ExpanderParams{n, m, d, 0.25, 1}.validate();
  if (k_list.empty()) throw ParameterError("k_list must not be empty");
  for (auto k : k_list) {
    if (k < 1 || k > n / 2) throw ParameterError("every k must satisfy 1 <= k <= n/2");
  }
  if (intensity_list.empty()) throw ParameterError("intensity_list must not be empty");
  for (double v : intensity_list) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError("intensities must be positive");
  }
  if (trials < 1) throw ParameterError("trials must be at least 1");
  if (lambda && !(*lambda > 0.0)) throw ParameterError("lambda must be positive");
  if (!auto_tau(penalty)) {
    const auto p = parse_penalty(penalty);
    if (p.kind != Penalty::Kind::l1) throw ParameterError("experiments use an l1 penalty");
  }
  if (!(tol > 0.0)) throw ParameterError("tol must be positive");
  if (max_iters < 1) throw ParameterError("max_iters must be at least 1");
  if (out_dir.empty()) throw ParameterError("out_dir must not be empty");
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("config: expected a JSON object");
  static const std::set<std::string> known{"n",     "m",       "d",   "k_list",    "intensity_list",
                                           "trials", "lambda", "penalty", "tol", "max_iters",
                                           "seed",  "out_dir"};
  ExperimentConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (!known.count(key)) throw ParameterError("config: unknown field '" + key + "'");
    }
    c.n = j.value("n", c.n);
    c.m = j.value("m", c.m);
    c.d = j.value("d", c.d);
    if (j.contains("k_list")) c.k_list = j.at("k_list").get<std::vector<std::size_t>>();
    if (j.contains("intensity_list")) {
      c.intensity_list = j.at("intensity_list").get<std::vector<double>>();
    }
    c.trials = j.value("trials", c.trials);
    if (j.contains("lambda") && !j.at("lambda").is_null()) {
      if (j.at("lambda").is_string()) {
        if (j.at("lambda").get<std::string>() != "auto") {
          throw ParameterError("config: lambda must be a number or \"auto\"");
        }
      } else {
        c.lambda = j.at("lambda").get<double>();
      }
    }
    c.penalty = j.value("penalty", c.penalty);
    c.tol = j.value("tol", c.tol);
    c.max_iters = j.value("max_iters", c.max_iters);
    c.seed = j.value("seed", c.seed);
    c.out_dir = j.value("out_dir", c.out_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const SensingMatrix phi(generate_graph({cfg.n, cfg.m, cfg.d, 0.25, 1}, mix64(cfg.seed)));
  const CoverSet cover = cover_set(phi.graph());

  ExperimentResult out;
  for (auto k : cfg.k_list) {
    for (double intensity : cfg.intensity_list) {
      CellSummary cell;
      cell.k = k;
      cell.intensity = intensity;
      cell.lambda = cfg.lambda.value_or(default_lambda(k, cfg.n));
      ReconConfig rc;
      rc.lambda = cell.lambda;
      rc.max_iters = cfg.max_iters;
      rc.tol = cfg.tol;
      rc.seed = cfg.seed;

      if (auto_tau(cfg.penalty)) {
        constexpr std::size_t grid = std::size(kPilotTaus);
        cell.pilot_errors.assign(grid, 0.0);
#pragma omp parallel for schedule(dynamic)
        for (std::size_t g = 0; g < grid; ++g) {
          ReconConfig pilot = rc;
          pilot.penalty = Penalty::l1(kPilotTaus[g]);
          cell.pilot_errors[g] =
              run_trial(phi, cover, k, intensity, kPilotTrial, pilot, cfg.seed).error;
        }
        std::size_t best = 0;
        for (std::size_t g = 1; g < grid; ++g) {
          if (cell.pilot_errors[g] < cell.pilot_errors[best]) best = g;
        }
        cell.tau = kPilotTaus[best];
      } else {
        cell.tau = parse_penalty(cfg.penalty).weight;
      }
      rc.penalty = Penalty::l1(cell.tau);

      std::vector<TrialRecord> recs(cfg.trials);
#pragma omp parallel for schedule(dynamic)
      for (std::size_t t = 0; t < cfg.trials; ++t) {
        const auto start = std::chrono::steady_clock::now();
        const auto o = run_trial(phi, cover, k, intensity, t, rc, cfg.seed);
        const auto stop = std::chrono::steady_clock::now();
        recs[t] = {k, intensity, t, o.error, o.f_error, o.iters,
                   std::chrono::duration<double, std::milli>(stop - start).count()};
      }

      double sum = 0.0, sum_f = 0.0;
      for (const auto& r : recs) {
        sum += r.normalized_l1_error;
        sum_f += r.f_error;
      }
      const double tn = static_cast<double>(cfg.trials);
      cell.mean_error = sum / tn;
      cell.mean_f_error = sum_f / tn;
      if (cfg.trials > 1) {
        double ss = 0.0;
        for (const auto& r : recs) {
          ss += (r.normalized_l1_error - cell.mean_error) * (r.normalized_l1_error - cell.mean_error);
        }
        cell.stderr_error = std::sqrt(ss / (tn - 1.0) / tn);
      }
      cell.trials = cfg.trials;
      out.records.insert(out.records.end(), recs.begin(), recs.end());
      out.cells.push_back(std::move(cell));
    }
  }
  return out;
}

std::string trials_csv(const ExperimentResult& r) {
  std::ostringstream s;
  s << "k,I,trial,normalized_l1_error,iters,wall_time_ms\n";
  for (const auto& t : r.records) {
    s << t.k << ',' << format_intensity(t.intensity) << ',' << t.trial << ','
      << format_double(t.normalized_l1_error) << ',' << t.iters << ','
      << format_double(std::round(t.wall_time_ms * 1000.0) / 1000.0) << '\n';
  }
  return s.str();
}

std::string summary_csv(const ExperimentResult& r) {
  std::ostringstream s;
  s << "k,I,mean_error,stderr,trials\n";
  for (const auto& c : r.cells) {
    s << c.k << ',' << format_intensity(c.intensity) << ',' << format_double(c.mean_error) << ','
      << format_double(c.stderr_error) << ',' << c.trials << '\n';
  }
  return s.str();
}

std::string run_json(const ExperimentConfig& cfg, const ExperimentResult& r) {
  nlohmann::ordered_json j;
  j["n"] = cfg.n;
  j["m"] = cfg.m;
  j["d"] = cfg.d;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["penalty"] = cfg.penalty;
  j["tol"] = cfg.tol;
  j["max_iters"] = cfg.max_iters;
  if (auto_tau(cfg.penalty)) j["pilot_taus"] = std::vector<double>(std::begin(kPilotTaus), std::end(kPilotTaus));
  auto cells = nlohmann::ordered_json::array();
  for (const auto& c : r.cells) {
    nlohmann::ordered_json e;
    e["k"] = c.k;
    e["I"] = c.intensity;
    e["lambda"] = c.lambda;
    e["tau"] = c.tau;
    if (!c.pilot_errors.empty()) e["pilot_errors"] = c.pilot_errors;
    e["mean_error"] = c.mean_error;
    e["mean_f_error"] = c.mean_f_error;
    cells.push_back(std::move(e));
  }
  j["cells"] = std::move(cells);
  auto f_errors = nlohmann::ordered_json::array();
  for (const auto& t : r.records) f_errors.push_back(t.f_error);
  j["f_hat_errors"] = std::move(f_errors);
  return j.dump(2) + "\n";
}

void write_experiment(const std::string& dir, const ExperimentConfig& cfg,
                      const ExperimentResult& r) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path base(dir);
  write_file((base / "trials.csv").string(), trials_csv(r));
  write_file((base / "summary.csv").string(), summary_csv(r));
  write_file((base / "run.json").string(), run_json(cfg, r));
}

}  // namespace expcs
