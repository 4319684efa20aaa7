#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "expcs/channel.hpp"
#include "expcs/expander.hpp"

namespace expcs {

/// Prior penalty pen(x) >= 0 used as 2 pen(x) in the MAP objective.
struct Penalty {
  enum class Kind {
    l1,            ///< tau * ||x||_1
    support_code,  ///< (||x||_0 + 1) ln(2n) + ||x||_0 * B ln 2
    uniform,       ///< the same constant for every candidate, e.g. ln |Gamma|
  };

  Kind kind = Kind::l1;
  double weight = 0.0;  ///< tau for l1, the constant for uniform
  unsigned bits = 0;    ///< amplitude bits B for support_code

  static Penalty l1(double tau);
  static Penalty support_code(unsigned bits);
  static Penalty uniform(double value);

  double value(std::span<const double> x) const;
};

/// "l1:<tau>", "support:<bits>" or "uniform:<value>".
Penalty parse_penalty(const std::string& spec);
std::string to_string(const Penalty& p);

/// sum over candidates of exp(-pen(x)).
double kraft_sum(const Penalty& penalty, std::span<const Signal> candidates);

/// Kraft sum of the support-code penalty over every vector of length n whose
/// entries are 0 or one of 2^B nonzero quantisation levels, by explicit
/// enumeration of all (2^B + 1)^n vectors.
double kraft_sum_support_code_exhaustive(std::size_t n, unsigned bits);

/// 0.01 / (max(k, 1) ln n).
double default_lambda(std::size_t k, std::size_t n);

/// lambda * max(k, 1) * ln n < 0.1, the small-shift regime.
bool lambda_in_regime(double lambda, std::size_t k, std::size_t n);

/// x = f + lambda * I_Lambda.
Signal shift_to_gamma(std::span<const double> f, double lambda, const CoverSet& cover);

/// Finite candidate family Theta and its shifted copy Gamma = Theta + lambda I_Lambda.
class CandidateSet {
 public:
  /// Every f must be nonnegative with ||f||_1 = 1 (to 1e-9).
  CandidateSet(std::vector<Signal> theta, double lambda, CoverSet cover);

  std::size_t size() const { return theta_.size(); }
  double lambda() const { return lambda_; }
  const CoverSet& cover() const { return cover_; }
  const Signal& theta(std::size_t i) const { return theta_.at(i); }
  const Signal& member(std::size_t i) const { return gamma_.at(i); }
  std::span<const Signal> members() const { return gamma_; }

 private:
  std::vector<Signal> theta_;
  std::vector<Signal> gamma_;
  double lambda_;
  CoverSet cover_;
};

/// sum_j (Phi x)_j - y_j ln (Phi x)_j + 2 pen(x); +inf propagates.
double map_objective(const SensingMatrix& phi, std::span<const std::uint64_t> y,
                     std::span<const double> x, const Penalty& penalty);

/// Gradient in f of the data term L(f) = nll(Phi (f + lambda I_Lambda), y):
/// Phi^T (1 - y / Phi x).
std::vector<double> data_gradient(const SensingMatrix& phi, std::span<const std::uint64_t> y,
                                  std::span<const double> f, double lambda,
                                  const CoverSet& cover);

/// L(f) itself.
double data_term(const SensingMatrix& phi, std::span<const std::uint64_t> y,
                 std::span<const double> f, double lambda, const CoverSet& cover);

struct ReconConfig {
  double lambda = 0.0;
  Penalty penalty = Penalty::l1(0.0);
  std::size_t max_iters = 2000;
  double tol = 1e-8;
  std::uint64_t seed = 0;
};

struct ReconResult {
  Signal x_hat;  ///< member of Gamma
  Signal f_hat;  ///< x_hat - lambda I_Lambda, clipped at 0
  std::vector<double> objective_trace;
  std::size_t iters = 0;
  bool converged = false;
  std::optional<std::size_t> candidate_index;  ///< enumerated mode only
};

/// Continuous mode: proximal gradient on
///   F(f) = L(f) + 2 tau ||f||_1,  f >= 0,
/// with Barzilai-Borwein step proposals, halving backtracking until
/// sufficient decrease, and a soft-threshold-then-clip proximal step. Stops
/// when the relative change of F drops below tol or after max_iters
/// iterations. Requires an l1 penalty and lambda > 0.
ReconResult solve_map(const SensingMatrix& phi, std::span<const std::uint64_t> y,
                      const ReconConfig& cfg, const CoverSet& cover);

/// Enumerated mode: exact argmin of map_objective over Gamma, lowest index on
/// ties. objective_trace holds the objective of every candidate.
ReconResult solve_map(const SensingMatrix& phi, std::span<const std::uint64_t> y,
                      const CandidateSet& gamma, const Penalty& penalty);

/// Serialises a result into `dir`: x_hat.txt, f_hat.txt, objective_trace.txt
/// and result.json referencing them.
void save_result(const std::string& dir, const ReconResult& result);

}  // namespace expcs
