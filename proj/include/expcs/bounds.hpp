#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "expcs/channel.hpp"
#include "expcs/expander.hpp"
#include "expcs/recon.hpp"

namespace expcs {

/// One evaluated inequality lhs <= rhs.
struct BoundReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  ///< rhs - lhs (+ any Monte-Carlo allowance)
  bool pass = false;   ///< slack >= -kBoundTolerance
  std::vector<std::pair<std::string, double>> context;

  double context_value(const std::string& key) const;
};

inline constexpr double kBoundTolerance = 1e-9;

/// Builds a report; `allowance` is added to the slack (used for the
/// 3-standard-error Monte-Carlo margin).
BoundReport make_report(std::string name, double lhs, double rhs,
                        std::vector<std::pair<std::string, double>> context,
                        double allowance = 0.0);

std::string report_json(const BoundReport& r);

/// The min(k, n) largest-magnitude coordinates (lowest index on ties) and
/// the rest.
struct SupportSplit {
  std::vector<std::uint32_t> support;
  std::vector<std::uint32_t> complement;
  double tail_norm = 0.0;  ///< l1 norm over the complement
};

SupportSplit support_split(std::span<const double> u, std::size_t k);

/// ||u - v||_1 <= (1-2e)/(1-6e) (2 ||u_tail||_1 + delta) + 2/(d(1-6e)) ||A u - A v||_1
///
/// `k` is the size of the head set S. The inequality is only guaranteed when
/// the graph is a (2k, epsilon)-expander, since u - v mixes two k-sparse
/// heads. Requires epsilon < 1/6, delta >= 0 and ||u||_1 >= ||v||_1 - delta.
BoundReport theorem1_bound(const ExpanderGraph& g, std::span<const double> u,
                           std::span<const double> v, std::size_t k, double epsilon,
                           double delta);

/// ||Phi(a - x)||_1^2 <= 2 (2 + m lambda / d) sum_j (sqrt(Phi a)_j - sqrt(Phi x)_j)^2
///
/// Requires ||alpha||_1 <= 1 and Phi x >= lambda / d entrywise.
BoundReport lemma1_check(const SensingMatrix& phi, std::span<const double> alpha_star,
                         std::span<const double> x_hat, double lambda);

/// KL(Poisson(Phi a) || Poisson(Phi x)) <= d ||a - x||_1^2 / lambda
///
/// Requires Phi x >= lambda / d entrywise (x in Gamma form).
BoundReport lemma3_kl_bound(const SensingMatrix& phi, std::span<const double> alpha_star,
                            std::span<const double> x, double lambda);

/// Lower and upper ends of the measurement-domain band for x = f + lambda I:
///   m lambda / d <= ||Phi x||_1 <= ||f||_1 + m lambda / d.
/// The upper end is only attainable when the cover is an exact partition of
/// the right nodes (|Lambda| = m / d); in general ||Phi x||_1 equals
/// ||f||_1 + lambda |Lambda| for f >= 0.
std::pair<BoundReport, BoundReport> gamma_band_check(const SensingMatrix& phi,
                                                     std::span<const double> f, double lambda,
                                                     const CoverSet& cover);

/// -2 ln sum_{y=0..Y} sqrt(p(y | g) p(y | h)) for scalar Poisson means, with
/// the sum truncated once terms are negligible. Independent route to the
/// closed-form Hellinger affinity term.
double affinity_by_pmf_sum(double g, double h);

/// Monte-Carlo check of E[H(Phi a, Phi x_hat)] <= min_Gamma [KL + 2 pen].
///
/// Each trial draws y ~ Poisson(Phi a) from stream (seed, trial) and decodes
/// with the enumerated solver. Passes when lhs <= rhs + 3 SE. Requires
/// |Gamma| <= 64 and a penalty satisfying Kraft over Gamma.
BoundReport lemma2_oracle_mc(const SensingMatrix& phi, std::span<const double> alpha_star,
                             const CandidateSet& gamma, const Penalty& penalty,
                             std::size_t trials, std::uint64_t seed);

/// E[||Phi(a - x_hat)||_1] <= sqrt(6) min_Gamma [sqrt(d/lambda) ||a - x||_1 + sqrt(2 pen(x))].
/// Additionally requires m lambda / d < 1.
BoundReport lemma4_measurement_bound_mc(const SensingMatrix& phi,
                                        std::span<const double> alpha_star,
                                        const CandidateSet& gamma, const Penalty& penalty,
                                        std::size_t trials, std::uint64_t seed);

/// E[||a - f_hat||_1] <= lambda m + 4 ||a_tail||_1 + 2 lambda m
///   + 3 sqrt(6) min_Theta [sqrt(d/lambda) (||a - f||_1 + lambda m) + sqrt(2 pen(f))]
/// with the tail taken outside the k largest entries of a.
BoundReport final_theorem_mc(const SensingMatrix& phi, std::span<const double> alpha_star,
                             const CandidateSet& gamma, const Penalty& penalty, std::size_t k,
                             std::size_t trials, std::uint64_t seed);

/// ||a_tail||_1 + min_Theta [c sqrt(k) ln(n/k) ||a - f||_1 + sqrt(2 pen(f))],
/// the order of the expected reconstruction error. No pass/fail.
double becca_order(std::span<const double> alpha_star, std::span<const Signal> theta,
                   const Penalty& penalty, std::size_t k, double c = 1.0);

}  // namespace expcs
