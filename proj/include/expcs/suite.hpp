#pragma once

// The verification battery behind `expcs bounds --suite` and the acceptance
// tests: certified test graphs, randomised instance generators, and one
// aggregated result per checked inequality family.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "expcs/bounds.hpp"
#include "expcs/channel.hpp"
#include "expcs/expander.hpp"
#include "expcs/recon.hpp"

namespace expcs {

/// Slack values are searched on the grid j / 96, which contains 1/16, 1/8,
/// 1/6 and 1/4.
inline constexpr int kEpsilonGrid = 96;

/// Exhaustive-enumeration cap used for every certificate in the battery.
inline constexpr std::uint64_t kCertificateBudget = 1'000'000;

/// A graph with an exact (k, epsilon) certificate at two grid points: the
/// smallest certifiable epsilon and the largest one below the cap.
struct CertifiedGraph {
  std::string label;
  ExpanderGraph graph;
  std::size_t k = 0;
  double epsilon_tight = 0.0;
  double epsilon_loose = 0.0;
};

/// Smallest grid epsilon < cap with an exact (k, epsilon) certificate.
std::optional<double> tightest_grid_epsilon(const ExpanderGraph& g, std::size_t k, double cap);

/// Certifies `g` at the tightest and loosest grid points below `cap`.
std::optional<CertifiedGraph> certify(std::string label, ExpanderGraph g, std::size_t k,
                                      double cap);

/// Generate-and-verify loop over seeds derived from `seed`; gives up after
/// `max_retries` graphs.
std::optional<CertifiedGraph> find_certified_graph(const ExpanderParams& params, std::size_t k,
                                                   double cap, std::size_t max_retries,
                                                   std::uint64_t seed);

/// First n lines of the affine plane over GF(4) (16 points, 20 lines of 4
/// points, two lines share at most one point) under a random relabelling of
/// points and lines. Pairs of columns overlap in at most one right node, so
/// these certify (2, epsilon) for every epsilon > 1/8, which random
/// 4-regular graphs with m < n essentially never do.
ExpanderGraph affine_plane_graph(std::size_t n, std::uint64_t seed);

/// Random k-sparse vector with integer entries in [-64, 64], support size
/// uniform in 1..k; a fifth of the draws use one common magnitude.
Signal random_sparse_integer_vector(Rng& rng, std::size_t n, std::size_t k);

/// Aggregated result of one inequality family.
struct FamilyResult {
  std::string name;
  std::size_t trials = 0;
  std::size_t violations = 0;
  BoundReport worst;  ///< the evaluated instance with the smallest slack
  bool statistical = false;

  bool pass() const { return violations == 0 && trials > 0; }
  void add(const BoundReport& r);
};

std::string family_json(const FamilyResult& f);

/// Certified graphs for the RIP-1 and collision-edge families
/// (n <= 24, m <= 16, d <= 4, k <= 3, epsilon < 1/2).
std::vector<CertifiedGraph> rip_graphs(std::uint64_t seed);

/// (2, epsilon < 1/6)-certified graphs for the sparse-recovery stability family.
std::vector<CertifiedGraph> theorem1_graphs(std::uint64_t seed);

FamilyResult rip1_family(std::span<const CertifiedGraph> graphs, std::size_t vectors_per_graph,
                         std::uint64_t seed);
FamilyResult collision_family(std::span<const CertifiedGraph> graphs,
                              std::size_t vectors_per_graph, std::uint64_t seed);
/// Head size k/2 on each (k, epsilon)-certified graph, at both grid points.
FamilyResult theorem1_family(std::span<const CertifiedGraph> graphs,
                             std::size_t triples_per_graph, std::uint64_t seed);

/// Closed-form Hellinger term against the truncated pmf sum over grid x grid;
/// the report's lhs is the relative error and rhs the tolerance.
FamilyResult hellinger_identity_family(std::span<const double> grid, double rel_tol);

/// Random Gamma-form instances on small certified graphs.
FamilyResult lemma1_family(std::size_t instances, std::uint64_t seed);
FamilyResult lemma3_family(std::size_t instances, std::uint64_t seed);

/// Small enumerable decoding problem for the Monte-Carlo families.
struct McInstance {
  SensingMatrix phi;
  Signal alpha_star;
  CandidateSet gamma;
  Penalty penalty;
  std::size_t k;
};

/// n = 12, m = 8, d = 2, a 2-sparse alpha with ||alpha||_1 = `intensity`, and
/// `gamma_size` candidates (the normalised alpha first) with the uniform
/// Kraft-tight penalty ln |Gamma|.
McInstance mc_instance(std::uint64_t seed, double intensity = 1.0, std::size_t gamma_size = 8);

FamilyResult lemma2_family(std::span<const std::uint64_t> seeds, std::size_t trials,
                           double intensity = 1.0);
FamilyResult lemma4_family(std::span<const std::uint64_t> seeds, std::size_t trials);
FamilyResult final_theorem_family(std::span<const std::uint64_t> seeds, std::size_t trials);

/// Support-code Kraft sums for every n <= max_n and 1 <= B <= max_bits.
FamilyResult kraft_family(std::size_t max_n, unsigned max_bits);

struct SuiteOptions {
  std::uint64_t seed = 1;
  std::size_t rip_vectors = 1000;
  std::size_t theorem1_triples = 500;
  std::size_t lemma_instances = 1000;
  std::size_t mc_trials = 2000;
  std::size_t kraft_max_n = 10;
  unsigned kraft_max_bits = 3;
};

std::vector<FamilyResult> run_bounds_suite(const SuiteOptions& options);

}  // namespace expcs
