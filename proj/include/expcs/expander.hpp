#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace expcs {

/// Requested shape of a left-regular bipartite graph.
///
/// `epsilon` and `k` describe the expansion the caller intends to certify;
/// they are validated here but only enforced by verify_expansion.
struct ExpanderParams {
  std::size_t n = 0;  ///< left (variable) nodes
  std::size_t m = 0;  ///< right (check) nodes
  std::size_t d = 0;  ///< left degree
  double epsilon = 0.25;
  std::size_t k = 1;

  /// Throws ParameterError unless 1 <= d <= m < n, 1 <= k <= n/2 and
  /// epsilon in (0, 1/2).
  void validate() const;
};

/// d-left-regular bipartite graph stored as n sorted neighbour lists.
///
/// Column i lists the right nodes adjacent to left node i. The constructor
/// checks left-regularity (exactly d distinct entries per column, all below
/// m) and sorts each column, so two graphs compare equal iff they have the
/// same edge set. Only within-column duplicates are rejected; two left nodes
/// may have identical columns.
class ExpanderGraph {
 public:
  ExpanderGraph(std::size_t n, std::size_t m, std::size_t d, std::vector<std::uint32_t> columns);

  std::size_t n() const { return n_; }
  std::size_t m() const { return m_; }
  std::size_t d() const { return d_; }

  std::span<const std::uint32_t> column(std::size_t i) const {
    return {columns_.data() + i * d_, d_};
  }
  /// All columns back to back, n * d entries.
  std::span<const std::uint32_t> flat() const { return columns_; }

  /// Number of left neighbours of every right node.
  std::vector<std::size_t> right_degrees() const;

  bool operator==(const ExpanderGraph&) const = default;

 private:
  std::size_t n_;
  std::size_t m_;
  std::size_t d_;
  std::vector<std::uint32_t> columns_;
};

/// Independent uniform d-subset of [0, m) per column. Deterministic in
/// (params, seed).
ExpanderGraph generate_graph(const ExpanderParams& params, std::uint64_t seed);

/// Size of N(S) for a set of left nodes.
std::size_t neighbourhood_size(const ExpanderGraph& g, std::span<const std::uint32_t> subset);

enum class VerifyMode { exact, sampled };

std::string to_string(VerifyMode mode);
VerifyMode verify_mode_from_string(const std::string& s);

struct ExpansionWitness {
  std::vector<std::uint32_t> subset;
  std::size_t neighbours = 0;

  bool operator==(const ExpansionWitness&) const = default;
};

/// Outcome of an expansion check.
///
/// An exact pass proves the graph is a (k, epsilon)-expander. A sampled pass
/// only says no counterexample was drawn; `is_proof()` tells them apart.
struct ExpansionCertificate {
  VerifyMode mode = VerifyMode::exact;
  std::size_t k = 0;
  double epsilon = 0.0;
  bool pass = false;
  std::optional<ExpansionWitness> witness;
  std::uint64_t subsets_checked = 0;

  bool is_proof() const { return mode == VerifyMode::exact && pass; }
  bool operator==(const ExpansionCertificate&) const = default;
};

/// Checks |N(S)| > (1 - epsilon) d |S| for subsets with |S| <= k.
///
/// Exact mode enumerates every subset of size 1..k in size-major
/// lexicographic order and reports the first violation; it throws
/// CapacityError when sum_{s<=k} C(n, s) exceeds `budget`. Sampled mode draws
/// `budget` uniform subsets of every size 1..k from per-sample streams of
/// `seed`. In both modes `subsets_checked` counts subsets up to and including
/// the witness, or all of them on a pass.
ExpansionCertificate verify_expansion(const ExpanderGraph& g, std::size_t k, double epsilon,
                                      VerifyMode mode, std::uint64_t budget, std::uint64_t seed);

/// sum_{s=1..k} C(n, s), saturating at UINT64_MAX.
std::uint64_t subsets_up_to(std::size_t n, std::size_t k);

/// min over nonempty |S| <= k of |N(S)| / (d |S|), by exhaustive enumeration.
/// The graph is a (k, eps)-expander exactly when eps > 1 - ratio.
double min_expansion_ratio(const ExpanderGraph& g, std::size_t k, std::uint64_t budget);

/// Left-node set whose neighbourhood is every right node.
struct CoverSet {
  std::vector<std::uint32_t> indices;  ///< sorted ascending
  std::vector<double> indicator;       ///< 0/1, length n

  std::size_t size() const { return indices.size(); }
};

/// Greedy set cover: repeatedly take the left node covering the most
/// uncovered right nodes, lowest index first on ties. Throws
/// UncoverableError naming the first isolated right node.
CoverSet cover_set(const ExpanderGraph& g);

/// True when every right node has a neighbour in the cover and |cover| <= m.
bool is_valid_cover(const ExpanderGraph& g, const CoverSet& cover);

/// Collision-edge bookkeeping from the lower-bound proof of RIP-1.
///
/// Left nodes are visited in order of non-increasing |x_i| (index ascending
/// on ties). An edge (i, j) is a collision edge when an earlier node already
/// touched right node j. prefix_counts[p] is the number of collision edges
/// among the first p + 1 visited nodes.
struct CollisionAnalysis {
  std::vector<std::uint32_t> permutation;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> collision_edges;  ///< (left, right)
  std::vector<std::size_t> prefix_counts;
  double collision_weight = 0.0;  ///< sum over collision edges of |x_left|

  /// prefix_counts[p - 1] <= epsilon d p for every p <= k.
  bool respects_expansion(std::size_t k, double epsilon, std::size_t d) const;
};

CollisionAnalysis collision_analysis(const ExpanderGraph& g, std::span<const double> x);

/// (1 - 2 eps) d ||x||_1 <= ||A x||_1 <= d ||x||_1.
///
/// The lower bound is only claimed for k-sparse x; for denser x it is still
/// computed but marked inapplicable and left out of `pass`.
struct Rip1Report {
  double lower = 0.0;
  double middle = 0.0;
  double upper = 0.0;
  bool lower_applicable = true;
  bool pass = false;
};

Rip1Report rip1_check(const ExpanderGraph& g, std::span<const double> x, std::size_t k,
                      double epsilon);

/// ".exg" text format: "n m d" then one line of d sorted indices per column.
void write_graph(std::ostream& out, const ExpanderGraph& g);
ExpanderGraph read_graph(std::istream& in);
void save_graph(const std::string& path, const ExpanderGraph& g);
ExpanderGraph load_graph(const std::string& path);

std::string certificate_json(const ExpansionCertificate& cert);

}  // namespace expcs
