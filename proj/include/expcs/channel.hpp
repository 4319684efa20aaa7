#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "expcs/expander.hpp"
#include "expcs/rng.hpp"

namespace expcs {

/// Nonnegative intensities: signals (length n) and measurement means (length m).
using Signal = std::vector<double>;
/// Photon or packet counts, length m.
using Counts = std::vector<std::uint64_t>;

/// Normalised sensing operator Phi = A / d.
///
/// Keeps the graph's column lists plus a row-major copy so both Phi x and
/// Phi^T r are computed as gathers with a fixed summation order.
class SensingMatrix {
 public:
  explicit SensingMatrix(ExpanderGraph graph);

  const ExpanderGraph& graph() const { return graph_; }
  std::size_t n() const { return graph_.n(); }
  std::size_t m() const { return graph_.m(); }
  std::size_t d() const { return graph_.d(); }
  double scale() const { return 1.0 / static_cast<double>(graph_.d()); }

  std::vector<double> apply(std::span<const double> x) const;
  void apply(std::span<const double> x, std::span<double> out) const;

  std::vector<double> apply_adjoint(std::span<const double> r) const;
  void apply_adjoint(std::span<const double> r, std::span<double> out) const;

 private:
  ExpanderGraph graph_;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> row_idx_;
};

/// One Poisson variate. Sequential inversion below mean 30, Hormann's
/// transformed rejection (PTRS) above.
std::uint64_t poisson_draw(Rng& rng, double mean);

/// Independent draws; coordinate j uses stream (seed, j).
Counts sample_poisson(std::span<const double> means, std::uint64_t seed);

/// sum_j means_j - y_j ln(means_j), with 0 ln 0 = 0. Returns +inf when some
/// y_j > 0 has means_j = 0.
double neg_log_likelihood(std::span<const double> means, std::span<const std::uint64_t> y);

/// KL(Poisson(g) || Poisson(h)) = sum_j g_j ln(g_j / h_j) + h_j - g_j.
/// Returns +inf when some g_j > 0 has h_j = 0.
double poisson_kl(std::span<const double> g, std::span<const double> h);

/// sum_j (sqrt(g_j) - sqrt(h_j))^2, which equals
/// -2 ln sum_y sqrt(p(y | g) p(y | h)) for independent Poisson coordinates.
double hellinger_affinity_term(std::span<const double> g, std::span<const double> h);

double l1_norm(std::span<const double> x);
double l1_distance(std::span<const double> a, std::span<const double> b);

}  // namespace expcs
