#include "expcs/channel.hpp"

#include <cmath>
#include <limits>

#include "expcs/error.hpp"
#include "expcs/kernels.hpp"

namespace expcs {

SensingMatrix::SensingMatrix(ExpanderGraph graph) : graph_(std::move(graph)) {
  const auto deg = graph_.right_degrees();
  row_ptr_.assign(graph_.m() + 1, 0);
  for (std::size_t j = 0; j < graph_.m(); ++j) row_ptr_[j + 1] = row_ptr_[j] + deg[j];
  row_idx_.resize(row_ptr_.back());
  std::vector<std::size_t> fill(row_ptr_.begin(), row_ptr_.end() - 1);
  for (std::uint32_t i = 0; i < graph_.n(); ++i) {
    for (auto j : graph_.column(i)) row_idx_[fill[j]++] = i;
  }
}

std::vector<double> SensingMatrix::apply(std::span<const double> x) const {
  std::vector<double> out(m());
  apply(x, out);
  return out;
}

void SensingMatrix::apply(std::span<const double> x, std::span<double> out) const {
  if (x.size() != n() || out.size() != m()) throw DimensionError("Phi x: dimension mismatch");
  kernels::gather_rows(row_ptr_, row_idx_, x, scale(), out);
}

std::vector<double> SensingMatrix::apply_adjoint(std::span<const double> r) const {
  std::vector<double> out(n());
  apply_adjoint(r, out);
  return out;
}

void SensingMatrix::apply_adjoint(std::span<const double> r, std::span<double> out) const {
  if (r.size() != m() || out.size() != n()) throw DimensionError("Phi^T r: dimension mismatch");
  kernels::gather_columns(graph_.flat(), d(), r, scale(), out);
}

namespace {

void check_mean(double mu) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    throw DomainError("Poisson mean must be finite and nonnegative");
  }
}

std::uint64_t poisson_inversion(Rng& rng, double mu) {
  const double u = rng.uniform();
  double p = std::exp(-mu);
  double cdf = p;
  std::uint64_t k = 0;
  // The tail beyond 1000 is below 1e-300 for mu < 30.
  while (u > cdf && k < 1000) {
    ++k;
    p *= mu / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

// W. Hormann, "The transformed rejection method for generating Poisson
// random variables", Insurance: Mathematics and Economics 12 (1993).
std::uint64_t poisson_ptrs(Rng& rng, double mu) {
  const double slam = std::sqrt(mu);
  const double loglam = std::log(mu);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  while (true) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mu + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    const double lhs = std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b);
    const double rhs = -mu + k * loglam - std::lgamma(k + 1.0);
    if (lhs <= rhs) return static_cast<std::uint64_t>(k);
  }
}

}  // namespace

std::uint64_t poisson_draw(Rng& rng, double mean) {
  check_mean(mean);
  if (mean == 0.0) return 0;
  return mean < 30.0 ? poisson_inversion(rng, mean) : poisson_ptrs(rng, mean);
}

Counts sample_poisson(std::span<const double> means, std::uint64_t seed) {
  for (double mu : means) check_mean(mu);
  Counts out(means.size());
  const auto m = static_cast<std::int64_t>(means.size());
#pragma omp parallel for schedule(static) if (means.size() >= kernels::kParallelThreshold)
  for (std::int64_t j = 0; j < m; ++j) {
    Rng rng = Rng::stream(seed, {static_cast<std::uint64_t>(j)});
    out[j] = poisson_draw(rng, means[j]);
  }
  return out;
}

double neg_log_likelihood(std::span<const double> means, std::span<const std::uint64_t> y) {
  if (means.size() != y.size()) throw DimensionError("means and counts differ in length");
  double total = 0.0;
  bool infinite = false;
  for (std::size_t j = 0; j < means.size(); ++j) {
    const double mu = means[j];
    if (!(mu >= 0.0) || !std::isfinite(mu)) throw DomainError("negative or non-finite mean");
    total += mu;
    if (y[j] == 0) continue;
    if (mu == 0.0) {
      infinite = true;
      continue;
    }
    total -= static_cast<double>(y[j]) * std::log(mu);
  }
  return infinite ? std::numeric_limits<double>::infinity() : total;
}

double poisson_kl(std::span<const double> g, std::span<const double> h) {
  if (g.size() != h.size()) throw DimensionError("KL: length mismatch");
  double total = 0.0;
  bool infinite = false;
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (!(g[j] >= 0.0) || !(h[j] >= 0.0)) throw DomainError("KL: negative intensity");
    if (g[j] == 0.0) {
      total += h[j];
    } else if (h[j] == 0.0) {
      infinite = true;
    } else {
      total += g[j] * std::log(g[j] / h[j]) + h[j] - g[j];
    }
  }
  return infinite ? std::numeric_limits<double>::infinity() : total;
}

double hellinger_affinity_term(std::span<const double> g, std::span<const double> h) {
  if (g.size() != h.size()) throw DimensionError("Hellinger: length mismatch");
  double total = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (!(g[j] >= 0.0) || !(h[j] >= 0.0)) throw DomainError("Hellinger: negative intensity");
    const double diff = std::sqrt(g[j]) - std::sqrt(h[j]);
    total += diff * diff;
  }
  return total;
}

double l1_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s;
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("l1 distance: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

}  // namespace expcs
