#include "expcs/reference.hpp"

#include <cmath>

#include "expcs/error.hpp"

namespace expcs::reference {

std::vector<double> apply(const ExpanderGraph& g, std::span<const double> x) {
  if (x.size() != g.n()) throw DimensionError("signal length does not match n");
  std::vector<double> out(g.m(), 0.0);
  for (std::size_t i = 0; i < g.n(); ++i) {
    for (auto j : g.column(i)) out[j] += x[i];
  }
  const double scale = 1.0 / static_cast<double>(g.d());
  for (double& v : out) v *= scale;
  return out;
}

std::vector<double> apply_adjoint(const ExpanderGraph& g, std::span<const double> r) {
  if (r.size() != g.m()) throw DimensionError("residual length does not match m");
  std::vector<std::vector<std::uint32_t>> rows(g.m());
  for (std::uint32_t i = 0; i < g.n(); ++i) {
    for (auto j : g.column(i)) rows[j].push_back(i);
  }
  std::vector<double> out(g.n(), 0.0);
  for (std::size_t j = 0; j < g.m(); ++j) {
    for (auto i : rows[j]) out[i] += r[j];
  }
  const double scale = 1.0 / static_cast<double>(g.d());
  for (double& v : out) v *= scale;
  return out;
}

ExpansionCertificate verify_expansion_exact(const ExpanderGraph& g, std::size_t k,
                                            double epsilon, std::uint64_t budget) {
  const std::size_t n = g.n();
  const std::size_t kmax = std::min(k, n);
  const std::uint64_t total = subsets_up_to(n, kmax);
  if (total > budget) throw CapacityError("subset enumeration exceeds budget");
  ExpansionCertificate cert{VerifyMode::exact, k, epsilon, true, std::nullopt, 0};
  for (std::size_t s = 1; s <= kmax; ++s) {
    const double threshold = (1.0 - epsilon) * static_cast<double>(g.d() * s);
    std::vector<std::uint32_t> combo(s);
    for (std::size_t t = 0; t < s; ++t) combo[t] = static_cast<std::uint32_t>(t);
    while (true) {
      ++cert.subsets_checked;
      const auto nb = neighbourhood_size(g, combo);
      if (static_cast<double>(nb) <= threshold) {
        cert.pass = false;
        cert.witness = ExpansionWitness{combo, nb};
        return cert;
      }
      std::size_t t = s;
      while (t > 0 && combo[t - 1] == n - s + t - 1) --t;
      if (t == 0) break;
      ++combo[t - 1];
      for (std::size_t u = t; u < s; ++u) combo[u] = combo[u - 1] + 1;
    }
  }
  return cert;
}

double kraft_sum_support_code(std::size_t n, unsigned bits) {
  const double log_2n = std::log(2.0 * static_cast<double>(n));
  double total = 0.0;
  double binom = 1.0;
  for (std::size_t s = 0; s <= n; ++s) {
    const double pen = static_cast<double>(s + 1) * log_2n +
                       static_cast<double>(s) * bits * std::log(2.0);
    total += binom * std::pow(2.0, static_cast<double>(bits * s)) * std::exp(-pen);
    binom = binom * static_cast<double>(n - s) / static_cast<double>(s + 1);
  }
  return total;
}

}  // namespace expcs::reference
