#include "expcs/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "expcs/error.hpp"
#include "expcs/rng.hpp"

namespace expcs {

double BoundReport::context_value(const std::string& key) const {
  for (const auto& [k, v] : context) {
    if (k == key) return v;
  }
  throw std::out_of_range("no context entry '" + key + "'");
}

BoundReport make_report(std::string name, double lhs, double rhs,
                        std::vector<std::pair<std::string, double>> context, double allowance) {
  BoundReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = rhs - lhs + allowance;
  r.pass = r.slack >= -kBoundTolerance;
  r.context = std::move(context);
  return r;
}

std::string report_json(const BoundReport& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["slack"] = r.slack;
  j["pass"] = r.pass;
  auto ctx = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.context) ctx[k] = v;
  j["context"] = ctx;
  return j.dump();
}

SupportSplit support_split(std::span<const double> u, std::size_t k) {
  std::vector<std::uint32_t> order(u.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return std::abs(u[a]) > std::abs(u[b]);
  });
  const std::size_t head = std::min(k, u.size());
  SupportSplit out;
  out.support.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(head));
  out.complement.assign(order.begin() + static_cast<std::ptrdiff_t>(head), order.end());
  std::sort(out.support.begin(), out.support.end());
  std::sort(out.complement.begin(), out.complement.end());
  for (auto i : out.complement) out.tail_norm += std::abs(u[i]);
  return out;
}

BoundReport theorem1_bound(const ExpanderGraph& g, std::span<const double> u,
                           std::span<const double> v, std::size_t k, double epsilon,
                           double delta) {
  if (u.size() != g.n() || v.size() != g.n()) throw DimensionError("theorem1: length mismatch");
  if (!(epsilon > 0.0 && epsilon < 1.0 / 6.0)) {
    throw ParameterError("theorem1 needs 0 < epsilon < 1/6");
  }
  if (!(delta >= 0.0)) throw ParameterError("theorem1 needs delta >= 0");
  const double nu = l1_norm(u);
  const double nv = l1_norm(v);
  if (nu < nv - delta) throw PreconditionError("theorem1 needs ||u||_1 >= ||v||_1 - delta");

  std::vector<double> diff(g.n());
  for (std::size_t i = 0; i < g.n(); ++i) diff[i] = u[i] - v[i];
  std::vector<double> a_diff(g.m(), 0.0);
  for (std::size_t i = 0; i < g.n(); ++i) {
    if (diff[i] == 0.0) continue;
    for (auto j : g.column(i)) a_diff[j] += diff[i];
  }
  const double measured = l1_norm(a_diff);
  const double tail = support_split(u, k).tail_norm;
  const double d = static_cast<double>(g.d());
  const double lhs = l1_norm(diff);
  const double rhs = (1.0 - 2.0 * epsilon) / (1.0 - 6.0 * epsilon) * (2.0 * tail + delta) +
                     2.0 / (d * (1.0 - 6.0 * epsilon)) * measured;
  return make_report("theorem1", lhs, rhs,
                     {{"epsilon", epsilon}, {"d", d}, {"k", static_cast<double>(k)},
                      {"delta", delta}, {"tail_norm", tail}, {"measured_l1", measured}});
}

namespace {

void require_gamma_form(std::span<const double> means, double lambda, std::size_t d,
                        const char* who) {
  if (!(lambda > 0.0)) throw ParameterError(std::string(who) + ": lambda must be positive");
  const double floor = lambda / static_cast<double>(d);
  for (double b : means) {
    if (b < floor * (1.0 - 1e-12)) {
      throw PreconditionError(std::string(who) + ": Phi x must be >= lambda/d entrywise");
    }
  }
}

void require_nonnegative(std::span<const double> v, const char* who) {
  if (std::any_of(v.begin(), v.end(), [](double x) { return !(x >= 0.0); })) {
    throw DomainError(std::string(who) + ": entries must be nonnegative");
  }
}

}  // namespace

BoundReport lemma1_check(const SensingMatrix& phi, std::span<const double> alpha_star,
                         std::span<const double> x_hat, double lambda) {
  if (alpha_star.size() != phi.n() || x_hat.size() != phi.n()) {
    throw DimensionError("lemma1: length mismatch");
  }
  require_nonnegative(alpha_star, "lemma1");
  require_nonnegative(x_hat, "lemma1");
  if (l1_norm(alpha_star) > 1.0 + 1e-12) throw PreconditionError("lemma1 needs ||alpha||_1 <= 1");
  const auto beta_star = phi.apply(alpha_star);
  const auto beta_hat = phi.apply(x_hat);
  require_gamma_form(beta_hat, lambda, phi.d(), "lemma1");
  const double dist = l1_distance(beta_star, beta_hat);
  const double m = static_cast<double>(phi.m());
  const double d = static_cast<double>(phi.d());
  const double h = hellinger_affinity_term(beta_star, beta_hat);
  return make_report("lemma1", dist * dist, 2.0 * (2.0 + m * lambda / d) * h,
                     {{"lambda", lambda}, {"m", m}, {"d", d}, {"hellinger", h}});
}

BoundReport lemma3_kl_bound(const SensingMatrix& phi, std::span<const double> alpha_star,
                            std::span<const double> x, double lambda) {
  if (alpha_star.size() != phi.n() || x.size() != phi.n()) {
    throw DimensionError("lemma3: length mismatch");
  }
  require_nonnegative(alpha_star, "lemma3");
  require_nonnegative(x, "lemma3");
  const auto beta_star = phi.apply(alpha_star);
  const auto beta_x = phi.apply(x);
  require_gamma_form(beta_x, lambda, phi.d(), "lemma3");
  const double dist = l1_distance(alpha_star, x);
  const double d = static_cast<double>(phi.d());
  return make_report("lemma3", poisson_kl(beta_star, beta_x), d * dist * dist / lambda,
                     {{"lambda", lambda}, {"d", d}, {"l1_distance", dist}});
}

std::pair<BoundReport, BoundReport> gamma_band_check(const SensingMatrix& phi,
                                                     std::span<const double> f, double lambda,
                                                     const CoverSet& cover) {
  require_nonnegative(f, "gamma_band");
  const auto x = shift_to_gamma(f, lambda, cover);
  const double measured = l1_norm(phi.apply(x));
  const double floor = static_cast<double>(phi.m()) * lambda / static_cast<double>(phi.d());
  std::vector<std::pair<std::string, double>> ctx{
      {"lambda", lambda},
      {"m", static_cast<double>(phi.m())},
      {"d", static_cast<double>(phi.d())},
      {"cover_size", static_cast<double>(cover.size())}};
  return {make_report("gamma_band_lower", floor, measured, ctx),
          make_report("gamma_band_upper", measured, l1_norm(f) + floor, ctx)};
}

double affinity_by_pmf_sum(double g, double h) {
  if (!(g >= 0.0) || !(h >= 0.0)) throw DomainError("affinity: negative mean");
  if (g == 0.0 && h == 0.0) return 0.0;
  // sqrt(p(y|g) p(y|h)) = exp(y (ln g + ln h)/2 - (g + h)/2 - ln y!)
  if (g == 0.0 || h == 0.0) {
    // Only y = 0 contributes.
    return g + h;
  }
  const double half_log = 0.5 * (std::log(g) + std::log(h));
  const double half_sum = 0.5 * (g + h);
  const double top = std::max(g, h);
  const auto ymax = static_cast<std::uint64_t>(top + 40.0 * std::sqrt(top) + 100.0);
  long double total = 0.0L;
  for (std::uint64_t y = 0; y <= ymax; ++y) {
    const double yd = static_cast<double>(y);
    total += std::exp(static_cast<long double>(yd * half_log - half_sum - std::lgamma(yd + 1.0)));
  }
  return static_cast<double>(-2.0L * std::log(total));
}

namespace {

struct McSetup {
  std::vector<double> beta_star;
  std::vector<std::size_t> chosen;  // candidate index per trial
};

McSetup simulate_decoder(const SensingMatrix& phi, std::span<const double> alpha_star,
                         const CandidateSet& gamma, const Penalty& penalty, std::size_t trials,
                         std::uint64_t seed, const char* who) {
  if (alpha_star.size() != phi.n()) throw DimensionError(std::string(who) + ": length mismatch");
  require_nonnegative(alpha_star, who);
  if (gamma.size() > 64) throw PreconditionError(std::string(who) + ": |Gamma| must be <= 64");
  if (trials < 2) throw ParameterError(std::string(who) + ": need at least two trials");
  if (kraft_sum(penalty, gamma.members()) > 1.0 + 1e-12) {
    throw PreconditionError(std::string(who) + ": penalty violates the Kraft inequality");
  }
  McSetup s;
  s.beta_star = phi.apply(alpha_star);
  s.chosen.resize(trials);
  const auto count = static_cast<std::int64_t>(trials);
#pragma omp parallel for schedule(static)
  for (std::int64_t t = 0; t < count; ++t) {
    const std::uint64_t trial_seed = Rng::stream(seed, {static_cast<std::uint64_t>(t)})();
    const auto y = sample_poisson(s.beta_star, trial_seed);
    s.chosen[static_cast<std::size_t>(t)] = *solve_map(phi, y, gamma, penalty).candidate_index;
  }
  return s;
}

// Sample mean and standard error of the mean, summed in trial order.
std::pair<double, double> mean_and_se(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double var = ss / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

}  // namespace

BoundReport lemma2_oracle_mc(const SensingMatrix& phi, std::span<const double> alpha_star,
                             const CandidateSet& gamma, const Penalty& penalty,
                             std::size_t trials, std::uint64_t seed) {
  const auto sim = simulate_decoder(phi, alpha_star, gamma, penalty, trials, seed, "lemma2");
  std::vector<double> per_candidate(gamma.size());
  double rhs = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < gamma.size(); ++c) {
    const auto beta = phi.apply(gamma.member(c));
    per_candidate[c] = hellinger_affinity_term(sim.beta_star, beta);
    rhs = std::min(rhs, poisson_kl(sim.beta_star, beta) + 2.0 * penalty.value(gamma.member(c)));
  }
  std::vector<double> samples(trials);
  for (std::size_t t = 0; t < trials; ++t) samples[t] = per_candidate[sim.chosen[t]];
  const auto [mean, se] = mean_and_se(samples);
  return make_report("lemma2_mc", mean, rhs,
                     {{"trials", static_cast<double>(trials)},
                      {"se", se},
                      {"candidates", static_cast<double>(gamma.size())},
                      {"lambda", gamma.lambda()}},
                     3.0 * se);
}

BoundReport lemma4_measurement_bound_mc(const SensingMatrix& phi,
                                        std::span<const double> alpha_star,
                                        const CandidateSet& gamma, const Penalty& penalty,
                                        std::size_t trials, std::uint64_t seed) {
  const double m = static_cast<double>(phi.m());
  const double d = static_cast<double>(phi.d());
  const double lambda = gamma.lambda();
  if (m * lambda / d >= 1.0) {
    throw ParameterError("lemma4: needs m lambda / d < 1 (small-shift regime)");
  }
  const auto sim = simulate_decoder(phi, alpha_star, gamma, penalty, trials, seed, "lemma4");
  std::vector<double> per_candidate(gamma.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < gamma.size(); ++c) {
    const auto& x = gamma.member(c);
    per_candidate[c] = l1_distance(sim.beta_star, phi.apply(x));
    best = std::min(best, std::sqrt(d / lambda) * l1_distance(alpha_star, x) +
                              std::sqrt(2.0 * penalty.value(x)));
  }
  std::vector<double> samples(trials);
  for (std::size_t t = 0; t < trials; ++t) samples[t] = per_candidate[sim.chosen[t]];
  const auto [mean, se] = mean_and_se(samples);
  return make_report("lemma4_mc", mean, std::sqrt(6.0) * best,
                     {{"trials", static_cast<double>(trials)},
                      {"se", se},
                      {"lambda", lambda},
                      {"m", m},
                      {"d", d}},
                     3.0 * se);
}

BoundReport final_theorem_mc(const SensingMatrix& phi, std::span<const double> alpha_star,
                             const CandidateSet& gamma, const Penalty& penalty, std::size_t k,
                             std::size_t trials, std::uint64_t seed) {
  const double m = static_cast<double>(phi.m());
  const double d = static_cast<double>(phi.d());
  const double lambda = gamma.lambda();
  const auto sim = simulate_decoder(phi, alpha_star, gamma, penalty, trials, seed, "theorem");
  std::vector<double> per_candidate(gamma.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < gamma.size(); ++c) {
    const auto& f = gamma.theta(c);
    per_candidate[c] = l1_distance(alpha_star, f);
    best = std::min(best, std::sqrt(d / lambda) * (per_candidate[c] + lambda * m) +
                              std::sqrt(2.0 * penalty.value(gamma.member(c))));
  }
  const double tail = support_split(alpha_star, k).tail_norm;
  const double rhs = lambda * m + 4.0 * tail + 2.0 * lambda * m + 3.0 * std::sqrt(6.0) * best;
  std::vector<double> samples(trials);
  for (std::size_t t = 0; t < trials; ++t) samples[t] = per_candidate[sim.chosen[t]];
  const auto [mean, se] = mean_and_se(samples);
  return make_report("final_theorem_mc", mean, rhs,
                     {{"trials", static_cast<double>(trials)},
                      {"se", se},
                      {"lambda", lambda},
                      {"k", static_cast<double>(k)},
                      {"tail_norm", tail}},
                     3.0 * se);
}

double becca_order(std::span<const double> alpha_star, std::span<const Signal> theta,
                   const Penalty& penalty, std::size_t k, double c) {
  const std::size_t n = alpha_star.size();
  if (k == 0 || k >= n) throw ParameterError("becca_order needs 0 < k < n");
  if (theta.empty()) throw ParameterError("becca_order needs a nonempty candidate family");
  const double coeff =
      c * std::sqrt(static_cast<double>(k)) * std::log(static_cast<double>(n) / static_cast<double>(k));
  double best = std::numeric_limits<double>::infinity();
  for (const auto& f : theta) {
    if (f.size() != n) throw DimensionError("becca_order: candidate length mismatch");
    best = std::min(best, coeff * l1_distance(alpha_star, f) + std::sqrt(2.0 * penalty.value(f)));
  }
  return support_split(alpha_star, k).tail_norm + best;
}

}  // namespace expcs
