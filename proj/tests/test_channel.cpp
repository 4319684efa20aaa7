#include <doctest.h>

#include <cmath>
#include <limits>

#include "expcs/channel.hpp"
#include "expcs/error.hpp"
#include "expcs/reference.hpp"
#include "oracles.hpp"

using namespace expcs;

namespace {

std::vector<double> random_nonneg(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform() * 10.0;
  return v;
}

}  // namespace

TEST_CASE("apply examples") {
  const SensingMatrix phi(generate_graph({20, 12, 3, 0.25, 1}, 4));
  CHECK(phi.apply(std::vector<double>(20, 0.0)) == std::vector<double>(12, 0.0));

  std::vector<double> e(20, 0.0);
  e[6] = 1.0;
  const auto y = phi.apply(e);
  const auto col = phi.graph().column(6);
  for (std::size_t j = 0; j < 12; ++j) {
    const bool hit = std::find(col.begin(), col.end(), j) != col.end();
    CHECK(y[j] == (hit ? 1.0 / 3.0 : 0.0));
  }
  CHECK(oracle::l1(y) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("apply and its adjoint match dense products") {
  Rng rng(1);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SensingMatrix phi(generate_graph({30, 12, 4, 0.25, 1}, seed));
    const auto x = random_nonneg(rng, 30);
    const auto y = phi.apply(x);
    const auto oracle_y = oracle::dense_apply(phi.graph(), x, 4.0);
    for (std::size_t j = 0; j < 12; ++j) CHECK(y[j] == doctest::Approx(oracle_y[j]).epsilon(1e-14));
    CHECK(oracle::l1(y) <= oracle::l1(x) * (1.0 + 1e-14));
    CHECK(oracle::l1(y) == doctest::Approx(oracle::l1(x)).epsilon(1e-13));

    // <Phi x, r> = <x, Phi^T r>
    const auto r = random_nonneg(rng, 12);
    const auto at = phi.apply_adjoint(r);
    long double lhs = 0.0L, rhs = 0.0L;
    for (std::size_t j = 0; j < 12; ++j) lhs += static_cast<long double>(y[j]) * r[j];
    for (std::size_t i = 0; i < 30; ++i) rhs += static_cast<long double>(x[i]) * at[i];
    CHECK(static_cast<double>(lhs) == doctest::Approx(static_cast<double>(rhs)).epsilon(1e-13));
  }
}

TEST_CASE("apply is linear to 1e-12") {
  Rng rng(2);
  const SensingMatrix phi(generate_graph({200, 80, 8, 0.25, 1}, 3));
  for (int t = 0; t < 20; ++t) {
    const auto x = random_nonneg(rng, 200);
    const auto z = random_nonneg(rng, 200);
    const double a = rng.uniform() * 3.0, b = rng.uniform() * 3.0;
    std::vector<double> comb(200);
    for (std::size_t i = 0; i < 200; ++i) comb[i] = a * x[i] + b * z[i];
    const auto lhs = phi.apply(comb);
    const auto px = phi.apply(x), pz = phi.apply(z);
    for (std::size_t j = 0; j < 80; ++j) {
      const double rhs = a * px[j] + b * pz[j];
      CHECK(std::abs(lhs[j] - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST_CASE("parallel gathers equal the serial scatter references") {
  // Large enough to cross the parallel threshold.
  Rng rng(3);
  const SensingMatrix phi(generate_graph({20000, 8000, 8, 0.25, 1}, 5));
  const auto x = random_nonneg(rng, 20000);
  const auto r = random_nonneg(rng, 8000);
  const auto y = phi.apply(x);
  const auto y_ref = reference::apply(phi.graph(), x);
  const auto a = phi.apply_adjoint(r);
  const auto a_ref = reference::apply_adjoint(phi.graph(), r);
  for (std::size_t j = 0; j < y.size(); ++j) REQUIRE(y[j] == doctest::Approx(y_ref[j]).epsilon(1e-14));
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == doctest::Approx(a_ref[i]).epsilon(1e-14));
  CHECK(phi.apply(x) == y);  // repeatable bit for bit
}

TEST_CASE("dimension mismatches throw") {
  const SensingMatrix phi(generate_graph({20, 12, 3, 0.25, 1}, 4));
  CHECK_THROWS_AS(phi.apply(std::vector<double>(19, 0.0)), DimensionError);
  CHECK_THROWS_AS(phi.apply_adjoint(std::vector<double>(20, 0.0)), DimensionError);
  CHECK_THROWS_AS(neg_log_likelihood(std::vector<double>(2, 1.0), std::vector<std::uint64_t>(3, 0)),
                  DimensionError);
}

TEST_CASE("zero means give zero counts") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    CHECK(sample_poisson(std::vector<double>(5, 0.0), seed) == std::vector<std::uint64_t>(5, 0));
  }
}

TEST_CASE("sampling is deterministic and rejects bad means") {
  const std::vector<double> means{0.5, 3.0, 40.0, 1e4};
  CHECK(sample_poisson(means, 9) == sample_poisson(means, 9));
  CHECK_FALSE(sample_poisson(means, 9) == sample_poisson(means, 10));
  CHECK_THROWS_AS(sample_poisson(std::vector<double>{-1.0}, 1), DomainError);
  CHECK_THROWS_AS(sample_poisson(std::vector<double>{NAN}, 1), DomainError);
  CHECK_THROWS_AS(sample_poisson(std::vector<double>{INFINITY}, 1), DomainError);
}

TEST_CASE("Poisson moments within 5 standard errors") {
  // For Poisson(mu): the mean has SE sqrt(mu/N); the sample variance has
  // SE sqrt((mu + 2 mu^2) / N) using the fourth central moment mu + 3 mu^2.
  for (double mu : {0.5, 5.0, 29.9, 30.0, 50.0, 1e4}) {
    const std::size_t n = 100000;
    Rng rng(static_cast<std::uint64_t>(mu * 1000));
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = static_cast<double>(poisson_draw(rng, mu));
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / n;
    const double var = (sum2 - n * mean * mean) / (n - 1);
    CAPTURE(mu);
    CHECK(std::abs(mean - mu) < 5.0 * std::sqrt(mu / n));
    CHECK(std::abs(var - mu) < 5.0 * std::sqrt((mu + 2.0 * mu * mu) / n));
  }
}

TEST_CASE("Poisson pmf matches at small counts (chi-square)") {
  for (double mu : {2.0, 45.0}) {
    const std::size_t n = 200000;
    Rng rng(77);
    const int lo = mu < 10 ? 0 : static_cast<int>(mu - 3 * std::sqrt(mu));
    const int hi = mu < 10 ? 8 : static_cast<int>(mu + 3 * std::sqrt(mu));
    std::vector<double> counts(hi - lo + 1, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      const auto v = static_cast<int>(poisson_draw(rng, mu));
      if (v >= lo && v <= hi) counts[v - lo] += 1.0;
    }
    double chi2 = 0.0;
    for (int y = lo; y <= hi; ++y) {
      const double expect = n * std::exp(oracle::log_pmf(y, mu));
      chi2 += (counts[y - lo] - expect) * (counts[y - lo] - expect) / expect;
    }
    // bins - 1 dof (at most 40); 0.999 quantile for 40 dof is 73.4
    CAPTURE(mu);
    CHECK(chi2 < 73.4);
  }
}

TEST_CASE("Poisson at mean 10000 stays within 3 sigma of the mean over 10000 draws") {
  const auto y = sample_poisson(std::vector<double>(10000, 1e4), 21);
  double sum = 0.0;
  for (auto v : y) sum += static_cast<double>(v);
  CHECK(std::abs(sum / 10000.0 - 1e4) < 3.0 * std::sqrt(1e4 / 1e4));
}

TEST_CASE("negative log-likelihood examples") {
  const std::vector<double> means{1.0, 2.0};
  CHECK(neg_log_likelihood(means, std::vector<std::uint64_t>{1, 3}) ==
        doctest::Approx(3.0 - 3.0 * std::log(2.0)));
  CHECK(neg_log_likelihood(means, std::vector<std::uint64_t>{1, 3}) == doctest::Approx(0.920558).epsilon(1e-6));
  CHECK(neg_log_likelihood(means, std::vector<std::uint64_t>{0, 0}) == 3.0);
  CHECK(neg_log_likelihood(std::vector<double>{0.0, 2.0}, std::vector<std::uint64_t>{0, 1}) ==
        doctest::Approx(2.0 - std::log(2.0)));
  CHECK(std::isinf(neg_log_likelihood(std::vector<double>{0.0}, std::vector<std::uint64_t>{1})));
}

TEST_CASE("KL examples and pmf-sum oracle") {
  CHECK(poisson_kl(std::vector<double>{3.0, 0.5}, std::vector<double>{3.0, 0.5}) == 0.0);
  CHECK(poisson_kl(std::vector<double>{1.0}, std::vector<double>{std::exp(1.0)}) ==
        doctest::Approx(std::exp(1.0) - 2.0));
  CHECK(poisson_kl(std::vector<double>{1.0}, std::vector<double>{std::exp(1.0)}) ==
        doctest::Approx(0.718282).epsilon(1e-6));
  CHECK(poisson_kl(std::vector<double>{0.0}, std::vector<double>{2.5}) == 2.5);
  CHECK(std::isinf(poisson_kl(std::vector<double>{1.0}, std::vector<double>{0.0})));

  const std::vector<double> grid{0.1, 0.7, 2.0, 9.0, 40.0};
  for (double g : grid) {
    for (double h : grid) {
      const double kl = poisson_kl(std::vector<double>{g}, std::vector<double>{h});
      CHECK(kl >= 0.0);
      CHECK(kl == doctest::Approx(oracle::kl_by_sum(g, h)).epsilon(1e-9));
      // KL dominates the Hellinger term, which is its Renyi-1/2 counterpart
      CHECK(kl + 1e-12 >= hellinger_affinity_term(std::vector<double>{g}, std::vector<double>{h}));
    }
  }
}

TEST_CASE("Hellinger term examples and pmf-sum oracle") {
  CHECK(hellinger_affinity_term(std::vector<double>{2.0}, std::vector<double>{2.0}) == 0.0);
  CHECK(hellinger_affinity_term(std::vector<double>{1.0}, std::vector<double>{4.0}) == 1.0);
  CHECK(hellinger_affinity_term(std::vector<double>{1.0, 4.0}, std::vector<double>{4.0, 1.0}) == 2.0);
  CHECK(oracle::bhattacharyya_term(1.0, 4.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(hellinger_affinity_term(std::vector<double>{-1.0}, std::vector<double>{1.0}),
                  DomainError);
  for (double g : {0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0}) {
    for (double h : {0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0}) {
      if (g == h) continue;
      const double closed = hellinger_affinity_term(std::vector<double>{g}, std::vector<double>{h});
      CHECK(std::abs(closed - oracle::bhattacharyya_term(g, h)) / closed < 1e-6);
    }
  }
}

TEST_CASE("l1 helpers") {
  CHECK(l1_norm(std::vector<double>{1.0, -2.0, 0.5}) == 3.5);
  CHECK(l1_distance(std::vector<double>{1.0, 2.0}, std::vector<double>{0.0, 4.0}) == 3.0);
  CHECK_THROWS_AS(l1_distance(std::vector<double>{1.0}, std::vector<double>{0.0, 4.0}),
                  DimensionError);
}
