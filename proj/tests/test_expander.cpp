#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "expcs/error.hpp"
#include "expcs/expander.hpp"
#include "expcs/reference.hpp"
#include "expcs/rng.hpp"
#include "oracles.hpp"

using namespace expcs;

namespace {

ExpanderGraph from_columns(std::size_t m, std::vector<std::vector<std::uint32_t>> cols) {
  std::vector<std::uint32_t> flat;
  for (const auto& c : cols) flat.insert(flat.end(), c.begin(), c.end());
  return ExpanderGraph(cols.size(), m, cols.front().size(), flat);
}

// First violating subset in size-major lexicographic order for k <= 2,
// found by plain nested loops.
std::optional<std::vector<std::uint32_t>> first_violation_k2(const ExpanderGraph& g, double eps) {
  const double d = static_cast<double>(g.d());
  for (std::uint32_t i = 0; i < g.n(); ++i) {
    if (!(std::popcount(oracle::column_mask(g, i)) > (1.0 - eps) * d)) {
      return std::vector<std::uint32_t>{i};
    }
  }
  for (std::uint32_t i = 0; i < g.n(); ++i) {
    for (std::uint32_t j = i + 1; j < g.n(); ++j) {
      const auto mask = oracle::column_mask(g, i) | oracle::column_mask(g, j);
      if (!(std::popcount(mask) > (1.0 - eps) * d * 2.0)) return std::vector<std::uint32_t>{i, j};
    }
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("generated columns have d distinct sorted entries") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto g = generate_graph({6, 4, 2, 0.25, 1}, seed);
    REQUIRE(g.n() == 6);
    for (std::size_t i = 0; i < g.n(); ++i) {
      const auto c = g.column(i);
      REQUIRE(c.size() == 2);
      CHECK(c[0] < c[1]);
      CHECK(c[1] < 4);
    }
  }
}

TEST_CASE("generation is deterministic in the seed") {
  const ExpanderParams p{20, 12, 3, 0.25, 1};
  CHECK(generate_graph(p, 7) == generate_graph(p, 7));
  CHECK_FALSE(generate_graph(p, 7) == generate_graph(p, 8));
}

TEST_CASE("each right node lands in a column with probability d/m") {
  const ExpanderParams p{10, 8, 3, 0.25, 1};
  std::vector<int> hits(8, 0);
  const int graphs = 8000;
  for (int s = 0; s < graphs; ++s) {
    const auto g = generate_graph(p, s);
    for (auto j : g.column(0)) ++hits[j];
  }
  const double prob = 3.0 / 8.0;
  const double sd = std::sqrt(graphs * prob * (1 - prob));
  for (int h : hits) CHECK(std::abs(h - graphs * prob) < 5.0 * sd);
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(generate_graph({10, 4, 5, 0.25, 1}, 0), ParameterError);   // d > m
  CHECK_THROWS_AS(generate_graph({10, 10, 2, 0.25, 1}, 0), ParameterError);  // m >= n
  CHECK_THROWS_AS(generate_graph({10, 4, 2, 0.5, 1}, 0), ParameterError);    // eps
  CHECK_THROWS_AS(generate_graph({10, 4, 2, 0.0, 1}, 0), ParameterError);
  CHECK_THROWS_AS(generate_graph({10, 4, 2, 0.25, 6}, 0), ParameterError);   // k > n/2
  CHECK_THROWS_AS(generate_graph({10, 4, 2, 0.25, 0}, 0), ParameterError);
  CHECK_THROWS_AS(generate_graph({10, 0, 0, 0.25, 1}, 0), ParameterError);
}

TEST_CASE("constructor canonicalises and validates columns") {
  const ExpanderGraph a(2, 4, 2, {3, 1, 0, 2});
  const ExpanderGraph b(2, 4, 2, {1, 3, 0, 2});
  CHECK(a == b);
  CHECK(a.column(0)[0] == 1);
  CHECK_THROWS_AS(ExpanderGraph(2, 4, 2, {1, 1, 0, 2}), ParameterError);
  CHECK_THROWS_AS(ExpanderGraph(2, 4, 2, {1, 4, 0, 2}), ParameterError);
  CHECK_THROWS_AS(ExpanderGraph(2, 4, 2, {1, 2, 0}), DimensionError);
  // identical columns on different left nodes are allowed
  CHECK_NOTHROW(ExpanderGraph(2, 4, 2, {0, 1, 0, 1}));
}

TEST_CASE("identical neighbour pair fails with that witness") {
  const auto g = from_columns(4, {{0, 1}, {0, 1}, {2, 3}});
  for (double eps : {0.05, 0.25, 0.49}) {
    const auto cert = verify_expansion(g, 2, eps, VerifyMode::exact, 1000, 0);
    CHECK_FALSE(cert.pass);
    REQUIRE(cert.witness);
    CHECK(cert.witness->subset == std::vector<std::uint32_t>{0, 1});
    CHECK(cert.witness->neighbours == 2);
    // 3 singletons, then {0,1} is the first pair
    CHECK(cert.subsets_checked == 4);
    CHECK_FALSE(cert.is_proof());
  }
}

TEST_CASE("pairwise disjoint columns pass for every epsilon") {
  const auto g = from_columns(6, {{0, 1}, {2, 3}, {4, 5}});
  for (double eps : {0.01, 0.1, 0.25, 0.4, 0.49}) {
    const auto cert = verify_expansion(g, 3, eps, VerifyMode::exact, 1000, 0);
    CHECK(cert.pass);
    CHECK(cert.is_proof());
    CHECK(cert.subsets_checked == 7);
    CHECK_FALSE(cert.witness);
  }
}

TEST_CASE("exact verdict and witness match brute force on random graphs") {
  const ExpanderParams p{16, 12, 4, 0.25, 2};
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto g = generate_graph(p, seed);
    for (double eps : {0.25, 5.0 / 16.0, 0.375, 0.45}) {
      const auto cert = verify_expansion(g, 2, eps, VerifyMode::exact, 1'000'000, 0);
      REQUIRE(cert.pass == oracle::expands(g, 2, eps));
      const auto first = first_violation_k2(g, eps);
      REQUIRE(cert.pass == !first.has_value());
      if (first) {
        REQUIRE(cert.witness);
        CHECK(cert.witness->subset == *first);
        CHECK(cert.witness->neighbours == neighbourhood_size(g, *first));
      }
      CHECK(cert == reference::verify_expansion_exact(g, 2, eps, 1'000'000));
    }
    CHECK(min_expansion_ratio(g, 2, 1'000'000) == doctest::Approx(oracle::min_ratio(g, 2)));
  }
}

TEST_CASE("parallel and serial exact verification agree at k = 3") {
  const ExpanderParams p{24, 16, 4, 0.25, 3};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = generate_graph(p, seed);
    for (double eps : {0.25, 0.4, 0.49}) {
      const auto cert = verify_expansion(g, 3, eps, VerifyMode::exact, 1'000'000, 0);
      CHECK(cert == reference::verify_expansion_exact(g, 3, eps, 1'000'000));
      CHECK(cert.pass == oracle::expands(g, 3, eps));
    }
  }
}

TEST_CASE("a (2, 5/16)-expander with n=16, m=12, d=4 is found within bounded retries") {
  // (2, 1/4) would need 16 four-subsets of 12 points pairwise sharing at most
  // one point, and at most 9 such subsets exist, so 5/16 is the smallest
  // grid slack that admits pairs sharing two right nodes.
  const ExpanderParams p{16, 12, 4, 5.0 / 16.0, 2};
  std::optional<ExpanderGraph> found;
  for (std::uint64_t seed = 0; seed < 100000 && !found; ++seed) {
    auto g = generate_graph(p, seed);
    if (verify_expansion(g, 2, 5.0 / 16.0, VerifyMode::exact, 1'000'000, 0).pass) found = g;
  }
  REQUIRE(found);
  CHECK(oracle::expands(*found, 2, 5.0 / 16.0));
  CHECK_FALSE(oracle::expands(*found, 2, 0.25));
}

TEST_CASE("exact mode refuses when the enumeration exceeds the budget") {
  const auto g = generate_graph({24, 16, 4, 0.25, 3}, 1);
  CHECK(subsets_up_to(24, 3) == 24 + 276 + 2024);
  CHECK_THROWS_AS(verify_expansion(g, 3, 0.25, VerifyMode::exact, 2323, 0), CapacityError);
  CHECK_NOTHROW(verify_expansion(g, 3, 0.25, VerifyMode::exact, 2324, 0));
  CHECK(subsets_up_to(100000, 40) == UINT64_MAX);
}

TEST_CASE("sampled mode is never a proof") {
  const auto good = from_columns(6, {{0, 1}, {2, 3}, {4, 5}});
  const auto cert = verify_expansion(good, 2, 0.25, VerifyMode::sampled, 50, 3);
  CHECK(cert.pass);
  CHECK_FALSE(cert.is_proof());
  CHECK(cert.subsets_checked == 100);

  const auto bad = from_columns(4, {{0, 1}, {0, 1}});
  const auto fail = verify_expansion(bad, 2, 0.25, VerifyMode::sampled, 50, 3);
  CHECK_FALSE(fail.pass);
  REQUIRE(fail.witness);
  CHECK(fail.witness->subset == std::vector<std::uint32_t>{0, 1});
  CHECK(fail.subsets_checked == 51);

  CHECK(verify_expansion(bad, 2, 0.25, VerifyMode::sampled, 50, 3) == fail);
  CHECK_THROWS_AS(verify_expansion(bad, 2, 0.25, VerifyMode::sampled, 0, 3), ParameterError);
}

TEST_CASE("sampled verification agrees with exact on failing random graphs") {
  // With many samples per size, a failing 24-node graph should be caught.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = generate_graph({24, 16, 4, 0.25, 2}, seed);
    const auto exact = verify_expansion(g, 2, 0.2, VerifyMode::exact, 1'000'000, 0);
    const auto sampled = verify_expansion(g, 2, 0.2, VerifyMode::sampled, 20000, seed);
    if (sampled.pass) CHECK(exact.pass);
    if (!sampled.pass) {
      CHECK_FALSE(exact.pass);
      CHECK(static_cast<double>(sampled.witness->neighbours) <=
            0.8 * 4.0 * static_cast<double>(sampled.witness->subset.size()));
    }
  }
}

TEST_CASE("verify_expansion argument checks") {
  const auto g = from_columns(6, {{0, 1}, {2, 3}, {4, 5}});
  CHECK_THROWS_AS(verify_expansion(g, 0, 0.25, VerifyMode::exact, 100, 0), ParameterError);
  CHECK_THROWS_AS(verify_expansion(g, 1, 0.0, VerifyMode::exact, 100, 0), ParameterError);
  CHECK_THROWS_AS(verify_expansion(g, 1, 1.0, VerifyMode::exact, 100, 0), ParameterError);
  CHECK(verify_mode_from_string("sampled") == VerifyMode::sampled);
  CHECK_THROWS_AS(verify_mode_from_string("fast"), ParameterError);
}

TEST_CASE("certificate JSON carries every field") {
  const auto g = from_columns(4, {{0, 1}, {0, 1}, {2, 3}});
  const auto j = nlohmann::json::parse(
      certificate_json(verify_expansion(g, 2, 0.25, VerifyMode::exact, 100, 0)));
  CHECK(j.at("mode") == "exact");
  CHECK(j.at("k") == 2);
  CHECK(j.at("epsilon") == 0.25);
  CHECK(j.at("verdict") == "fail");
  CHECK(j.at("witness").at("subset") == nlohmann::json::array({0, 1}));
  CHECK(j.at("witness").at("neighbours") == 2);
  CHECK(j.at("subsets_checked") == 4);
  CHECK(j.at("proof") == false);
  const auto ok = nlohmann::json::parse(certificate_json(
      verify_expansion(from_columns(6, {{0, 1}, {2, 3}, {4, 5}}), 2, 0.25, VerifyMode::exact, 100, 0)));
  CHECK(ok.at("witness").is_null());
  CHECK(ok.at("proof") == true);
}

TEST_CASE("cover set examples") {
  SUBCASE("perfect matching needs every node") {
    const auto g = from_columns(5, {{0}, {1}, {2}, {3}, {4}});
    const auto c = cover_set(g);
    CHECK(c.indices == std::vector<std::uint32_t>{0, 1, 2, 3, 4});
    CHECK(c.size() == 5);
  }
  SUBCASE("a dominating node is picked alone") {
    const auto g = from_columns(4, {{0, 1, 2, 3}, {0, 1, 2, 3}});
    const auto c = cover_set(g);
    CHECK(c.indices == std::vector<std::uint32_t>{0});
    CHECK(c.indicator == std::vector<double>{1.0, 0.0});
  }
  SUBCASE("an isolated right node is named") {
    const auto g = from_columns(4, {{0}, {1}, {3}});
    try {
      (void)cover_set(g);
      FAIL("expected UncoverableError");
    } catch (const UncoverableError& e) {
      CHECK(std::string(e.what()).find("right node 2") != std::string::npos);
    }
  }
}

TEST_CASE("greedy cover matches an independent greedy and covers every right node") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto g = generate_graph({16, 12, 4, 0.25, 1}, seed);
    bool isolated = false;
    for (auto deg : g.right_degrees()) isolated = isolated || deg == 0;
    if (isolated) {
      CHECK_THROWS_AS(cover_set(g), UncoverableError);
      continue;
    }
    const auto c = cover_set(g);
    CHECK(is_valid_cover(g, c));
    CHECK(c.size() <= 12);
    std::uint64_t covered = 0;
    for (auto i : c.indices) covered |= oracle::column_mask(g, i);
    CHECK(covered == (std::uint64_t{1} << 12) - 1);

    // plain quadratic greedy
    std::set<std::uint32_t> chosen;
    std::uint64_t have = 0;
    while (have != (std::uint64_t{1} << 12) - 1) {
      int best_gain = -1;
      std::uint32_t best = 0;
      for (std::uint32_t i = 0; i < g.n(); ++i) {
        const int gain = std::popcount(oracle::column_mask(g, i) & ~have);
        if (gain > best_gain) {
          best_gain = gain;
          best = i;
        }
      }
      chosen.insert(best);
      have |= oracle::column_mask(g, best);
    }
    CHECK(std::vector<std::uint32_t>(chosen.begin(), chosen.end()) == c.indices);
  }
}

TEST_CASE("collision analysis examples") {
  const auto g = generate_graph({16, 12, 4, 0.25, 2}, 5);
  SUBCASE("one-sparse vector has no collisions") {
    std::vector<double> x(16, 0.0);
    x[7] = 3.0;
    const auto ca = collision_analysis(g, x);
    CHECK(ca.permutation[0] == 7);
    CHECK(ca.prefix_counts[0] == 0);
    CHECK(ca.collision_weight == 0.0);
  }
  SUBCASE("disjoint columns never collide") {
    const auto h = from_columns(6, {{0, 1}, {2, 3}, {4, 5}});
    const auto ca = collision_analysis(h, std::vector<double>{1.0, -2.0, 5.0});
    CHECK(ca.collision_edges.empty());
    CHECK(ca.collision_weight == 0.0);
    CHECK(ca.permutation == std::vector<std::uint32_t>{2, 1, 0});
  }
  SUBCASE("ties keep index order") {
    const auto h = from_columns(6, {{0, 1}, {2, 3}, {4, 5}});
    const auto ca = collision_analysis(h, std::vector<double>{-1.0, 1.0, 1.0});
    CHECK(ca.permutation == std::vector<std::uint32_t>{0, 1, 2});
  }
  CHECK_THROWS_AS(collision_analysis(g, std::vector<double>(3, 0.0)), DimensionError);
}

TEST_CASE("collision edges match the definition on random vectors") {
  Rng rng(17);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto g = generate_graph({16, 12, 4, 0.25, 2}, seed);
    std::vector<double> x(16);
    for (double& v : x) v = std::round(10.0 * (rng.uniform() - 0.5));
    const auto ca = collision_analysis(g, x);
    // recompute E2 from the definition with the returned order
    double weight = 0.0;
    std::size_t count = 0;
    for (std::size_t p = 0; p < g.n(); ++p) {
      const auto i = ca.permutation[p];
      if (p > 0) CHECK(std::abs(x[ca.permutation[p - 1]]) >= std::abs(x[i]));
      for (auto j : g.column(i)) {
        bool earlier = false;
        for (std::size_t q = 0; q < p; ++q) {
          const auto col = g.column(ca.permutation[q]);
          earlier = earlier || std::find(col.begin(), col.end(), j) != col.end();
        }
        if (earlier) {
          weight += std::abs(x[i]);
          ++count;
        }
      }
      CHECK(ca.prefix_counts[p] == count);
    }
    CHECK(ca.collision_edges.size() == count);
    CHECK(ca.collision_weight == doctest::Approx(weight));
  }
}

TEST_CASE("rip1 examples") {
  const auto g = generate_graph({16, 12, 4, 0.25, 2}, 2);
  std::vector<double> e(16, 0.0);
  e[4] = 1.0;
  auto r = rip1_check(g, e, 2, 0.25);
  CHECK(r.middle == 4.0);
  CHECK(r.upper == 4.0);
  CHECK(r.pass);

  r = rip1_check(g, std::vector<double>(16, 0.0), 2, 0.25);
  CHECK(r.lower == 0.0);
  CHECK(r.middle == 0.0);
  CHECK(r.upper == 0.0);
  CHECK(r.pass);

  std::vector<double> dense_x(16, 1.0);
  r = rip1_check(g, dense_x, 2, 0.25);
  CHECK_FALSE(r.lower_applicable);
  CHECK(r.middle == doctest::Approx(oracle::l1(oracle::dense_apply(g, dense_x))));
  CHECK(r.pass);
}

TEST_CASE("exact certificates imply the RIP-1 sandwich (chained property)") {
  Rng rng(23);
  int certified = 0;
  for (std::uint64_t seed = 0; seed < 100000 && certified < 5; ++seed) {
    const auto g = generate_graph({16, 12, 4, 0.375, 2}, seed);
    if (!verify_expansion(g, 2, 0.375, VerifyMode::exact, 1'000'000, 0).pass) continue;
    ++certified;
    for (int t = 0; t < 1000; ++t) {
      std::vector<double> x(16, 0.0);
      for (auto i : sample_without_replacement(rng, 16, 1 + static_cast<std::uint32_t>(rng.below(2)))) {
        x[i] = static_cast<double>(rng.between(-20, 20));
      }
      const auto r = rip1_check(g, x, 2, 0.375);
      REQUIRE(r.pass);
      CHECK(r.middle == doctest::Approx(oracle::l1(oracle::dense_apply(g, x))));
      const auto ca = collision_analysis(g, x);
      CHECK(ca.respects_expansion(2, 0.375, 4));
      CHECK(ca.collision_weight <= 0.375 * 4.0 * oracle::l1(x) + 1e-9);
    }
  }
  CHECK(certified == 5);
}

TEST_CASE("graph text round trip") {
  const auto g = generate_graph({20, 12, 3, 0.25, 1}, 9);
  std::ostringstream out;
  write_graph(out, g);
  std::istringstream in(out.str());
  CHECK(read_graph(in) == g);
  const auto path = (oracle::scratch("graph_io") / "g.exg").string();
  save_graph(path, g);
  CHECK(load_graph(path) == g);
  CHECK(out.str().substr(0, 8) == "20 12 3\n");
}

TEST_CASE("graph parser is strict") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_graph(in);
  };
  CHECK_NOTHROW(parse("2 3 2\n0 1\n1 2\n"));
  CHECK_THROWS_AS(parse("2 3\n0 1\n1 2\n"), ParseError);
  CHECK_THROWS_AS(parse("2 3 2\n1 0\n1 2\n"), ParseError);      // not ascending
  CHECK_THROWS_AS(parse("2 3 2\n0 0\n1 2\n"), ParseError);      // repeated
  CHECK_THROWS_AS(parse("2 3 2\n0 3\n1 2\n"), ParseError);      // out of range
  CHECK_THROWS_AS(parse("2 3 2\n0 1 2\n1 2\n"), ParseError);    // too many
  CHECK_THROWS_AS(parse("2 3 2\n0\n1 2\n"), ParseError);        // too few
  CHECK_THROWS_AS(parse("2 3 2\n0 1\n"), ParseError);           // missing column
  CHECK_THROWS_AS(parse("2 3 2\n0 1\n1 2\n0 1\n"), ParseError); // trailing
  CHECK_THROWS_AS(parse("2 3 2\n0 x\n1 2\n"), ParseError);
  CHECK_THROWS_AS(load_graph("/nonexistent/g.exg"), ParseError);
}
