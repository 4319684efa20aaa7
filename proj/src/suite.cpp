#include "expcs/suite.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "expcs/error.hpp"
#include "expcs/rng.hpp"

namespace expcs {

namespace {

double grid_value(int j) { return static_cast<double>(j) / kEpsilonGrid; }

bool certifies(const ExpanderGraph& g, std::size_t k, double epsilon) {
  return verify_expansion(g, k, epsilon, VerifyMode::exact, kCertificateBudget, 0).pass;
}

// Largest grid index strictly below cap.
int grid_below(double cap) {
  int j = static_cast<int>(std::ceil(cap * kEpsilonGrid)) - 1;
  while (j > 0 && !(grid_value(j) < cap)) --j;
  return j;
}

Signal normalised(Signal v, double total) {
  const double s = l1_norm(v);
  for (double& x : v) x *= total / s;
  return v;
}

// Nonnegative vector with `support` random positive entries summing to `total`.
Signal random_simplex_point(Rng& rng, std::size_t n, std::size_t support, double total) {
  Signal v(n, 0.0);
  const auto idx = sample_without_replacement(rng, static_cast<std::uint32_t>(n),
                                              static_cast<std::uint32_t>(support));
  for (auto i : idx) v[i] = 0.05 + rng.uniform();
  return normalised(std::move(v), total);
}

double log_uniform(Rng& rng, double lo, double hi) {
  return std::exp(std::log(lo) + rng.uniform() * (std::log(hi) - std::log(lo)));
}

}  // namespace

std::optional<double> tightest_grid_epsilon(const ExpanderGraph& g, std::size_t k, double cap) {
  const double ratio = min_expansion_ratio(g, k, kCertificateBudget);
  const int top = grid_below(cap);
  int j = std::max(1, static_cast<int>(std::floor((1.0 - ratio) * kEpsilonGrid)));
  for (; j <= top; ++j) {
    if (certifies(g, k, grid_value(j))) return grid_value(j);
  }
  return std::nullopt;
}

std::optional<CertifiedGraph> certify(std::string label, ExpanderGraph g, std::size_t k,
                                      double cap) {
  const auto tight = tightest_grid_epsilon(g, k, cap);
  if (!tight) return std::nullopt;
  const double loose = grid_value(grid_below(cap));
  if (!certifies(g, k, loose)) return std::nullopt;
  return CertifiedGraph{std::move(label), std::move(g), k, *tight, loose};
}

std::optional<CertifiedGraph> find_certified_graph(const ExpanderParams& params, std::size_t k,
                                                   double cap, std::size_t max_retries,
                                                   std::uint64_t seed) {
  const std::string label = "random n=" + std::to_string(params.n) +
                            " m=" + std::to_string(params.m) + " d=" + std::to_string(params.d) +
                            " k=" + std::to_string(k);
  for (std::size_t attempt = 0; attempt < max_retries; ++attempt) {
    auto g = generate_graph(params, mix64(seed + attempt));
    if (auto c = certify(label, std::move(g), k, cap)) return c;
  }
  return std::nullopt;
}

ExpanderGraph affine_plane_graph(std::size_t n, std::uint64_t seed) {
  if (n == 0 || n > 20) throw ParameterError("the affine plane over GF(4) has 20 lines");
  static constexpr std::array<std::array<std::uint32_t, 4>, 4> mul{
      {{0, 0, 0, 0}, {0, 1, 2, 3}, {0, 2, 3, 1}, {0, 3, 1, 2}}};
  std::vector<std::array<std::uint32_t, 4>> lines;
  for (std::uint32_t slope = 0; slope < 4; ++slope) {
    for (std::uint32_t b = 0; b < 4; ++b) {
      std::array<std::uint32_t, 4> line{};
      for (std::uint32_t x = 0; x < 4; ++x) line[x] = 4 * x + (mul[slope][x] ^ b);
      lines.push_back(line);
    }
  }
  for (std::uint32_t c = 0; c < 4; ++c) lines.push_back({4 * c, 4 * c + 1, 4 * c + 2, 4 * c + 3});

  Rng rng(seed);
  const auto point_perm = sample_without_replacement(rng, 16, 16);  // sorted: reshuffle below
  std::vector<std::uint32_t> relabel(point_perm.begin(), point_perm.end());
  for (std::uint32_t i = 15; i > 0; --i) {
    std::swap(relabel[i], relabel[static_cast<std::uint32_t>(rng.below(i + 1))]);
  }
  std::vector<std::uint32_t> order(lines.size());
  std::iota(order.begin(), order.end(), 0u);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::swap(order[i], order[static_cast<std::size_t>(rng.below(i + 1))]);
  }
  std::vector<std::uint32_t> columns;
  for (std::size_t c = 0; c < n; ++c) {
    for (auto p : lines[order[c]]) columns.push_back(relabel[p]);
  }
  return ExpanderGraph(n, 16, 4, std::move(columns));
}

Signal random_sparse_integer_vector(Rng& rng, std::size_t n, std::size_t k) {
  const auto s = 1 + static_cast<std::size_t>(rng.below(std::min(k, n)));
  const auto idx =
      sample_without_replacement(rng, static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(s));
  const bool common = rng.below(5) == 0;
  const double shared = static_cast<double>(rng.between(1, 64));
  Signal x(n, 0.0);
  for (auto i : idx) {
    const double mag = common ? shared : static_cast<double>(rng.between(1, 64));
    x[i] = rng.below(2) ? mag : -mag;
  }
  return x;
}

void FamilyResult::add(const BoundReport& r) {
  if (trials == 0 || r.slack < worst.slack) worst = r;
  ++trials;
  if (!r.pass) ++violations;
}

std::string family_json(const FamilyResult& f) {
  nlohmann::ordered_json j;
  j["family"] = f.name;
  j["trials"] = f.trials;
  j["violations"] = f.violations;
  j["statistical"] = f.statistical;
  j["pass"] = f.pass();
  j["worst"] = nlohmann::ordered_json::parse(report_json(f.worst));
  return j.dump();
}

std::vector<CertifiedGraph> rip_graphs(std::uint64_t seed) {
  struct Shape {
    std::size_t n, m, d, k;
  };
  const std::array<Shape, 5> shapes{{{16, 12, 4, 2}, {20, 12, 3, 2}, {18, 12, 2, 2},
                                     {24, 16, 4, 2}, {24, 16, 4, 3}}};
  std::vector<CertifiedGraph> out;
  for (std::size_t s = 0; s < shapes.size(); ++s) {
    const auto& sh = shapes[s];
    ExpanderParams p{sh.n, sh.m, sh.d, 0.25, sh.k};
    auto c = find_certified_graph(p, sh.k, 0.5, 100000, mix64(seed + 101 * (s + 1)));
    if (!c) throw Error("no certified graph found for " + std::to_string(sh.n) + "x" +
                        std::to_string(sh.m));
    out.push_back(std::move(*c));
  }
  auto plane = certify("affine plane n=20 m=16 d=4 k=3", affine_plane_graph(20, seed), 3, 0.5);
  if (!plane) throw Error("affine plane graph failed to certify");
  out.push_back(std::move(*plane));
  return out;
}

std::vector<CertifiedGraph> theorem1_graphs(std::uint64_t seed) {
  std::vector<CertifiedGraph> out;
  const std::array<std::size_t, 3> sizes{17, 18, 20};
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    auto c = certify("affine plane n=" + std::to_string(sizes[s]) + " m=16 d=4 k=2",
                     affine_plane_graph(sizes[s], mix64(seed + s)), 2, 1.0 / 6.0);
    if (!c) throw Error("affine plane graph failed to certify below 1/6");
    out.push_back(std::move(*c));
  }
  return out;
}

FamilyResult rip1_family(std::span<const CertifiedGraph> graphs, std::size_t vectors_per_graph,
                         std::uint64_t seed) {
  FamilyResult fam;
  fam.name = "rip1";
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const auto& cg = graphs[gi];
    const std::array<double, 2> eps{cg.epsilon_tight, cg.epsilon_loose};
    for (std::size_t e = 0; e < eps.size(); ++e) {
      for (std::size_t t = 0; t < vectors_per_graph; ++t) {
        Rng rng = Rng::stream(seed, {gi, e, t});
        const auto x = random_sparse_integer_vector(rng, cg.graph.n(), cg.k);
        const auto r = rip1_check(cg.graph, x, cg.k, eps[e]);
        if (!r.lower_applicable) throw Error("rip1 family drew a non-sparse vector");
        const std::vector<std::pair<std::string, double>> ctx{
            {"graph", static_cast<double>(gi)},
            {"epsilon", eps[e]},
            {"d", static_cast<double>(cg.graph.d())},
            {"k", static_cast<double>(cg.k)}};
        fam.add(make_report("rip1_lower", r.lower, r.middle, ctx));
        fam.add(make_report("rip1_upper", r.middle, r.upper, ctx));
      }
    }
  }
  return fam;
}

FamilyResult collision_family(std::span<const CertifiedGraph> graphs,
                              std::size_t vectors_per_graph, std::uint64_t seed) {
  FamilyResult fam;
  fam.name = "collision";
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const auto& cg = graphs[gi];
    const std::array<double, 2> eps{cg.epsilon_tight, cg.epsilon_loose};
    const double d = static_cast<double>(cg.graph.d());
    for (std::size_t e = 0; e < eps.size(); ++e) {
      for (std::size_t t = 0; t < vectors_per_graph; ++t) {
        Rng rng = Rng::stream(seed, {gi, e, t});
        const auto x = random_sparse_integer_vector(rng, cg.graph.n(), cg.k);
        const auto ca = collision_analysis(cg.graph, x);
        const std::vector<std::pair<std::string, double>> ctx{
            {"graph", static_cast<double>(gi)}, {"epsilon", eps[e]}, {"d", d},
            {"k", static_cast<double>(cg.k)}};
        fam.add(make_report("collision_weight", ca.collision_weight, eps[e] * d * l1_norm(x), ctx));
        // Prefix counts against the expansion budget a_p <= eps d p.
        double worst_ratio = 0.0;
        for (std::size_t p = 1; p <= cg.k; ++p) {
          worst_ratio = std::max(worst_ratio, static_cast<double>(ca.prefix_counts[p - 1]) /
                                                  (d * static_cast<double>(p)));
        }
        fam.add(make_report("collision_prefix", worst_ratio, eps[e], ctx));
      }
    }
  }
  return fam;
}

FamilyResult theorem1_family(std::span<const CertifiedGraph> graphs,
                             std::size_t triples_per_graph, std::uint64_t seed) {
  FamilyResult fam;
  fam.name = "theorem1";
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const auto& cg = graphs[gi];
    const auto& g = cg.graph;
    const std::size_t n = g.n();
    const std::size_t head = std::max<std::size_t>(1, cg.k / 2);
    const std::array<double, 2> eps{cg.epsilon_tight, cg.epsilon_loose};
    for (std::size_t e = 0; e < eps.size(); ++e) {
      for (std::size_t t = 0; t < triples_per_graph; ++t) {
        Rng rng = Rng::stream(seed, {gi, e, t});
        Signal u(n, 0.0), v(n, 0.0);
        switch (t % 4) {
          case 0:  // dense pair
            for (std::size_t i = 0; i < n; ++i) {
              u[i] = 2.0 * rng.uniform() - 1.0;
              v[i] = 2.0 * rng.uniform() - 1.0;
            }
            break;
          case 1: {  // compressible u, v moves mass between two coordinates
            for (std::size_t i = 0; i < n; ++i) u[i] = 0.01 * (2.0 * rng.uniform() - 1.0);
            u[rng.below(n)] += 1.0 + rng.uniform();
            v = u;
            const auto a = rng.below(n);
            const auto b = (a + 1 + rng.below(n - 1)) % n;
            const double amount = 2.0 * rng.uniform();
            v[a] -= amount;
            v[b] += amount;
            break;
          }
          case 2: {  // head relocated onto a column sharing a right node
            const auto a = rng.below(n);
            u[a] = 1.0 + rng.uniform();
            std::size_t b = a;
            for (std::size_t c = 0; c < n && b == a; ++c) {
              if (c == a) continue;
              for (auto j : g.column(c)) {
                const auto col = g.column(a);
                if (std::find(col.begin(), col.end(), j) != col.end()) b = c;
              }
            }
            if (b == a) b = (a + 1) % n;
            v[b] = u[a];
            for (std::size_t i = 0; i < n; ++i) u[i] += 0.02 * (2.0 * rng.uniform() - 1.0);
            break;
          }
          default: {  // sparse u, rescaled v with small perturbation
            const auto x = random_sparse_integer_vector(rng, n, head);
            for (std::size_t i = 0; i < n; ++i) {
              u[i] = x[i];
              v[i] = (1.0 + 0.2 * rng.uniform()) * x[i] + (rng.below(4) == 0 ? rng.uniform() : 0.0);
            }
          }
        }
        const double delta = std::max(0.0, l1_norm(v) - l1_norm(u)) + 0.5 * rng.uniform();
        auto r = theorem1_bound(g, u, v, head, eps[e], delta);
        r.context.emplace_back("graph", static_cast<double>(gi));
        fam.add(r);
      }
    }
  }
  return fam;
}

FamilyResult hellinger_identity_family(std::span<const double> grid, double rel_tol) {
  FamilyResult fam;
  fam.name = "hellinger_identity";
  for (double g : grid) {
    for (double h : grid) {
      const std::array<double, 1> gv{g}, hv{h};
      const double closed = hellinger_affinity_term(gv, hv);
      const double oracle = affinity_by_pmf_sum(g, h);
      const double err = closed > 0.0 ? std::abs(closed - oracle) / closed : std::abs(oracle);
      fam.add(make_report("hellinger_identity", err, rel_tol,
                          {{"g", g}, {"h", h}, {"closed_form", closed}, {"pmf_sum", oracle}}));
    }
  }
  return fam;
}

namespace {

struct LemmaGraph {
  SensingMatrix phi;
  CoverSet cover;
};

std::vector<LemmaGraph> lemma_graphs(std::uint64_t seed) {
  std::vector<LemmaGraph> out;
  const std::array<ExpanderParams, 3> shapes{
      {{12, 8, 3, 0.25, 2}, {12, 8, 2, 0.25, 2}, {16, 12, 4, 0.25, 2}}};
  for (std::size_t s = 0; s < shapes.size(); ++s) {
    auto c = find_certified_graph(shapes[s], 2, 0.5, 100000, mix64(seed + 7 * (s + 1)));
    if (!c) throw Error("no certified graph for the lemma families");
    auto cover = cover_set(c->graph);
    out.push_back({SensingMatrix(std::move(c->graph)), std::move(cover)});
  }
  return out;
}

struct LemmaInstance {
  Signal alpha;
  Signal f;
  double lambda;
};

LemmaInstance lemma_instance(Rng& rng, std::size_t n) {
  LemmaInstance inst;
  const auto s = 1 + static_cast<std::size_t>(rng.below(4));
  inst.alpha = random_simplex_point(rng, n, s, 0.05 + 0.95 * rng.uniform());
  if (rng.below(3) == 0) {
    // Candidate close to the normalised truth.
    inst.f = inst.alpha;
    for (double& v : inst.f) v += 0.05 * rng.uniform() * (v > 0.0 ? 1.0 : 0.0);
    inst.f = normalised(std::move(inst.f), 1.0);
  } else {
    inst.f = random_simplex_point(rng, n, 1 + static_cast<std::size_t>(rng.below(n)), 1.0);
  }
  inst.lambda = log_uniform(rng, 1e-4, 0.5);
  return inst;
}

}  // namespace

FamilyResult lemma1_family(std::size_t instances, std::uint64_t seed) {
  FamilyResult fam;
  fam.name = "lemma1";
  const auto graphs = lemma_graphs(seed);
  for (std::size_t t = 0; t < instances; ++t) {
    Rng rng = Rng::stream(seed, {1, t});
    const auto& lg = graphs[t % graphs.size()];
    const auto inst = lemma_instance(rng, lg.phi.n());
    const auto x = shift_to_gamma(inst.f, inst.lambda, lg.cover);
    fam.add(lemma1_check(lg.phi, inst.alpha, x, inst.lambda));
  }
  return fam;
}

FamilyResult lemma3_family(std::size_t instances, std::uint64_t seed) {
  FamilyResult fam;
  fam.name = "lemma3";
  const auto graphs = lemma_graphs(seed);
  for (std::size_t t = 0; t < instances; ++t) {
    Rng rng = Rng::stream(seed, {3, t});
    const auto& lg = graphs[t % graphs.size()];
    const auto inst = lemma_instance(rng, lg.phi.n());
    // Sweep the shift for the same (alpha, f).
    for (double scale : {1.0, 4.0, 16.0}) {
      const double lambda = std::min(inst.lambda * scale, 0.5);
      const auto x = shift_to_gamma(inst.f, lambda, lg.cover);
      fam.add(lemma3_kl_bound(lg.phi, inst.alpha, x, lambda));
    }
  }
  return fam;
}

McInstance mc_instance(std::uint64_t seed, double intensity, std::size_t gamma_size) {
  constexpr std::size_t n = 12;
  constexpr std::size_t k = 2;
  auto c = find_certified_graph({n, 8, 2, 0.25, k}, k, 0.5, 100000, mix64(seed ^ 0xC0FFEE));
  if (!c) throw Error("no certified graph for the Monte-Carlo families");
  auto cover = cover_set(c->graph);
  Rng rng = Rng::stream(seed, {0x3C});
  Signal alpha = random_simplex_point(rng, n, k, 1.0);
  std::vector<Signal> theta{alpha};
  while (theta.size() < gamma_size) {
    theta.push_back(random_simplex_point(rng, n, 1 + static_cast<std::size_t>(rng.below(3)), 1.0));
  }
  for (double& v : alpha) v *= intensity;
  const double lambda = default_lambda(k, n);
  CandidateSet gamma(std::move(theta), lambda, std::move(cover));
  const Penalty pen = Penalty::uniform(std::log(static_cast<double>(gamma_size)));
  return McInstance{SensingMatrix(std::move(c->graph)), std::move(alpha), std::move(gamma), pen, k};
}

FamilyResult lemma2_family(std::span<const std::uint64_t> seeds, std::size_t trials,
                           double intensity) {
  FamilyResult fam;
  fam.name = intensity == 1.0 ? "lemma2_mc" : "lemma2_mc_scaled";
  fam.statistical = true;
  for (auto s : seeds) {
    const auto inst = mc_instance(s, intensity);
    auto r = lemma2_oracle_mc(inst.phi, inst.alpha_star, inst.gamma, inst.penalty, trials,
                              mix64(s ^ 0x2));
    r.context.emplace_back("seed", static_cast<double>(s));
    r.context.emplace_back("intensity", intensity);
    fam.add(r);
  }
  return fam;
}

FamilyResult lemma4_family(std::span<const std::uint64_t> seeds, std::size_t trials) {
  FamilyResult fam;
  fam.name = "lemma4_mc";
  fam.statistical = true;
  for (auto s : seeds) {
    const auto inst = mc_instance(s);
    auto r = lemma4_measurement_bound_mc(inst.phi, inst.alpha_star, inst.gamma, inst.penalty,
                                         trials, mix64(s ^ 0x4));
    r.context.emplace_back("seed", static_cast<double>(s));
    fam.add(r);
  }
  return fam;
}

FamilyResult final_theorem_family(std::span<const std::uint64_t> seeds, std::size_t trials) {
  FamilyResult fam;
  fam.name = "final_theorem_mc";
  fam.statistical = true;
  for (auto s : seeds) {
    const auto inst = mc_instance(s);
    auto r = final_theorem_mc(inst.phi, inst.alpha_star, inst.gamma, inst.penalty, inst.k,
                              trials, mix64(s ^ 0x7));
    r.context.emplace_back("seed", static_cast<double>(s));
    fam.add(r);
  }
  return fam;
}

FamilyResult kraft_family(std::size_t max_n, unsigned max_bits) {
  FamilyResult fam;
  fam.name = "kraft_support_code";
  for (std::size_t n = 1; n <= max_n; ++n) {
    for (unsigned b = 1; b <= max_bits; ++b) {
      fam.add(make_report("kraft", kraft_sum_support_code_exhaustive(n, b), 1.0,
                          {{"n", static_cast<double>(n)}, {"bits", static_cast<double>(b)}}));
    }
  }
  return fam;
}

std::vector<FamilyResult> run_bounds_suite(const SuiteOptions& o) {
  std::vector<FamilyResult> out;
  const auto rip = rip_graphs(o.seed);
  out.push_back(rip1_family(rip, o.rip_vectors, o.seed));
  out.push_back(collision_family(rip, o.rip_vectors, o.seed));
  out.push_back(theorem1_family(theorem1_graphs(o.seed), o.theorem1_triples, o.seed));
  const std::array<double, 9> grid{0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0};
  out.push_back(hellinger_identity_family(grid, 1e-6));
  out.push_back(lemma1_family(o.lemma_instances, o.seed));
  out.push_back(lemma3_family(o.lemma_instances, o.seed));
  const std::array<std::uint64_t, 3> seeds{mix64(o.seed + 11), mix64(o.seed + 12),
                                           mix64(o.seed + 13)};
  out.push_back(lemma2_family(seeds, o.mc_trials));
  out.push_back(lemma2_family(seeds, o.mc_trials, 100.0));
  out.push_back(lemma4_family(seeds, o.mc_trials));
  out.push_back(final_theorem_family(seeds, o.mc_trials));
  out.push_back(kraft_family(o.kraft_max_n, o.kraft_max_bits));
  return out;
}

}  // namespace expcs
