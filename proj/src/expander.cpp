#include "expcs/expander.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <sstream>

#include <json.hpp>

#include "expcs/error.hpp"
#include "expcs/io.hpp"
#include "expcs/rng.hpp"

namespace expcs {

void ExpanderParams::validate() const {
  if (n == 0 || m == 0 || d == 0) throw ParameterError("n, m and d must be positive");
  if (d > m) {
    throw ParameterError("left degree d=" + std::to_string(d) + " exceeds m=" + std::to_string(m));
  }
  if (m >= n) {
    throw ParameterError("graph must be unbalanced: m=" + std::to_string(m) +
                         " must be below n=" + std::to_string(n));
  }
  if (k < 1 || 2 * k > n) throw ParameterError("sparsity k must satisfy 1 <= k <= n/2");
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw ParameterError("epsilon must lie in (0, 1/2)");
}

ExpanderGraph::ExpanderGraph(std::size_t n, std::size_t m, std::size_t d,
                             std::vector<std::uint32_t> columns)
    : n_(n), m_(m), d_(d), columns_(std::move(columns)) {
  if (n_ == 0 || m_ == 0 || d_ == 0) throw ParameterError("n, m and d must be positive");
  if (d_ > m_) throw ParameterError("left degree exceeds the number of right nodes");
  if (columns_.size() != n_ * d_) {
    throw DimensionError("expected " + std::to_string(n_ * d_) + " column entries, got " +
                         std::to_string(columns_.size()));
  }
  for (std::size_t i = 0; i < n_; ++i) {
    auto first = columns_.begin() + static_cast<std::ptrdiff_t>(i * d_);
    auto last = first + static_cast<std::ptrdiff_t>(d_);
    std::sort(first, last);
    if (std::adjacent_find(first, last) != last) {
      throw ParameterError("column " + std::to_string(i) + " repeats a right node");
    }
    if (*(last - 1) >= m_) {
      throw ParameterError("column " + std::to_string(i) + " references right node " +
                           std::to_string(*(last - 1)) + " >= m");
    }
  }
}

std::vector<std::size_t> ExpanderGraph::right_degrees() const {
  std::vector<std::size_t> deg(m_, 0);
  for (auto j : columns_) ++deg[j];
  return deg;
}

ExpanderGraph generate_graph(const ExpanderParams& params, std::uint64_t seed) {
  params.validate();
  const auto n = static_cast<std::int64_t>(params.n);
  std::vector<std::uint32_t> columns(params.n * params.d);
#pragma omp parallel for schedule(static) if (params.n * params.d >= 65536)
  for (std::int64_t i = 0; i < n; ++i) {
    Rng rng = Rng::stream(seed, {static_cast<std::uint64_t>(i)});
    const auto col = sample_without_replacement(rng, static_cast<std::uint32_t>(params.m),
                                                static_cast<std::uint32_t>(params.d));
    std::copy(col.begin(), col.end(), columns.begin() + i * static_cast<std::int64_t>(params.d));
  }
  return ExpanderGraph(params.n, params.m, params.d, std::move(columns));
}

namespace {

// Counts distinct right nodes of a subset using an epoch-stamped marker array.
class NeighbourCounter {
 public:
  explicit NeighbourCounter(std::size_t m) : stamp_(m, 0) {}

  std::size_t count(const ExpanderGraph& g, std::span<const std::uint32_t> subset) {
    if (++epoch_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0);
      epoch_ = 1;
    }
    std::size_t distinct = 0;
    for (auto i : subset) {
      for (auto j : g.column(i)) {
        if (stamp_[j] != epoch_) {
          stamp_[j] = epoch_;
          ++distinct;
        }
      }
    }
    return distinct;
  }

 private:
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
};

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > kSaturated) return kSaturated;
  }
  return static_cast<std::uint64_t>(r);
}

// Number of s-subsets of [0, n) that precede `combo` in lexicographic order.
std::uint64_t lex_rank(std::span<const std::uint32_t> combo, std::size_t n) {
  const std::size_t s = combo.size();
  std::uint64_t rank = 0;
  std::int64_t prev = -1;
  for (std::size_t t = 0; t < s; ++t) {
    for (std::int64_t v = prev + 1; v < combo[t]; ++v) {
      rank += binomial(n - 1 - static_cast<std::uint64_t>(v), s - 1 - t);
    }
    prev = combo[t];
  }
  return rank;
}

// Advance combo[from..] to the next lexicographic s-subset of [0, n) keeping
// combo[0..from) fixed. Returns false when exhausted.
bool next_combination(std::vector<std::uint32_t>& combo, std::size_t n, std::size_t from) {
  const std::size_t s = combo.size();
  for (std::size_t t = s; t-- > from;) {
    if (combo[t] < n - s + t) {
      ++combo[t];
      for (std::size_t u = t + 1; u < s; ++u) combo[u] = combo[u - 1] + 1;
      return true;
    }
  }
  return false;
}

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParameterError("epsilon must lie in (0, 1)");
}

bool violates(std::size_t neighbours, double threshold) {
  return static_cast<double>(neighbours) <= threshold;
}

ExpansionCertificate verify_exact(const ExpanderGraph& g, std::size_t k, double epsilon,
                                  std::uint64_t budget) {
  const std::size_t n = g.n();
  const std::size_t kmax = std::min(k, n);
  const std::uint64_t total = subsets_up_to(n, kmax);
  if (total > budget) {
    throw CapacityError("exact verification needs " +
                        (total == kSaturated ? std::string("more than 2^64")
                                             : std::to_string(total)) +
                        " subsets but the budget is " + std::to_string(budget) +
                        "; use sampled mode explicitly or raise the budget");
  }
  ExpansionCertificate cert{VerifyMode::exact, k, epsilon, true, std::nullopt, total};
  std::uint64_t before = 0;
  for (std::size_t s = 1; s <= kmax; ++s) {
    const double threshold = (1.0 - epsilon) * static_cast<double>(g.d() * s);
    const auto lead_count = static_cast<std::int64_t>(n - s + 1);
    std::vector<std::vector<std::uint32_t>> found(static_cast<std::size_t>(lead_count));
    std::atomic<std::int64_t> best{lead_count};
#pragma omp parallel if (total >= 4096)
    {
      NeighbourCounter counter(g.m());
#pragma omp for schedule(dynamic, 1)
      for (std::int64_t lead = 0; lead < lead_count; ++lead) {
        if (lead > best.load(std::memory_order_relaxed)) continue;
        std::vector<std::uint32_t> combo(s);
        for (std::size_t t = 0; t < s; ++t) combo[t] = static_cast<std::uint32_t>(lead + t);
        do {
          if (violates(counter.count(g, combo), threshold)) {
            found[static_cast<std::size_t>(lead)] = combo;
            std::int64_t cur = best.load();
            while (lead < cur && !best.compare_exchange_weak(cur, lead)) {
            }
            break;
          }
        } while (next_combination(combo, n, 1));
      }
    }
    const std::int64_t lead = best.load();
    if (lead < lead_count) {
      auto& subset = found[static_cast<std::size_t>(lead)];
      NeighbourCounter counter(g.m());
      cert.pass = false;
      cert.subsets_checked = before + lex_rank(subset, n) + 1;
      cert.witness = ExpansionWitness{subset, counter.count(g, subset)};
      return cert;
    }
    before += binomial(n, s);
  }
  return cert;
}

ExpansionCertificate verify_sampled(const ExpanderGraph& g, std::size_t k, double epsilon,
                                    std::uint64_t budget, std::uint64_t seed) {
  if (budget == 0) throw ParameterError("sampled verification needs a positive budget");
  const std::size_t n = g.n();
  const std::size_t kmax = std::min(k, n);
  ExpansionCertificate cert{VerifyMode::sampled, k, epsilon, true, std::nullopt, budget * kmax};
  for (std::size_t s = 1; s <= kmax; ++s) {
    const double threshold = (1.0 - epsilon) * static_cast<double>(g.d() * s);
    const auto samples = static_cast<std::int64_t>(budget);
    std::atomic<std::int64_t> best{samples};
#pragma omp parallel if (budget >= 1024)
    {
      NeighbourCounter counter(g.m());
#pragma omp for schedule(static)
      for (std::int64_t q = 0; q < samples; ++q) {
        if (q > best.load(std::memory_order_relaxed)) continue;
        Rng rng = Rng::stream(seed, {s, static_cast<std::uint64_t>(q)});
        const auto subset = sample_without_replacement(rng, static_cast<std::uint32_t>(n),
                                                       static_cast<std::uint32_t>(s));
        if (violates(counter.count(g, subset), threshold)) {
          std::int64_t cur = best.load();
          while (q < cur && !best.compare_exchange_weak(cur, q)) {
          }
        }
      }
    }
    const std::int64_t q = best.load();
    if (q < samples) {
      Rng rng = Rng::stream(seed, {s, static_cast<std::uint64_t>(q)});
      auto subset = sample_without_replacement(rng, static_cast<std::uint32_t>(n),
                                               static_cast<std::uint32_t>(s));
      cert.pass = false;
      cert.subsets_checked = (s - 1) * budget + static_cast<std::uint64_t>(q) + 1;
      cert.witness = ExpansionWitness{subset, neighbourhood_size(g, subset)};
      return cert;
    }
  }
  return cert;
}

}  // namespace

std::string to_string(VerifyMode mode) { return mode == VerifyMode::exact ? "exact" : "sampled"; }

VerifyMode verify_mode_from_string(const std::string& s) {
  if (s == "exact") return VerifyMode::exact;
  if (s == "sampled") return VerifyMode::sampled;
  throw ParameterError("unknown verification mode '" + s + "'");
}

std::size_t neighbourhood_size(const ExpanderGraph& g, std::span<const std::uint32_t> subset) {
  for (auto i : subset) {
    if (i >= g.n()) throw DimensionError("left node out of range");
  }
  NeighbourCounter counter(g.m());
  return counter.count(g, subset);
}

std::uint64_t subsets_up_to(std::size_t n, std::size_t k) {
  std::uint64_t total = 0;
  for (std::size_t s = 1; s <= std::min(k, n); ++s) {
    const auto c = binomial(n, s);
    if (c == kSaturated || total > kSaturated - c) return kSaturated;
    total += c;
  }
  return total;
}

ExpansionCertificate verify_expansion(const ExpanderGraph& g, std::size_t k, double epsilon,
                                      VerifyMode mode, std::uint64_t budget, std::uint64_t seed) {
  if (k == 0) throw ParameterError("k must be positive");
  check_epsilon(epsilon);
  return mode == VerifyMode::exact ? verify_exact(g, k, epsilon, budget)
                                   : verify_sampled(g, k, epsilon, budget, seed);
}

double min_expansion_ratio(const ExpanderGraph& g, std::size_t k, std::uint64_t budget) {
  const std::size_t n = g.n();
  const std::size_t kmax = std::min(k, n);
  if (kmax == 0) throw ParameterError("k must be positive");
  if (subsets_up_to(n, kmax) > budget) throw CapacityError("subset enumeration exceeds budget");
  NeighbourCounter counter(g.m());
  double best = 1.0;
  for (std::size_t s = 1; s <= kmax; ++s) {
    std::vector<std::uint32_t> combo(s);
    for (std::size_t t = 0; t < s; ++t) combo[t] = static_cast<std::uint32_t>(t);
    const double denom = static_cast<double>(g.d() * s);
    do {
      best = std::min(best, static_cast<double>(counter.count(g, combo)) / denom);
    } while (next_combination(combo, n, 0));
  }
  return best;
}

CoverSet cover_set(const ExpanderGraph& g) {
  const auto deg = g.right_degrees();
  for (std::size_t j = 0; j < deg.size(); ++j) {
    if (deg[j] == 0) {
      throw UncoverableError("right node " + std::to_string(j) + " has no neighbours");
    }
  }
  // Lazy greedy: gains only shrink, so a popped entry whose stored gain is
  // still current is the true maximum. Ordering (gain desc, index asc).
  using Entry = std::pair<std::size_t, std::uint32_t>;
  auto worse = [](const Entry& a, const Entry& b) {
    return a.first != b.first ? a.first < b.first : a.second > b.second;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
  for (std::uint32_t i = 0; i < g.n(); ++i) heap.emplace(g.d(), i);

  std::vector<char> covered(g.m(), 0);
  std::size_t remaining = g.m();
  CoverSet cover;
  cover.indicator.assign(g.n(), 0.0);
  while (remaining > 0) {
    auto [stored, i] = heap.top();
    heap.pop();
    std::size_t gain = 0;
    for (auto j : g.column(i)) gain += covered[j] ? 0 : 1;
    if (gain != stored) {
      heap.emplace(gain, i);
      continue;
    }
    for (auto j : g.column(i)) {
      if (!covered[j]) {
        covered[j] = 1;
        --remaining;
      }
    }
    cover.indices.push_back(i);
    cover.indicator[i] = 1.0;
  }
  std::sort(cover.indices.begin(), cover.indices.end());
  return cover;
}

bool is_valid_cover(const ExpanderGraph& g, const CoverSet& cover) {
  if (cover.indices.size() > g.m() || cover.indicator.size() != g.n()) return false;
  std::vector<char> covered(g.m(), 0);
  for (auto i : cover.indices) {
    if (i >= g.n() || cover.indicator[i] != 1.0) return false;
    for (auto j : g.column(i)) covered[j] = 1;
  }
  const auto ones = std::count(cover.indicator.begin(), cover.indicator.end(), 1.0);
  if (static_cast<std::size_t>(ones) != cover.indices.size()) return false;
  return std::all_of(covered.begin(), covered.end(), [](char c) { return c != 0; });
}

bool CollisionAnalysis::respects_expansion(std::size_t k, double epsilon, std::size_t d) const {
  for (std::size_t p = 1; p <= std::min(k, prefix_counts.size()); ++p) {
    if (static_cast<double>(prefix_counts[p - 1]) > epsilon * static_cast<double>(d * p)) {
      return false;
    }
  }
  return true;
}

CollisionAnalysis collision_analysis(const ExpanderGraph& g, std::span<const double> x) {
  if (x.size() != g.n()) throw DimensionError("signal length does not match n");
  CollisionAnalysis out;
  out.permutation.resize(g.n());
  for (std::uint32_t i = 0; i < g.n(); ++i) out.permutation[i] = i;
  std::stable_sort(out.permutation.begin(), out.permutation.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return std::abs(x[a]) > std::abs(x[b]); });

  std::vector<char> touched(g.m(), 0);
  out.prefix_counts.reserve(g.n());
  std::size_t count = 0;
  for (auto i : out.permutation) {
    for (auto j : g.column(i)) {
      if (touched[j]) {
        out.collision_edges.emplace_back(i, j);
        out.collision_weight += std::abs(x[i]);
        ++count;
      }
    }
    for (auto j : g.column(i)) touched[j] = 1;
    out.prefix_counts.push_back(count);
  }
  return out;
}

Rip1Report rip1_check(const ExpanderGraph& g, std::span<const double> x, std::size_t k,
                      double epsilon) {
  if (x.size() != g.n()) throw DimensionError("signal length does not match n");
  std::vector<double> ax(g.m(), 0.0);
  double l1 = 0.0;
  std::size_t support = 0;
  for (std::size_t i = 0; i < g.n(); ++i) {
    if (x[i] == 0.0) continue;
    ++support;
    l1 += std::abs(x[i]);
    for (auto j : g.column(i)) ax[j] += x[i];
  }
  Rip1Report r;
  const double d = static_cast<double>(g.d());
  for (double v : ax) r.middle += std::abs(v);
  r.upper = d * l1;
  r.lower = (1.0 - 2.0 * epsilon) * d * l1;
  r.lower_applicable = support <= k;
  constexpr double tol = 1e-9;
  r.pass = r.middle <= r.upper + tol && (!r.lower_applicable || r.lower <= r.middle + tol);
  return r;
}

void write_graph(std::ostream& out, const ExpanderGraph& g) {
  out << g.n() << ' ' << g.m() << ' ' << g.d() << '\n';
  for (std::size_t i = 0; i < g.n(); ++i) {
    const auto col = g.column(i);
    for (std::size_t t = 0; t < col.size(); ++t) {
      if (t) out << ' ';
      out << col[t];
    }
    out << '\n';
  }
}

ExpanderGraph read_graph(std::istream& in) {
  std::string line;
  auto next_line = [&](const char* what) {
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) return;
    }
    throw ParseError(std::string("unexpected end of graph file while reading ") + what);
  };
  next_line("header");
  std::istringstream header(line);
  std::size_t n = 0, m = 0, d = 0;
  std::string extra;
  if (!(header >> n >> m >> d) || (header >> extra)) {
    throw ParseError("graph header must be 'n m d'");
  }
  if (n == 0 || m == 0 || d == 0 || d > m) throw ParseError("graph header has invalid sizes");
  std::vector<std::uint32_t> columns;
  columns.reserve(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    next_line("column");
    std::istringstream ss(line);
    long long v = 0;
    std::size_t got = 0;
    long long prev = -1;
    while (ss >> v) {
      if (v < 0 || static_cast<std::size_t>(v) >= m) {
        throw ParseError("column " + std::to_string(i) + ": index out of range");
      }
      if (v <= prev) throw ParseError("column " + std::to_string(i) + ": not strictly ascending");
      prev = v;
      columns.push_back(static_cast<std::uint32_t>(v));
      ++got;
    }
    if (!ss.eof() || got != d) {
      throw ParseError("column " + std::to_string(i) + ": expected " + std::to_string(d) +
                       " indices");
    }
  }
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      throw ParseError("trailing content after " + std::to_string(n) + " columns");
    }
  }
  return ExpanderGraph(n, m, d, std::move(columns));
}

void save_graph(const std::string& path, const ExpanderGraph& g) {
  std::ostringstream ss;
  write_graph(ss, g);
  write_file(path, ss.str());
}

ExpanderGraph load_graph(const std::string& path) {
  std::istringstream ss(read_file(path));
  return read_graph(ss);
}

std::string certificate_json(const ExpansionCertificate& cert) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(cert.mode);
  j["k"] = cert.k;
  j["epsilon"] = cert.epsilon;
  j["verdict"] = cert.pass ? "pass" : "fail";
  if (cert.witness) {
    j["witness"] = {{"subset", cert.witness->subset}, {"neighbours", cert.witness->neighbours}};
  } else {
    j["witness"] = nullptr;
  }
  j["subsets_checked"] = cert.subsets_checked;
  j["proof"] = cert.is_proof();
  return j.dump();
}

}  // namespace expcs
