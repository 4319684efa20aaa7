#include "expcs/rng.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace expcs {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kSeedSalt = 0x5DEECE66DA3B1F27ULL;
}  // namespace

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) : key_(mix64(seed ^ kSeedSalt)) {}

Rng Rng::stream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
  Rng r(seed);
  for (auto id : ids) r = r.split(id);
  return r;
}

Rng Rng::split(std::uint64_t id) const {
  Rng child(0);
  child.key_ = mix64(key_ ^ mix64(id + kGolden));
  return child;
}

Rng::result_type Rng::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double Rng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::below: bound must be positive");
  // Lemire's multiply-shift with rejection of the biased low region.
  unsigned __int128 product = static_cast<unsigned __int128>((*this)()) * bound;
  auto low = static_cast<std::uint64_t>(product);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      product = static_cast<unsigned __int128>((*this)()) * bound;
      low = static_cast<std::uint64_t>(product);
    }
  }
  return static_cast<std::uint64_t>(product >> 64);
}

std::int64_t Rng::between(std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(below(span));
}

std::vector<std::uint32_t> sample_without_replacement(Rng& rng, std::uint32_t range,
                                                      std::uint32_t count) {
  if (count > range) throw std::invalid_argument("sample_without_replacement: count > range");
  std::vector<std::uint32_t> out;
  out.reserve(count);
  if (count * 4 >= range) {
    // Dense case: partial Fisher-Yates over the whole range.
    std::vector<std::uint32_t> pool(range);
    for (std::uint32_t i = 0; i < range; ++i) pool[i] = i;
    for (std::uint32_t i = 0; i < count; ++i) {
      const auto j = i + static_cast<std::uint32_t>(rng.below(range - i));
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
  } else {
    std::unordered_set<std::uint32_t> chosen;
    for (std::uint32_t j = range - count; j < range; ++j) {
      const auto t = static_cast<std::uint32_t>(rng.below(std::uint64_t{j} + 1));
      if (chosen.insert(t).second) {
        out.push_back(t);
      } else {
        chosen.insert(j);
        out.push_back(j);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace expcs
