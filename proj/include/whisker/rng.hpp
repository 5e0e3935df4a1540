#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <utility>
#include <vector>

namespace whisker {

// Seeded random stream with portable output.
//
// std::mt19937_64 is bit-specified by the standard, but the <random>
// distributions are not, so the conversions to doubles, normals and indices
// are done here. Child streams are derived with SplitMix64 so that trial i of
// an experiment sees the same numbers regardless of how many trials run or in
// which order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal (Box-Muller, one value per call).
  double normal();
  double normal(double mean, double sigma) { return mean + sigma * normal(); }
  // Uniform integer in [0, n), rejection sampled, n > 0.
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

// Fisher-Yates with Rng::index, so the permutation is the same everywhere.
template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = rng.index(i);
    std::swap(v[i - 1], v[j]);
  }
}

std::uint64_t splitmix64(std::uint64_t x);

// Seed of the child stream identified by the given path under a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

}  // namespace whisker
