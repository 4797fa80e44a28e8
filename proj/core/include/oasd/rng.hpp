#ifndef OASD_RNG_HPP
#define OASD_RNG_HPP

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace oasd {

// Deterministic generator with named substreams. Every random decision in
// the pipeline draws from a substream derived from one master seed, so a
// rerun with the same seed reproduces every artifact byte for byte.
// Distributions are implemented here rather than with <random> adaptors
// because the standard leaves their output unspecified across library
// implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Substream seeded from (master, name); independent streams for
  // "gen", "init", "shuffle", "rollout", ...
  static Rng substream(std::uint64_t master_seed, std::string_view name);

  std::uint64_t next_u64();

  // Uniform in [0,1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);

  // Uniform integer in [0,n); n must be > 0.
  std::uint64_t below(std::uint64_t n);

  bool bernoulli(double p);

  // Index drawn proportionally to non-negative weights.
  std::size_t weighted(std::span<const double> weights);

  // Fisher-Yates over indices [0,n); returned vector is the permutation.
  std::vector<std::size_t> permutation(std::size_t n);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t state_[4];
};

}  // namespace oasd

#endif  // OASD_RNG_HPP
