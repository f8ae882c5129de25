#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace subcond {

/// Deterministic, splittable random stream.
///
/// Streams form a tree: `Rng(seed)` is the root and `split(label)` derives an
/// independent child whose key depends only on the parent key and the label,
/// never on how many values the parent has drawn. The stream reached by a
/// chain of labels is therefore a pure function of (global seed, labels),
/// which is what keeps parameter initialization aligned across model
/// variants that share a sub-tree.
///
/// Generator: SplitMix64 steps over a 64-bit counter; child keys mix the
/// parent key with an FNV-1a hash of the label; normal deviates use
/// Box-Muller on two uniform draws (no cached spare). Reproducibility is
/// bitwise within this implementation; cross-platform bit-exactness is not a
/// goal.
class Rng {
public:
  explicit Rng(std::uint64_t seed);

  /// Child stream keyed by (this stream's key, label).
  Rng split(std::string_view label) const;
  /// Child stream keyed by (this stream's key, index).
  Rng split(std::uint64_t index) const;

  std::uint64_t next_u64();
  /// Uniform integer in [0, bound), unbiased; bound must be positive.
  std::uint64_t next_below(std::uint64_t bound);
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  double normal(double mean = 0.0, double stddev = 1.0);

  void fill_normal(std::span<double> out, double mean, double stddev);

  /// Fisher-Yates shuffle driven by next_below.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[static_cast<std::size_t>(next_below(i))]);
    }
  }

  std::uint64_t key() const { return key_; }

private:
  std::uint64_t key_;    // identity of this stream, fixed at construction
  std::uint64_t state_;  // draw position, advances with each next_u64
};

}  // namespace subcond
