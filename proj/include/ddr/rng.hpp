#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace ddr {

// Identifies one reproducible random stream: a corpus-wide seed plus the
// page (or other unit) index.
struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  friend bool operator==(const RngSeed&, const RngSeed&) = default;
};

// Counter-based generator: output i is a SplitMix64 finalization of
// key + i * golden-gamma, with the key derived from (seed, stream_id).
// No hidden state beyond the counter, so any (seed, stream) can be replayed
// independently and every platform sees the same sequence.
//
// Distribution helpers are implemented here rather than via <random>
// distributions, whose algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(RngSeed s);
  Rng(std::uint64_t seed, std::uint64_t stream_id) : Rng(RngSeed{seed, stream_id}) {}

  std::uint64_t next_u64();

  // Uniform in [0, 1).
  double uniform01();
  // Uniform in [lo, hi]; returns lo exactly when lo == hi.
  double uniform(double lo, double hi);
  // Uniform integer in [lo, hi] inclusive, unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(n) - 1));
  }
  bool bernoulli(double p) { return uniform01() < p; }

  // Independent child stream named by a tag; does not advance this stream.
  Rng fork(std::string_view tag) const;
  Rng fork(std::uint64_t tag) const;
  // Child seed usable to key another component (e.g. text for one element).
  RngSeed child_seed(std::uint64_t tag) const;

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

  std::uint64_t key() const { return key_; }

 private:
  struct FromKey {};
  Rng(FromKey, std::uint64_t key) : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);
// FNV-1a, used to turn string tags into stream ids.
std::uint64_t hash_tag(std::string_view tag);

}  // namespace ddr
