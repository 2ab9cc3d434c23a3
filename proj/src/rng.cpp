#include "ddr/rng.hpp"

namespace ddr {

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

Rng::Rng(RngSeed s)
    : key_(splitmix64(splitmix64(s.seed + kGamma) ^ splitmix64(s.stream_id ^ 0xD1B54A32D192ED03ULL))) {}

std::uint64_t Rng::next_u64() {
  ++counter_;
  return splitmix64(key_ + counter_ * kGamma);
}

double Rng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  if (!(hi > lo)) return lo;
  const double v = lo + (hi - lo) * uniform01();
  return v > hi ? hi : v;
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi <= lo) return lo;
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(next_u64());
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t r;
  do {
    r = next_u64();
  } while (r >= limit);
  return lo + static_cast<std::int64_t>(r % span);
}

Rng Rng::fork(std::uint64_t tag) const {
  return Rng(FromKey{}, splitmix64(key_ ^ splitmix64(tag + 0x632BE59BD9B4E019ULL)));
}

Rng Rng::fork(std::string_view tag) const { return fork(hash_tag(tag)); }

RngSeed Rng::child_seed(std::uint64_t tag) const {
  return RngSeed{splitmix64(key_ ^ 0xA0761D6478BD642FULL), tag};
}

}  // namespace ddr
