#pragma once

#include <cstdint>
#include <initializer_list>

namespace nstamp::rng {

// Counter-based generator: every output is a stateless hash of
// (key, counter), where the key folds in the seed and any number of
// stream identifiers. Identical (seed, ids) always reproduce the same
// sequence on any platform, and forked substreams never collide with
// their parent because the fork id is mixed into the key.
uint64_t mix64(uint64_t x);

class Stream {
 public:
  Stream() = default;
  explicit Stream(uint64_t seed) : key_(mix64(seed ^ kSeedSalt)) {}
  Stream(uint64_t seed, std::initializer_list<uint64_t> ids) : Stream(seed) {
    for (uint64_t id : ids) key_ = mix64(key_ ^ mix64(id));
  }

  // Derives an independent substream; does not advance this stream.
  Stream fork(uint64_t id) const {
    Stream s;
    s.key_ = mix64(key_ ^ mix64(id ^ kForkSalt));
    return s;
  }

  uint64_t next_u64() { return mix64(key_ ^ counter_++); }

  // Uniform in [0, 1), 53 bits of mantissa.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  // Standard normal via Box-Muller; consumes exactly two counter steps
  // so replaying a stream replays the same draws.
  double next_gaussian();

  uint64_t key() const { return key_; }
  uint64_t counter() const { return counter_; }

 private:
  static constexpr uint64_t kSeedSalt = 0x9e3779b97f4a7c15ull;
  static constexpr uint64_t kForkSalt = 0xd1b54a32d192ed03ull;

  uint64_t key_ = 0;
  uint64_t counter_ = 0;
};

}  // namespace nstamp::rng
