#ifndef SMOOTH_CORE_RNG_H_
#define SMOOTH_CORE_RNG_H_

#include <cstdint>
#include <random>

namespace smooth {

// Seeded random stream. The engine is std::mt19937_64, whose output sequence
// is fixed by the standard; the uniform and normal transforms are written out
// here so that streams are identical across standard library vendors.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  // Independent stream for (seed, stream_id), mixed with splitmix64.
  static Rng derive(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double low, double high) {
    return low + (high - low) * uniform();
  }

  // Standard normal via Box-Muller; the second variate is cached.
  double normal();

  // Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);

  template <typename T>
  void shuffle(T& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace smooth

#endif  // SMOOTH_CORE_RNG_H_
