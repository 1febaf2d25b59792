#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace fsc {

// splitmix64 step, used to spread user-supplied seeds and to derive
// independent streams from a base seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic random source. Wraps mt19937_64 but maps raw words to
// doubles and bounded indices itself: the std distributions are
// implementation-defined, and identical seeds must give identical runs
// everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(mix_seed(seed)), seed_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1): top 53 bits of one word.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; second value of each pair is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    do {
      u = uniform();
    } while (u <= 0.0);
    const double v = uniform();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double a = 6.283185307179586476925286766559 * v;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Uniform index in [0, n). Rejection sampling keeps it unbiased.
  std::size_t index(std::size_t n) {
    if (n <= 1) return 0;
    const std::uint64_t span = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t x = 0;
    do {
      x = next_u64();
    } while (x >= limit);
    return static_cast<std::size_t>(x % span);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

  // Independent stream derived from this rng's seed and a stream tag.
  Rng fork(std::uint64_t stream) const { return Rng(mix_seed(seed_ ^ mix_seed(stream))); }

  std::uint64_t seed() const { return seed_; }

 private:
  std::mt19937_64 eng_;
  std::uint64_t seed_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace fsc
