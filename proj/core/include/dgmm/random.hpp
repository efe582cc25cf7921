#ifndef DGMM_RANDOM_HPP
#define DGMM_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace dgmm {

// splitmix64 finalizer, used to derive independent stream seeds from a
// base seed and a salt (chain index, spec hash, ...).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a over a byte string; stable fingerprint for files and spec strings.
inline std::uint64_t fnv1a(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Seeded random stream: mt19937_64 plus Box-Muller normals. The normal
// variates are computed directly from the engine's uniforms rather than
// through std::normal_distribution, so identical seeds give identical
// draws regardless of the standard library in use.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  // uniform on [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // uniform index in [0, n)
  std::size_t index(std::size_t n) {
    auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  std::uint64_t seed() const { return seed_; }

  // Raw engine draw; advances the stream. Used to salt per-call child
  // streams so parallel per-observation work stays deterministic.
  std::uint64_t ticket() { return engine_(); }

  // Independent child stream, deterministic in (this stream's seed, id).
  RandomStream spawn(std::uint64_t id) const {
    return RandomStream(mix_seed(seed_, id));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dgmm

#endif
