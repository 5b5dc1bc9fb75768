#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace e3p {

std::uint64_t fnv1a64(const std::string& s, std::uint64_t h = 14695981039346656037ull);

// Seeded random stream with locally implemented distributions, so sequences
// depend only on the mt19937_64 engine (which is pinned by the standard) and
// not on the standard library's distribution internals. One master seed fans
// out to named substreams (world, split, init, dropmask, shuffle, ...).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  static RandomStream substream(std::uint64_t master_seed, const std::string& name);

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1), 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; stateless (two uniforms per draw).
  double gaussian();

  // Uniform on [0, n), rejection sampled (no modulo bias).
  int uniform_int(int n);

  // Fisher-Yates.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(static_cast<int>(i)));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::string serialize_state() const;
  void restore_state(const std::string& state);

 private:
  std::mt19937_64 engine_;
};

}  // namespace e3p
