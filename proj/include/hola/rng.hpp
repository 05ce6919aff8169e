#pragma once

#include <cstdint>
#include <vector>

namespace hola {

// Seedable 64-bit generator (splitmix64 update). Chosen over std::mt19937
// because its byte-level output is trivially portable across platforms and
// standard-library versions; scenario files regenerated from a seed must be
// identical everywhere.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : state_(seed) {}

  uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n). Rejection-free modulo is fine here: n is tiny compared
  // to 2^64, the bias is far below anything observable.
  uint64_t below(uint64_t n) { return n ? next() % n : 0; }

  int range(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(below(static_cast<uint64_t>(hi - lo + 1)));
  }

  double unit() { return (next() >> 11) * (1.0 / 9007199254740992.0); }

  bool chance(double p) { return unit() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derive an independent stream (e.g. one per scenario index).
  Rng fork(uint64_t salt) {
    Rng r(state_ ^ (0x632be59bd9b4e019ULL * (salt + 1)));
    r.next();
    return r;
  }

 private:
  uint64_t state_;
};

}  // namespace hola
