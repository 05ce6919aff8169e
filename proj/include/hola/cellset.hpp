#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace hola {

// Fixed-capacity bitset over dense cell ids. Sized once per world; all the
// reachability math in the verifier runs on these.
class CellSet {
 public:
  CellSet() = default;
  explicit CellSet(int bits) : bits_(bits), words_((bits + 63) / 64, 0) {}

  int capacity() const { return bits_; }

  void set(int i) { words_[i >> 6] |= (uint64_t{1} << (i & 63)); }
  void reset(int i) { words_[i >> 6] &= ~(uint64_t{1} << (i & 63)); }
  bool test(int i) const { return (words_[i >> 6] >> (i & 63)) & 1; }

  void clear() {
    for (auto& w : words_) w = 0;
  }

  void swap(CellSet& o) {
    std::swap(bits_, o.bits_);
    words_.swap(o.words_);
  }

  bool any() const {
    for (auto w : words_)
      if (w) return true;
    return false;
  }
  bool none() const { return !any(); }

  int count() const {
    int n = 0;
    for (auto w : words_) n += __builtin_popcountll(w);
    return n;
  }

  CellSet& operator|=(const CellSet& o) {
    for (size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    return *this;
  }
  CellSet& operator&=(const CellSet& o) {
    for (size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
    return *this;
  }
  // Set difference: remove every element of o.
  CellSet& operator-=(const CellSet& o) {
    for (size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
    return *this;
  }

  bool intersects(const CellSet& o) const {
    for (size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & o.words_[i]) return true;
    return false;
  }

  bool operator==(const CellSet& o) const {
    return bits_ == o.bits_ && words_ == o.words_;
  }
  bool operator!=(const CellSet& o) const { return !(*this == o); }

  bool is_subset_of(const CellSet& o) const {
    for (size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & ~o.words_[i]) return false;
    return true;
  }

  template <typename F>
  void for_each(F&& f) const {
    for (size_t wi = 0; wi < words_.size(); ++wi) {
      uint64_t w = words_[wi];
      while (w) {
        int b = __builtin_ctzll(w);
        f(static_cast<int>(wi * 64 + b));
        w &= w - 1;
      }
    }
  }

  std::vector<int> to_vector() const {
    std::vector<int> out;
    out.reserve(count());
    for_each([&](int i) { out.push_back(i); });
    return out;
  }

 private:
  int bits_ = 0;
  std::vector<uint64_t> words_;
};

inline CellSet set_union(const CellSet& a, const CellSet& b) {
  CellSet r = a;
  r |= b;
  return r;
}
inline CellSet set_intersection(const CellSet& a, const CellSet& b) {
  CellSet r = a;
  r &= b;
  return r;
}
inline CellSet set_difference(const CellSet& a, const CellSet& b) {
  CellSet r = a;
  r -= b;
  return r;
}

}  // namespace hola
