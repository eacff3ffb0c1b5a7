#pragma once

#include <array>
#include <bit>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mpqp/model.hpp"

namespace mpqp {

/// Fixed-width bit string over the inequality rows; equalities are implicitly
/// always active and are not stored.
class ActiveSet {
 public:
  static constexpr int kWords = kMaxInequalities / 64;

  ActiveSet() = default;
  static ActiveSet from_indices(const std::vector<int>& indices);
  static ActiveSet from_mask(std::uint64_t mask);

  bool contains(int i) const { return (words_[i >> 6] >> (i & 63)) & 1U; }
  void insert(int i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void erase(int i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  void toggle(int i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

  int size() const;
  bool empty() const { return size() == 0; }
  /// Active row indices in increasing order.
  std::vector<int> indices() const;
  /// '0'/'1' string of the first m rows, row 0 first.
  std::string to_string(int m) const;
  std::size_t hash() const;

  bool operator==(const ActiveSet&) const = default;
  /// Lexicographic over the bit string with row 0 most significant and '0' < '1'.
  std::strong_ordering operator<=>(const ActiveSet& other) const;

 private:
  std::array<std::uint64_t, kWords> words_{};
};

}  // namespace mpqp

template <>
struct std::hash<mpqp::ActiveSet> {
  std::size_t operator()(const mpqp::ActiveSet& s) const noexcept { return s.hash(); }
};
