#include "mpqp/active_set.hpp"

namespace mpqp {

ActiveSet ActiveSet::from_indices(const std::vector<int>& indices) {
  ActiveSet s;
  for (int i : indices) s.insert(i);
  return s;
}

ActiveSet ActiveSet::from_mask(std::uint64_t mask) {
  ActiveSet s;
  s.words_[0] = mask;
  return s;
}

int ActiveSet::size() const {
  int count = 0;
  for (auto w : words_) count += std::popcount(w);
  return count;
}

std::vector<int> ActiveSet::indices() const {
  std::vector<int> out;
  for (int k = 0; k < kWords; ++k) {
    std::uint64_t w = words_[k];
    while (w != 0) {
      out.push_back(k * 64 + std::countr_zero(w));
      w &= w - 1;
    }
  }
  return out;
}

std::string ActiveSet::to_string(int m) const {
  std::string s(m, '0');
  for (int i = 0; i < m; ++i)
    if (contains(i)) s[i] = '1';
  return s;
}

std::size_t ActiveSet::hash() const {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (auto w : words_) h = (h ^ w) * 0x100000001b3ULL + (h >> 29);
  return static_cast<std::size_t>(h);
}

std::strong_ordering ActiveSet::operator<=>(const ActiveSet& other) const {
  for (int k = 0; k < kWords; ++k) {
    const std::uint64_t diff = words_[k] ^ other.words_[k];
    if (diff == 0) continue;
    const int bit = std::countr_zero(diff);
    return ((words_[k] >> bit) & 1U) ? std::strong_ordering::greater : std::strong_ordering::less;
  }
  return std::strong_ordering::equal;
}

}  // namespace mpqp
