#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace pesp {

inline constexpr int kMaxProbeItems = 64;

/// A subset of [0, n) for n <= 64, stored as a bitmask. Used for probe sets,
/// the S0/S1 restrictions of search nodes and multi-element groups.
class IndexSet {
 public:
  constexpr IndexSet() = default;
  constexpr explicit IndexSet(std::uint64_t mask) : mask_(mask) {}
  IndexSet(std::initializer_list<int> items) {
    for (int j : items) insert(j);
  }

  static constexpr IndexSet full(int n) {
    return IndexSet(n >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1));
  }
  static IndexSet from_vector(const std::vector<int>& items) {
    IndexSet s;
    for (int j : items) s.insert(j);
    return s;
  }

  constexpr bool contains(int j) const { return (mask_ >> j) & 1U; }
  constexpr void insert(int j) { mask_ |= std::uint64_t{1} << j; }
  constexpr void erase(int j) { mask_ &= ~(std::uint64_t{1} << j); }
  constexpr int size() const { return std::popcount(mask_); }
  constexpr bool empty() const { return mask_ == 0; }
  constexpr std::uint64_t mask() const { return mask_; }

  constexpr IndexSet operator|(IndexSet o) const { return IndexSet(mask_ | o.mask_); }
  constexpr IndexSet operator&(IndexSet o) const { return IndexSet(mask_ & o.mask_); }
  constexpr IndexSet minus(IndexSet o) const { return IndexSet(mask_ & ~o.mask_); }
  constexpr bool intersects(IndexSet o) const { return (mask_ & o.mask_) != 0; }
  constexpr bool subset_of(IndexSet o) const { return (mask_ & ~o.mask_) == 0; }
  constexpr auto operator<=>(const IndexSet&) const = default;

  /// Smallest element, or -1 when empty.
  constexpr int front() const { return mask_ == 0 ? -1 : std::countr_zero(mask_); }

  std::vector<int> items() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(size()));
    for (std::uint64_t m = mask_; m != 0; m &= m - 1) out.push_back(std::countr_zero(m));
    return out;
  }

  /// "0;3;7" (empty string for the empty set).
  std::string encode() const {
    std::string out;
    for (int j : items()) {
      if (!out.empty()) out += ';';
      out += std::to_string(j);
    }
    return out;
  }

 private:
  std::uint64_t mask_ = 0;
};

}  // namespace pesp
