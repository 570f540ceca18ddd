#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <list>
#include <mutex>
#include <span>
#include <unordered_map>
#include <utility>

#include "pesp/two_stage.hpp"

namespace pesp {

/// Canonical encoding of a subset of sample indices [0, N). For N <= 64 the
/// subset is stored exactly as a bitmask; beyond that a 128-bit digest of
/// the sorted index list stands in for it (collisions are possible in
/// principle but have probability around 2^-128 per pair).
struct MemoKey {
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  bool digest = false;

  static MemoKey from_sorted(std::span<const std::size_t> indices, std::size_t sample_size);
  bool operator==(const MemoKey&) const = default;
};

struct MemoKeyHash {
  std::size_t operator()(const MemoKey& k) const noexcept;
};

/// Bounded LRU cache of two-stage solves keyed by scenario subset. Lookups
/// and inserts are thread-safe; two threads missing on the same key both
/// solve, and the first insert wins.
class SolveMemo {
 public:
  static constexpr std::size_t kDefaultCapacity = 10'000;

  explicit SolveMemo(std::size_t capacity = kDefaultCapacity) : capacity_(capacity) {}

  /// Cached result on a hit; otherwise runs `solve`, stores and returns it.
  /// A capacity of 0 disables caching (every call solves and misses).
  std::pair<TwoStageResult, bool> lookup_or_solve(const MemoKey& key,
                                                  const std::function<TwoStageResult()>& solve,
                                                  WorkCounters* counters = nullptr);

  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }
  std::uint64_t hits() const;
  std::uint64_t lookups() const;
  void clear();

 private:
  using Entry = std::pair<MemoKey, TwoStageResult>;
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::list<Entry> order_;  // most recently used first
  std::unordered_map<MemoKey, std::list<Entry>::iterator, MemoKeyHash> index_;
  std::uint64_t hits_ = 0;
  std::uint64_t lookups_ = 0;
};

}  // namespace pesp
