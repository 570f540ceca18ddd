#include "pesp/memo.hpp"

#include "pesp/rng.hpp"

namespace pesp {

MemoKey MemoKey::from_sorted(std::span<const std::size_t> indices, std::size_t sample_size) {
  MemoKey key;
  if (sample_size <= 64) {
    for (std::size_t i : indices) key.a |= std::uint64_t{1} << i;
    return key;
  }
  // Two independently seeded chains over the length and the indices.
  key.digest = true;
  key.a = mix64(0x243F6A8885A308D3ULL ^ indices.size());
  key.b = mix64(0x13198A2E03707344ULL + indices.size());
  for (std::size_t i : indices) {
    key.a = mix64(key.a ^ mix64(i));
    key.b = mix64(key.b + mix64(~i) * 0x9E3779B97F4A7C15ULL);
  }
  return key;
}

std::size_t MemoKeyHash::operator()(const MemoKey& k) const noexcept {
  return static_cast<std::size_t>(mix64(k.a ^ mix64(k.b + (k.digest ? 1U : 0U))));
}

std::pair<TwoStageResult, bool> SolveMemo::lookup_or_solve(const MemoKey& key,
                                                           const std::function<TwoStageResult()>& solve,
                                                           WorkCounters* counters) {
  if (capacity_ == 0) return {solve(), false};
  if (counters != nullptr) counters->memo_lookups.fetch_add(1, std::memory_order_relaxed);
  {
    std::lock_guard lock(mutex_);
    ++lookups_;
    if (auto it = index_.find(key); it != index_.end()) {
      order_.splice(order_.begin(), order_, it->second);
      ++hits_;
      if (counters != nullptr) counters->memo_hits.fetch_add(1, std::memory_order_relaxed);
      return {it->second->second, true};
    }
  }
  TwoStageResult result = solve();
  std::lock_guard lock(mutex_);
  if (index_.find(key) == index_.end()) {
    order_.emplace_front(key, result);
    index_.emplace(key, order_.begin());
    if (order_.size() > capacity_) {
      index_.erase(order_.back().first);
      order_.pop_back();
    }
  }
  return {std::move(result), false};
}

std::size_t SolveMemo::size() const {
  std::lock_guard lock(mutex_);
  return order_.size();
}

std::uint64_t SolveMemo::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

std::uint64_t SolveMemo::lookups() const {
  std::lock_guard lock(mutex_);
  return lookups_;
}

void SolveMemo::clear() {
  std::lock_guard lock(mutex_);
  order_.clear();
  index_.clear();
}

}  // namespace pesp
