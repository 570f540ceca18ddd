#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <limits>

#include "json.hpp"

namespace pesp {

/// Machine-independent effort counters, shared across threads.
struct WorkCounters {
  std::atomic<std::uint64_t> subproblem_solves{0};
  std::atomic<std::uint64_t> subproblem_units{0};  // scenario counts of those solves
  std::atomic<std::uint64_t> recourse_evals{0};
  std::atomic<std::uint64_t> nodes{0};
  std::atomic<std::uint64_t> f_evals{0};
  std::atomic<std::uint64_t> memo_lookups{0};
  std::atomic<std::uint64_t> memo_hits{0};

  /// One unit per recourse evaluation plus scenario-count units per solve.
  std::uint64_t work_units() const { return recourse_evals.load() + subproblem_units.load(); }

  void add_solve(std::uint64_t scenarios) {
    subproblem_solves.fetch_add(1, std::memory_order_relaxed);
    subproblem_units.fetch_add(scenarios, std::memory_order_relaxed);
  }
  void add_recourse(std::uint64_t count) {
    recourse_evals.fetch_add(count, std::memory_order_relaxed);
  }

  double hit_rate() const {
    const auto n = memo_lookups.load();
    return n == 0 ? 0.0 : static_cast<double>(memo_hits.load()) / static_cast<double>(n);
  }

  nlohmann::json to_json() const {
    return {{"work_units", work_units()},
            {"subproblem_solves", subproblem_solves.load()},
            {"subproblem_units", subproblem_units.load()},
            {"recourse_evals", recourse_evals.load()},
            {"nodes", nodes.load()},
            {"f_evals", f_evals.load()},
            {"memo_lookups", memo_lookups.load()},
            {"memo_hits", memo_hits.load()}};
  }
};

inline constexpr std::uint64_t kNoLimit = std::numeric_limits<std::uint64_t>::max();

/// Limits on the counters and on wall time; whichever triggers first stops a run.
struct WorkBudget {
  std::uint64_t max_work_units = kNoLimit;
  std::uint64_t max_nodes = kNoLimit;
  std::uint64_t max_f_evals = kNoLimit;
  double max_seconds = std::numeric_limits<double>::infinity();

  bool exhausted(const WorkCounters& c, double elapsed_seconds) const {
    return c.work_units() >= max_work_units || c.nodes.load() >= max_nodes ||
           c.f_evals.load() >= max_f_evals || elapsed_seconds >= max_seconds;
  }
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace pesp
