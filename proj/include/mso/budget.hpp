#pragma once

#include <atomic>
#include <cstdint>
#include <string>

#include "mso/errors.hpp"

namespace mso {

// Work-unit budget threaded through the exhaustive operations.  One unit
// is roughly one level-0 evaluation or one semigroup product.
class Budget {
 public:
  explicit Budget(std::uint64_t limit = kDefaultLimit) : limit_(limit) {}

  void tick(std::uint64_t n = 1) const {
    used_.fetch_add(n, std::memory_order_relaxed);
    if (used_.load(std::memory_order_relaxed) > limit_)
      throw BudgetExceeded("budget exhausted after " + std::to_string(limit_) +
                           " work units");
  }

  std::uint64_t used() const { return used_.load(std::memory_order_relaxed); }
  std::uint64_t limit() const { return limit_; }

  static constexpr std::uint64_t kDefaultLimit = 500'000'000;

 private:
  std::uint64_t limit_;
  mutable std::atomic<std::uint64_t> used_{0};
};

// Shared default budget for callers that do not pass one explicitly.
Budget& default_budget();

}  // namespace mso
