#pragma once

#include <atomic>
#include <cstdint>

#include "pipq/spin.hpp"

namespace pipq {

// Sequence-counter spin lock: even = unlocked, odd = locked. Acquisition is a
// CAS from an observed even value to that value + 1; release adds one more.
// The counter is monotone, so a waiter can watch for any change of the value
// it observed instead of re-CASing. At most two threads ever contend for one
// instance (the owning thread and the current coordinator).
class SeqLock {
 public:
  std::uint64_t load(std::memory_order mo = std::memory_order_acquire) const {
    return c_.load(mo);
  }

  static bool is_locked(std::uint64_t v) { return (v & 1) != 0; }

  // Single CAS attempt from an observed even value.
  bool try_lock_from(std::uint64_t even_val) {
    return c_.compare_exchange_strong(even_val, even_val + 1,
                                      std::memory_order_acquire,
                                      std::memory_order_relaxed);
  }

  // One try: succeeds only if currently unlocked and the CAS lands.
  bool try_lock() {
    std::uint64_t v = c_.load(std::memory_order_relaxed);
    return !is_locked(v) && try_lock_from(v);
  }

  void lock() {
    Spinner sp;
    for (;;) {
      std::uint64_t v = c_.load(std::memory_order_relaxed);
      if (!is_locked(v) && try_lock_from(v)) return;
      sp.spin();
    }
  }

  void unlock() {
    c_.store(c_.load(std::memory_order_relaxed) + 1, std::memory_order_release);
  }

 private:
  std::atomic<std::uint64_t> c_{0};
};

}  // namespace pipq
