#pragma once

#include <cstdio>
#include <cstdlib>

#include <sched.h>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#endif

namespace pipq {

inline void cpu_relax() {
#if defined(__x86_64__) || defined(__i386__)
  _mm_pause();
#elif defined(__aarch64__)
  asm volatile("yield" ::: "memory");
#else
  asm volatile("" ::: "memory");
#endif
}

// Pause-hint spinner that yields the core every so often. Yielding matters on
// oversubscribed hosts where the thread we are waiting on may be descheduled;
// it never sleeps.
class Spinner {
 public:
  void spin() {
    if (++n_ % 256 == 0)
      sched_yield();
    else
      cpu_relax();
  }

 private:
  unsigned n_ = 0;
};

// Always-on invariant check for cheap assertions on concurrent transitions.
#define PIPQ_CHECK(cond, msg)                                                      \
  do {                                                                             \
    if (!(cond)) {                                                                 \
      std::fprintf(stderr, "invariant violated at %s:%d: %s\n", __FILE__, __LINE__, \
                   (msg));                                                         \
      std::abort();                                                                \
    }                                                                              \
  } while (0)

}  // namespace pipq
