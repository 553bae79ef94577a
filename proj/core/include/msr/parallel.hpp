#pragma once

#include <cstdint>
#include <functional>

namespace msr {

/// Worker cap: MSR_THREADS when set (clamped to >= 1), otherwise the
/// hardware concurrency.
int worker_count();

/// Runs fn(i) for i in [0, n). With threads <= 1 the loop is inline;
/// otherwise a small pool pulls indices from a shared counter. Callers
/// keep determinism by writing results into slot i only.
void parallel_for(std::int64_t n, int threads,
                  const std::function<void(std::int64_t)>& fn);

}  // namespace msr
