#pragma once

#include <cstddef>
#include <functional>

namespace wgflow {

/// Worker cap from WGFLOW_THREADS (unset or 0: hardware concurrency).
std::size_t configured_threads();

/// Runs body(begin, end) over a static partition of [0, count) into at most
/// `workers` contiguous chunks. Chunk boundaries depend only on (count,
/// workers); callers write disjoint outputs, so results do not depend on
/// scheduling. The first exception thrown by any chunk is rethrown.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace wgflow
