#pragma once

#include <cstddef>
#include <functional>

namespace courtgrid {

/// Worker count used by parallel_for. Defaults to 1.
void set_num_threads(int n);
int num_threads();

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunks are
/// disjoint, so callers writing to per-index slots stay deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace courtgrid
