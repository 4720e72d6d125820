#pragma once

#include <cstddef>
#include <functional>

namespace iel {

/// Worker count used by parallel_for. Defaults to std::thread::hardware_concurrency().
void set_thread_count(int n);
int thread_count();

/// Calls fn(i) for every i in [0, count). Indices are handed out dynamically, so callers
/// must write results into per-index slots and reduce them in index order afterwards; that
/// keeps results independent of the worker count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace iel
