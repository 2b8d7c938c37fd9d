#pragma once

#include <functional>

namespace disloc {

// Runs body(0), ..., body(n - 1) on up to `jobs` threads. Every index runs
// exactly once; the first exception thrown (by index order) is rethrown.
void parallel_for(int n, int jobs, const std::function<void(int)>& body);

}  // namespace disloc
