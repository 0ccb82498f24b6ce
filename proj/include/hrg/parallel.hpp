#pragma once

#include <functional>

namespace hrg {

// Worker count used by grid evaluations and chain runs. Defaults to the
// HRG_THREADS environment variable, else 1.
int thread_count();
void set_thread_count(int n);

// Runs body(i) for i in [0, n). Work is split into contiguous slots, so each
// index is always handled the same way regardless of the worker count and
// results written per index are identical to the serial run.
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace hrg
