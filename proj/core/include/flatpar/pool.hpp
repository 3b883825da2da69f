#pragma once

#include <cstddef>
#include <functional>

namespace flatpar {

// Number of workers used by the combinators. Resolution order:
// programmatic set_thread_count, then the FLATPAR_THREADS environment
// variable, then hardware concurrency.
int thread_count();

// n > 0 pins the worker count; n == 0 resets to the environment/hardware
// default.
void set_thread_count(int n);

// Runs body(i) for i in [0, n). Iterations must write to disjoint state.
// Nested calls (from inside a worker) run inline on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace flatpar
