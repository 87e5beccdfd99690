#pragma once

namespace stereonormal {

/// Thread count for the OpenMP kernels. n <= 0 restores the default.
void set_thread_count(int n);
int thread_count();

/// STEREONORMAL_THREADS if set to a positive integer, else hardware parallelism.
int default_thread_count();

/// True when the library was built with OpenMP.
bool parallel_enabled();

}  // namespace stereonormal
