#pragma once

#include <functional>

namespace safempd {

/// Effective worker count: the thread-local override if set, else the
/// SAFEMPD_WORKERS environment variable, else hardware concurrency.
/// Worker count never affects results, only wall time.
int worker_count();

/// Override the worker count for the calling thread (0 clears the override).
/// Used by the suite runner to keep trial-level and candidate-level
/// parallelism from multiplying.
void set_worker_override(int n);

/// Run fn(i) for i in [0, n). Items are partitioned into contiguous chunks,
/// one per worker; fn must only write to state owned by item i.
void parallel_for(int n, const std::function<void(int)>& fn);

} // namespace safempd
