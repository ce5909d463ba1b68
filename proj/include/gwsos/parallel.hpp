#pragma once

#include <cstddef>
#include <functional>

namespace gwsos {

// Worker count from GWSOS_JOBS, else 1.
int default_jobs();

// Runs fn(i) for i in [0, count) on up to `jobs` threads. Exceptions are rethrown
// after all workers stop (the one from the lowest index wins).
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace gwsos
