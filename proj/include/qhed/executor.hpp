#pragma once

#include <cstddef>
#include <functional>
#include <string>

namespace qhed {

/// Runs task(i) for every i in [0, count) on `workers` threads (workers >= 1).
/// Tasks must write only to their own slot of any shared output. On failure no
/// further tasks start; the lowest-indexed failure seen is rethrown as an Error
/// of the same kind whose message starts with describe(i).
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& task,
                  const std::function<std::string(std::size_t)>& describe);

}  // namespace qhed
