#pragma once

#include <cstddef>
#include <functional>

namespace grushin {

/// Process-wide worker count used by parallel_for. Defaults to 1.
void set_num_threads(int n);
int num_threads();

/// Runs body(i) for i in [0, n) on up to num_threads() workers.
///
/// Work is split into contiguous static blocks. Callers write results into
/// per-index slots and reduce afterwards, so results never depend on the
/// worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace grushin
