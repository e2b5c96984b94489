#pragma once

// Bulk-synchronous fan-out. Work is split into chunks whose boundaries depend
// only on the item count, so reductions performed chunk by chunk in index
// order give identical results for any worker count.

#include <cstddef>
#include <functional>

namespace dproj {

/// Caps the number of worker threads (0 restores the hardware default).
void set_worker_limit(unsigned limit) noexcept;
[[nodiscard]] unsigned worker_limit() noexcept;

/// Calls fn(chunk) for chunk in [0, chunk_count), possibly concurrently.
void parallel_chunks(std::size_t chunk_count, const std::function<void(std::size_t)>& fn);

} // namespace dproj
