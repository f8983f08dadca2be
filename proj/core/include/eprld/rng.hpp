#pragma once

// Reproducible random streams and an order-preserving parallel loop.
// Trajectory i of a run with seed s always draws from the same engine,
// whatever the number of worker threads.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

namespace eprld {

using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Independent engine for work item `index` of a run seeded with `seed`.
Engine substream(std::uint64_t seed, std::uint64_t index);

/// 0 means "all hardware threads"; the result is always at least 1.
unsigned resolve_jobs(unsigned hint);

/// Calls body(i) for i in [0, n) on up to `jobs` threads. Each index is
/// handled exactly once; callers write results by index, so output does
/// not depend on scheduling. The first exception thrown is rethrown.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& body);

}  // namespace eprld
