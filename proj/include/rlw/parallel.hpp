#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace rlw {

/// Worker count from RLW_WORKERS, else the hardware concurrency (min 1).
std::size_t worker_count();

/// Keeps freed buffers in the heap instead of returning them to the OS.
/// Training reallocates the same large matrices every epoch, and on glibc
/// the default mmap round trips cost more than the arithmetic.
void retain_heap_memory();

/// Runs fn(i) for i in [0, count) on up to worker_count() threads.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

/// Evaluates `count` independent chunks; chunk i returns a value and adds
/// its gradient into the zeroed buffer it is handed. Values and gradients
/// are reduced in chunk order, so results do not depend on the worker count.
double reduce_chunks(std::size_t count, std::span<double> gradient,
                     const std::function<double(std::size_t, std::span<double>)>& chunk);

}  // namespace rlw
