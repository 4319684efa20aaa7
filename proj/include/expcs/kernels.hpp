#pragma once

// OpenMP kernels for the hot loops. Every kernel writes each output element
// from a single thread with a fixed summation order, so results do not
// depend on the number of threads. Serial reference versions used by the
// tests and benchmarks live in reference.hpp.

#include <cstddef>
#include <cstdint>
#include <span>

namespace expcs::kernels {

/// out[j] = scale * sum_{p in [row_ptr[j], row_ptr[j+1])} x[row_idx[p]]
void gather_rows(std::span<const std::size_t> row_ptr, std::span<const std::uint32_t> row_idx,
                 std::span<const double> x, double scale, std::span<double> out);

/// out[i] = scale * sum_{t < d} r[columns[i * d + t]]
void gather_columns(std::span<const std::uint32_t> columns, std::size_t d,
                    std::span<const double> r, double scale, std::span<double> out);

/// Loops shorter than this stay on one thread.
inline constexpr std::size_t kParallelThreshold = 4096;

}  // namespace expcs::kernels
