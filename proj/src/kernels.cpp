#include "expcs/kernels.hpp"

#include <cstdint>

namespace expcs::kernels {

void gather_rows(std::span<const std::size_t> row_ptr, std::span<const std::uint32_t> row_idx,
                 std::span<const double> x, double scale, std::span<double> out) {
  const auto rows = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static) if (out.size() >= kParallelThreshold)
  for (std::int64_t j = 0; j < rows; ++j) {
    double acc = 0.0;
    for (std::size_t p = row_ptr[j]; p < row_ptr[j + 1]; ++p) acc += x[row_idx[p]];
    out[j] = scale * acc;
  }
}

void gather_columns(std::span<const std::uint32_t> columns, std::size_t d,
                    std::span<const double> r, double scale, std::span<double> out) {
  const auto cols = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static) if (out.size() >= kParallelThreshold)
  for (std::int64_t i = 0; i < cols; ++i) {
    const std::uint32_t* col = columns.data() + static_cast<std::size_t>(i) * d;
    double acc = 0.0;
    for (std::size_t t = 0; t < d; ++t) acc += r[col[t]];
    out[i] = scale * acc;
  }
}

}  // namespace expcs::kernels
