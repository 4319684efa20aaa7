#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace expcs {

/// Row-major grid x(i, j), i < rows, j < cols.
struct Image2D {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Image2D(std::size_t rows, std::size_t cols, std::vector<double> values);

  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

enum class TvVariant {
  global_root,  ///< sqrt of the sum of all squared forward differences
  isotropic,    ///< sum over pixels of sqrt(dx^2 + dy^2), for comparison only
};

/// Total variation from forward differences x(i+1, j) - x(i, j) and
/// x(i, j+1) - x(i, j); differences that would leave the grid are omitted.
double tv_norm(const Image2D& img, TvVariant variant = TvVariant::global_root);

/// Text format: "rows cols" then rows * cols values in row-major order.
Image2D read_image(std::istream& in);
Image2D load_image(const std::string& path);

}  // namespace expcs
