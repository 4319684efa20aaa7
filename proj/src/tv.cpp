#include "expcs/tv.hpp"

#include <cmath>
#include <istream>
#include <sstream>

#include "expcs/error.hpp"
#include "expcs/io.hpp"

namespace expcs {

Image2D::Image2D(std::size_t r, std::size_t c, std::vector<double> v)
    : rows(r), cols(c), values(std::move(v)) {
  if (rows == 0 || cols == 0) throw ParameterError("image needs at least one row and column");
  if (values.size() != rows * cols) throw DimensionError("image value count != rows * cols");
  for (double x : values) {
    if (!std::isfinite(x)) throw DomainError("image values must be finite");
  }
}

double tv_norm(const Image2D& img, TvVariant variant) {
  double total = 0.0;
  for (std::size_t i = 0; i < img.rows; ++i) {
    for (std::size_t j = 0; j < img.cols; ++j) {
      const double down = i + 1 < img.rows ? img.at(i + 1, j) - img.at(i, j) : 0.0;
      const double right = j + 1 < img.cols ? img.at(i, j + 1) - img.at(i, j) : 0.0;
      const double sq = down * down + right * right;
      total += variant == TvVariant::global_root ? sq : std::sqrt(sq);
    }
  }
  return variant == TvVariant::global_root ? std::sqrt(total) : total;
}

Image2D read_image(std::istream& in) {
  long long rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows <= 0 || cols <= 0) {
    throw ParseError("image header must be 'rows cols' with positive sizes");
  }
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(rows * cols));
  std::string token;
  while (in >> token) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(token, &used));
      if (used != token.size()) throw ParseError("bad image value '" + token + "'");
    } catch (const std::logic_error&) {
      throw ParseError("bad image value '" + token + "'");
    }
  }
  if (values.size() != static_cast<std::size_t>(rows * cols)) {
    throw ParseError("image has " + std::to_string(values.size()) + " values, expected " +
                     std::to_string(rows * cols));
  }
  return Image2D(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), std::move(values));
}

Image2D load_image(const std::string& path) {
  std::istringstream ss(read_file(path));
  return read_image(ss);
}

}  // namespace expcs
