#include "expcs/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "expcs/error.hpp"

namespace expcs {

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), res.ptr};
}

void write_vector(std::ostream& out, std::span<const double> v) {
  for (double x : v) out << format_double(x) << '\n';
}

void write_counts(std::ostream& out, std::span<const std::uint64_t> v) {
  for (auto c : v) out << c << '\n';
}

namespace {

template <class T>
T parse_token(const std::string& token, std::size_t line) {
  T value{};
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last) {
    throw ParseError("line " + std::to_string(line) + ": cannot parse '" + token + "'");
  }
  return value;
}

template <class T>
std::vector<T> read_lines(std::istream& in) {
  std::vector<T> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string token;
    if (!(ss >> token)) continue;  // blank line
    std::string extra;
    if (ss >> extra) {
      throw ParseError("line " + std::to_string(lineno) + ": expected one value per line");
    }
    out.push_back(parse_token<T>(token, lineno));
  }
  return out;
}

}  // namespace

std::vector<double> read_vector(std::istream& in) { return read_lines<double>(in); }

std::vector<std::uint64_t> read_counts(std::istream& in) {
  return read_lines<std::uint64_t>(in);
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << contents;
  if (!out) throw Error("write to '" + path + "' failed");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_vector(const std::string& path, std::span<const double> v) {
  std::ostringstream ss;
  write_vector(ss, v);
  write_file(path, ss.str());
}

void save_counts(const std::string& path, std::span<const std::uint64_t> v) {
  std::ostringstream ss;
  write_counts(ss, v);
  write_file(path, ss.str());
}

std::vector<double> load_vector(const std::string& path) {
  std::istringstream ss(read_file(path));
  return read_vector(ss);
}

std::vector<std::uint64_t> load_counts(const std::string& path) {
  std::istringstream ss(read_file(path));
  return read_counts(ss);
}

}  // namespace expcs
