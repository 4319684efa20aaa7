#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace expcs {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// Plain-text vectors: one ASCII decimal value per line.
void write_vector(std::ostream& out, std::span<const double> v);
void write_counts(std::ostream& out, std::span<const std::uint64_t> v);
std::vector<double> read_vector(std::istream& in);
/// Rejects anything that is not a nonnegative integer.
std::vector<std::uint64_t> read_counts(std::istream& in);

void save_vector(const std::string& path, std::span<const double> v);
void save_counts(const std::string& path, std::span<const std::uint64_t> v);
std::vector<double> load_vector(const std::string& path);
std::vector<std::uint64_t> load_counts(const std::string& path);

/// Whole file as a string; throws ParseError when it cannot be opened.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace expcs
