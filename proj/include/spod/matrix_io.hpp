#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spod/grid_transport.hpp"

namespace spod::io {

// Binary matrix file layout (all integers little-endian):
//
//   offset  size  field
//   0       6     magic "SPODM1"
//   6       1     dtype tag, 'd' = IEEE-754 binary64
//   7       8     row count M (uint64)
//   15      8     column count N (uint64)
//   23      1     layout tag, 'C' = column-major
//   24      8MN   values, column-major, binary64 little-endian
inline constexpr std::string_view kMatrixMagic = "SPODM1";
inline constexpr char kDtypeFloat64 = 'd';
inline constexpr char kLayoutColumnMajor = 'C';
inline constexpr std::size_t kMatrixHeaderBytes = 24;

std::string encode_matrix(const Matrix& m);
/// Throws IoError on bad magic, unknown tags or a payload of the wrong length.
Matrix decode_matrix(std::string_view bytes);

void write_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix(const std::filesystem::path& path);

/// Comma-separated rows, one matrix row per line. Blank lines are skipped.
Matrix read_matrix_csv(const std::filesystem::path& path);

/// One value per line, printed with round-trip precision.
void write_vector_text(const std::filesystem::path& path, std::span<const double> values);
std::vector<double> read_vector_text(const std::filesystem::path& path);

/// `key=value` lines; '#' starts a comment line.
void write_key_values(const std::filesystem::path& path, const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// "%.17g" rendering.
std::string format_exact(double v);

}  // namespace spod::io
