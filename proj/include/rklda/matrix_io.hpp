#pragma once

#include <rklda/matrix.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

namespace rklda::io {

// "RKM1" dense binary layout:
//   bytes 0..3   magic "RKM1"
//   bytes 4..11  row count, uint64 little-endian
//   bytes 12..19 column count, uint64 little-endian
//   then rows*cols IEEE-754 binary64 values, little-endian, row-major
inline constexpr std::string_view kRkm1Magic = "RKM1";
inline constexpr int kRkm1Version = 1;

std::string encode_rkm1(const DenseMatrix& m);
DenseMatrix decode_rkm1(std::string_view bytes);

void write_rkm1(const std::filesystem::path& path, const DenseMatrix& m);
DenseMatrix read_rkm1(const std::filesystem::path& path);

/// Comma-separated values, one observation per line. Blank lines are skipped.
DenseMatrix parse_csv(std::istream& in, bool has_header);
DenseMatrix read_csv(const std::filesystem::path& path, bool has_header);

/// Matrix Market "coordinate" (real, integer or pattern; general or symmetric)
/// and "array" (real or integer, general) formats. 1-based indices on disk.
RawMatrix parse_matrix_market(std::istream& in);
RawMatrix read_matrix_market(const std::filesystem::path& path);

enum class MatrixFormat { kAuto, kCsv, kMatrixMarket, kRkm1 };

MatrixFormat parse_matrix_format(std::string_view name);

/// Reads a data matrix. kAuto sniffs the RKM1 magic and the Matrix Market
/// banner and falls back to CSV.
RawMatrix read_matrix(const std::filesystem::path& path, MatrixFormat format = MatrixFormat::kAuto,
                      bool csv_header = false);

/// Whole-file read; throws InvalidData when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes through a temporary sibling file and renames it into place, so a
/// failed write never leaves a partial file at `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace rklda::io
