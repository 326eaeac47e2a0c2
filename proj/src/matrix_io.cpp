#include <rklda/matrix_io.hpp>

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace rklda::io {

namespace {

void put_u64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffU));
}

std::uint64_t get_u64(std::string_view bytes, std::size_t offset) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + b])) << (8 * b);
  }
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view token, std::size_t line) {
  token = trim(token);
  double value = 0.0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end || token.empty()) {
    throw InvalidData("line " + std::to_string(line) + ": cannot parse number '" +
                      std::string(token) + "'");
  }
  if (!std::isfinite(value)) {
    throw InvalidData("line " + std::to_string(line) + ": non-finite value");
  }
  return value;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidData("cannot open " + path.string());
  return in;
}

}  // namespace

std::string encode_rkm1(const DenseMatrix& m) {
  std::string out(kRkm1Magic);
  out.reserve(20 + 8 * static_cast<std::size_t>(m.size()));
  put_u64(out, static_cast<std::uint64_t>(m.rows()));
  put_u64(out, static_cast<std::uint64_t>(m.cols()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) put_u64(out, std::bit_cast<std::uint64_t>(m(i, j)));
  }
  return out;
}

DenseMatrix decode_rkm1(std::string_view bytes) {
  if (bytes.size() < 20 || bytes.substr(0, 4) != kRkm1Magic) {
    throw InvalidData("not an RKM1 file (bad magic or truncated header)");
  }
  const std::uint64_t rows = get_u64(bytes, 4);
  const std::uint64_t cols = get_u64(bytes, 12);
  if (cols != 0 && rows > (bytes.size() - 20) / 8 / cols) {
    throw InvalidData("RKM1 payload shorter than declared shape");
  }
  if (bytes.size() != 20 + 8 * rows * cols) {
    throw InvalidData("RKM1 payload size does not match declared shape " + std::to_string(rows) +
                      "x" + std::to_string(cols));
  }
  DenseMatrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  std::size_t offset = 20;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j, offset += 8) {
      m(i, j) = std::bit_cast<double>(get_u64(bytes, offset));
    }
  }
  return m;
}

void write_rkm1(const std::filesystem::path& path, const DenseMatrix& m) {
  write_file_atomic(path, encode_rkm1(m));
}

DenseMatrix read_rkm1(const std::filesystem::path& path) { return decode_rkm1(read_file(path)); }

DenseMatrix parse_csv(std::istream& in, bool has_header) {
  std::vector<double> values;
  Index cols = -1;
  Index rows = 0;
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = has_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    Index count = 0;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      values.push_back(parse_double(rest.substr(0, comma), line_no));
      ++count;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cols < 0) cols = count;
    if (count != cols) {
      throw InvalidData("line " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                        " fields, found " + std::to_string(count));
    }
    ++rows;
  }
  if (rows == 0) throw InvalidData("CSV contains no data rows");
  return Eigen::Map<DenseMatrix>(values.data(), rows, cols);
}

DenseMatrix read_csv(const std::filesystem::path& path, bool has_header) {
  auto in = open_or_throw(path);
  return parse_csv(in, has_header);
}

RawMatrix parse_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidData("empty Matrix Market file");
  std::istringstream banner(line);
  std::string tag, object, layout, field, symmetry;
  banner >> tag >> object >> layout >> field >> symmetry;
  if (lower(tag) != "%%matrixmarket" || lower(object) != "matrix") {
    throw InvalidData("missing %%MatrixMarket matrix banner");
  }
  layout = lower(layout);
  field = lower(field);
  symmetry = lower(symmetry);
  if (field != "real" && field != "integer" && field != "double" && field != "pattern") {
    throw InvalidData("unsupported Matrix Market field '" + field + "'");
  }
  if (symmetry != "general" && symmetry != "symmetric") {
    throw InvalidData("unsupported Matrix Market symmetry '" + symmetry + "'");
  }

  std::size_t line_no = 1;
  auto next_content_line = [&](std::string& out) {
    while (std::getline(in, out)) {
      ++line_no;
      const auto t = trim(out);
      if (!t.empty() && t.front() != '%') return true;
    }
    return false;
  };

  if (!next_content_line(line)) throw InvalidData("Matrix Market file missing size line");
  std::istringstream size_line(line);

  if (layout == "array") {
    if (field == "pattern" || symmetry != "general") {
      throw InvalidData("array layout supports general real/integer only");
    }
    long long rows = 0, cols = 0;
    if (!(size_line >> rows >> cols)) throw InvalidData("bad Matrix Market size line");
    if (rows < 1 || cols < 1) throw InvalidData("Matrix Market dimensions must be positive");
    DenseMatrix m(rows, cols);
    // Array layout is column-major on disk.
    for (long long j = 0; j < cols; ++j) {
      for (long long i = 0; i < rows; ++i) {
        if (!next_content_line(line)) throw InvalidData("Matrix Market array truncated");
        m(i, j) = parse_double(line, line_no);
      }
    }
    return RawMatrix::dense(std::move(m));
  }
  if (layout != "coordinate") throw InvalidData("unsupported Matrix Market layout '" + layout + "'");

  long long rows = 0, cols = 0, nnz = 0;
  if (!(size_line >> rows >> cols >> nnz) || nnz < 0) {
    throw InvalidData("bad Matrix Market size line");
  }
  if (rows < 1 || cols < 1) throw InvalidData("Matrix Market dimensions must be positive");
  std::vector<Eigen::Triplet<double, std::int64_t>> triplets;
  triplets.reserve(static_cast<std::size_t>(nnz) * (symmetry == "symmetric" ? 2 : 1));
  for (long long k = 0; k < nnz; ++k) {
    if (!next_content_line(line)) throw InvalidData("Matrix Market file has fewer entries than declared");
    std::istringstream entry(line);
    long long i = 0, j = 0;
    if (!(entry >> i >> j)) throw InvalidData("line " + std::to_string(line_no) + ": bad entry");
    double value = 1.0;
    if (field != "pattern") {
      std::string token;
      if (!(entry >> token)) throw InvalidData("line " + std::to_string(line_no) + ": missing value");
      value = parse_double(token, line_no);
    }
    if (i < 1 || i > rows || j < 1 || j > cols) {
      throw InvalidData("line " + std::to_string(line_no) + ": index out of bounds");
    }
    triplets.emplace_back(i - 1, j - 1, value);
    if (symmetry == "symmetric" && i != j) triplets.emplace_back(j - 1, i - 1, value);
  }
  return RawMatrix::from_triplets(rows, cols, std::move(triplets));
}

RawMatrix read_matrix_market(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_matrix_market(in);
}

MatrixFormat parse_matrix_format(std::string_view name) {
  if (name == "auto") return MatrixFormat::kAuto;
  if (name == "csv") return MatrixFormat::kCsv;
  if (name == "mtx" || name == "mm") return MatrixFormat::kMatrixMarket;
  if (name == "rkm1") return MatrixFormat::kRkm1;
  throw InvalidData("unknown matrix format '" + std::string(name) + "'");
}

RawMatrix read_matrix(const std::filesystem::path& path, MatrixFormat format, bool csv_header) {
  if (format == MatrixFormat::kAuto) {
    auto in = open_or_throw(path);
    char head[14] = {};
    in.read(head, sizeof head);
    const std::string_view sniff(head, static_cast<std::size_t>(in.gcount()));
    if (sniff.substr(0, 4) == kRkm1Magic) {
      format = MatrixFormat::kRkm1;
    } else if (lower(std::string(sniff)).starts_with("%%matrixmarket")) {
      format = MatrixFormat::kMatrixMarket;
    } else {
      format = MatrixFormat::kCsv;
    }
  }
  switch (format) {
    case MatrixFormat::kRkm1:
      return RawMatrix::dense(read_rkm1(path));
    case MatrixFormat::kMatrixMarket:
      return read_matrix_market(path);
    default:
      return RawMatrix::dense(read_csv(path, csv_header));
  }
}

std::string read_file(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  namespace fs = std::filesystem;
  const fs::path target = fs::absolute(path);
  const std::string suffix = ".tmp." + std::to_string(::getpid());
  const fs::path sibling = target.parent_path() / ("." + target.filename().string() + suffix);

  fs::path staging = sibling;
  if (const char* tmpdir = std::getenv("RKLDA_TMPDIR"); tmpdir != nullptr && *tmpdir != '\0') {
    staging = fs::path(tmpdir) / (target.filename().string() + suffix);
  }
  {
    std::ofstream out(staging, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidData("cannot write " + staging.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ignored;
      fs::remove(staging, ignored);
      throw InvalidData("write failed for " + staging.string());
    }
  }
  std::error_code ec;
  fs::rename(staging, target, ec);
  if (ec && staging != sibling) {
    // Staging directory on another filesystem: hop through a sibling file.
    fs::copy_file(staging, sibling, fs::copy_options::overwrite_existing, ec);
    std::error_code ignored;
    fs::remove(staging, ignored);
    if (!ec) fs::rename(sibling, target, ec);
  }
  if (ec) {
    std::error_code ignored;
    fs::remove(sibling, ignored);
    throw InvalidData("cannot move output into place at " + target.string() + ": " + ec.message());
  }
}

}  // namespace rklda::io
