#include <rklda/labels.hpp>

#include <fstream>
#include <istream>
#include <stdexcept>
#include <unordered_map>

namespace rklda {

namespace {

void check_counts(const std::vector<Index>& counts) {
  if (counts.size() < 2) {
    throw DegenerateLabels("need at least two classes, found " + std::to_string(counts.size()));
  }
}

}  // namespace

LabelVector index_labels(std::span<const std::string> raw) {
  if (raw.empty()) throw InvalidData("label sequence is empty");
  LabelVector out;
  std::unordered_map<std::string, Index> lookup;
  out.class_of_.reserve(raw.size());
  for (const auto& token : raw) {
    auto [it, inserted] = lookup.try_emplace(token, static_cast<Index>(out.names_.size()));
    if (inserted) {
      out.names_.push_back(token);
      out.counts_.push_back(0);
    }
    out.class_of_.push_back(it->second);
    ++out.counts_[static_cast<std::size_t>(it->second)];
  }
  check_counts(out.counts_);
  return out;
}

LabelVector LabelVector::from_indices(std::vector<Index> class_of, std::vector<std::string> names) {
  if (class_of.empty()) throw InvalidData("label sequence is empty");
  LabelVector out;
  out.counts_.assign(names.size(), 0);
  for (Index c : class_of) {
    if (c < 0 || c >= static_cast<Index>(names.size())) {
      throw InvalidData("class index " + std::to_string(c) + " out of range");
    }
    ++out.counts_[static_cast<std::size_t>(c)];
  }
  for (std::size_t j = 0; j < out.counts_.size(); ++j) {
    if (out.counts_[j] == 0) throw ClassCoverageError("class '" + names[j] + "' has no members");
  }
  check_counts(out.counts_);
  out.class_of_ = std::move(class_of);
  out.names_ = std::move(names);
  return out;
}

LabelVector LabelVector::subset(std::span<const Index> rows) const {
  std::vector<Index> picked;
  picked.reserve(rows.size());
  for (Index r : rows) {
    if (r < 0 || r >= size()) throw IndexError("label row " + std::to_string(r) + " out of range");
    picked.push_back(class_of(r));
  }
  return from_indices(std::move(picked), names_);
}

IndicatorMatrix encode_labels(const LabelVector& labels) {
  const Index n = labels.size();
  const Index g = labels.num_classes();
  const double nd = static_cast<double>(n);

  std::vector<double> member(static_cast<std::size_t>(g));
  std::vector<double> other(static_cast<std::size_t>(g));
  for (Index j = 0; j < g; ++j) {
    const double nj = static_cast<double>(labels.counts()[static_cast<std::size_t>(j)]);
    member[j] = std::sqrt(nd / nj) - std::sqrt(nj / nd);
    other[j] = -std::sqrt(nj / nd);
  }

  IndicatorMatrix Y;
  Y.values_.resize(n, g);
  for (Index i = 0; i < n; ++i) {
    const Index c = labels.class_of(i);
    for (Index j = 0; j < g; ++j) Y.values_(i, j) = (j == c) ? member[j] : other[j];
  }

  const double tol = 1e-10 * std::sqrt(nd);
  const RowVector sums = Y.values_.colwise().sum();
  for (Index j = 0; j < g; ++j) {
    if (std::abs(sums[j]) > tol) {
      throw std::logic_error("indicator column " + std::to_string(j) + " sums to " +
                             std::to_string(sums[j]));
    }
  }
  return Y;
}

namespace io {

namespace {

std::string strip(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && (s[start] == ' ' || s[start] == '\t')) ++start;
  return s.substr(start);
}

std::ifstream open_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidData("cannot open " + path.string());
  return in;
}

}  // namespace

std::vector<std::string> parse_label_lines(std::istream& in) {
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    line = strip(std::move(line));
    if (!line.empty()) out.push_back(std::move(line));
  }
  return out;
}

std::vector<std::string> parse_label_column(std::istream& in, std::size_t column, bool has_header) {
  std::vector<std::string> out;
  std::string line;
  std::size_t line_no = 0;
  bool skip = has_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty()) continue;
    if (skip) {
      skip = false;
      continue;
    }
    std::size_t start = 0;
    for (std::size_t c = 0; c < column; ++c) {
      start = line.find(',', start);
      if (start == std::string::npos) {
        throw InvalidData("line " + std::to_string(line_no) + ": no column " +
                          std::to_string(column));
      }
      ++start;
    }
    const auto end = line.find(',', start);
    out.push_back(strip(line.substr(start, end == std::string::npos ? end : end - start)));
  }
  return out;
}

std::vector<std::string> read_labels(const std::filesystem::path& path) {
  auto in = open_labels(path);
  return parse_label_lines(in);
}

std::vector<std::string> read_label_column(const std::filesystem::path& path, std::size_t column,
                                           bool has_header) {
  auto in = open_labels(path);
  return parse_label_column(in, column, has_header);
}

}  // namespace io

}  // namespace rklda
