#pragma once

#include <rklda/common.hpp>

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace rklda {

/// Class labels mapped to dense indices 0..g-1 in order of first appearance.
class LabelVector {
 public:
  Index size() const { return static_cast<Index>(class_of_.size()); }
  Index num_classes() const { return static_cast<Index>(names_.size()); }

  /// Class index of observation i.
  Index class_of(Index i) const { return class_of_[static_cast<std::size_t>(i)]; }
  const std::vector<Index>& class_indices() const { return class_of_; }
  const std::vector<std::string>& class_names() const { return names_; }
  const std::vector<Index>& counts() const { return counts_; }

  /// Labels of the given observations, keeping this vector's class numbering.
  /// Throws ClassCoverageError when some class has no member in the subset.
  LabelVector subset(std::span<const Index> rows) const;

  /// Labels over the given class numbering. Every class in `names` must occur.
  static LabelVector from_indices(std::vector<Index> class_of, std::vector<std::string> names);

 private:
  friend LabelVector index_labels(std::span<const std::string> raw);

  std::vector<Index> class_of_;
  std::vector<std::string> names_;
  std::vector<Index> counts_;
};

/// Throws InvalidData for empty input and DegenerateLabels for fewer than two classes.
LabelVector index_labels(std::span<const std::string> raw);

/// The recoded n x g label matrix with entries sqrt(n/n_j) - sqrt(n_j/n) in the
/// member column and -sqrt(n_j/n) elsewhere. Its columns sum to zero exactly in
/// exact arithmetic, so it is already column-centered.
class IndicatorMatrix {
 public:
  const DenseMatrix& values() const { return values_; }
  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }

 private:
  friend IndicatorMatrix encode_labels(const LabelVector& labels);
  DenseMatrix values_;
};

/// Throws std::logic_error if the zero column-sum check fails (an encoding bug).
IndicatorMatrix encode_labels(const LabelVector& labels);

namespace io {

/// One token per line; trailing whitespace and carriage returns are stripped,
/// blank lines skipped.
std::vector<std::string> parse_label_lines(std::istream& in);

/// A column of a CSV file, by zero-based index.
std::vector<std::string> parse_label_column(std::istream& in, std::size_t column, bool has_header);

std::vector<std::string> read_labels(const std::filesystem::path& path);
std::vector<std::string> read_label_column(const std::filesystem::path& path, std::size_t column,
                                           bool has_header);

}  // namespace io

}  // namespace rklda
