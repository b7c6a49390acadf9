#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "normreg/error.hpp"

namespace normreg {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;  // column-major
using Vector = Eigen::VectorXd;

enum class FeatureKind { Binary, Continuous };

inline const char* to_string(FeatureKind kind) {
  return kind == FeatureKind::Binary ? "binary" : "continuous";
}

/// True when every entry of the column is exactly 0 or 1.
template <class Col>
bool is_binary_column(const Col& col) {
  for (Index i = 0; i < col.size(); ++i) {
    if (col(i) != 0.0 && col(i) != 1.0) return false;
  }
  return true;
}

/// Dense design matrix, response and per-column kind tags.
///
/// Raw datasets enforce that Binary columns hold only {0, 1}. Datasets
/// produced by normalization keep the kind tags as metadata only.
class Dataset {
 public:
  Dataset() = default;

  /// Builds a raw dataset. Empty `kinds` means "infer from the values".
  Dataset(Matrix x, Vector y, std::vector<FeatureKind> kinds = {},
          std::vector<std::string> names = {})
      : x_(std::move(x)), y_(std::move(y)), kinds_(std::move(kinds)), names_(std::move(names)) {
    validate_shape();
    if (kinds_.empty()) {
      kinds_.reserve(static_cast<std::size_t>(x_.cols()));
      for (Index j = 0; j < x_.cols(); ++j) {
        kinds_.push_back(is_binary_column(x_.col(j)) ? FeatureKind::Binary
                                                     : FeatureKind::Continuous);
      }
    } else {
      for (Index j = 0; j < x_.cols(); ++j) {
        if (kinds_[static_cast<std::size_t>(j)] == FeatureKind::Binary &&
            !is_binary_column(x_.col(j))) {
          throw DomainError("column " + std::to_string(j) +
                            " is tagged binary but holds values other than 0 and 1");
        }
      }
    }
  }

  /// Builds a dataset holding already-transformed columns. Empty `kinds`
  /// tags every column continuous.
  static Dataset transformed(Matrix x, Vector y, std::vector<FeatureKind> kinds,
                             std::vector<std::string> names) {
    Dataset d;
    if (kinds.empty()) kinds.assign(static_cast<std::size_t>(x.cols()), FeatureKind::Continuous);
    d.x_ = std::move(x);
    d.y_ = std::move(y);
    d.kinds_ = std::move(kinds);
    d.names_ = std::move(names);
    d.transformed_ = true;
    d.validate_shape();
    return d;
  }

  const Matrix& x() const noexcept { return x_; }
  const Vector& y() const noexcept { return y_; }
  const std::vector<FeatureKind>& kinds() const noexcept { return kinds_; }
  const std::vector<std::string>& names() const noexcept { return names_; }

  Index rows() const noexcept { return x_.rows(); }
  Index cols() const noexcept { return x_.cols(); }
  double operator()(Index i, Index j) const { return x_(i, j); }
  FeatureKind kind(Index j) const { return kinds_[static_cast<std::size_t>(j)]; }
  std::string name(Index j) const {
    return names_.empty() ? "x" + std::to_string(j + 1) : names_[static_cast<std::size_t>(j)];
  }
  bool is_transformed() const noexcept { return transformed_; }

  /// Copy restricted to the given row indices (order preserved).
  Dataset select_rows(const std::vector<Index>& rows) const {
    Matrix xs(static_cast<Index>(rows.size()), x_.cols());
    Vector ys(static_cast<Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      xs.row(static_cast<Index>(r)) = x_.row(rows[r]);
      ys(static_cast<Index>(r)) = y_(rows[r]);
    }
    Dataset d = *this;
    d.x_ = std::move(xs);
    d.y_ = std::move(ys);
    return d;
  }

  /// Copy restricted to the given columns.
  Dataset select_cols(const std::vector<Index>& cols) const {
    Matrix xs(x_.rows(), static_cast<Index>(cols.size()));
    std::vector<FeatureKind> kinds;
    std::vector<std::string> names;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      xs.col(static_cast<Index>(c)) = x_.col(cols[c]);
      kinds.push_back(kind(cols[c]));
      if (!names_.empty()) names.push_back(names_[static_cast<std::size_t>(cols[c])]);
    }
    Dataset d = *this;
    d.x_ = std::move(xs);
    d.kinds_ = std::move(kinds);
    d.names_ = std::move(names);
    return d;
  }

 private:
  void validate_shape() const {
    if (x_.rows() != y_.size()) {
      throw DimensionError("design has " + std::to_string(x_.rows()) +
                           " rows but response has length " + std::to_string(y_.size()));
    }
    if (!kinds_.empty() && static_cast<Index>(kinds_.size()) != x_.cols()) {
      throw DimensionError("kind tags do not match the number of columns");
    }
    if (!names_.empty() && static_cast<Index>(names_.size()) != x_.cols()) {
      throw DimensionError("column names do not match the number of columns");
    }
  }

  Matrix x_;
  Vector y_;
  std::vector<FeatureKind> kinds_;
  std::vector<std::string> names_;
  bool transformed_ = false;
};

/// Read-only view of a subset of rows (and optionally columns) of a dataset.
class RowView {
 public:
  RowView(const Dataset& data, const std::vector<Index>& rows) : data_(&data), rows_(&rows) {}
  RowView(const Dataset& data, const std::vector<Index>& rows, const std::vector<Index>& cols)
      : data_(&data), rows_(&rows), cols_(&cols) {}

  Index rows() const noexcept { return static_cast<Index>(rows_->size()); }
  Index cols() const noexcept { return cols_ ? static_cast<Index>(cols_->size()) : data_->cols(); }
  double operator()(Index i, Index j) const {
    return (*data_)((*rows_)[static_cast<std::size_t>(i)], column(j));
  }
  FeatureKind kind(Index j) const { return data_->kind(column(j)); }
  std::string name(Index j) const { return data_->name(column(j)); }

 private:
  Index column(Index j) const { return cols_ ? (*cols_)[static_cast<std::size_t>(j)] : j; }

  const Dataset* data_;
  const std::vector<Index>* rows_;
  const std::vector<Index>* cols_ = nullptr;
};

}  // namespace normreg
