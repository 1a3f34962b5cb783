#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "segprof/schema.hpp"
#include "segprof/survey.hpp"

namespace segprof {

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  [[nodiscard]] std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  [[nodiscard]] std::vector<double> column(std::size_t c) const;
  bool operator==(const Matrix&) const = default;
};

struct ColumnMeta {
  std::string variable;
  std::optional<int> category;  // set for one-hot indicator columns
  Role role = Role::characteristic;
  VariableKind kind = VariableKind::ordinal;

  /// "variable" or "variable-code" for indicator columns.
  [[nodiscard]] std::string name() const;
  bool operator==(const ColumnMeta&) const = default;
};

/// Parameters of x -> (x - mean) / sd. Constant columns have sd == 0 and
/// standardize to all zeros.
struct Standardization {
  double mean = 0.0;
  double sd = 1.0;
  bool constant = false;
};

struct FeatureMatrix {
  Matrix values;
  std::vector<ColumnMeta> columns;
  std::vector<std::string> row_ids;
  /// Per column; identity until zscore() has been applied.
  std::vector<Standardization> standardization;

  [[nodiscard]] std::size_t rows() const { return values.rows; }
  [[nodiscard]] std::size_t cols() const { return values.cols; }
  [[nodiscard]] std::optional<std::size_t> find(std::string_view column_name) const;
  [[nodiscard]] std::vector<std::string> constant_columns() const;
};

/// Nominal variables expand to one indicator per declared category; binary
/// and ordinal variables contribute their code. Requires a binned table.
FeatureMatrix one_hot(const CleanTable& table, const Schema& schema);

/// Column-wise z-score with the sample (n - 1) standard deviation. Parallel
/// over columns; see serial::zscore for the reference loop.
FeatureMatrix zscore(const FeatureMatrix& fm);

/// Characteristic and outcome columns, sharing row ids and order.
std::pair<FeatureMatrix, FeatureMatrix> split_roles(const FeatureMatrix& fm);

/// Keeps the listed columns in the given order.
FeatureMatrix select_columns(const FeatureMatrix& fm, std::span<const std::size_t> columns);
FeatureMatrix select_rows(const FeatureMatrix& fm, std::span<const std::size_t> rows);

/// Reconstructs category codes from (possibly standardized) features.
/// Variables are emitted in schema order; only variables with columns in fm.
CleanTable decode(const FeatureMatrix& fm, const Schema& schema);

void write_features(std::ostream& out, const FeatureMatrix& fm, std::string_view id_header);
/// Column metadata and standardization parameters as JSON.
void write_feature_meta(std::ostream& out, const FeatureMatrix& fm);

namespace serial {
FeatureMatrix zscore(const FeatureMatrix& fm);
}

}  // namespace segprof
