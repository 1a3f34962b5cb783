#include "segprof/features.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "json.hpp"
#include "segprof/errors.hpp"

namespace segprof {

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = data[r * cols + c];
  return out;
}

std::string ColumnMeta::name() const {
  return category ? variable + "-" + std::to_string(*category) : variable;
}

std::optional<std::size_t> FeatureMatrix::find(std::string_view column_name) const {
  for (std::size_t c = 0; c < columns.size(); ++c)
    if (columns[c].name() == column_name) return c;
  return std::nullopt;
}

std::vector<std::string> FeatureMatrix::constant_columns() const {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < standardization.size(); ++c)
    if (standardization[c].constant) names.push_back(columns[c].name());
  return names;
}

FeatureMatrix one_hot(const CleanTable& table, const Schema& schema) {
  FeatureMatrix fm;
  fm.row_ids = table.row_ids;

  struct Source {
    std::size_t col;
    const VariableSpec* spec;
    std::optional<int> category;
  };
  std::vector<Source> sources;
  for (const auto& spec : schema.variables) {
    const std::size_t col = table.column(spec.name);
    if (spec.kind == VariableKind::nominal) {
      for (const auto& cat : spec.categories) {
        sources.push_back({col, &spec, cat.code});
        fm.columns.push_back({spec.name, cat.code, spec.role, spec.kind});
      }
    } else {
      sources.push_back({col, &spec, std::nullopt});
      fm.columns.push_back({spec.name, std::nullopt, spec.role, spec.kind});
    }
  }

  fm.values = Matrix(table.size(), sources.size());
  fm.standardization.assign(sources.size(), Standardization{});

  for (std::size_t r = 0; r < table.size(); ++r) {
    for (std::size_t c = 0; c < sources.size(); ++c) {
      const auto& src = sources[c];
      const auto* codes = std::get_if<Codes>(&table.rows[r][src.col]);
      if (!codes) throw EncodingError("variable '" + src.spec->name + "' is not binned; run bin_measurements first");
      for (int code : *codes)
        if (!src.spec->has_code(code))
          throw EncodingError("row '" + table.row_ids[r] + "', variable '" + src.spec->name +
                              "': category code " + std::to_string(code) + " is absent from the schema");
      if (src.category) {
        const bool hit = std::find(codes->begin(), codes->end(), *src.category) != codes->end();
        fm.values(r, c) = hit ? 1.0 : 0.0;
      } else {
        if (codes->size() != 1)
          throw EncodingError("row '" + table.row_ids[r] + "', variable '" + src.spec->name +
                              "': expected exactly one code");
        fm.values(r, c) = codes->front();
      }
    }
  }
  return fm;
}

namespace {

Standardization compose(const Standardization& outer, const Standardization& inner) {
  // outer maps original -> current, inner maps current -> new
  if (outer.constant) return outer;
  const double mean = outer.mean + outer.sd * inner.mean;
  if (inner.constant) return {mean, 0.0, true};
  return {mean, outer.sd * inner.sd, false};
}

}  // namespace

FeatureMatrix zscore(const FeatureMatrix& fm) {
  if (fm.rows() == 0 || fm.cols() == 0) throw ComputationError("zscore: matrix is empty");
  FeatureMatrix out = fm;
  const std::size_t n = fm.rows();
  const std::size_t m = fm.cols();
  const Matrix& in = fm.values;
  std::vector<Standardization> fitted(m);

#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < m; ++c) {
    const std::vector<double> x = in.column(c);
    const double first = x.front();
    bool constant = true;
    double sum = 0.0;
    for (double v : x) {
      sum += v;
      constant = constant && v == first;
    }
    Standardization s;
    s.mean = sum / static_cast<double>(n);
    if (constant || n < 2) {
      s.mean = first;
      s.sd = 0.0;
      s.constant = true;
      for (std::size_t r = 0; r < n; ++r) out.values(r, c) = 0.0;
    } else {
      // The mean is kept as head + tail so that columns with a large offset
      // still centre to within rounding of their spread.
      double residual = 0.0;
      for (double v : x) residual += v - s.mean;
      const double tail = residual / static_cast<double>(n);
      double ss = 0.0;
      for (double v : x) ss += ((v - s.mean) - tail) * ((v - s.mean) - tail);
      s.sd = std::sqrt(ss / static_cast<double>(n - 1));
      for (std::size_t r = 0; r < n; ++r) out.values(r, c) = ((x[r] - s.mean) - tail) / s.sd;
      s.mean += tail;
    }
    fitted[c] = s;
  }

  for (std::size_t c = 0; c < m; ++c) out.standardization[c] = compose(fm.standardization[c], fitted[c]);
  return out;
}

namespace serial {

FeatureMatrix zscore(const FeatureMatrix& fm) {
  if (fm.rows() == 0 || fm.cols() == 0) throw ComputationError("zscore: matrix is empty");
  FeatureMatrix out = fm;
  const std::size_t n = fm.rows();
  for (std::size_t c = 0; c < fm.cols(); ++c) {
    const auto x = fm.values.column(c);
    Standardization s;
    const bool constant = std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
    if (constant || n < 2) {
      s = {x.front(), 0.0, true};
      for (std::size_t r = 0; r < n; ++r) out.values(r, c) = 0.0;
    } else {
      double sum = 0.0;
      for (double v : x) sum += v;
      s.mean = sum / static_cast<double>(n);
      double residual = 0.0;
      for (double v : x) residual += v - s.mean;
      const double tail = residual / static_cast<double>(n);
      double ss = 0.0;
      for (double v : x) ss += ((v - s.mean) - tail) * ((v - s.mean) - tail);
      s.sd = std::sqrt(ss / static_cast<double>(n - 1));
      for (std::size_t r = 0; r < n; ++r) out.values(r, c) = ((x[r] - s.mean) - tail) / s.sd;
      s.mean += tail;
    }
    out.standardization[c] = compose(fm.standardization[c], s);
  }
  return out;
}

}  // namespace serial

FeatureMatrix select_columns(const FeatureMatrix& fm, std::span<const std::size_t> columns) {
  FeatureMatrix out;
  out.row_ids = fm.row_ids;
  out.values = Matrix(fm.rows(), columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const auto c = columns[j];
    if (c >= fm.cols()) throw ComputationError("column index out of range");
    out.columns.push_back(fm.columns[c]);
    out.standardization.push_back(fm.standardization[c]);
    for (std::size_t r = 0; r < fm.rows(); ++r) out.values(r, j) = fm.values(r, c);
  }
  return out;
}

FeatureMatrix select_rows(const FeatureMatrix& fm, std::span<const std::size_t> rows) {
  FeatureMatrix out;
  out.columns = fm.columns;
  out.standardization = fm.standardization;
  out.values = Matrix(rows.size(), fm.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= fm.rows()) throw ComputationError("row index out of range");
    out.row_ids.push_back(fm.row_ids[rows[i]]);
    std::copy_n(fm.values.row(rows[i]).begin(), fm.cols(), out.values.data.begin() + i * fm.cols());
  }
  return out;
}

std::pair<FeatureMatrix, FeatureMatrix> split_roles(const FeatureMatrix& fm) {
  if (fm.columns.size() != fm.cols()) throw SchemaError("column metadata does not cover every column");
  std::vector<std::size_t> characteristic;
  std::vector<std::size_t> outcome;
  for (std::size_t c = 0; c < fm.cols(); ++c)
    (fm.columns[c].role == Role::characteristic ? characteristic : outcome).push_back(c);
  return {select_columns(fm, characteristic), select_columns(fm, outcome)};
}

CleanTable decode(const FeatureMatrix& fm, const Schema& schema) {
  auto original = [&](std::size_t r, std::size_t c) {
    const auto& s = fm.standardization[c];
    return s.constant ? s.mean : fm.values(r, c) * s.sd + s.mean;
  };

  CleanTable out;
  out.row_ids = fm.row_ids;
  out.rows.assign(fm.rows(), {});
  out.provenance.assign(fm.rows(), {});
  for (const auto& spec : schema.variables) {
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < fm.cols(); ++c)
      if (fm.columns[c].variable == spec.name) cols.push_back(c);
    if (cols.empty()) continue;
    out.variables.push_back(spec.name);

    for (std::size_t r = 0; r < fm.rows(); ++r) {
      Codes codes;
      for (auto c : cols) {
        const double v = std::round(original(r, c));
        if (fm.columns[c].category) {
          if (v == 1.0) codes.push_back(*fm.columns[c].category);
        } else {
          codes.push_back(static_cast<int>(v));
        }
      }
      out.rows[r].emplace_back(std::move(codes));
      out.provenance[r].push_back(Provenance{});
    }
  }
  return out;
}

void write_features(std::ostream& out, const FeatureMatrix& fm, std::string_view id_header) {
  csv::Row header{std::string(id_header)};
  for (const auto& c : fm.columns) header.push_back(c.name());
  csv::write_row(out, header);
  for (std::size_t r = 0; r < fm.rows(); ++r) {
    csv::Row row{fm.row_ids[r]};
    for (std::size_t c = 0; c < fm.cols(); ++c) row.push_back(csv::format_double(fm.values(r, c)));
    csv::write_row(out, row);
  }
}

void write_feature_meta(std::ostream& out, const FeatureMatrix& fm) {
  nlohmann::ordered_json doc;
  doc["rows"] = fm.rows();
  auto& cols = doc["columns"] = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < fm.cols(); ++c) {
    const auto& meta = fm.columns[c];
    const auto& s = fm.standardization[c];
    nlohmann::ordered_json jc;
    jc["name"] = meta.name();
    jc["variable"] = meta.variable;
    jc["category"] = meta.category ? nlohmann::ordered_json(*meta.category) : nlohmann::ordered_json(nullptr);
    jc["role"] = std::string(to_string(meta.role));
    jc["kind"] = std::string(to_string(meta.kind));
    jc["mean"] = s.mean;
    jc["sd"] = s.sd;
    jc["constant"] = s.constant;
    cols.push_back(std::move(jc));
  }
  out << doc.dump(2) << '\n';
}

}  // namespace segprof
