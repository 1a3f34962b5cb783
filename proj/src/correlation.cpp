#include "segprof/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "segprof/csv.hpp"
#include "segprof/errors.hpp"
#include "segprof/tdist.hpp"

namespace segprof {

std::vector<double> average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && x[order[j]] == x[order[i]]) ++j;
    // Positions i..j-1 hold ranks i+1..j.
    const double shared = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t q = i; q < j; ++q) ranks[order[q]] = shared;
    i = j;
  }
  return ranks;
}

int significance_stars(double p) {
  if (!(p < 0.05)) return 0;
  if (p < 0.001) return 3;
  if (p < 0.01) return 2;
  return 1;
}

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

CorrelationResult from_ranks(std::span<const double> rx, std::span<const double> ry) {
  const std::size_t n = rx.size();
  const double centre = 0.5 * static_cast<double>(n + 1);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = rx[i] - centre;
    const double dy = ry[i] - centre;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  CorrelationResult r;
  if (sxx == 0.0 || syy == 0.0) {
    r.defined = false;
    r.rho = r.p = nan;
    return r;
  }
  r.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  if (std::fabs(r.rho) == 1.0) {
    r.p = 0.0;
  } else {
    const double df = static_cast<double>(n - 2);
    const double t = r.rho * std::sqrt(df / (1.0 - r.rho * r.rho));
    r.p = student_t_two_sided_p(t, df);
  }
  r.stars = significance_stars(r.p);
  return r;
}

std::vector<double> gather(const std::vector<double>& values, std::span<const std::size_t> rows) {
  if (rows.empty()) return values;
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = values.at(rows[i]);
  return out;
}

void check_series(const std::vector<std::string>& names, const std::vector<std::vector<double>>& series,
                  std::span<const std::size_t> rows) {
  if (names.size() != series.size()) throw std::invalid_argument("correlate: one name per series required");
  const std::size_t n = rows.empty() ? (series.empty() ? 0 : series.front().size()) : rows.size();
  for (const auto& s : series)
    if (rows.empty() && s.size() != n) throw std::invalid_argument("correlate: series lengths differ");
  if (!series.empty() && n < 3) throw std::invalid_argument("correlate: need at least 3 rows");
}

std::vector<std::vector<double>> ranked(const std::vector<std::vector<double>>& series,
                                        std::span<const std::size_t> rows) {
  std::vector<std::vector<double>> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) out[i] = average_ranks(gather(series[i], rows));
  return out;
}

}  // namespace

CorrelationResult spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: inputs differ in length");
  if (x.size() < 3) throw std::invalid_argument("spearman: need at least 3 observations");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return from_ranks(rx, ry);
}

CorrelationMatrix correlate_series(const std::vector<std::string>& names,
                                   const std::vector<std::vector<double>>& series,
                                   std::span<const std::size_t> rows) {
  check_series(names, series, rows);
  const std::size_t m = series.size();
  std::vector<std::vector<double>> ranks(m);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < m; ++i) ranks[i] = average_ranks(gather(series[i], rows));

  CorrelationMatrix out;
  out.names = names;
  out.cells.resize(m * m);
  const std::size_t pairs = m * (m + 1) / 2;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t idx = 0; idx < pairs; ++idx) {
    // Unrank idx into (i, j) with i <= j over the upper triangle.
    std::size_t i = 0, rest = idx;
    while (rest >= m - i) {
      rest -= m - i;
      ++i;
    }
    const std::size_t j = i + rest;
    CorrelationResult r = from_ranks(ranks[i], ranks[j]);
    r.first = i;
    r.second = j;
    out.cells[i * m + j] = r;
    std::swap(r.first, r.second);
    out.cells[j * m + i] = r;
  }
  return out;
}

namespace serial {

CorrelationMatrix correlate_series(const std::vector<std::string>& names,
                                   const std::vector<std::vector<double>>& series,
                                   std::span<const std::size_t> rows) {
  check_series(names, series, rows);
  const auto ranks = ranked(series, rows);
  const std::size_t m = series.size();
  CorrelationMatrix out;
  out.names = names;
  out.cells.resize(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      // Evaluate each unordered pair once, first index lower.
      CorrelationResult r = i <= j ? from_ranks(ranks[i], ranks[j]) : from_ranks(ranks[j], ranks[i]);
      r.first = i;
      r.second = j;
      out.cells[i * m + j] = r;
    }
  return out;
}

}  // namespace serial

CorrelationMatrix correlation_matrix(const FeatureMatrix& fm, std::span<const std::size_t> subset,
                                     std::span<const std::size_t> rows) {
  if (subset.empty()) throw std::invalid_argument("correlation_matrix: empty feature subset");
  std::vector<std::string> names;
  std::vector<std::vector<double>> series;
  for (std::size_t c : subset) {
    if (c >= fm.cols()) throw std::out_of_range("correlation_matrix: feature index out of range");
    names.push_back(fm.columns.at(c).name());
    series.push_back(fm.values.column(c));
  }
  return correlate_series(names, series, rows);
}

namespace {

struct FeatureRef {
  std::size_t variable = 0;
  std::optional<int> code;
};

// Splits "variable" or "variable-code" against the schema, preferring the
// longest variable name that matches.
FeatureRef resolve(const std::string& feature, const Schema& schema) {
  std::optional<FeatureRef> best;
  std::size_t best_len = 0;
  for (std::size_t v = 0; v < schema.variables.size(); ++v) {
    const std::string& name = schema.variables[v].name;
    if (name.size() < best_len) continue;
    if (feature == name) {
      best = FeatureRef{v, std::nullopt};
      best_len = name.size();
    } else if (feature.size() > name.size() + 1 && feature.compare(0, name.size(), name) == 0 &&
               feature[name.size()] == '-') {
      try {
        std::size_t used = 0;
        const int code = std::stoi(feature.substr(name.size() + 1), &used);
        if (used == feature.size() - name.size() - 1) {
          best = FeatureRef{v, code};
          best_len = name.size();
        }
      } catch (const std::exception&) {
      }
    }
  }
  if (!best) throw SchemaError("feature '" + feature + "' matches no schema variable");
  return *best;
}

}  // namespace

CorrelationMatrix within_cluster_correlation(const CleanTable& clean, const Schema& schema,
                                             const ClusterAssignment& asg, int cluster,
                                             std::span<const FeatureTestResult> results) {
  if (asg.labels.size() != clean.size()) throw ProfilingError("assignment and table differ in row count");

  struct Entry {
    std::string name;
    std::size_t variable;
    std::optional<int> code;  // multi-response indicator
    double score;
  };
  std::map<std::string, Entry> entries;
  for (const auto& r : results) {
    if (r.cluster != cluster || !r.significant) continue;
    FeatureRef ref = resolve(r.feature_name, schema);
    const VariableSpec& spec = schema.variables[ref.variable];
    if (!spec.multi_response) ref.code.reset();
    const std::string name = ref.code ? spec.name + "-" + std::to_string(*ref.code) : spec.name;
    auto [it, inserted] = entries.try_emplace(name, Entry{name, ref.variable, ref.code, r.t});
    if (!inserted) it->second.score = std::max(it->second.score, r.t);
  }

  std::vector<Entry> ordered;
  for (auto& [name, e] : entries) ordered.push_back(e);
  std::stable_sort(ordered.begin(), ordered.end(), [](const Entry& a, const Entry& b) { return a.score > b.score; });

  std::vector<std::string> names;
  std::vector<std::vector<double>> series;
  for (const auto& e : ordered) {
    const std::size_t col = clean.column(schema.variables[e.variable].name);
    std::vector<double> values(clean.size());
    for (std::size_t row = 0; row < clean.size(); ++row) {
      const Codes& codes = clean.codes(row, col);
      if (e.code)
        values[row] = std::find(codes.begin(), codes.end(), *e.code) != codes.end() ? 1.0 : 0.0;
      else
        values[row] = codes.empty() ? nan : static_cast<double>(codes.front());
    }
    names.push_back(e.name);
    series.push_back(std::move(values));
  }

  const auto members = asg.members(cluster);
  if (series.empty()) return {};
  return correlate_series(names, series, members);
}

void write_correlation(std::ostream& out, const CorrelationMatrix& m, CorrelationField field) {
  csv::Row header{""};
  header.insert(header.end(), m.names.begin(), m.names.end());
  csv::write_row(out, header);
  for (std::size_t i = 0; i < m.size(); ++i) {
    csv::Row row{m.names[i]};
    for (std::size_t j = 0; j < m.size(); ++j) {
      const auto& c = m.at(i, j);
      switch (field) {
        case CorrelationField::rho: row.push_back(c.defined ? csv::format_double(c.rho) : ""); break;
        case CorrelationField::p: row.push_back(c.defined ? csv::format_double(c.p) : ""); break;
        case CorrelationField::stars: row.push_back(std::string(static_cast<std::size_t>(c.stars), '*')); break;
      }
    }
    csv::write_row(out, row);
  }
}

}  // namespace segprof
