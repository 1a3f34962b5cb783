#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "segprof/features.hpp"
#include "segprof/schema.hpp"
#include "segprof/stats.hpp"
#include "segprof/survey.hpp"
#include "segprof/ward.hpp"

namespace segprof {

/// Ranks starting at 1; tied values share the mean of their ranks.
std::vector<double> average_ranks(std::span<const double> x);

struct CorrelationResult {
  std::size_t first = 0;
  std::size_t second = 0;
  double rho = 0.0;
  double p = 1.0;
  int stars = 0;  // 1: p < 0.05, 2: p < 0.01, 3: p < 0.001
  /// False when either input is constant; rho and p are then NaN.
  bool defined = true;
};

int significance_stars(double p);

/// Spearman rank correlation with average ranks; p from the t approximation
/// with n - 2 degrees of freedom. Throws std::invalid_argument when the
/// lengths differ or are below 3.
CorrelationResult spearman(std::span<const double> x, std::span<const double> y);

/// Symmetric matrix of pairwise Spearman results.
struct CorrelationMatrix {
  std::vector<std::string> names;
  std::vector<CorrelationResult> cells;  // row-major, names.size() squared

  [[nodiscard]] std::size_t size() const { return names.size(); }
  [[nodiscard]] const CorrelationResult& at(std::size_t i, std::size_t j) const { return cells[i * size() + j]; }
};

/// Correlates named series over the given rows (all rows when empty).
/// Parallel over pairs.
CorrelationMatrix correlate_series(const std::vector<std::string>& names,
                                   const std::vector<std::vector<double>>& series,
                                   std::span<const std::size_t> rows = {});

/// Pairwise correlation of the listed feature columns, optionally restricted
/// to a subset of rows.
CorrelationMatrix correlation_matrix(const FeatureMatrix& fm, std::span<const std::size_t> subset,
                                     std::span<const std::size_t> rows = {});

/// Correlation among the features significant for one cluster, computed over
/// that cluster's members. Indicator columns are merged back into their
/// source variable, whose category codes are correlated by rank; indicators
/// of multi-response variables stay separate. Variables are ordered from the
/// most positive to the most negative t-value.
CorrelationMatrix within_cluster_correlation(const CleanTable& clean, const Schema& schema,
                                             const ClusterAssignment& asg, int cluster,
                                             std::span<const FeatureTestResult> results);

enum class CorrelationField { rho, p, stars };

/// Square table with a leading name column.
void write_correlation(std::ostream& out, const CorrelationMatrix& m, CorrelationField field);

namespace serial {
CorrelationMatrix correlate_series(const std::vector<std::string>& names,
                                   const std::vector<std::vector<double>>& series,
                                   std::span<const std::size_t> rows = {});
}

}  // namespace segprof
