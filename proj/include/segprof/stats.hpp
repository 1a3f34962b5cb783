#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "segprof/features.hpp"
#include "segprof/ward.hpp"

namespace segprof {

struct WelchStat {
  double t = 0.0;   // sign follows mean(a) - mean(b)
  double df = 0.0;  // Welch-Satterthwaite
  double p = 1.0;   // two-sided
};

/// Which side of a comparison has no variance.
enum class ConstantGroup { none, cluster, rest, both };

std::string_view to_string(ConstantGroup g);

ConstantGroup constant_group(std::span<const double> a, std::span<const double> b);

/// Welch two-sample t-test. Returns std::nullopt, the zero-variance signal,
/// when either sample is constant. Throws std::invalid_argument when either
/// sample has fewer than two values.
std::optional<WelchStat> welch_t(std::span<const double> a, std::span<const double> b);

struct BhResult {
  std::vector<double> adjusted;
  std::vector<bool> significant;  // adjusted < alpha
};

/// Benjamini-Hochberg step-up adjustment; output keeps input order.
BhResult bh_adjust(std::span<const double> p, double alpha);

enum class Correction { benjamini_hochberg, none };

struct StatsConfig {
  double alpha = 0.05;
  Correction correction = Correction::benjamini_hochberg;

  void validate() const;
};

struct FeatureTestResult {
  std::size_t feature = 0;
  std::string feature_name;
  int cluster = 0;
  double t = 0.0;
  double df = 0.0;
  double p_raw = 1.0;
  double p_adj = 1.0;
  bool significant = false;
  bool zero_variance = false;
  ConstantGroup constant = ConstantGroup::none;
  // Means in original (unstandardized) units, e.g. indicator shares.
  double cluster_mean = 0.0;
  double rest_mean = 0.0;
};

/// Cluster-versus-rest Welch tests for every cluster x feature, corrected
/// per cluster across its testable features. Results are ordered by
/// (cluster, feature). Parallel over tests; see serial::profile_clusters.
std::vector<FeatureTestResult> profile_clusters(const FeatureMatrix& fm, const ClusterAssignment& asg,
                                                const StatsConfig& cfg);

void write_test_results(std::ostream& out, std::span<const FeatureTestResult> results);

/// Rows of the no-variance table: tests where the cluster or the rest is
/// constant, with the cluster's response share in percent.
void write_zero_variance(std::ostream& out, std::span<const FeatureTestResult> results);

namespace serial {
std::vector<FeatureTestResult> profile_clusters(const FeatureMatrix& fm, const ClusterAssignment& asg,
                                                const StatsConfig& cfg);
}

}  // namespace segprof
