#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "segprof/features.hpp"
#include "segprof/schema.hpp"
#include "segprof/stats.hpp"
#include "segprof/survey.hpp"
#include "segprof/ward.hpp"

namespace segprof {

/// Counts of one category of one variable, per cluster and overall.
struct ProfileRow {
  std::string variable;
  int code = 0;
  std::string label;
  bool multi_response = false;
  std::vector<std::size_t> counts;  // index label - 1
  std::size_t overall = 0;
};

struct ClusterProfile {
  std::vector<std::size_t> cluster_sizes;  // index label - 1
  std::size_t total = 0;
  std::vector<ProfileRow> rows;  // schema variable order, then category order

  /// Percentage of cluster `label` (0 for the overall column).
  [[nodiscard]] double percent(const ProfileRow& row, int label) const;
};

/// Households per category and cluster. A multi-response household counts
/// once in every category it names, so those percentages may exceed 100.
ClusterProfile profile_table(const CleanTable& clean, const Schema& schema, const ClusterAssignment& asg);

/// Long format: variable, category, label, cluster ("overall" for all rows),
/// count, total, percent (two decimals).
void write_profile(std::ostream& out, const ClusterProfile& profile);

struct RadarTable {
  std::vector<std::string> features;  // significant in at least one cluster
  std::vector<int> clusters;
  std::vector<std::vector<double>> t;          // [feature][cluster]; 0 when untestable
  std::vector<std::vector<bool>> significant;  // [feature][cluster]
  std::vector<std::string> warnings;
};

RadarTable radar_data(std::span<const FeatureTestResult> results);
void write_radar(std::ostream& out, const RadarTable& radar);

struct HeatmapCell {
  int cluster = 0;
  std::string variable;
  int code = 0;
  std::string label;
  double proportion = 0.0;
};

struct HouseholdGrid {
  int cluster = 0;
  std::vector<std::string> row_ids;
  std::vector<std::vector<std::string>> codes;  // [household][variable]; ';'-joined for multi-response
};

/// Category distributions per cluster and per-household code grids. Both
/// skip variables whose schema entry sets heatmap to false.
struct HeatmapData {
  std::vector<std::string> variables;
  std::vector<HeatmapCell> distribution;
  std::vector<HouseholdGrid> households;  // one per cluster
};

HeatmapData heatmap_data(const CleanTable& clean, const Schema& schema, const ClusterAssignment& asg);
void write_heatmap_distribution(std::ostream& out, const HeatmapData& h);
void write_heatmap_households(std::ostream& out, const HeatmapData& h, std::string_view id_header);

struct SubclusterReport {
  ClusterAssignment assignment;  // subclusters numbered by parent, then first row
  std::vector<int> parent;       // index sublabel - 1
  std::vector<FeatureTestResult> characteristic_tests;
  std::vector<FeatureTestResult> outcome_tests;
};

/// Re-cuts the dendrogram at sub_cut (which must lie below main_cut) and
/// profiles every subcluster against the rest of the data.
SubclusterReport subcluster_report(const Dendrogram& d, const ClusterAssignment& main, double main_cut,
                                   double sub_cut, const FeatureMatrix& characteristic,
                                   const FeatureMatrix& outcome, const StatsConfig& cfg);

void write_subcluster_parents(std::ostream& out, const SubclusterReport& report);

/// Adjusted Rand index between two labelings of the same rows.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

}  // namespace segprof
