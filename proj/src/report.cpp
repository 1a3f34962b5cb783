#include "segprof/report.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

#include "segprof/csv.hpp"
#include "segprof/errors.hpp"

namespace segprof {

namespace {

void check_aligned(const CleanTable& clean, const ClusterAssignment& asg) {
  if (asg.labels.size() != clean.size())
    throw ProfilingError("assignment has " + std::to_string(asg.labels.size()) + " rows, table has " +
                         std::to_string(clean.size()));
  if (!asg.row_ids.empty() && !clean.row_ids.empty() && asg.row_ids != clean.row_ids)
    throw ProfilingError("assignment and table row ids are not aligned");
}

std::size_t label_index(int label) { return static_cast<std::size_t>(label - 1); }

}  // namespace

double ClusterProfile::percent(const ProfileRow& row, int label) const {
  const std::size_t count = label == 0 ? row.overall : row.counts.at(label_index(label));
  const std::size_t size = label == 0 ? total : cluster_sizes.at(label_index(label));
  return size == 0 ? 0.0 : 100.0 * static_cast<double>(count) / static_cast<double>(size);
}

ClusterProfile profile_table(const CleanTable& clean, const Schema& schema, const ClusterAssignment& asg) {
  check_aligned(clean, asg);
  ClusterProfile p;
  p.total = clean.size();
  p.cluster_sizes = asg.sizes();
  const std::size_t k = p.cluster_sizes.size();

  for (const auto& spec : schema.variables) {
    const std::size_t col = clean.column(spec.name);
    std::map<int, std::size_t> slot;
    for (const auto& cat : spec.categories) {
      slot[cat.code] = p.rows.size();
      p.rows.push_back({spec.name, cat.code, cat.label, spec.multi_response, std::vector<std::size_t>(k, 0), 0});
    }
    for (std::size_t r = 0; r < clean.size(); ++r) {
      std::set<int> seen;
      for (int code : clean.codes(r, col)) {
        if (!seen.insert(code).second) continue;
        auto it = slot.find(code);
        if (it == slot.end())
          throw EncodingError("variable '" + spec.name + "' has undeclared code " + std::to_string(code));
        ProfileRow& row = p.rows[it->second];
        ++row.counts[label_index(asg.labels[r])];
        ++row.overall;
      }
    }
  }
  return p;
}

void write_profile(std::ostream& out, const ClusterProfile& profile) {
  csv::write_row(out, {"variable", "category", "label", "cluster", "count", "total", "percent"});
  for (const auto& row : profile.rows) {
    auto emit = [&](const std::string& cluster, std::size_t count, std::size_t total, double pct) {
      csv::write_row(out, {row.variable, std::to_string(row.code), row.label, cluster, std::to_string(count),
                           std::to_string(total), csv::format_fixed(pct, 2)});
    };
    for (std::size_t c = 0; c < row.counts.size(); ++c) {
      const int label = static_cast<int>(c + 1);
      emit(std::to_string(label), row.counts[c], profile.cluster_sizes[c], profile.percent(row, label));
    }
    emit("overall", row.overall, profile.total, profile.percent(row, 0));
  }
}

RadarTable radar_data(std::span<const FeatureTestResult> results) {
  RadarTable radar;
  std::set<int> clusters;
  std::map<std::size_t, std::string> features;
  for (const auto& r : results) {
    clusters.insert(r.cluster);
    if (r.significant) features.emplace(r.feature, r.feature_name);
  }
  radar.clusters.assign(clusters.begin(), clusters.end());
  std::map<std::size_t, std::size_t> row_of;
  for (const auto& [index, name] : features) {
    row_of[index] = radar.features.size();
    radar.features.push_back(name);
  }
  radar.t.assign(radar.features.size(), std::vector<double>(radar.clusters.size(), 0.0));
  radar.significant.assign(radar.features.size(), std::vector<bool>(radar.clusters.size(), false));
  for (const auto& r : results) {
    auto it = row_of.find(r.feature);
    if (it == row_of.end()) continue;
    const auto c = static_cast<std::size_t>(
        std::lower_bound(radar.clusters.begin(), radar.clusters.end(), r.cluster) - radar.clusters.begin());
    radar.t[it->second][c] = r.zero_variance ? 0.0 : r.t;
    radar.significant[it->second][c] = r.significant;
  }
  if (radar.features.empty()) radar.warnings.push_back("no feature is significant in any cluster");
  return radar;
}

void write_radar(std::ostream& out, const RadarTable& radar) {
  csv::Row header{"feature"};
  for (int c : radar.clusters) header.push_back("t_" + std::to_string(c));
  for (int c : radar.clusters) header.push_back("significant_" + std::to_string(c));
  csv::write_row(out, header);
  for (std::size_t f = 0; f < radar.features.size(); ++f) {
    csv::Row row{radar.features[f]};
    for (double t : radar.t[f]) row.push_back(csv::format_double(t));
    for (bool s : radar.significant[f]) row.push_back(s ? "1" : "0");
    csv::write_row(out, row);
  }
}

HeatmapData heatmap_data(const CleanTable& clean, const Schema& schema, const ClusterAssignment& asg) {
  check_aligned(clean, asg);
  HeatmapData h;
  std::vector<std::size_t> cols;
  for (const auto& spec : schema.variables) {
    if (!spec.heatmap) continue;
    h.variables.push_back(spec.name);
    cols.push_back(clean.column(spec.name));
  }

  const auto sizes = asg.sizes();
  for (int label = 1; label <= asg.k; ++label) {
    const auto members = asg.members(label);
    for (std::size_t v = 0; v < h.variables.size(); ++v) {
      const VariableSpec& spec = schema.at(h.variables[v]);
      for (const auto& cat : spec.categories) {
        std::size_t count = 0;
        for (auto r : members) {
          const Codes& codes = clean.codes(r, cols[v]);
          if (std::find(codes.begin(), codes.end(), cat.code) != codes.end()) ++count;
        }
        h.distribution.push_back({label, spec.name, cat.code, cat.label,
                                  static_cast<double>(count) / static_cast<double>(sizes[label_index(label)])});
      }
    }

    HouseholdGrid grid;
    grid.cluster = label;
    for (auto r : members) {
      grid.row_ids.push_back(r < clean.row_ids.size() ? clean.row_ids[r] : std::to_string(r + 1));
      std::vector<std::string> cells;
      for (auto col : cols) {
        std::string text;
        for (int code : clean.codes(r, col)) {
          if (!text.empty()) text += schema.multi_separator;
          text += std::to_string(code);
        }
        cells.push_back(std::move(text));
      }
      grid.codes.push_back(std::move(cells));
    }
    h.households.push_back(std::move(grid));
  }
  return h;
}

void write_heatmap_distribution(std::ostream& out, const HeatmapData& h) {
  csv::write_row(out, {"cluster", "variable", "category", "label", "proportion"});
  for (const auto& c : h.distribution)
    csv::write_row(out, {std::to_string(c.cluster), c.variable, std::to_string(c.code), c.label,
                         csv::format_double(c.proportion)});
}

void write_heatmap_households(std::ostream& out, const HeatmapData& h, std::string_view id_header) {
  csv::Row header{"cluster", std::string(id_header)};
  header.insert(header.end(), h.variables.begin(), h.variables.end());
  csv::write_row(out, header);
  for (const auto& grid : h.households)
    for (std::size_t i = 0; i < grid.row_ids.size(); ++i) {
      csv::Row row{std::to_string(grid.cluster), grid.row_ids[i]};
      row.insert(row.end(), grid.codes[i].begin(), grid.codes[i].end());
      csv::write_row(out, row);
    }
}

SubclusterReport subcluster_report(const Dendrogram& d, const ClusterAssignment& main, double main_cut,
                                   double sub_cut, const FeatureMatrix& characteristic,
                                   const FeatureMatrix& outcome, const StatsConfig& cfg) {
  if (!(sub_cut < main_cut))
    throw ConfigError("subcluster cut " + csv::format_double(sub_cut) + " must lie below the main cut " +
                      csv::format_double(main_cut));
  if (main.labels.size() != d.leaves) throw ProfilingError("main assignment does not match the dendrogram");

  const ClusterAssignment raw = cut_height(d, sub_cut);
  std::vector<int> parent_of(static_cast<std::size_t>(raw.k), 0);
  std::vector<std::size_t> first_row(static_cast<std::size_t>(raw.k), d.leaves);
  for (std::size_t r = 0; r < d.leaves; ++r) {
    const std::size_t s = label_index(raw.labels[r]);
    if (parent_of[s] == 0) {
      parent_of[s] = main.labels[r];
      first_row[s] = r;
    } else if (parent_of[s] != main.labels[r]) {
      throw std::logic_error("subcluster spans two parent clusters");
    }
  }

  std::vector<std::size_t> order(static_cast<std::size_t>(raw.k));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::pair(parent_of[a], first_row[a]) < std::pair(parent_of[b], first_row[b]);
  });
  std::vector<int> renumber(order.size());
  SubclusterReport report;
  for (std::size_t i = 0; i < order.size(); ++i) {
    renumber[order[i]] = static_cast<int>(i + 1);
    report.parent.push_back(parent_of[order[i]]);
  }

  report.assignment = raw;
  for (auto& l : report.assignment.labels) l = renumber[label_index(l)];
  report.characteristic_tests = profile_clusters(characteristic, report.assignment, cfg);
  if (outcome.cols() > 0) report.outcome_tests = profile_clusters(outcome, report.assignment, cfg);
  return report;
}

void write_subcluster_parents(std::ostream& out, const SubclusterReport& report) {
  const auto sizes = report.assignment.sizes();
  csv::write_row(out, {"subcluster", "parent", "size"});
  for (std::size_t s = 0; s < report.parent.size(); ++s)
    csv::write_row(out, {std::to_string(s + 1), std::to_string(report.parent[s]), std::to_string(sizes[s])});
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw std::invalid_argument("adjusted_rand_index: labelings differ in length");
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto pairs = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [key, n] : table) index += pairs(n);
  for (const auto& [key, n] : rows) sum_rows += pairs(n);
  for (const auto& [key, n] : cols) sum_cols += pairs(n);
  const double expected = sum_rows * sum_cols / pairs(static_cast<double>(a.size()));
  const double maximum = 0.5 * (sum_rows + sum_cols);
  if (maximum == expected) return 1.0;
  return (index - expected) / (maximum - expected);
}

}  // namespace segprof
