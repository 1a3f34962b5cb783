#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "segprof/csv.hpp"
#include "segprof/errors.hpp"
#include "segprof/report.hpp"

using namespace segprof;

namespace {

Schema small_schema() {
  return parse_schema(R"({"id_column": "id", "variables": [
    {"name": "size", "kind": "ordinal", "role": "characteristic",
     "categories": [{"code": 1, "label": "small"}, {"code": 2, "label": "medium"}, {"code": 3, "label": "large"}],
     "imputation": {"rule": "skew_majority"}},
    {"name": "area", "kind": "nominal", "role": "characteristic", "heatmap": false,
     "categories": [{"code": 1}, {"code": 2}], "imputation": {"rule": "skew_majority"}},
    {"name": "strategy", "kind": "nominal", "role": "outcome", "multi_response": true,
     "categories": [{"code": 1}, {"code": 2}, {"code": 3}], "imputation": {"rule": "skew_majority"}}]})");
}

CleanTable small_table() {
  CleanTable t;
  t.variables = {"size", "area", "strategy"};
  const std::vector<std::vector<Codes>> rows{{{1}, {1}, {1, 2}}, {{2}, {1}, {1}},    {{1}, {2}, {2, 3}},
                                             {{3}, {2}, {1, 2, 3}}, {{3}, {1}, {3}}, {{2}, {2}, {1, 3}}};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    t.row_ids.push_back("h" + std::to_string(r + 1));
    std::vector<CleanCell> cells;
    for (const auto& c : rows[r]) cells.emplace_back(c);
    t.rows.push_back(cells);
    t.provenance.emplace_back(3);
  }
  return t;
}

ClusterAssignment assignment_for(const CleanTable& t, std::vector<int> labels) {
  auto a = fixture::assignment(labels);
  a.row_ids = t.row_ids;
  return a;
}

const ProfileRow& row_of(const ClusterProfile& p, const std::string& variable, int code) {
  for (const auto& r : p.rows)
    if (r.variable == variable && r.code == code) return r;
  throw std::runtime_error("missing profile row");
}

FeatureTestResult result(int cluster, std::size_t feature, const std::string& name, double t, bool sig) {
  FeatureTestResult r;
  r.cluster = cluster;
  r.feature = feature;
  r.feature_name = name;
  r.t = t;
  r.significant = sig;
  return r;
}

// Three well separated groups, each made of three tight subgroups.
Matrix nested_points(std::mt19937_64& rng) {
  Matrix m(45, 2);
  std::normal_distribution<double> jitter(0.0, 0.05);
  for (std::size_t r = 0; r < 45; ++r) {
    const std::size_t group = r / 15, sub = (r / 5) % 3;
    m(r, 0) = 100.0 * static_cast<double>(group) + 5.0 * static_cast<double>(sub) + jitter(rng);
    m(r, 1) = 3.0 * static_cast<double>(sub % 2) + jitter(rng);
  }
  return m;
}

}  // namespace

TEST(ProfileTable, CountsAndPercentages) {
  const auto clean = small_table();
  const auto p = profile_table(clean, small_schema(), assignment_for(clean, {1, 1, 1, 2, 2, 2}));
  EXPECT_EQ(p.cluster_sizes, (std::vector<std::size_t>{3, 3}));
  const auto& small = row_of(p, "size", 1);
  EXPECT_EQ(small.counts, (std::vector<std::size_t>{2, 0}));
  EXPECT_EQ(small.overall, 2u);
  EXPECT_NEAR(p.percent(small, 1), 200.0 / 3.0, 1e-12);
  EXPECT_NEAR(p.percent(small, 0), 100.0 / 3.0, 1e-12);
  EXPECT_EQ(small.label, "small");
}

TEST(ProfileTable, SingleResponsePercentagesSumToHundred) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> lab(1, 3);
  const auto clean = small_table();
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> labels{1, 2, 3};
    for (int i = 0; i < 3; ++i) labels.push_back(lab(rng));
    const auto p = profile_table(clean, small_schema(), assignment_for(clean, labels));
    for (int c = 0; c <= 3; ++c)
      for (const std::string v : {"size", "area"}) {
        double sum = 0.0;
        for (const auto& r : p.rows)
          if (r.variable == v) sum += p.percent(r, c);
        EXPECT_NEAR(sum, 100.0, 0.01);
      }
  }
}

TEST(ProfileTable, ClusterCountsSumToOverall) {
  const auto clean = small_table();
  const auto p = profile_table(clean, small_schema(), assignment_for(clean, {1, 2, 1, 3, 2, 3}));
  for (const auto& r : p.rows) {
    std::size_t sum = 0;
    for (auto c : r.counts) sum += c;
    EXPECT_EQ(sum, r.overall);
  }
}

TEST(ProfileTable, MultiResponseMayExceedHundred) {
  const auto clean = small_table();
  const auto p = profile_table(clean, small_schema(), assignment_for(clean, {1, 1, 1, 2, 2, 2}));
  double sum = 0.0;
  for (const auto& r : p.rows)
    if (r.variable == "strategy") sum += p.percent(r, 0);
  EXPECT_GT(sum, 100.0);
  EXPECT_TRUE(row_of(p, "strategy", 1).multi_response);
}

TEST(ProfileTable, SingleClusterEqualsOverall) {
  const auto clean = small_table();
  const auto p = profile_table(clean, small_schema(), assignment_for(clean, {1, 1, 1, 1, 1, 1}));
  for (const auto& r : p.rows) {
    EXPECT_EQ(r.counts[0], r.overall);
    EXPECT_EQ(p.percent(r, 1), p.percent(r, 0));
  }
}

TEST(ProfileTable, UndeclaredCodeIsAnEncodingError) {
  auto clean = small_table();
  clean.rows[0][0] = Codes{9};
  EXPECT_THROW(profile_table(clean, small_schema(), assignment_for(clean, {1, 1, 1, 2, 2, 2})), EncodingError);
}

TEST(ProfileTable, MisalignedRowsAreRejected) {
  const auto clean = small_table();
  EXPECT_THROW(profile_table(clean, small_schema(), fixture::assignment({1, 2})), ProfilingError);
}

TEST(ProfileTable, LongFormatWithTwoDecimals) {
  const auto clean = small_table();
  std::ostringstream out;
  write_profile(out, profile_table(clean, small_schema(), assignment_for(clean, {1, 1, 1, 2, 2, 2})));
  const auto rows = csv::parse(out.str());
  EXPECT_EQ(rows[0], (csv::Row{"variable", "category", "label", "cluster", "count", "total", "percent"}));
  EXPECT_EQ(rows[1], (csv::Row{"size", "1", "small", "1", "2", "3", "66.67"}));
  EXPECT_EQ(rows[3], (csv::Row{"size", "1", "small", "overall", "2", "6", "33.33"}));
  EXPECT_EQ(rows.size(), 1u + 8u * 3u);
}

TEST(Radar, EmptyWhenNothingIsSignificant) {
  const std::vector<FeatureTestResult> rs{result(1, 0, "a", 1.0, false), result(2, 0, "a", -1.0, false)};
  const auto radar = radar_data(rs);
  EXPECT_TRUE(radar.features.empty());
  ASSERT_EQ(radar.warnings.size(), 1u);
  EXPECT_EQ(radar.clusters, (std::vector<int>{1, 2}));
}

TEST(Radar, MaskMarksTheSignificantCluster) {
  const std::vector<FeatureTestResult> rs{result(1, 0, "a", 0.5, false), result(2, 0, "a", 4.0, true),
                                          result(3, 0, "a", -1.0, false), result(1, 1, "b", 0.1, false),
                                          result(2, 1, "b", 0.2, false), result(3, 1, "b", 0.3, false)};
  const auto radar = radar_data(rs);
  ASSERT_EQ(radar.features, std::vector<std::string>{"a"});
  EXPECT_EQ(radar.significant[0], (std::vector<bool>{false, true, false}));
  EXPECT_EQ(radar.t[0], (std::vector<double>{0.5, 4.0, -1.0}));
  EXPECT_TRUE(radar.warnings.empty());
}

TEST(Radar, UntestableCellsAreZero) {
  auto zero = result(1, 0, "a", std::nan(""), false);
  zero.zero_variance = true;
  const std::vector<FeatureTestResult> rs{zero, result(2, 0, "a", 3.0, true)};
  const auto radar = radar_data(rs);
  EXPECT_EQ(radar.t[0][0], 0.0);
  std::ostringstream out;
  write_radar(out, radar);
  const auto rows = csv::parse(out.str());
  EXPECT_EQ(rows[0], (csv::Row{"feature", "t_1", "t_2", "significant_1", "significant_2"}));
  EXPECT_EQ(rows[1], (csv::Row{"a", "0", "3", "0", "1"}));
}

TEST(Radar, PlantedShiftDominatesItsCluster) {
  std::mt19937_64 rng(7);
  Matrix m(90, 5);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<int> labels;
  for (std::size_t r = 0; r < 90; ++r) {
    labels.push_back(static_cast<int>(r / 30) + 1);
    for (std::size_t c = 0; c < 5; ++c) m(r, c) = g(rng) + (r < 30 && c == 2 ? 3.0 : 0.0);
  }
  const auto rs = profile_clusters(fixture::features(m), fixture::assignment(labels), {});
  const auto radar = radar_data(rs);
  std::size_t planted = radar.features.size();
  for (std::size_t f = 0; f < radar.features.size(); ++f)
    if (radar.features[f] == "f3") planted = f;
  ASSERT_LT(planted, radar.features.size());
  for (std::size_t f = 0; f < radar.features.size(); ++f)
    if (f != planted) EXPECT_GT(std::fabs(radar.t[planted][0]), std::fabs(radar.t[f][0]));
}

TEST(Heatmap, SkipsExcludedVariables) {
  const auto clean = small_table();
  const auto h = heatmap_data(clean, small_schema(), assignment_for(clean, {1, 1, 1, 2, 2, 2}));
  EXPECT_EQ(h.variables, (std::vector<std::string>{"size", "strategy"}));
  for (const auto& c : h.distribution) EXPECT_NE(c.variable, "area");
}

TEST(Heatmap, SingleResponseProportionsSumToOne) {
  const auto clean = small_table();
  const auto h = heatmap_data(clean, small_schema(), assignment_for(clean, {1, 2, 2, 3, 3, 3}));
  std::map<int, double> sums;
  for (const auto& c : h.distribution)
    if (c.variable == "size") sums[c.cluster] += c.proportion;
  ASSERT_EQ(sums.size(), 3u);
  for (const auto& [cluster, s] : sums) EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(Heatmap, OneHouseholdClusterIsOneHot) {
  const auto clean = small_table();
  const auto h = heatmap_data(clean, small_schema(), assignment_for(clean, {1, 2, 2, 2, 2, 2}));
  for (const auto& c : h.distribution)
    if (c.cluster == 1 && c.variable == "size") EXPECT_EQ(c.proportion, c.code == 1 ? 1.0 : 0.0);
}

TEST(Heatmap, HouseholdGridJoinsMultiResponseCodes) {
  const auto clean = small_table();
  const auto h = heatmap_data(clean, small_schema(), assignment_for(clean, {1, 1, 1, 2, 2, 2}));
  ASSERT_EQ(h.households.size(), 2u);
  EXPECT_EQ(h.households[1].row_ids, (std::vector<std::string>{"h4", "h5", "h6"}));
  EXPECT_EQ(h.households[1].codes[0], (std::vector<std::string>{"3", "1;2;3"}));
  std::ostringstream dist, grid;
  write_heatmap_distribution(dist, h);
  write_heatmap_households(grid, h, "id");
  EXPECT_EQ(csv::parse(grid.str())[0], (csv::Row{"cluster", "id", "size", "strategy"}));
  EXPECT_EQ(csv::parse(dist.str()).size(), 1u + 2u * 6u);
}

TEST(Subclusters, NestInsideParentsAndNumberByParent) {
  std::mt19937_64 rng(3);
  const auto fm = fixture::features(nested_points(rng));
  const auto d = ward_cluster(fm);
  const auto main = cut_k(d, 3);
  const double main_cut = 0.5 * (first_undone_height(d, 3) + d.steps[45 - 4].height);
  const double sub_cut = 0.5 * (first_undone_height(d, 9) + d.steps[45 - 10].height);
  const auto report = subcluster_report(d, main, main_cut, sub_cut, fm, FeatureMatrix{}, {});
  EXPECT_EQ(report.assignment.k, 9);
  EXPECT_EQ(report.parent, (std::vector<int>{1, 1, 1, 2, 2, 2, 3, 3, 3}));
  for (std::size_t r = 0; r < 45; ++r)
    EXPECT_EQ(report.parent[static_cast<std::size_t>(report.assignment.labels[r] - 1)], main.labels[r]);
  EXPECT_EQ(report.characteristic_tests.size(), 9u * 2u);
  EXPECT_TRUE(report.outcome_tests.empty());
  std::ostringstream out;
  write_subcluster_parents(out, report);
  const auto rows = csv::parse(out.str());
  ASSERT_EQ(rows.size(), 10u);
  EXPECT_EQ(rows[1], (csv::Row{"1", "1", "5"}));
}

TEST(Subclusters, CutMustLieBelowMainCut) {
  std::mt19937_64 rng(4);
  const auto fm = fixture::features(nested_points(rng));
  const auto d = ward_cluster(fm);
  const auto main = cut_height(d, 30.0);
  EXPECT_THROW(subcluster_report(d, main, 30.0, 30.0, fm, FeatureMatrix{}, {}), ConfigError);
  EXPECT_THROW(subcluster_report(d, main, 30.0, 45.0, fm, FeatureMatrix{}, {}), ConfigError);
}

TEST(AdjustedRand, AgreesWithPairCountingOracle) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> lab(1, 4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> a(40), b(40);
    for (auto& v : a) v = lab(rng);
    for (std::size_t i = 0; i < 40; ++i) b[i] = trial % 2 ? lab(rng) : a[i] % 3;
    EXPECT_NEAR(adjusted_rand_index(a, b), oracle::ari(a, b), 1e-12);
  }
}

TEST(AdjustedRand, RelabelingIsPerfectAgreement) {
  const std::vector<int> a{1, 1, 2, 2, 3}, b{7, 7, 4, 4, 9};
  EXPECT_DOUBLE_EQ(adjusted_rand_index(a, b), 1.0);
}
