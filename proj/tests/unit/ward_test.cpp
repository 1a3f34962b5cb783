#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "segprof/ward.hpp"

using namespace segprof;

namespace {

Matrix points(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(rows.size(), rows.begin()->size());
  std::size_t r = 0;
  for (const auto& row : rows) {
    std::size_t c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

double total_sse(const Matrix& x) {
  std::vector<std::size_t> all(x.rows);
  std::iota(all.begin(), all.end(), std::size_t{0});
  return oracle::sse(x, all);
}

// Heights compared at 1e-9 relative; near-zero heights carry absolute
// rounding of order sqrt(eps * total SSE) from the from-scratch recompute.
void expect_matches_oracle(const Dendrogram& d, const Matrix& x) {
  const auto naive = oracle::naive_ward(x);
  ASSERT_EQ(d.steps.size(), naive.size());
  const double floor = std::sqrt(2.0 * 64.0 * std::numeric_limits<double>::epsilon() * std::max(total_sse(x), 1.0));
  for (std::size_t s = 0; s < naive.size(); ++s) {
    EXPECT_EQ(d.steps[s].left, naive[s].left) << "step " << s;
    EXPECT_EQ(d.steps[s].right, naive[s].right) << "step " << s;
    EXPECT_EQ(d.steps[s].size, naive[s].size) << "step " << s;
    EXPECT_NEAR(d.steps[s].height, naive[s].height, std::max(1e-9 * naive[s].height, floor)) << "step " << s;
  }
}

// Labels renumbered by first appearance, so equal partitions compare equal.
std::vector<int> canonical(const std::vector<int>& labels) {
  std::map<int, int> seen;
  std::vector<int> out;
  for (int l : labels) out.push_back(seen.emplace(l, static_cast<int>(seen.size()) + 1).first->second);
  return out;
}

bool refines(const std::vector<int>& fine, const std::vector<int>& coarse) {
  std::map<int, int> parent;
  for (std::size_t i = 0; i < fine.size(); ++i) {
    auto [it, inserted] = parent.emplace(fine[i], coarse[i]);
    if (!inserted && it->second != coarse[i]) return false;
  }
  return true;
}

}  // namespace

TEST(Sse, SingletonIsZero) {
  const auto x = points({{0, 0}});
  const std::vector<std::size_t> rows{0};
  EXPECT_EQ(sse(x, rows), 0.0);
}

TEST(Sse, TwoSymmetricPoints) {
  const auto x = points({{0, 0}, {2, 0}});
  const std::vector<std::size_t> rows{0, 1};
  EXPECT_DOUBLE_EQ(sse(x, rows), 2.0);
}

TEST(Sse, MatchesTwoPassOracle) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = fixture::random_matrix(rng, 5, 3, false);
    const std::vector<std::size_t> rows{0, 1, 2, 3, 4};
    EXPECT_NEAR(sse(x, rows), oracle::sse(x, rows), 1e-12);
  }
}

TEST(Sse, EmptySetIsAnArgumentError) {
  const auto x = points({{0, 0}});
  EXPECT_THROW(sse(x, std::vector<std::size_t>{}), std::invalid_argument);
}

TEST(DeltaSse, SingletonMergeHeightIsEuclideanDistance) {
  const auto x = points({{0, 0}, {2, 0}});
  const std::vector<std::size_t> a{0}, b{1};
  EXPECT_DOUBLE_EQ(delta_sse(x, a, b), 2.0);
  const auto d = ward_cluster(fixture::features(x));
  EXPECT_DOUBLE_EQ(d.steps[0].height, 2.0);
}

TEST(DeltaSse, CoincidentCentroidsGiveZero) {
  const auto x = points({{0, 1}, {3, 2}, {0, 1}, {3, 2}});
  const std::vector<std::size_t> a{0, 1}, b{2, 3};
  EXPECT_NEAR(delta_sse(x, a, b), 0.0, 1e-12);
  EXPECT_EQ(delta_sse_centroid(x, a, b), 0.0);
}

TEST(DeltaSse, DirectEqualsCentroidIdentity) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> size(1, 6);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t na = size(rng), nb = size(rng);
    const auto x = fixture::random_matrix(rng, na + nb, 4, false);
    std::vector<std::size_t> a(na), b(nb);
    std::iota(a.begin(), a.end(), std::size_t{0});
    std::iota(b.begin(), b.end(), na);
    EXPECT_NEAR(delta_sse(x, a, b), delta_sse_centroid(x, a, b), 1e-10);
  }
}

TEST(DeltaSse, OverlappingClustersAreRejected) {
  const auto x = points({{0}, {1}, {2}});
  const std::vector<std::size_t> a{0, 1}, b{1, 2};
  EXPECT_THROW(delta_sse(x, a, b), std::invalid_argument);
}

TEST(WardCluster, MatchesNaiveOracleOnContinuousData) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    std::uniform_int_distribution<std::size_t> n(3, 30), d(1, 8);
    const auto x = fixture::random_matrix(rng, n(rng), d(rng), false);
    expect_matches_oracle(ward_cluster(fixture::features(x)), x);
  }
}

TEST(WardCluster, MatchesNaiveOracleOnMixedDataWithTies) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    std::uniform_int_distribution<std::size_t> n(3, 30), d(1, 4);
    const auto x = fixture::random_matrix(rng, n(rng), d(rng), true);
    expect_matches_oracle(ward_cluster(fixture::features(x)), x);
  }
}

TEST(WardCluster, ParallelMatchesSerialExactly) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto fm = fixture::features(fixture::random_matrix(rng, 60, 6, trial % 2 == 0));
    const auto a = ward_cluster(fm);
    const auto b = serial::ward_cluster(fm);
    ASSERT_EQ(a.steps.size(), b.steps.size());
    for (std::size_t s = 0; s < a.steps.size(); ++s) {
      EXPECT_EQ(a.steps[s].left, b.steps[s].left);
      EXPECT_EQ(a.steps[s].right, b.steps[s].right);
      EXPECT_EQ(a.steps[s].delta_sse, b.steps[s].delta_sse);
    }
  }
}

TEST(WardCluster, IdenticalPointsMergeAtZero) {
  const auto d = ward_cluster(fixture::features(Matrix(7, 3, 1.5)));
  for (const auto& s : d.steps) EXPECT_EQ(s.height, 0.0);
  // Ties resolve to the lexicographically smallest pair.
  EXPECT_EQ(d.steps[0].left, 0u);
  EXPECT_EQ(d.steps[0].right, 1u);
  EXPECT_EQ(d.steps[1].left, 2u);
  EXPECT_EQ(d.steps[1].right, 3u);
}

TEST(WardCluster, HeightsAreMonotoneAndMatchDeltaSse) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const auto d = ward_cluster(fixture::features(fixture::random_matrix(rng, 35, 5, true)));
    for (std::size_t s = 0; s < d.steps.size(); ++s) {
      EXPECT_DOUBLE_EQ(d.steps[s].height, std::sqrt(2.0 * d.steps[s].delta_sse));
      if (s > 0) EXPECT_GE(d.steps[s].height, d.steps[s - 1].height);
    }
    EXPECT_EQ(d.steps.back().size, 35u);
  }
}

TEST(WardCluster, PermutingRowsPermutesLabels) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 25;
    const auto x = fixture::random_matrix(rng, n, 4, false);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix y(n, x.cols);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < x.cols; ++c) y(r, c) = x(perm[r], c);
    const auto dx = ward_cluster(fixture::features(x));
    const auto dy = ward_cluster(fixture::features(y));
    for (std::size_t k = 1; k <= n; ++k) {
      const auto lx = cut_k(dx, k).labels;
      const auto ly = cut_k(dy, k).labels;
      std::vector<int> mapped(n);
      for (std::size_t r = 0; r < n; ++r) mapped[r] = lx[perm[r]];
      EXPECT_EQ(canonical(mapped), canonical(ly)) << "k = " << k;
    }
  }
}

TEST(WardCluster, UniformScalingScalesCutHeights) {
  std::mt19937_64 rng(8);
  for (double c : {0.1, 3.0, 250.0}) {
    const auto x = fixture::random_matrix(rng, 30, 5, false);
    Matrix y = x;
    for (auto& v : y.data) v *= c;
    const auto dx = ward_cluster(fixture::features(x));
    const auto dy = ward_cluster(fixture::features(y));
    for (std::size_t s = 0; s + 1 < dx.steps.size(); ++s) {
      const double h = 0.5 * (dx.steps[s].height + dx.steps[s + 1].height);
      if (dx.steps[s + 1].height - dx.steps[s].height < 1e-6 * h) continue;
      EXPECT_EQ(cut_height(dx, h).labels, cut_height(dy, c * h).labels);
    }
  }
}

TEST(WardCluster, SseDecomposesOverUndoneMerges) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = fixture::random_matrix(rng, 30, 4, true);
    const auto d = ward_cluster(fixture::features(x));
    const double total = total_sse(x);
    for (std::size_t k = 1; k <= 30; k += 3) {
      const auto asg = cut_k(d, k);
      double within = 0.0;
      for (int l = 1; l <= asg.k; ++l) within += oracle::sse(x, asg.members(l));
      double undone = 0.0;
      for (std::size_t s = 30 - k; s < d.steps.size(); ++s) undone += d.steps[s].delta_sse;
      EXPECT_NEAR(within, total - undone, 1e-9 * std::max(total, 1.0));
    }
  }
}

TEST(WardCluster, FewerThanTwoRowsIsAnArgumentError) {
  EXPECT_THROW(ward_cluster(fixture::features(Matrix(1, 2, 0.0))), std::invalid_argument);
}

TEST(CutHeight, AboveRootGivesOneCluster) {
  std::mt19937_64 rng(10);
  const auto d = ward_cluster(fixture::features(fixture::random_matrix(rng, 12, 3, false)));
  const auto asg = cut_height(d, d.steps.back().height + 1.0);
  EXPECT_EQ(asg.k, 1);
  EXPECT_EQ(asg.sizes(), std::vector<std::size_t>{12});
}

TEST(CutHeight, BelowFirstMergeGivesSingletons) {
  std::mt19937_64 rng(11);
  const auto d = ward_cluster(fixture::features(fixture::random_matrix(rng, 12, 3, false)));
  const auto asg = cut_height(d, d.steps.front().height * 0.5);
  EXPECT_EQ(asg.k, 12);
  for (std::size_t r = 0; r < 12; ++r) EXPECT_EQ(asg.labels[r], static_cast<int>(r + 1));
}

TEST(CutHeight, NonPositiveHeightIsRejected) {
  const auto d = ward_cluster(fixture::features(points({{0}, {1}})));
  EXPECT_THROW(cut_height(d, 0.0), std::invalid_argument);
  EXPECT_THROW(cut_height(d, -1.0), std::invalid_argument);
}

TEST(CutK, ExtremesAndRange) {
  std::mt19937_64 rng(12);
  const auto d = ward_cluster(fixture::features(fixture::random_matrix(rng, 9, 2, false)));
  EXPECT_EQ(cut_k(d, 1).k, 1);
  EXPECT_EQ(cut_k(d, 9).k, 9);
  EXPECT_THROW(cut_k(d, 0), std::invalid_argument);
  EXPECT_THROW(cut_k(d, 10), std::invalid_argument);
  EXPECT_TRUE(std::isinf(first_undone_height(d, 1)));
}

TEST(CutK, AgreesWithCutHeightInTheGap) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const auto d = ward_cluster(fixture::features(fixture::random_matrix(rng, 20, 3, false)));
    const std::size_t k = 4;
    const double upper = first_undone_height(d, k);
    const double lower = d.steps[20 - k - 1].height;
    if (!(upper > lower)) continue;
    const auto by_k = cut_k(d, k);
    const auto by_h = cut_height(d, 0.5 * (lower + upper));
    EXPECT_EQ(by_k.labels, by_h.labels);
    EXPECT_EQ(by_h.k, 4);
  }
}

TEST(CutK, LowerCutsRefineHigherCuts) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = ward_cluster(fixture::features(fixture::random_matrix(rng, 25, 4, true)));
    for (std::size_t k = 1; k < 25; ++k) EXPECT_TRUE(refines(cut_k(d, k + 1).labels, cut_k(d, k).labels));
  }
}

TEST(CutK, LabelsNumberedByFirstAppearance) {
  std::mt19937_64 rng(15);
  const auto d = ward_cluster(fixture::features(fixture::random_matrix(rng, 18, 3, false)));
  const auto asg = cut_k(d, 5);
  EXPECT_EQ(asg.labels, canonical(asg.labels));
  EXPECT_EQ(asg.row_ids, d.leaf_ids);
}

TEST(DendrogramExport, JsonListsEveryMerge) {
  const auto fm = fixture::features(points({{0, 0}, {0, 1}, {5, 5}, {5, 6}}));
  const auto d = ward_cluster(fm);
  std::ostringstream out;
  write_dendrogram_json(out, d);
  const auto doc = nlohmann::json::parse(out.str());
  ASSERT_EQ(doc["merges"].size(), 3u);
  EXPECT_EQ(doc["merges"][0]["left"], 0);
  EXPECT_EQ(doc["merges"][0]["right"], 1);
  EXPECT_EQ(doc["merges"][0]["id"], 4);
  EXPECT_EQ(doc["merges"][2]["size"], 4);
  EXPECT_DOUBLE_EQ(doc["merges"][0]["height"].get<double>(), 1.0);
  EXPECT_EQ(doc["leaf_ids"][3], "r4");
}

TEST(DendrogramExport, NewickHasBranchLengths) {
  const auto d = ward_cluster(fixture::features(points({{0}, {2}, {10}})));
  std::ostringstream out;
  write_newick(out, d);
  // (r1,r2) at height 2; r3 (id 2) is the smaller child of the root and
  // joins at sqrt(2 * 2/3 * 81) = sqrt(108).
  const std::string expected_tail = ");\n";
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, 4), "(r3:");
  EXPECT_NE(text.find(",(r1:2,r2:2):"), std::string::npos);
  EXPECT_EQ(text.substr(text.size() - expected_tail.size()), expected_tail);
}

TEST(DendrogramExport, AssignmentCsv) {
  const auto asg = fixture::assignment({1, 2, 1});
  std::ostringstream out;
  write_assignment(out, asg, "household_id");
  EXPECT_EQ(out.str(), "household_id,label\nr1,1\nr2,2\nr3,1\n");
}
