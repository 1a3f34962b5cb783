// Single-threaded reference for ward_cluster. Same merge rule and cost
// cache, written as plain loops over a list of live clusters.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>

#include "segprof/ward.hpp"

namespace segprof::serial {

namespace {

struct Live {
  std::size_t id;
  double size;
  std::vector<double> sum;
  std::vector<double> centroid;
};

double merge_cost(const Live& a, const Live& b) {
  double dist = 0.0;
  for (std::size_t k = 0; k < a.centroid.size(); ++k) {
    const double diff = a.centroid[k] - b.centroid[k];
    dist += diff * diff;
  }
  return a.size * b.size / (a.size + b.size) * dist;
}

}  // namespace

Dendrogram ward_cluster(const FeatureMatrix& fm) {
  const Matrix& x = fm.values;
  const std::size_t n = x.rows;
  if (n < 2) throw std::invalid_argument("ward_cluster: need at least 2 rows");
  const WardTieRule tie = WardTieRule::for_data(x);

  std::vector<Live> live;
  for (std::size_t i = 0; i < n; ++i) {
    auto row = x.row(i);
    live.push_back({i, 1.0, {row.begin(), row.end()}, {row.begin(), row.end()}});
  }

  // Costs keyed by (smaller id, larger id).
  std::map<std::pair<std::size_t, std::size_t>, double> cost;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) cost[{i, j}] = merge_cost(live[i], live[j]);

  Dendrogram dg;
  dg.leaves = n;
  dg.leaf_ids = fm.row_ids;
  if (dg.leaf_ids.size() != n) {
    dg.leaf_ids.resize(n);
    for (std::size_t i = 0; i < n; ++i) dg.leaf_ids[i] = std::to_string(i);
  }

  double previous = 0.0;
  for (std::size_t step = 0; step + 1 < n; ++step) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [key, c] : cost) best = std::min(best, c);

    // std::map is ordered by (min id, max id): the first pair inside the
    // tie window is the one to merge.
    const double limit = tie.window(best);
    auto chosen = std::find_if(cost.begin(), cost.end(), [&](const auto& kv) { return kv.second <= limit; });
    const auto [lo, hi] = chosen->first;
    const double delta = std::max(chosen->second, previous);
    previous = delta;

    auto pos_lo = std::find_if(live.begin(), live.end(), [&](const Live& c) { return c.id == lo; });
    auto pos_hi = std::find_if(live.begin(), live.end(), [&](const Live& c) { return c.id == hi; });
    Live merged{n + step, pos_lo->size + pos_hi->size, pos_lo->sum, {}};
    for (std::size_t k = 0; k < merged.sum.size(); ++k) merged.sum[k] += pos_hi->sum[k];
    merged.centroid = merged.sum;
    for (auto& v : merged.centroid) v /= merged.size;

    dg.steps.push_back(MergeStep{lo, hi, merged.id, static_cast<std::size_t>(merged.size), delta, std::sqrt(2.0 * delta)});

    std::erase_if(cost, [&](const auto& kv) {
      return kv.first.first == lo || kv.first.second == lo || kv.first.first == hi || kv.first.second == hi;
    });
    std::erase_if(live, [&](const Live& c) { return c.id == lo || c.id == hi; });
    for (const auto& other : live) cost[{other.id, merged.id}] = merge_cost(other, merged);
    live.push_back(std::move(merged));
  }
  return dg;
}

}  // namespace segprof::serial
