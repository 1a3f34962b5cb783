#include "segprof/ward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"
#include "segprof/csv.hpp"

namespace segprof {

WardTieRule WardTieRule::for_data(const Matrix& points) {
  WardTieRule rule;
  if (points.rows == 0) return rule;
  double total = 0.0;
  for (double v : points.data) total += v * v;
  rule.absolute = 1e-12 * total / static_cast<double>(points.rows);
  return rule;
}

namespace {

void check_rows(const Matrix& points, std::span<const std::size_t> rows) {
  for (auto r : rows)
    if (r >= points.rows) throw std::invalid_argument("row index out of range");
}

}  // namespace

double sse(const Matrix& points, std::span<const std::size_t> rows) {
  if (rows.empty()) throw std::invalid_argument("sse: empty point set");
  check_rows(points, rows);
  const std::size_t d = points.cols;
  std::vector<double> mean(d, 0.0);
  for (auto r : rows)
    for (std::size_t k = 0; k < d; ++k) mean[k] += points(r, k);
  for (auto& m : mean) m /= static_cast<double>(rows.size());
  double total = 0.0;
  for (auto r : rows)
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = points(r, k) - mean[k];
      total += diff * diff;
    }
  return total;
}

double delta_sse(const Matrix& points, std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("delta_sse: empty cluster");
  std::unordered_set<std::size_t> seen(a.begin(), a.end());
  for (auto r : b)
    if (seen.contains(r)) throw std::invalid_argument("delta_sse: clusters overlap");
  std::vector<std::size_t> merged(a.begin(), a.end());
  merged.insert(merged.end(), b.begin(), b.end());
  return sse(points, merged) - (sse(points, a) + sse(points, b));
}

double delta_sse_centroid(const Matrix& points, std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("delta_sse: empty cluster");
  check_rows(points, a);
  check_rows(points, b);
  const std::size_t d = points.cols;
  std::vector<double> ca(d, 0.0), cb(d, 0.0);
  for (auto r : a)
    for (std::size_t k = 0; k < d; ++k) ca[k] += points(r, k);
  for (auto r : b)
    for (std::size_t k = 0; k < d; ++k) cb[k] += points(r, k);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double dist = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double diff = ca[k] / na - cb[k] / nb;
    dist += diff * diff;
  }
  return na * nb / (na + nb) * dist;
}

Dendrogram ward_cluster(const FeatureMatrix& fm) {
  const Matrix& x = fm.values;
  const std::size_t n = x.rows;
  const std::size_t d = x.cols;
  if (n < 2) throw std::invalid_argument("ward_cluster: need at least 2 rows");

  const WardTieRule tie = WardTieRule::for_data(x);
  constexpr double inf = std::numeric_limits<double>::infinity();
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();

  // Slot s holds one live cluster; a merge reuses the smaller slot.
  std::vector<std::size_t> ids(n);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  std::vector<double> sizes(n, 1.0);
  std::vector<char> active(n, 1);
  Matrix sums = x;
  Matrix centroids = x;
  std::vector<double> cost(n * n, inf);  // upper triangle, cost[i * n + j] for i < j

  auto pair_cost = [&](std::size_t i, std::size_t j) {
    double dist = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = centroids(i, k) - centroids(j, k);
      dist += diff * diff;
    }
    return sizes[i] * sizes[j] / (sizes[i] + sizes[j]) * dist;
  };

#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) cost[i * n + j] = pair_cost(i, j);

  Dendrogram dg;
  dg.leaves = n;
  dg.leaf_ids = fm.row_ids;
  if (dg.leaf_ids.size() != n) {
    dg.leaf_ids.resize(n);
    for (std::size_t i = 0; i < n; ++i) dg.leaf_ids[i] = std::to_string(i);
  }
  dg.steps.reserve(n - 1);

  std::vector<double> row_min(n);
  std::vector<std::size_t> row_lo(n), row_hi(n), row_partner(n);
  double previous = 0.0;

  for (std::size_t step = 0; step + 1 < n; ++step) {
#pragma omp parallel for schedule(dynamic, 8)
    for (std::size_t i = 0; i < n; ++i) {
      double best = inf;
      if (active[i])
        for (std::size_t j = i + 1; j < n; ++j)
          if (active[j] && cost[i * n + j] < best) best = cost[i * n + j];
      row_min[i] = best;
    }
    const double best = *std::min_element(row_min.begin(), row_min.end());
    const double limit = tie.window(best);

#pragma omp parallel for schedule(dynamic, 8)
    for (std::size_t i = 0; i < n; ++i) {
      row_lo[i] = row_hi[i] = row_partner[i] = none;
      if (!active[i] || row_min[i] > limit) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!active[j] || cost[i * n + j] > limit) continue;
        const auto lo = std::min(ids[i], ids[j]);
        const auto hi = std::max(ids[i], ids[j]);
        if (lo < row_lo[i] || (lo == row_lo[i] && hi < row_hi[i])) {
          row_lo[i] = lo;
          row_hi[i] = hi;
          row_partner[i] = j;
        }
      }
    }

    std::size_t a = none;
    for (std::size_t i = 0; i < n; ++i) {
      if (row_partner[i] == none) continue;
      if (a == none || row_lo[i] < row_lo[a] || (row_lo[i] == row_lo[a] && row_hi[i] < row_hi[a])) a = i;
    }
    const std::size_t b = row_partner[a];

    // Ward costs never decrease; absorb rounding-level regressions.
    const double delta = std::max(cost[a * n + b], previous);
    previous = delta;

    MergeStep ms;
    ms.left = std::min(ids[a], ids[b]);
    ms.right = std::max(ids[a], ids[b]);
    ms.new_id = n + step;
    ms.size = static_cast<std::size_t>(sizes[a] + sizes[b]);
    ms.delta_sse = delta;
    ms.height = std::sqrt(2.0 * delta);
    dg.steps.push_back(ms);

    ids[a] = ms.new_id;
    sizes[a] += sizes[b];
    active[b] = 0;
    for (std::size_t k = 0; k < d; ++k) {
      sums(a, k) += sums(b, k);
      centroids(a, k) = sums(a, k) / sizes[a];
    }

#pragma omp parallel for schedule(static)
    for (std::size_t j = 0; j < n; ++j) {
      if (!active[j] || j == a) continue;
      cost[std::min(a, j) * n + std::max(a, j)] = pair_cost(a, j);
    }
  }
  return dg;
}

std::vector<std::size_t> ClusterAssignment::members(int label) const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < labels.size(); ++r)
    if (labels[r] == label) out.push_back(r);
  return out;
}

std::vector<std::size_t> ClusterAssignment::sizes() const {
  std::vector<std::size_t> out(static_cast<std::size_t>(k), 0);
  for (int l : labels) ++out[static_cast<std::size_t>(l - 1)];
  return out;
}

namespace {

ClusterAssignment assign_after(const Dendrogram& d, std::size_t kept_merges) {
  const std::size_t n = d.leaves;
  // Union-find over cluster ids 0 .. 2n-2.
  std::vector<std::size_t> parent(2 * n - 1);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  for (std::size_t s = 0; s < kept_merges; ++s) {
    const auto& m = d.steps[s];
    parent[find(m.left)] = m.new_id;
    parent[find(m.right)] = m.new_id;
  }

  ClusterAssignment asg;
  asg.row_ids = d.leaf_ids;
  asg.labels.assign(n, 0);
  std::vector<int> label_of(2 * n - 1, 0);
  int next = 0;
  for (std::size_t r = 0; r < n; ++r) {
    auto root = find(r);
    if (label_of[root] == 0) label_of[root] = ++next;
    asg.labels[r] = label_of[root];
  }
  asg.k = next;
  return asg;
}

}  // namespace

ClusterAssignment cut_height(const Dendrogram& d, double h) {
  if (!(h > 0)) throw std::invalid_argument("cut height must be positive");
  std::size_t kept = 0;
  while (kept < d.steps.size() && d.steps[kept].height <= h) ++kept;
  auto asg = assign_after(d, kept);
  asg.cut_height = h;
  return asg;
}

ClusterAssignment cut_k(const Dendrogram& d, std::size_t k) {
  if (k < 1 || k > d.leaves) throw std::invalid_argument("k must lie in [1, n]");
  return assign_after(d, d.leaves - k);
}

double first_undone_height(const Dendrogram& d, std::size_t k) {
  if (k < 1 || k > d.leaves) throw std::invalid_argument("k must lie in [1, n]");
  if (k == 1) return std::numeric_limits<double>::infinity();
  return d.steps[d.leaves - k].height;
}

void write_dendrogram_json(std::ostream& out, const Dendrogram& d) {
  nlohmann::ordered_json doc;
  doc["leaves"] = d.leaves;
  doc["leaf_ids"] = d.leaf_ids;
  auto& merges = doc["merges"] = nlohmann::ordered_json::array();
  for (const auto& m : d.steps) {
    nlohmann::ordered_json jm;
    jm["left"] = m.left;
    jm["right"] = m.right;
    jm["id"] = m.new_id;
    jm["size"] = m.size;
    jm["delta_sse"] = m.delta_sse;
    jm["height"] = m.height;
    merges.push_back(std::move(jm));
  }
  out << doc.dump(2) << '\n';
}

namespace {

std::string newick_label(const std::string& name) {
  if (name.find_first_of("()[]':;, \t") == std::string::npos && !name.empty()) return name;
  std::string out = "'";
  for (char c : name) {
    if (c == '\'') out += '\'';
    out += c;
  }
  return out + "'";
}

}  // namespace

void write_newick(std::ostream& out, const Dendrogram& d) {
  const std::size_t n = d.leaves;
  if (n == 0) {
    out << ";\n";
    return;
  }
  std::vector<std::string> text(2 * n - 1);
  std::vector<double> height(2 * n - 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) text[i] = newick_label(i < d.leaf_ids.size() ? d.leaf_ids[i] : std::to_string(i));
  for (const auto& m : d.steps) {
    height[m.new_id] = m.height;
    text[m.new_id] = "(" + std::move(text[m.left]) + ":" + csv::format_double(m.height - height[m.left]) + "," +
                     std::move(text[m.right]) + ":" + csv::format_double(m.height - height[m.right]) + ")";
  }
  out << text[d.steps.empty() ? 0 : d.steps.back().new_id] << ";\n";
}

void write_assignment(std::ostream& out, const ClusterAssignment& asg, std::string_view id_header) {
  csv::write_row(out, {std::string(id_header), "label"});
  for (std::size_t r = 0; r < asg.labels.size(); ++r)
    csv::write_row(out, {r < asg.row_ids.size() ? asg.row_ids[r] : std::to_string(r + 1), std::to_string(asg.labels[r])});
}

}  // namespace segprof
