#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "segprof/features.hpp"

namespace segprof {

/// One agglomeration. Leaves are clusters 0..n-1; the merge at step s
/// (0-based) creates cluster n + s.
struct MergeStep {
  std::size_t left = 0;   // smaller child id
  std::size_t right = 0;  // larger child id
  std::size_t new_id = 0;
  std::size_t size = 0;
  double delta_sse = 0.0;
  double height = 0.0;  // sqrt(2 * delta_sse)
};

struct Dendrogram {
  std::size_t leaves = 0;
  std::vector<MergeStep> steps;
  std::vector<std::string> leaf_ids;
};

struct ClusterAssignment {
  std::vector<int> labels;  // 1..k, numbered by first appearance in row order
  int k = 0;
  std::optional<double> cut_height;
  std::vector<std::string> row_ids;

  [[nodiscard]] std::vector<std::size_t> members(int label) const;
  [[nodiscard]] std::vector<std::size_t> sizes() const;  // index label - 1
};

/// Deciding rule for near-equal merge costs. A candidate ties with the
/// current minimum when it lies within a window that absorbs rounding
/// differences between algebraically equal evaluations; among tied pairs the
/// lexicographically smallest (min id, max id) merges first.
struct WardTieRule {
  double relative = 1e-9;
  double absolute = 0.0;

  /// absolute = 1e-12 times the mean squared row norm of the data.
  static WardTieRule for_data(const Matrix& points);
  [[nodiscard]] double window(double best) const { return best + relative * best + absolute; }
};

/// Within-cluster sum of squared Euclidean deviations from the centroid.
double sse(const Matrix& points, std::span<const std::size_t> rows);

/// SSE(A u B) - SSE(A) - SSE(B), evaluated directly from the members.
double delta_sse(const Matrix& points, std::span<const std::size_t> a, std::span<const std::size_t> b);

/// n_A n_B / (n_A + n_B) * |c_A - c_B|^2.
double delta_sse_centroid(const Matrix& points, std::span<const std::size_t> a, std::span<const std::size_t> b);

/// Ward minimum-variance agglomeration over the rows of fm. Parallel over
/// candidate pairs; see serial::ward_cluster for the reference loop.
Dendrogram ward_cluster(const FeatureMatrix& fm);

/// Clusters after removing every merge higher than h.
ClusterAssignment cut_height(const Dendrogram& d, double h);

/// Clusters after undoing the last k - 1 merges.
ClusterAssignment cut_k(const Dendrogram& d, std::size_t k);

/// Height of the first merge undone by cut_k(d, k); infinity for k == 1.
double first_undone_height(const Dendrogram& d, std::size_t k);

void write_dendrogram_json(std::ostream& out, const Dendrogram& d);
void write_newick(std::ostream& out, const Dendrogram& d);
void write_assignment(std::ostream& out, const ClusterAssignment& asg, std::string_view id_header);

namespace serial {
Dendrogram ward_cluster(const FeatureMatrix& fm);
}

}  // namespace segprof
