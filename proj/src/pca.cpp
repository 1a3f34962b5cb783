#include "segprof/pca.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "segprof/csv.hpp"
#include "segprof/errors.hpp"

namespace segprof {

PcaResult pca(const FeatureMatrix& fm) {
  const auto n = static_cast<Eigen::Index>(fm.rows());
  const auto d = static_cast<Eigen::Index>(fm.cols());
  if (n < 2) throw std::invalid_argument("pca: need at least 2 rows");
  if (d < 1) throw std::invalid_argument("pca: need at least 1 column");

  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = fm.values(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  const Eigen::RowVectorXd centre = x.colwise().mean();
  x.rowwise() -= centre;
  if (x.cwiseAbs().maxCoeff() == 0.0) throw ComputationError("pca: every column is constant");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  Eigen::MatrixXd v = svd.matrixV();
  const Eigen::Index k = s.size();

  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index j = 0; j < d; ++j)
      if (std::fabs(v(j, c)) > best) {
        best = std::fabs(v(j, c));
        arg = j;
      }
    if (v(arg, c) < 0) v.col(c) *= -1.0;
  }
  const Eigen::MatrixXd scores = x * v;

  PcaResult r;
  for (const auto& col : fm.columns) r.features.push_back(col.name());
  r.centre.assign(centre.data(), centre.data() + d);
  r.components = Matrix(static_cast<std::size_t>(k), static_cast<std::size_t>(d));
  for (Eigen::Index c = 0; c < k; ++c)
    for (Eigen::Index j = 0; j < d; ++j) r.components(static_cast<std::size_t>(c), static_cast<std::size_t>(j)) = v(j, c);
  r.scores = Matrix(static_cast<std::size_t>(n), static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index c = 0; c < k; ++c) r.scores(static_cast<std::size_t>(i), static_cast<std::size_t>(c)) = scores(i, c);

  const double total = s.squaredNorm();
  for (Eigen::Index c = 0; c < k; ++c) {
    r.explained_variance.push_back(s(c) * s(c) / static_cast<double>(n - 1));
    r.explained_variance_ratio.push_back(s(c) * s(c) / total);
  }
  return r;
}

namespace {
std::string pc_name(std::size_t c) { return "PC" + std::to_string(c + 1); }
}  // namespace

void write_pca_loadings(std::ostream& out, const PcaResult& r) {
  csv::Row header{"feature"};
  for (std::size_t c = 0; c < r.components.rows; ++c) header.push_back(pc_name(c));
  csv::write_row(out, header);
  for (std::size_t j = 0; j < r.features.size(); ++j) {
    csv::Row row{r.features[j]};
    for (std::size_t c = 0; c < r.components.rows; ++c) row.push_back(csv::format_double(r.components(c, j)));
    csv::write_row(out, row);
  }
}

void write_pca_variance(std::ostream& out, const PcaResult& r) {
  csv::write_row(out, {"component", "variance", "ratio", "cumulative_ratio"});
  double cumulative = 0.0;
  for (std::size_t c = 0; c < r.explained_variance.size(); ++c) {
    cumulative += r.explained_variance_ratio[c];
    csv::write_row(out, {pc_name(c), csv::format_double(r.explained_variance[c]),
                         csv::format_double(r.explained_variance_ratio[c]), csv::format_double(cumulative)});
  }
}

void write_pca_scores(std::ostream& out, const PcaResult& r, const std::vector<std::string>& row_ids,
                      std::string_view id_header) {
  csv::Row header{std::string(id_header)};
  for (std::size_t c = 0; c < r.scores.cols; ++c) header.push_back(pc_name(c));
  csv::write_row(out, header);
  for (std::size_t i = 0; i < r.scores.rows; ++i) {
    csv::Row row{i < row_ids.size() ? row_ids[i] : std::to_string(i + 1)};
    for (std::size_t c = 0; c < r.scores.cols; ++c) row.push_back(csv::format_double(r.scores(i, c)));
    csv::write_row(out, row);
  }
}

}  // namespace segprof
