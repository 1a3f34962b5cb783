#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "segprof/features.hpp"

namespace segprof {

struct PcaResult {
  std::vector<std::string> features;
  /// Row c holds the unit loading vector of component c.
  Matrix components;
  std::vector<double> explained_variance;  // sample variance along each component
  std::vector<double> explained_variance_ratio;
  /// Projections of the centred rows; rows x components.
  Matrix scores;
  std::vector<double> centre;
};

/// Principal components from the SVD of the column-centred matrix. There are
/// min(rows, cols) components; each is signed so that its largest-magnitude
/// loading is positive. Throws ComputationError when every column is
/// constant and std::invalid_argument for fewer than 2 rows.
PcaResult pca(const FeatureMatrix& fm);

void write_pca_loadings(std::ostream& out, const PcaResult& r);
void write_pca_variance(std::ostream& out, const PcaResult& r);
void write_pca_scores(std::ostream& out, const PcaResult& r, const std::vector<std::string>& row_ids,
                      std::string_view id_header);

}  // namespace segprof
