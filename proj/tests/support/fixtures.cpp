#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fixture {

segprof::FeatureMatrix features(const segprof::Matrix& m) {
  segprof::FeatureMatrix fm;
  fm.values = m;
  for (std::size_t c = 0; c < m.cols; ++c) {
    segprof::ColumnMeta meta;
    meta.variable = "f" + std::to_string(c + 1);
    fm.columns.push_back(meta);
  }
  fm.standardization.assign(m.cols, segprof::Standardization{});
  for (std::size_t r = 0; r < m.rows; ++r) fm.row_ids.push_back("r" + std::to_string(r + 1));
  return fm;
}

segprof::Matrix random_matrix(std::mt19937_64& rng, std::size_t n, std::size_t d, bool mixed) {
  segprof::Matrix m(n, d);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> kind(0, 2), ordinal(1, 4), binary(0, 1);
  for (std::size_t c = 0; c < d; ++c) {
    const int k = mixed ? kind(rng) : 0;
    for (std::size_t r = 0; r < n; ++r)
      m(r, c) = k == 0 ? normal(rng) : k == 1 ? ordinal(rng) : binary(rng);
    if (!mixed) continue;
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += m(r, c);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) ss += (m(r, c) - mean) * (m(r, c) - mean);
    const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    for (std::size_t r = 0; r < n; ++r) m(r, c) = sd > 0 ? (m(r, c) - mean) / sd : 0.0;
  }
  return m;
}

segprof::ClusterAssignment assignment(const std::vector<int>& labels) {
  segprof::ClusterAssignment a;
  a.labels = labels;
  a.k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
  for (std::size_t r = 0; r < labels.size(); ++r) a.row_ids.push_back("r" + std::to_string(r + 1));
  return a;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("segprof_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace fixture
