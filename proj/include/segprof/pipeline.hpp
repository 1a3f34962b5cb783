#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace segprof {

enum class Product { profiles, tests, radar, heatmaps, dendrogram, corr, pca };

std::string_view to_string(Product p);
/// Parses a comma-separated product list; throws ConfigError on unknown names.
std::set<Product> parse_products(std::string_view list);
std::set<Product> all_products();

struct PipelineConfig {
  std::filesystem::path input_path;
  std::filesystem::path schema_path;
  std::optional<double> cut_height;
  std::optional<std::size_t> k;
  double alpha = 0.05;
  std::filesystem::path output_dir;
  std::optional<double> subcluster_cut;
  std::set<Product> emit = all_products();

  /// Throws ConfigError.
  void validate() const;
};

struct ProductFile {
  std::string path;  // relative to the output directory
  std::string sha256;
};

struct RunManifest {
  std::string json;  // the manifest.json text
  std::vector<ProductFile> products;
  int clusters = 0;
  std::vector<std::string> warnings;
};

/// ingest -> encode -> cluster -> stats -> reports. Writes every product and
/// manifest.json under cfg.output_dir. On failure the files written by this
/// run are removed and the error is rethrown with the stage name prefixed;
/// the error keeps its original type (ConfigError, InputError, ...).
RunManifest run_pipeline(const PipelineConfig& cfg);

}  // namespace segprof
