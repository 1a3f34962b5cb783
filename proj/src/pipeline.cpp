#include "segprof/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <system_error>
#include <tuple>

#include "json.hpp"
#include "segprof/correlation.hpp"
#include "segprof/csv.hpp"
#include "segprof/digest.hpp"
#include "segprof/errors.hpp"
#include "segprof/features.hpp"
#include "segprof/pca.hpp"
#include "segprof/report.hpp"
#include "segprof/schema.hpp"
#include "segprof/stats.hpp"
#include "segprof/survey.hpp"
#include "segprof/ward.hpp"

#ifndef SEGPROF_VERSION
#define SEGPROF_VERSION "unknown"
#endif

namespace segprof {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string_view to_string(Product p) {
  switch (p) {
    case Product::profiles: return "profiles";
    case Product::tests: return "tests";
    case Product::radar: return "radar";
    case Product::heatmaps: return "heatmaps";
    case Product::dendrogram: return "dendrogram";
    case Product::corr: return "corr";
    case Product::pca: return "pca";
  }
  return "?";
}

std::set<Product> all_products() {
  return {Product::profiles, Product::tests, Product::radar, Product::heatmaps,
          Product::dendrogram, Product::corr, Product::pca};
}

std::set<Product> parse_products(std::string_view list) {
  std::set<Product> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const auto comma = list.find(',', start);
    const auto item = normalize_text(list.substr(start, comma == std::string_view::npos ? list.npos : comma - start));
    if (!item.empty()) {
      bool known = false;
      for (Product p : all_products())
        if (item == to_string(p)) {
          out.insert(p);
          known = true;
        }
      if (!known) throw ConfigError("unknown product '" + item + "'");
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw ConfigError("no products selected");
  return out;
}

void PipelineConfig::validate() const {
  if (input_path.empty()) throw ConfigError("no input file given");
  if (schema_path.empty()) throw ConfigError("no schema file given");
  if (output_dir.empty()) throw ConfigError("no output directory given");
  if (cut_height.has_value() == k.has_value()) throw ConfigError("give exactly one of --cut-height and --k");
  if (cut_height && !(*cut_height > 0)) throw ConfigError("cut height must be positive");
  if (k && *k < 1) throw ConfigError("k must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (subcluster_cut) {
    if (!(*subcluster_cut > 0)) throw ConfigError("subcluster cut must be positive");
    if (cut_height && !(*subcluster_cut < *cut_height))
      throw ConfigError("subcluster cut must lie below the main cut height");
  }
}

namespace {

// Rethrows the active exception with the stage name prefixed, keeping its
// error category.
[[noreturn]] void rethrow_in(const std::string& stage) {
  const std::string prefix = stage + ": ";
  try {
    throw;
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const SchemaError& e) {
    throw SchemaError(prefix + e.what());
  } catch (const InputError& e) {
    throw InputError(prefix + e.what());
  } catch (const RangeError& e) {
    throw RangeError(prefix + e.what());
  } catch (const ImputationError& e) {
    throw ImputationError(prefix + e.what());
  } catch (const EncodingError& e) {
    throw EncodingError(prefix + e.what());
  } catch (const ProfilingError& e) {
    throw ProfilingError(prefix + e.what());
  } catch (const ComputationError& e) {
    throw ComputationError(prefix + e.what());
  } catch (const std::bad_alloc&) {
    throw;
  } catch (const std::exception& e) {
    throw ComputationError(prefix + e.what());
  }
}

template <typename F>
auto in_stage(const std::string& stage, F&& f) {
  try {
    return f();
  } catch (...) {
    rethrow_in(stage);
  }
}

class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  void create() {
    std::error_code ec;
    created_dir_ = !fs::exists(dir_, ec);
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw ConfigError("cannot create output directory " + dir_.string());
  }

  void write(const std::string& name, const std::function<void(std::ostream&)>& writer) {
    const fs::path path = dir_ / name;
    written_.push_back(path);
    {
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      if (!out) throw ConfigError("cannot write " + path.string());
      writer(out);
      out.flush();
      if (!out) throw ConfigError("write failed for " + path.string());
    }
    products_.push_back({name, sha256_file(path)});
  }

  void remove_all() noexcept {
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
    if (created_dir_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
  }

  [[nodiscard]] const std::vector<ProductFile>& products() const { return products_; }

 private:
  fs::path dir_;
  bool created_dir_ = false;
  std::vector<fs::path> written_;
  std::vector<ProductFile> products_;
};

struct Ingested {
  Schema schema;
  CleanTable clean;
  std::size_t raw_rows = 0;
  std::size_t dropped = 0;
};

struct Analysis {
  FeatureMatrix all, characteristic, outcome;
  Dendrogram dendrogram;
  ClusterAssignment assignment;
  double main_cut = 0.0;
  std::vector<FeatureTestResult> characteristic_tests, outcome_tests;
  std::optional<SubclusterReport> subclusters;
};

std::string id_header(const Schema& schema) { return schema.id_column.empty() ? "row" : schema.id_column; }

json run_stages(const PipelineConfig& cfg, OutputSet& outputs, RunManifest& manifest) {
  auto& warnings = manifest.warnings;

  const Ingested in = in_stage("ingest", [&] {
    Ingested r;
    r.schema = load_schema(cfg.schema_path);
    const RawTable raw = load_survey(cfg.input_path, r.schema);
    r.raw_rows = raw.size();
    DropResult dropped = drop_degenerate(raw, r.schema);
    r.dropped = dropped.removed;
    warnings.insert(warnings.end(), dropped.warnings.begin(), dropped.warnings.end());
    r.clean = clean_survey(dropped.table, r.schema);
    return r;
  });
  if (in.clean.size() < 2) throw InputError("ingest: fewer than 2 rows remain after cleaning");

  Analysis a;
  in_stage("encode", [&] {
    a.all = zscore(one_hot(in.clean, in.schema));
    for (const auto& name : a.all.constant_columns()) warnings.push_back("constant feature column '" + name + "'");
    std::tie(a.characteristic, a.outcome) = split_roles(a.all);
    if (a.characteristic.cols() == 0) throw SchemaError("schema declares no characteristic variables");
  });

  in_stage("cluster", [&] {
    a.dendrogram = ward_cluster(a.characteristic);
    if (cfg.cut_height) {
      a.assignment = cut_height(a.dendrogram, *cfg.cut_height);
      a.main_cut = *cfg.cut_height;
    } else {
      if (*cfg.k > a.characteristic.rows())
        throw ConfigError("k = " + std::to_string(*cfg.k) + " exceeds the " +
                          std::to_string(a.characteristic.rows()) + " rows");
      a.assignment = cut_k(a.dendrogram, *cfg.k);
      a.main_cut = first_undone_height(a.dendrogram, *cfg.k);
    }
    a.assignment.row_ids = in.clean.row_ids;
  });
  manifest.clusters = a.assignment.k;

  const StatsConfig stats{cfg.alpha, Correction::benjamini_hochberg};
  in_stage("stats", [&] {
    if (a.assignment.k < 2) throw ProfilingError("a single cluster has no rest to compare against");
    a.characteristic_tests = profile_clusters(a.characteristic, a.assignment, stats);
    if (a.outcome.cols() > 0) a.outcome_tests = profile_clusters(a.outcome, a.assignment, stats);
    if (cfg.subcluster_cut)
      a.subclusters = subcluster_report(a.dendrogram, a.assignment, a.main_cut, *cfg.subcluster_cut, a.characteristic,
                                        a.outcome, stats);
  });

  in_stage("reports", [&] {
    const std::string id = id_header(in.schema);
    const auto wants = [&](Product p) { return cfg.emit.contains(p); };
    outputs.write("clean.csv", [&](std::ostream& o) { write_clean_table(o, in.clean, id); });
    outputs.write("provenance.csv", [&](std::ostream& o) { write_provenance(o, in.clean, id); });
    outputs.write("assignment.csv", [&](std::ostream& o) { write_assignment(o, a.assignment, id); });
    if (a.subclusters) {
      outputs.write("subclusters.csv", [&](std::ostream& o) { write_assignment(o, a.subclusters->assignment, id); });
      outputs.write("subcluster_parents.csv", [&](std::ostream& o) { write_subcluster_parents(o, *a.subclusters); });
    }

    if (wants(Product::dendrogram)) {
      outputs.write("dendrogram.json", [&](std::ostream& o) { write_dendrogram_json(o, a.dendrogram); });
      outputs.write("dendrogram.nwk", [&](std::ostream& o) { write_newick(o, a.dendrogram); });
    }
    if (wants(Product::tests)) {
      outputs.write("tests_characteristic.csv", [&](std::ostream& o) { write_test_results(o, a.characteristic_tests); });
      outputs.write("tests_outcome.csv", [&](std::ostream& o) { write_test_results(o, a.outcome_tests); });
      outputs.write("zero_variance_characteristic.csv",
                    [&](std::ostream& o) { write_zero_variance(o, a.characteristic_tests); });
      outputs.write("zero_variance_outcome.csv", [&](std::ostream& o) { write_zero_variance(o, a.outcome_tests); });
      if (a.subclusters) {
        outputs.write("subcluster_tests_characteristic.csv",
                      [&](std::ostream& o) { write_test_results(o, a.subclusters->characteristic_tests); });
        outputs.write("subcluster_tests_outcome.csv",
                      [&](std::ostream& o) { write_test_results(o, a.subclusters->outcome_tests); });
      }
    }
    if (wants(Product::profiles)) {
      const auto profile = profile_table(in.clean, in.schema, a.assignment);
      outputs.write("profiles.csv", [&](std::ostream& o) { write_profile(o, profile); });
    }
    if (wants(Product::radar)) {
      const auto chr = radar_data(a.characteristic_tests);
      const auto out = radar_data(a.outcome_tests);
      for (const auto& w : chr.warnings) warnings.push_back("characteristic radar: " + w);
      for (const auto& w : out.warnings) warnings.push_back("outcome radar: " + w);
      outputs.write("radar_characteristic.csv", [&](std::ostream& o) { write_radar(o, chr); });
      outputs.write("radar_outcome.csv", [&](std::ostream& o) { write_radar(o, out); });
    }
    if (wants(Product::heatmaps)) {
      const auto h = heatmap_data(in.clean, in.schema, a.assignment);
      outputs.write("heatmap_distribution.csv", [&](std::ostream& o) { write_heatmap_distribution(o, h); });
      outputs.write("heatmap_households.csv", [&](std::ostream& o) { write_heatmap_households(o, h, id); });
    }
    if (wants(Product::corr)) {
      auto write_matrix = [&](const std::string& stem, const CorrelationMatrix& m) {
        outputs.write(stem + "_rho.csv", [&](std::ostream& o) { write_correlation(o, m, CorrelationField::rho); });
        outputs.write(stem + "_p.csv", [&](std::ostream& o) { write_correlation(o, m, CorrelationField::p); });
        outputs.write(stem + "_stars.csv", [&](std::ostream& o) { write_correlation(o, m, CorrelationField::stars); });
      };
      if (a.all.rows() >= 3) {
        std::vector<std::size_t> every(a.all.cols());
        for (std::size_t c = 0; c < every.size(); ++c) every[c] = c;
        write_matrix("corr_overall", correlation_matrix(a.all, every));
      }
      std::vector<FeatureTestResult> combined = a.characteristic_tests;
      combined.insert(combined.end(), a.outcome_tests.begin(), a.outcome_tests.end());
      const auto sizes = a.assignment.sizes();
      for (int c = 1; c <= a.assignment.k; ++c) {
        if (sizes[static_cast<std::size_t>(c - 1)] < 3) {
          warnings.push_back("cluster " + std::to_string(c) + " is too small for within-cluster correlation");
          continue;
        }
        write_matrix("corr_cluster" + std::to_string(c),
                     within_cluster_correlation(in.clean, in.schema, a.assignment, c, combined));
      }
    }
    if (wants(Product::pca)) {
      const auto r = pca(a.all);
      outputs.write("pca_loadings.csv", [&](std::ostream& o) { write_pca_loadings(o, r); });
      outputs.write("pca_variance.csv", [&](std::ostream& o) { write_pca_variance(o, r); });
      outputs.write("pca_scores.csv", [&](std::ostream& o) { write_pca_scores(o, r, a.all.row_ids, id); });
    }
  });

  json doc;
  doc["software"] = {{"name", "segprof"}, {"version", SEGPROF_VERSION}};
  doc["inputs"] = {
      {"survey", {{"path", cfg.input_path.string()}, {"sha256", sha256_file(cfg.input_path)}}},
      {"schema", {{"path", cfg.schema_path.string()}, {"sha256", sha256_file(cfg.schema_path)}}},
  };
  json params;
  if (cfg.cut_height) params["cut_height"] = *cfg.cut_height;
  if (cfg.k) params["k"] = *cfg.k;
  params["alpha"] = cfg.alpha;
  params["correction"] = "benjamini_hochberg";
  params["subcluster_cut"] = cfg.subcluster_cut ? json(*cfg.subcluster_cut) : json(nullptr);
  params["emit"] = json::array();
  for (Product p : cfg.emit) params["emit"].push_back(std::string(to_string(p)));
  doc["parameters"] = std::move(params);

  json summary;
  summary["rows_read"] = in.raw_rows;
  summary["rows_dropped"] = in.dropped;
  summary["rows_analysed"] = in.clean.size();
  summary["characteristic_features"] = a.characteristic.cols();
  summary["outcome_features"] = a.outcome.cols();
  summary["clusters"] = a.assignment.k;
  summary["cluster_sizes"] = a.assignment.sizes();
  summary["main_cut_height"] = std::isfinite(a.main_cut) ? json(a.main_cut) : json(nullptr);
  if (a.subclusters) summary["subclusters"] = a.subclusters->assignment.k;
  json imputed = json::object();
  for (const auto& [variable, count] : in.clean.imputed_counts()) imputed[variable] = count;
  summary["imputed_cells"] = std::move(imputed);
  doc["summary"] = std::move(summary);
  doc["warnings"] = manifest.warnings;
  return doc;
}

}  // namespace

RunManifest run_pipeline(const PipelineConfig& cfg) {
  in_stage("config", [&] { cfg.validate(); });
  OutputSet outputs(cfg.output_dir);
  in_stage("config", [&] { outputs.create(); });

  RunManifest manifest;
  try {
    json doc = run_stages(cfg, outputs, manifest);
    json products = json::array();
    for (const auto& p : outputs.products()) products.push_back({{"path", p.path}, {"sha256", p.sha256}});
    doc["products"] = std::move(products);
    manifest.json = doc.dump(2) + "\n";
    in_stage("manifest", [&] { outputs.write("manifest.json", [&](std::ostream& o) { o << manifest.json; }); });
  } catch (...) {
    outputs.remove_all();
    throw;
  }
  manifest.products = outputs.products();
  return manifest;
}

}  // namespace segprof
