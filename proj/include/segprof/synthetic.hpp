#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "segprof/schema.hpp"

namespace segprof {

/// Planted-partition survey generator. Each population has a distinct
/// response profile on every characteristic variable: binary and ordinal
/// variables single out one "odd" population (rotating across variables),
/// and each nominal variable gives every population its own preferred
/// category. Outcome variables carry weaker signal.
struct SyntheticConfig {
  std::uint64_t seed = 1;
  std::vector<std::size_t> sizes{100, 120, 80};
  std::size_t binary = 6;
  std::size_t ordinal = 9;  // the first two are measured: income (per capita) and household size
  std::size_t nominal = 3;
  double concentration = 0.85;  // share of the favoured response
  bool outcomes = true;
  double missing_rate = 0.0;           // missing cells injected into coded variables
  std::size_t degenerate_rows = 0;     // extra rows with household size 0
};

struct SyntheticSurvey {
  std::string csv;
  std::string schema_json;
  std::vector<int> truth;  // population 1..P per kept row, in row order
  /// (population, feature column name) pairs whose expected population mean
  /// differs from the expected mean of the other populations.
  std::set<std::pair<int, std::string>> planted;
  /// Every characteristic feature column name.
  std::vector<std::string> characteristic_features;
};

SyntheticSurvey make_planted_survey(const SyntheticConfig& cfg);

}  // namespace segprof
