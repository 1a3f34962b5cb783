#include <gtest/gtest.h>

#include <map>

#include "segprof/csv.hpp"
#include "segprof/features.hpp"
#include "segprof/schema.hpp"
#include "segprof/survey.hpp"
#include "segprof/synthetic.hpp"

using namespace segprof;

TEST(Synthetic, SchemaMimicsSurveyLayout) {
  const auto s = make_planted_survey({});
  const Schema schema = parse_schema(s.schema_json);
  std::map<VariableKind, std::size_t> kinds;
  std::size_t characteristic = 0;
  for (const auto& v : schema.variables)
    if (v.role == Role::characteristic) {
      ++characteristic;
      ++kinds[v.kind];
    }
  EXPECT_EQ(characteristic, 18u);
  EXPECT_EQ(kinds[VariableKind::binary], 6u);
  EXPECT_EQ(kinds[VariableKind::ordinal], 9u);
  EXPECT_EQ(kinds[VariableKind::nominal], 3u);
  EXPECT_TRUE(schema.at("income").per_capita);
}

TEST(Synthetic, SameSeedSameSurvey) {
  SyntheticConfig cfg;
  cfg.seed = 42;
  cfg.missing_rate = 0.05;
  EXPECT_EQ(make_planted_survey(cfg).csv, make_planted_survey(cfg).csv);
  cfg.seed = 43;
  SyntheticConfig other = cfg;
  other.seed = 44;
  EXPECT_NE(make_planted_survey(cfg).csv, make_planted_survey(other).csv);
}

TEST(Synthetic, PopulationSizesAndDegenerateRows) {
  SyntheticConfig cfg;
  cfg.degenerate_rows = 2;
  const auto s = make_planted_survey(cfg);
  EXPECT_EQ(s.truth.size(), 300u);
  std::map<int, std::size_t> sizes;
  for (int p : s.truth) ++sizes[p];
  EXPECT_EQ(sizes[1], 100u);
  EXPECT_EQ(sizes[2], 120u);
  EXPECT_EQ(sizes[3], 80u);

  const Schema schema = parse_schema(s.schema_json);
  const auto raw = parse_survey(csv::parse(s.csv), schema);
  EXPECT_EQ(raw.size(), 302u);
  const auto kept = drop_degenerate(raw, schema);
  EXPECT_EQ(kept.removed, 2u);
}

TEST(Synthetic, CleansAndEncodesWithoutErrors) {
  SyntheticConfig cfg;
  cfg.missing_rate = 0.1;
  cfg.degenerate_rows = 1;
  const auto s = make_planted_survey(cfg);
  const Schema schema = parse_schema(s.schema_json);
  const auto clean = clean_survey(drop_degenerate(parse_survey(csv::parse(s.csv), schema), schema).table, schema);
  EXPECT_TRUE(clean.binned());
  const auto fm = one_hot(clean, schema);
  EXPECT_EQ(fm.rows(), 300u);
  std::size_t imputed = 0;
  for (const auto& [v, n] : clean.imputed_counts()) imputed += n;
  EXPECT_GT(imputed, 0u);
}

TEST(Synthetic, PlantedSetCoversCharacteristicColumns) {
  const auto s = make_planted_survey({});
  const Schema schema = parse_schema(s.schema_json);
  std::vector<int> codes;
  CleanTable empty;
  for (const auto& v : schema.variables) empty.variables.push_back(v.name);
  const auto [ch, out] = split_roles(one_hot(empty, schema));
  std::vector<std::string> names;
  for (const auto& c : ch.columns) names.push_back(c.name());
  EXPECT_EQ(names, s.characteristic_features);
  for (const auto& [pop, name] : s.planted) {
    EXPECT_GE(pop, 1);
    EXPECT_LE(pop, 3);
    EXPECT_NE(std::find(names.begin(), names.end(), name), names.end()) << name;
  }
  EXPECT_FALSE(s.planted.empty());
}

TEST(Synthetic, RejectsInvalidConfigs) {
  SyntheticConfig cfg;
  cfg.sizes = {100};
  EXPECT_THROW(make_planted_survey(cfg), std::invalid_argument);
  cfg = {};
  cfg.concentration = 0.4;
  EXPECT_THROW(make_planted_survey(cfg), std::invalid_argument);
}
