#include "segprof/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "segprof/csv.hpp"

namespace segprof {

namespace {

using json = nlohmann::ordered_json;

enum class Kind { binary, ordinal, nominal };

struct Var {
  std::string name;
  Kind kind;
  std::vector<int> codes;
  // probs[p][i]: probability that population p answers codes[i].
  std::vector<std::vector<double>> probs;
};

std::vector<double> favour(std::size_t n, std::size_t index, double share) {
  std::vector<double> p(n, (1.0 - share) / static_cast<double>(n - 1));
  p[index] = share;
  return p;
}

std::vector<Var> characteristic_vars(const SyntheticConfig& cfg) {
  const std::size_t pops = cfg.sizes.size();
  const double share = cfg.concentration;
  std::vector<Var> vars;
  std::size_t rotation = 0;
  for (std::size_t i = 0; i < cfg.binary; ++i, ++rotation) {
    Var v{"b" + std::to_string(i + 1), Kind::binary, {0, 1}, {}};
    for (std::size_t p = 0; p < pops; ++p) v.probs.push_back(favour(2, p == rotation % pops ? 1 : 0, share));
    vars.push_back(std::move(v));
  }
  for (std::size_t i = 0; i < cfg.ordinal; ++i, ++rotation) {
    std::string name = i == 0 ? "income" : i == 1 ? "household_size" : "o" + std::to_string(i + 1);
    Var v{std::move(name), Kind::ordinal, {1, 2, 3, 4}, {}};
    const bool odd_high = i % 2 == 0;
    for (std::size_t p = 0; p < pops; ++p) {
      const bool odd = p == rotation % pops;
      v.probs.push_back(favour(4, odd == odd_high ? 3 : 0, share));
    }
    vars.push_back(std::move(v));
  }
  for (std::size_t i = 0; i < cfg.nominal; ++i) {
    const std::size_t c = std::max<std::size_t>(pops, 2);
    Var v{"n" + std::to_string(i + 1), Kind::nominal, {}, {}};
    for (std::size_t k = 0; k < c; ++k) v.codes.push_back(static_cast<int>(k + 1));
    for (std::size_t p = 0; p < pops; ++p) v.probs.push_back(favour(c, (p + i) % c, share));
    vars.push_back(std::move(v));
  }
  return vars;
}

json category(int code, const std::string& label) { return json{{"code", code}, {"label", label}}; }

json bounded(int code, const std::string& label, double lower, std::optional<double> upper) {
  json c = category(code, label);
  c["lower"] = lower;
  c["upper"] = upper ? json(*upper) : json(nullptr);
  return c;
}

json schema_for(const std::vector<Var>& vars, bool outcomes) {
  json doc;
  doc["id_column"] = "household_id";
  doc["household_size_variable"] = "household_size";
  doc["missing_tokens"] = {"", "NA"};
  doc["multi_separator"] = ";";
  json list = json::array();
  for (const auto& v : vars) {
    json jv;
    jv["name"] = v.name;
    jv["kind"] = v.kind == Kind::binary ? "binary" : v.kind == Kind::ordinal ? "ordinal" : "nominal";
    jv["role"] = "characteristic";
    json cats = json::array();
    if (v.name == "income") {
      cats = {bounded(1, "<=100", 0, 100), bounded(2, ">100-200", 100, 200), bounded(3, ">200-300", 200, 300),
              bounded(4, ">300", 300, std::nullopt)};
      jv["per_capita"] = true;
      jv["imputation"] = {{"rule", "mean_then_bin"}};
    } else if (v.name == "household_size") {
      cats = {bounded(1, "1-2", 1, 2), bounded(2, "3-4", 2, 4), bounded(3, "5-6", 4, 6),
              bounded(4, ">6", 6, std::nullopt)};
      jv["imputation"] = {{"rule", "mean_then_bin"}};
    } else {
      for (int code : v.codes) cats.push_back(category(code, "category " + std::to_string(code)));
      if (v.kind == Kind::binary)
        jv["imputation"] = {{"rule", "favorable_category"}, {"code", 0}};
      else
        jv["imputation"] = {{"rule", "skew_majority"}};
    }
    jv["categories"] = cats;
    list.push_back(std::move(jv));
  }
  if (outcomes) {
    json freq;
    freq["name"] = "y_frequency";
    freq["kind"] = "ordinal";
    freq["role"] = "outcome";
    freq["categories"] = json::array();
    for (int c = 1; c <= 4; ++c) freq["categories"].push_back(category(c, "level " + std::to_string(c)));
    freq["imputation"] = {{"rule", "skew_majority"}};
    list.push_back(std::move(freq));

    json strategy;
    strategy["name"] = "y_strategy";
    strategy["kind"] = "nominal";
    strategy["role"] = "outcome";
    strategy["multi_response"] = true;
    strategy["categories"] = json::array();
    for (int c = 1; c <= 4; ++c) strategy["categories"].push_back(category(c, "strategy " + std::to_string(c)));
    strategy["imputation"] = {{"rule", "skew_majority"}};
    list.push_back(std::move(strategy));
  }
  doc["variables"] = std::move(list);
  doc["drop_if"] = json::array({json{{"variable", "household_size"}, {"op", "=="}, {"value", 0}}});
  return doc;
}

}  // namespace

SyntheticSurvey make_planted_survey(const SyntheticConfig& cfg) {
  const std::size_t pops = cfg.sizes.size();
  if (pops < 2) throw std::invalid_argument("synthetic survey needs at least 2 populations");
  if (cfg.ordinal < 2) throw std::invalid_argument("synthetic survey needs at least 2 ordinal variables");
  if (!(cfg.concentration > 0.5 && cfg.concentration < 1.0))
    throw std::invalid_argument("concentration must lie in (0.5, 1)");

  const auto vars = characteristic_vars(cfg);
  SyntheticSurvey out;
  out.schema_json = schema_for(vars, cfg.outcomes).dump(2) + "\n";

  // Planted set from expected indicator and code means.
  const double total = static_cast<double>(std::accumulate(cfg.sizes.begin(), cfg.sizes.end(), std::size_t{0}));
  for (const auto& v : vars) {
    std::vector<std::pair<std::string, std::vector<double>>> columns;  // name -> per-population mean
    if (v.kind == Kind::nominal) {
      for (std::size_t i = 0; i < v.codes.size(); ++i) {
        std::vector<double> mean(pops);
        for (std::size_t p = 0; p < pops; ++p) mean[p] = v.probs[p][i];
        columns.emplace_back(v.name + "-" + std::to_string(v.codes[i]), mean);
      }
    } else {
      std::vector<double> mean(pops, 0.0);
      for (std::size_t p = 0; p < pops; ++p)
        for (std::size_t i = 0; i < v.codes.size(); ++i) mean[p] += v.probs[p][i] * v.codes[i];
      columns.emplace_back(v.name, mean);
    }
    for (const auto& [name, mean] : columns) {
      out.characteristic_features.push_back(name);
      for (std::size_t p = 0; p < pops; ++p) {
        double rest = 0.0;
        for (std::size_t q = 0; q < pops; ++q)
          if (q != p) rest += static_cast<double>(cfg.sizes[q]) * mean[q];
        rest /= total - static_cast<double>(cfg.sizes[p]);
        if (std::fabs(mean[p] - rest) > 1e-12) out.planted.emplace(static_cast<int>(p + 1), name);
      }
    }
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<int> population;
  for (std::size_t p = 0; p < pops; ++p) population.insert(population.end(), cfg.sizes[p], static_cast<int>(p + 1));
  std::shuffle(population.begin(), population.end(), rng);
  std::vector<bool> degenerate(population.size(), false);
  for (std::size_t i = 0; i < cfg.degenerate_rows; ++i) {
    std::uniform_int_distribution<std::size_t> at(0, population.size());
    const auto pos = static_cast<std::ptrdiff_t>(at(rng));
    population.insert(population.begin() + pos, 1);
    degenerate.insert(degenerate.begin() + pos, true);
  }

  auto draw = [&](const std::vector<double>& probs) {
    std::discrete_distribution<std::size_t> d(probs.begin(), probs.end());
    return d(rng);
  };
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto size_var = static_cast<std::size_t>(
      std::find_if(vars.begin(), vars.end(), [](const Var& v) { return v.name == "household_size"; }) - vars.begin());

  std::ostringstream text;
  csv::Row header{"household_id"};
  for (const auto& v : vars) header.push_back(v.name);
  if (cfg.outcomes) {
    header.push_back("y_frequency");
    header.push_back("y_strategy");
  }
  csv::write_row(text, header);

  for (std::size_t r = 0; r < population.size(); ++r) {
    const auto p = static_cast<std::size_t>(population[r] - 1);
    std::string number = std::to_string(r + 1);
    csv::Row row{"h" + std::string(number.size() < 4 ? 4 - number.size() : 0, '0') + number};

    const std::size_t size_cat = draw(vars[size_var].probs[p]);
    static constexpr int size_lo[] = {1, 3, 5, 7};
    static constexpr int size_hi[] = {2, 4, 6, 9};
    const int household = degenerate[r] ? 0 : std::uniform_int_distribution<int>(size_lo[size_cat], size_hi[size_cat])(rng);

    for (std::size_t vi = 0; vi < vars.size(); ++vi) {
      const Var& v = vars[vi];
      if (v.name == "household_size") {
        row.push_back(std::to_string(household));
        continue;
      }
      const std::size_t i = draw(v.probs[p]);
      if (v.name == "income") {
        const int per_capita = 100 * static_cast<int>(i) + std::uniform_int_distribution<int>(5, 95)(rng);
        row.push_back(std::to_string(per_capita * std::max(household, 1)));
        continue;
      }
      if (cfg.missing_rate > 0 && unit(rng) < cfg.missing_rate) {
        row.push_back(unit(rng) < 0.5 ? "NA" : "I don't know");
        continue;
      }
      row.push_back(std::to_string(v.codes[i]));
    }

    if (cfg.outcomes) {
      row.push_back(std::to_string(1 + draw(favour(4, p % 4, 0.5))));
      std::string strategies;
      for (int c = 1; c <= 4; ++c) {
        const double chance = static_cast<std::size_t>(c - 1) == p % 4 ? 0.6 : 0.25;
        if (unit(rng) < chance) strategies += (strategies.empty() ? "" : ";") + std::to_string(c);
      }
      if (strategies.empty()) strategies = std::to_string(1 + p % 4);
      row.push_back(strategies);
    }
    csv::write_row(text, row);
    if (!degenerate[r]) out.truth.push_back(population[r]);
  }
  out.csv = text.str();
  return out;
}

}  // namespace segprof
