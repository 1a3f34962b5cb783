#include "segprof/survey.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "segprof/errors.hpp"

namespace segprof {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string_view trim(std::string_view s) {
  auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::vector<std::string_view> split(std::string_view s, std::string_view sep) {
  std::vector<std::string_view> parts;
  if (sep.empty()) {
    parts.push_back(s);
    return parts;
  }
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + sep.size();
  }
  return parts;
}

bool is_missing_token(std::string_view text, const Schema& schema) {
  const auto norm = normalize_text(text);
  return std::any_of(schema.missing_tokens.begin(), schema.missing_tokens.end(),
                     [&](const std::string& tok) { return normalize_text(tok) == norm; });
}

RawCell parse_cell(std::string_view text, const VariableSpec& spec, const Schema& schema) {
  if (is_missing_token(text, schema)) return Missing{};
  const auto trimmed = trim(text);

  if (auto number = parse_number(trimmed)) return *number;

  if (spec.text_map.contains(normalize_text(trimmed))) return Ambiguous{std::string(trimmed)};

  if (spec.list_count) {
    double count = 0;
    for (auto part : split(trimmed, spec.list_count->separator)) {
      auto entry = normalize_text(part);
      if (entry.empty()) continue;
      if (std::find(spec.list_count->exclude.begin(), spec.list_count->exclude.end(), entry) !=
          spec.list_count->exclude.end())
        continue;
      count += 1;
    }
    return count;
  }

  if (spec.multi_response) {
    Codes codes;
    for (auto part : split(trimmed, schema.multi_separator)) {
      auto value = parse_number(part);
      if (!value || *value != std::floor(*value)) return Ambiguous{std::string(trimmed)};
      codes.push_back(static_cast<int>(*value));
    }
    std::sort(codes.begin(), codes.end());
    codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
    return codes;
  }

  return Ambiguous{std::string(trimmed)};
}

std::string row_context(const std::string& row_id, const std::string& variable) {
  return "row '" + row_id + "', variable '" + variable + "'";
}

// Numeric value of a raw cell after text mapping; nullopt when unresolved.
std::optional<double> raw_numeric(const RawCell& cell, const VariableSpec& spec) {
  if (auto d = std::get_if<double>(&cell)) return *d;
  if (auto a = std::get_if<Ambiguous>(&cell)) {
    auto it = spec.text_map.find(normalize_text(a->text));
    if (it != spec.text_map.end()) return it->second;
  }
  return std::nullopt;
}

class Imputer {
 public:
  Imputer(const RawTable& table, const Schema& schema) : table_(table), schema_(schema) {
    if (!schema.household_size_variable.empty())
      household_col_ = table.column(schema.household_size_variable);
  }

  CleanTable run() {
    CleanTable out;
    out.variables = table_.variables;
    out.row_ids = table_.row_ids;
    const std::size_t n = table_.size();
    const std::size_t m = schema_.variables.size();
    out.rows.assign(n, std::vector<CleanCell>(m, CleanCell{0.0}));
    out.provenance.assign(n, std::vector<Provenance>(m));

    for (std::size_t v = 0; v < m; ++v) {
      const auto& spec = schema_.variables[v];
      const std::size_t col = table_.column(spec.name);
      std::optional<int> rule_code;  // lazily computed rule-level imputation
      for (std::size_t r = 0; r < n; ++r) {
        auto [cell, prov] = resolve(r, col, spec, rule_code);
        out.rows[r][v] = std::move(cell);
        out.provenance[r][v] = prov;
      }
    }
    return out;
  }

 private:
  std::pair<CleanCell, Provenance> resolve(std::size_t r, std::size_t col, const VariableSpec& spec,
                                           std::optional<int>& rule_code) {
    const RawCell& cell = table_.rows[r][col];
    const auto& id = table_.row_ids[r];

    if (auto codes = std::get_if<Codes>(&cell)) {
      if (codes->empty()) return impute_cell(r, spec, rule_code);
      if (!spec.multi_response && codes->size() != 1)
        throw InputError(row_context(id, spec.name) + ": several codes on a single-response variable");
      for (int c : *codes)
        if (!spec.has_code(c))
          throw InputError(row_context(id, spec.name) + ": unknown category code " + std::to_string(c));
      return {*codes, Provenance{}};
    }

    const bool text_mapped = std::holds_alternative<Ambiguous>(cell);
    auto value = raw_numeric(cell, spec);
    if (!value) return impute_cell(r, spec, rule_code);

    Provenance prov;
    if (text_mapped) prov.origin = CellOrigin::text_mapped;
    if (spec.measured()) return {*value, prov};

    const int code = static_cast<int>(*value);
    if (*value != code || !spec.has_code(code))
      throw InputError(row_context(id, spec.name) + ": unknown category code " + csv::format_double(*value));
    return {Codes{code}, prov};
  }

  std::pair<CleanCell, Provenance> impute_cell(std::size_t r, const VariableSpec& spec,
                                               std::optional<int>& rule_code) {
    Provenance prov{CellOrigin::imputed, spec.imputation.rule};
    const auto& imp = spec.imputation;
    switch (imp.rule) {
      case ImputationRule::favorable_category:
      case ImputationRule::fixed_category:
        return {Codes{imp.code}, prov};
      case ImputationRule::mean_then_bin:
        if (!rule_code) rule_code = categorize(observed_mean(spec), spec);
        return {Codes{*rule_code}, prov};
      case ImputationRule::skew_majority:
        if (!rule_code) rule_code = observed_mode(spec);
        return {Codes{*rule_code}, prov};
      case ImputationRule::infer_from: {
        const auto& source = schema_.at(imp.source);
        if (auto code = observed_code(r, table_.column(source.name), source)) {
          auto it = imp.mapping.find(*code);
          if (it != imp.mapping.end()) return {Codes{it->second}, prov};
        }
        if (imp.fallback) return {Codes{*imp.fallback}, prov};
        throw ImputationError(row_context(table_.row_ids[r], spec.name) + ": cannot infer from '" + imp.source +
                              "' and no fallback category is declared");
      }
    }
    throw ImputationError("unhandled imputation rule");
  }

  std::optional<double> household_size(std::size_t r) const {
    if (!household_col_) return std::nullopt;
    const auto& spec = schema_.at(schema_.household_size_variable);
    return raw_numeric(table_.rows[r][*household_col_], spec);
  }

  // Observed value in the units the bounds are expressed in.
  std::optional<double> observed_measure(std::size_t r, std::size_t col, const VariableSpec& spec) const {
    auto value = raw_numeric(table_.rows[r][col], spec);
    if (!value || !spec.per_capita) return value;
    auto hs = household_size(r);
    if (!hs || *hs <= 0) return std::nullopt;
    return *value / *hs;
  }

  std::optional<int> observed_code(std::size_t r, std::size_t col, const VariableSpec& spec) const {
    const RawCell& cell = table_.rows[r][col];
    if (auto codes = std::get_if<Codes>(&cell)) {
      if (codes->size() == 1) return codes->front();
      return std::nullopt;
    }
    if (spec.measured()) {
      auto value = observed_measure(r, col, spec);
      if (!value) return std::nullopt;
      return categorize(*value, spec);
    }
    auto value = raw_numeric(cell, spec);
    if (!value || *value != std::floor(*value)) return std::nullopt;
    return static_cast<int>(*value);
  }

  double observed_mean(const VariableSpec& spec) const {
    const std::size_t col = table_.column(spec.name);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t r = 0; r < table_.size(); ++r) {
      if (auto value = observed_measure(r, col, spec)) {
        sum += *value;
        ++count;
      }
    }
    if (count == 0) throw ImputationError("variable '" + spec.name + "': no observed values to average");
    return sum / static_cast<double>(count);
  }

  int observed_mode(const VariableSpec& spec) const {
    const std::size_t col = table_.column(spec.name);
    std::map<int, std::size_t> freq;
    for (std::size_t r = 0; r < table_.size(); ++r) {
      if (auto codes = std::get_if<Codes>(&table_.rows[r][col])) {
        for (int c : *codes) ++freq[c];
      } else if (auto code = observed_code(r, col, spec)) {
        ++freq[*code];
      }
    }
    if (freq.empty()) throw ImputationError("variable '" + spec.name + "': no observed values for majority imputation");
    // std::map iterates in ascending code order, so ties resolve to the smallest code.
    auto best = freq.begin();
    for (auto it = freq.begin(); it != freq.end(); ++it)
      if (it->second > best->second) best = it;
    return best->first;
  }

  const RawTable& table_;
  const Schema& schema_;
  std::optional<std::size_t> household_col_;
};

}  // namespace

std::string Provenance::tag() const {
  switch (origin) {
    case CellOrigin::observed: return "observed";
    case CellOrigin::text_mapped: return "text_map";
    case CellOrigin::imputed: return "imputed:" + std::string(to_string(rule));
  }
  return "?";
}

std::size_t RawTable::column(std::string_view variable) const {
  auto it = std::find(variables.begin(), variables.end(), variable);
  if (it == variables.end()) throw SchemaError("table has no column '" + std::string(variable) + "'");
  return static_cast<std::size_t>(it - variables.begin());
}

std::size_t CleanTable::column(std::string_view variable) const {
  auto it = std::find(variables.begin(), variables.end(), variable);
  if (it == variables.end()) throw SchemaError("table has no column '" + std::string(variable) + "'");
  return static_cast<std::size_t>(it - variables.begin());
}

bool CleanTable::binned() const {
  for (const auto& row : rows)
    for (const auto& cell : row)
      if (std::holds_alternative<double>(cell)) return false;
  return true;
}

const Codes& CleanTable::codes(std::size_t row, std::size_t col) const {
  const auto* c = std::get_if<Codes>(&rows.at(row).at(col));
  if (!c) throw ComputationError("cell of '" + variables[col] + "' is not binned yet");
  return *c;
}

std::map<std::string, std::size_t> CleanTable::imputed_counts() const {
  std::map<std::string, std::size_t> counts;
  for (const auto& v : variables) counts[v] = 0;
  for (const auto& row : provenance)
    for (std::size_t v = 0; v < row.size(); ++v)
      if (!row[v].is_observed()) ++counts[variables[v]];
  return counts;
}

RawTable parse_survey(const std::vector<csv::Row>& rows, const Schema& schema) {
  if (rows.empty()) throw InputError("survey file is empty (no header row)");
  const auto& header = rows.front();

  auto find_column = [&](const std::string& name) -> std::size_t {
    auto it = std::find_if(header.begin(), header.end(), [&](const std::string& h) { return trim(h) == name; });
    if (it == header.end()) throw SchemaError("missing required column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };

  std::optional<std::size_t> id_col;
  if (!schema.id_column.empty()) id_col = find_column(schema.id_column);
  std::vector<std::size_t> cols;
  for (const auto& v : schema.variables) cols.push_back(find_column(v.name));

  RawTable table;
  for (const auto& v : schema.variables) table.variables.push_back(v.name);

  std::set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    std::string id = id_col ? std::string(trim(*id_col < row.size() ? row[*id_col] : std::string{}))
                            : std::to_string(r);
    if (id.empty()) throw InputError("data row " + std::to_string(r) + " has an empty row id");
    if (!seen.insert(id).second) throw InputError("duplicate row_id '" + id + "'");

    std::vector<RawCell> cells;
    cells.reserve(cols.size());
    for (std::size_t v = 0; v < cols.size(); ++v) {
      std::string_view text = cols[v] < row.size() ? std::string_view(row[cols[v]]) : std::string_view{};
      cells.push_back(parse_cell(text, schema.variables[v], schema));
    }
    table.row_ids.push_back(std::move(id));
    table.rows.push_back(std::move(cells));
  }
  return table;
}

RawTable load_survey(const std::filesystem::path& path, const Schema& schema) {
  return parse_survey(csv::read_file(path), schema);
}

bool matches(const RawCell& cell, const DegeneratePredicate& p) {
  if (p.op == CompareOp::missing) return std::holds_alternative<Missing>(cell) || std::holds_alternative<Ambiguous>(cell);
  const auto* value = std::get_if<double>(&cell);
  if (!value) return false;
  switch (p.op) {
    case CompareOp::eq: return *value == p.value;
    case CompareOp::ne: return *value != p.value;
    case CompareOp::lt: return *value < p.value;
    case CompareOp::le: return *value <= p.value;
    case CompareOp::gt: return *value > p.value;
    case CompareOp::ge: return *value >= p.value;
    case CompareOp::missing: break;
  }
  return false;
}

DropResult drop_degenerate(const RawTable& table, const Schema& schema, const DegeneratePredicate& predicate) {
  if (!schema.index_of(predicate.variable))
    throw SchemaError("drop predicate references unknown variable '" + predicate.variable + "'");
  const std::size_t col = table.column(predicate.variable);

  DropResult result;
  result.table.variables = table.variables;
  for (std::size_t r = 0; r < table.size(); ++r) {
    if (matches(table.rows[r][col], predicate)) {
      ++result.removed;
      continue;
    }
    result.table.row_ids.push_back(table.row_ids[r]);
    result.table.rows.push_back(table.rows[r]);
  }
  if (table.size() > 0 && result.table.size() == 0)
    result.warnings.push_back("every row matched the drop predicate on '" + predicate.variable + "'; table is empty");
  return result;
}

DropResult drop_degenerate(const RawTable& table, const Schema& schema) {
  DropResult total;
  total.table = table;
  for (const auto& p : schema.drop_if) {
    auto step = drop_degenerate(total.table, schema, p);
    total.table = std::move(step.table);
    total.removed += step.removed;
    total.warnings.insert(total.warnings.end(), step.warnings.begin(), step.warnings.end());
  }
  return total;
}

CleanTable impute(const RawTable& table, const Schema& schema) {
  return Imputer(table, schema).run();
}

CleanTable derive_per_capita(const CleanTable& table, const Schema& schema) {
  CleanTable out = table;
  std::vector<std::size_t> flagged;
  for (const auto& v : schema.variables)
    if (v.per_capita) flagged.push_back(out.column(v.name));
  if (flagged.empty()) return out;

  const std::size_t hs_col = out.column(schema.household_size_variable);
  for (std::size_t r = 0; r < out.size(); ++r) {
    const auto* hs = std::get_if<double>(&table.rows[r][hs_col]);
    for (auto col : flagged) {
      auto* value = std::get_if<double>(&out.rows[r][col]);
      if (!value) continue;  // already a category (imputed in per-capita units)
      if (!hs)
        throw InputError(row_context(out.row_ids[r], out.variables[col]) +
                         ": household size is not an observed number, cannot derive per-capita value");
      if (!(*hs > 0))
        throw ComputationError(row_context(out.row_ids[r], out.variables[col]) +
                               ": household size must be positive for per-capita values");
      *value /= *hs;
    }
  }
  return out;
}

int categorize(double value, const VariableSpec& spec) {
  std::vector<const Category*> sorted;
  for (const auto& c : spec.categories)
    if (c.bounds) sorted.push_back(&c);
  if (sorted.empty()) throw SchemaError("variable '" + spec.name + "' has no category bounds");
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->code < b->code; });

  if (!std::isnan(value)) {
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      const auto& b = *sorted[i]->bounds;
      const bool above = i == 0 ? value >= b.lower : value > b.lower;
      if (above && value <= b.upper) return sorted[i]->code;
    }
  }
  throw RangeError("variable '" + spec.name + "': value " + csv::format_double(value) +
                   " lies outside every category interval");
}

CleanTable bin_measurements(const CleanTable& table, const Schema& schema) {
  CleanTable out = table;
  for (std::size_t v = 0; v < out.variables.size(); ++v) {
    const auto& spec = schema.at(out.variables[v]);
    for (std::size_t r = 0; r < out.size(); ++r) {
      if (const auto* value = std::get_if<double>(&out.rows[r][v])) {
        try {
          out.rows[r][v] = Codes{categorize(*value, spec)};
        } catch (const RangeError& e) {
          throw RangeError(std::string(e.what()) + " (row '" + out.row_ids[r] + "')");
        }
      }
    }
  }
  return out;
}

CleanTable clean_survey(const RawTable& table, const Schema& schema) {
  return bin_measurements(derive_per_capita(impute(table, schema), schema), schema);
}

RawTable to_raw(const CleanTable& table) {
  RawTable raw;
  raw.variables = table.variables;
  raw.row_ids = table.row_ids;
  for (const auto& row : table.rows) {
    std::vector<RawCell> cells;
    for (const auto& cell : row)
      std::visit(overloaded{[&](double d) { cells.emplace_back(d); }, [&](const Codes& c) { cells.emplace_back(c); }},
                 cell);
    raw.rows.push_back(std::move(cells));
  }
  return raw;
}

namespace {

std::string cell_text(const CleanCell& cell) {
  return std::visit(overloaded{[](double d) { return csv::format_double(d); },
                               [](const Codes& c) {
                                 std::string s;
                                 for (std::size_t i = 0; i < c.size(); ++i) {
                                   if (i) s += ';';
                                   s += std::to_string(c[i]);
                                 }
                                 return s;
                               }},
                    cell);
}

csv::Row header_row(const CleanTable& table, std::string_view id_header) {
  csv::Row header{std::string(id_header)};
  header.insert(header.end(), table.variables.begin(), table.variables.end());
  return header;
}

}  // namespace

void write_clean_table(std::ostream& out, const CleanTable& table, std::string_view id_header) {
  csv::write_row(out, header_row(table, id_header));
  for (std::size_t r = 0; r < table.size(); ++r) {
    csv::Row row{table.row_ids[r]};
    for (const auto& cell : table.rows[r]) row.push_back(cell_text(cell));
    csv::write_row(out, row);
  }
}

void write_provenance(std::ostream& out, const CleanTable& table, std::string_view id_header) {
  csv::write_row(out, header_row(table, id_header));
  for (std::size_t r = 0; r < table.size(); ++r) {
    csv::Row row{table.row_ids[r]};
    for (const auto& p : table.provenance[r]) row.push_back(p.tag());
    csv::write_row(out, row);
  }
}

}  // namespace segprof
