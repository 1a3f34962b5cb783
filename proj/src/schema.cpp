#include "segprof/schema.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "segprof/errors.hpp"

namespace segprof {

using nlohmann::json;

std::string_view to_string(VariableKind kind) {
  switch (kind) {
    case VariableKind::binary: return "binary";
    case VariableKind::ordinal: return "ordinal";
    case VariableKind::nominal: return "nominal";
  }
  return "?";
}

std::string_view to_string(Role role) {
  return role == Role::characteristic ? "characteristic" : "outcome";
}

std::string_view to_string(ImputationRule rule) {
  switch (rule) {
    case ImputationRule::favorable_category: return "favorable_category";
    case ImputationRule::mean_then_bin: return "mean_then_bin";
    case ImputationRule::fixed_category: return "fixed_category";
    case ImputationRule::infer_from: return "infer_from";
    case ImputationRule::skew_majority: return "skew_majority";
  }
  return "?";
}

bool VariableSpec::measured() const {
  return !categories.empty() &&
         std::any_of(categories.begin(), categories.end(), [](const Category& c) { return c.bounds.has_value(); });
}

const Category* VariableSpec::find(int code) const {
  auto it = std::find_if(categories.begin(), categories.end(), [&](const Category& c) { return c.code == code; });
  return it == categories.end() ? nullptr : &*it;
}

std::optional<std::size_t> Schema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < variables.size(); ++i)
    if (variables[i].name == name) return i;
  return std::nullopt;
}

const VariableSpec& Schema::at(std::string_view name) const {
  auto idx = index_of(name);
  if (!idx) throw SchemaError("unknown variable '" + std::string(name) + "'");
  return variables[*idx];
}

std::string normalize_text(std::string_view text) {
  auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  auto last = text.find_last_not_of(" \t\r\n");
  std::string out(text.substr(first, last - first + 1));
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

namespace {

[[noreturn]] void fail(const std::string& variable, const std::string& what) {
  throw SchemaError("variable '" + variable + "': " + what);
}

void validate_variable(const VariableSpec& v, const Schema& schema) {
  if (v.name.empty()) throw SchemaError("variable with empty name");
  if (v.categories.empty()) fail(v.name, "no categories declared");

  std::set<int> codes;
  for (const auto& c : v.categories)
    if (!codes.insert(c.code).second) fail(v.name, "duplicate category code " + std::to_string(c.code));

  if (v.kind == VariableKind::binary && v.categories.size() != 2) fail(v.name, "binary variable needs exactly 2 categories");

  if (v.measured()) {
    if (v.kind != VariableKind::ordinal) fail(v.name, "only ordinal variables may carry category bounds");
    for (const auto& c : v.categories)
      if (!c.bounds) fail(v.name, "category " + std::to_string(c.code) + " lacks bounds");
    std::vector<const Category*> sorted;
    for (const auto& c : v.categories) sorted.push_back(&c);
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->code < b->code; });
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      const auto& b = *sorted[i]->bounds;
      if (!(b.lower <= b.upper)) fail(v.name, "category " + std::to_string(sorted[i]->code) + " has lower > upper");
      if (i > 0 && b.lower < sorted[i - 1]->bounds->upper)
        fail(v.name, "category bounds overlap or are not monotone in code order");
    }
  } else {
    if (v.per_capita) fail(v.name, "per_capita requires category bounds");
    if (v.list_count) fail(v.name, "list_count requires category bounds");
  }

  if (v.multi_response && !(v.kind == VariableKind::nominal && v.role == Role::outcome))
    fail(v.name, "multi_response is only permitted on nominal outcome variables");

  if (v.per_capita && schema.household_size_variable.empty())
    fail(v.name, "per_capita set but schema has no household_size_variable");

  const auto& imp = v.imputation;
  switch (imp.rule) {
    case ImputationRule::favorable_category:
    case ImputationRule::fixed_category:
      if (!v.has_code(imp.code)) fail(v.name, "imputation code " + std::to_string(imp.code) + " is not a category");
      break;
    case ImputationRule::mean_then_bin:
      if (!v.measured()) fail(v.name, "mean_then_bin requires category bounds");
      break;
    case ImputationRule::infer_from: {
      if (imp.source == v.name) fail(v.name, "infer_from cannot reference itself");
      auto src = schema.index_of(imp.source);
      if (!src) fail(v.name, "infer_from references unknown variable '" + imp.source + "'");
      const auto& source = schema.variables[*src];
      for (auto [from, to] : imp.mapping) {
        if (!source.has_code(from)) fail(v.name, "infer_from mapping key " + std::to_string(from) + " is not a category of " + imp.source);
        if (!v.has_code(to)) fail(v.name, "infer_from mapping value " + std::to_string(to) + " is not a category");
      }
      if (imp.fallback && !v.has_code(*imp.fallback)) fail(v.name, "infer_from fallback is not a category");
      break;
    }
    case ImputationRule::skew_majority:
      break;
  }

  if (!v.measured())
    for (const auto& [text, value] : v.text_map)
      if (value != static_cast<int>(value) || !v.has_code(static_cast<int>(value)))
        fail(v.name, "text_map entry '" + text + "' does not name a category");
}

Interval parse_bounds(const json& j) {
  Interval iv;
  if (j.contains("lower") && !j["lower"].is_null()) iv.lower = j["lower"].get<double>();
  if (j.contains("upper") && !j["upper"].is_null()) iv.upper = j["upper"].get<double>();
  return iv;
}

VariableKind parse_kind(const std::string& s, const std::string& name) {
  if (s == "binary") return VariableKind::binary;
  if (s == "ordinal") return VariableKind::ordinal;
  if (s == "nominal") return VariableKind::nominal;
  fail(name, "unknown kind '" + s + "'");
}

Role parse_role(const std::string& s, const std::string& name) {
  if (s == "characteristic") return Role::characteristic;
  if (s == "outcome") return Role::outcome;
  fail(name, "unknown role '" + s + "'");
}

Imputation parse_imputation(const json& j, const std::string& name) {
  Imputation imp;
  const auto rule = j.at("rule").get<std::string>();
  if (rule == "favorable_category") {
    imp.rule = ImputationRule::favorable_category;
    imp.code = j.at("code").get<int>();
  } else if (rule == "fixed_category") {
    imp.rule = ImputationRule::fixed_category;
    imp.code = j.at("code").get<int>();
  } else if (rule == "mean_then_bin") {
    imp.rule = ImputationRule::mean_then_bin;
  } else if (rule == "skew_majority") {
    imp.rule = ImputationRule::skew_majority;
  } else if (rule == "infer_from") {
    imp.rule = ImputationRule::infer_from;
    imp.source = j.at("variable").get<std::string>();
    for (const auto& [key, value] : j.at("mapping").items()) imp.mapping[std::stoi(key)] = value.get<int>();
    if (j.contains("fallback") && !j["fallback"].is_null()) imp.fallback = j["fallback"].get<int>();
  } else {
    fail(name, "unknown imputation rule '" + rule + "'");
  }
  return imp;
}

CompareOp parse_op(const std::string& s) {
  if (s == "==") return CompareOp::eq;
  if (s == "!=") return CompareOp::ne;
  if (s == "<") return CompareOp::lt;
  if (s == "<=") return CompareOp::le;
  if (s == ">") return CompareOp::gt;
  if (s == ">=") return CompareOp::ge;
  if (s == "missing") return CompareOp::missing;
  throw SchemaError("unknown drop_if operator '" + s + "'");
}

}  // namespace

void validate(const Schema& schema) {
  std::set<std::string> names;
  for (const auto& v : schema.variables) {
    if (!names.insert(v.name).second) throw SchemaError("duplicate variable '" + v.name + "'");
    if (v.name == schema.id_column) throw SchemaError("variable '" + v.name + "' collides with the id column");
  }
  if (!schema.household_size_variable.empty()) {
    auto idx = schema.index_of(schema.household_size_variable);
    if (!idx) throw SchemaError("household_size_variable '" + schema.household_size_variable + "' is not a variable");
    if (!schema.variables[*idx].measured())
      throw SchemaError("household_size_variable must be a measured (bounded) variable");
  }
  for (const auto& v : schema.variables) validate_variable(v, schema);
  for (const auto& p : schema.drop_if)
    if (!schema.index_of(p.variable)) throw SchemaError("drop_if references unknown variable '" + p.variable + "'");
}

Schema parse_schema(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("schema is not valid JSON: ") + e.what());
  }

  Schema schema;
  try {
    schema.id_column = doc.value("id_column", std::string{});
    schema.household_size_variable = doc.value("household_size_variable", std::string{});
    if (doc.contains("missing_tokens")) schema.missing_tokens = doc["missing_tokens"].get<std::vector<std::string>>();
    schema.multi_separator = doc.value("multi_separator", std::string{";"});

    for (const auto& jv : doc.at("variables")) {
      VariableSpec v;
      v.name = jv.at("name").get<std::string>();
      v.kind = parse_kind(jv.at("kind").get<std::string>(), v.name);
      v.role = parse_role(jv.at("role").get<std::string>(), v.name);
      for (const auto& jc : jv.at("categories")) {
        Category c;
        c.code = jc.at("code").get<int>();
        c.label = jc.value("label", std::to_string(c.code));
        if (jc.contains("lower") || jc.contains("upper")) c.bounds = parse_bounds(jc);
        v.categories.push_back(std::move(c));
      }
      v.imputation = parse_imputation(jv.at("imputation"), v.name);
      v.per_capita = jv.value("per_capita", false);
      v.multi_response = jv.value("multi_response", false);
      v.heatmap = jv.value("heatmap", true);
      if (jv.contains("text_map"))
        for (const auto& [text, value] : jv["text_map"].items()) v.text_map[normalize_text(text)] = value.get<double>();
      if (jv.contains("list_count")) {
        ListCount lc;
        lc.separator = jv["list_count"].value("separator", std::string{";"});
        for (const auto& e : jv["list_count"].value("exclude", std::vector<std::string>{}))
          lc.exclude.push_back(normalize_text(e));
        v.list_count = std::move(lc);
      }
      schema.variables.push_back(std::move(v));
    }

    if (doc.contains("drop_if"))
      for (const auto& jp : doc["drop_if"]) {
        DegeneratePredicate p;
        p.variable = jp.at("variable").get<std::string>();
        p.op = parse_op(jp.at("op").get<std::string>());
        p.value = jp.value("value", 0.0);
        schema.drop_if.push_back(std::move(p));
      }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed schema: ") + e.what());
  }

  validate(schema);
  return schema;
}

Schema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open schema " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_schema(buffer.str());
}

}  // namespace segprof
