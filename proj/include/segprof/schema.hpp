#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace segprof {

enum class VariableKind { binary, ordinal, nominal };
enum class Role { characteristic, outcome };

std::string_view to_string(VariableKind kind);
std::string_view to_string(Role role);

/// Category interval. Membership is lower-exclusive and upper-inclusive,
/// except for the lowest category of a variable which is closed below.
struct Interval {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

struct Category {
  int code = 0;
  std::string label;
  std::optional<Interval> bounds;
};

enum class ImputationRule { favorable_category, mean_then_bin, fixed_category, infer_from, skew_majority };

std::string_view to_string(ImputationRule rule);

struct Imputation {
  ImputationRule rule = ImputationRule::skew_majority;
  int code = 0;                  // favorable_category / fixed_category
  std::string source;            // infer_from: variable consulted in the same row
  std::map<int, int> mapping;    // infer_from: source code -> target code
  std::optional<int> fallback;   // infer_from: used when the source is unobserved
};

/// Free-text cells holding a delimited list whose entry count is the value,
/// e.g. the names in a contact network. Excluded entries are not counted.
struct ListCount {
  std::string separator = ";";
  std::vector<std::string> exclude;
};

struct VariableSpec {
  std::string name;
  VariableKind kind = VariableKind::ordinal;
  Role role = Role::characteristic;
  std::vector<Category> categories;
  Imputation imputation;
  bool per_capita = false;
  bool multi_response = false;
  /// Ambiguous-text classification: trimmed, case-insensitive text -> value.
  std::map<std::string, double> text_map;
  std::optional<ListCount> list_count;
  /// Whether the variable is drawn in category heatmaps.
  bool heatmap = true;

  /// True when raw cells are measurements binned through category bounds
  /// rather than category codes.
  [[nodiscard]] bool measured() const;
  [[nodiscard]] const Category* find(int code) const;
  [[nodiscard]] bool has_code(int code) const { return find(code) != nullptr; }
};

enum class CompareOp { eq, ne, lt, le, gt, ge, missing };

struct DegeneratePredicate {
  std::string variable;
  CompareOp op = CompareOp::eq;
  double value = 0.0;
};

struct Schema {
  /// Column holding the stable row identifier; when empty, row ids are the
  /// 1-based data line numbers.
  std::string id_column;
  /// Divisor for per-capita variables.
  std::string household_size_variable;
  std::vector<std::string> missing_tokens{"", "NA", "N/A", "NaN", "null"};
  std::string multi_separator = ";";
  std::vector<VariableSpec> variables;
  std::vector<DegeneratePredicate> drop_if;

  [[nodiscard]] std::optional<std::size_t> index_of(std::string_view name) const;
  [[nodiscard]] const VariableSpec& at(std::string_view name) const;
};

/// Checks every schema invariant; throws SchemaError naming the offending
/// variable.
void validate(const Schema& schema);

Schema parse_schema(std::string_view json_text);
Schema load_schema(const std::filesystem::path& path);

/// Normalises ambiguous text for lookup in VariableSpec::text_map.
std::string normalize_text(std::string_view text);

}  // namespace segprof
