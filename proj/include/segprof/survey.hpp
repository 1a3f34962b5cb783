#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "segprof/csv.hpp"
#include "segprof/schema.hpp"

namespace segprof {

struct Missing {
  bool operator==(const Missing&) const = default;
};

/// A non-empty cell that is neither numeric nor a code list, e.g. "I don't know".
struct Ambiguous {
  std::string text;
  bool operator==(const Ambiguous&) const = default;
};

/// Category codes of one cell. Single-response variables hold exactly one.
using Codes = std::vector<int>;

using RawCell = std::variant<Missing, double, Codes, Ambiguous>;

/// Survey rows as read from disk. Columns follow schema variable order.
struct RawTable {
  std::vector<std::string> variables;
  std::vector<std::string> row_ids;
  std::vector<std::vector<RawCell>> rows;

  [[nodiscard]] std::size_t size() const { return rows.size(); }
  [[nodiscard]] std::size_t column(std::string_view variable) const;
};

enum class CellOrigin { observed, text_mapped, imputed };

struct Provenance {
  CellOrigin origin = CellOrigin::observed;
  ImputationRule rule = ImputationRule::skew_majority;  // meaningful for imputed cells

  [[nodiscard]] bool is_observed() const { return origin == CellOrigin::observed; }
  [[nodiscard]] std::string tag() const;
  bool operator==(const Provenance&) const = default;
};

/// A measurement awaiting binning (double) or resolved category codes.
using CleanCell = std::variant<double, Codes>;

/// Survey rows with every cell resolved. Cells of measured variables stay
/// numeric until bin_measurements(); afterwards every cell holds codes.
struct CleanTable {
  std::vector<std::string> variables;
  std::vector<std::string> row_ids;
  std::vector<std::vector<CleanCell>> rows;
  std::vector<std::vector<Provenance>> provenance;

  [[nodiscard]] std::size_t size() const { return rows.size(); }
  [[nodiscard]] std::size_t column(std::string_view variable) const;
  /// True when no numeric cell remains.
  [[nodiscard]] bool binned() const;
  /// Codes of a binned cell; throws if the cell is still numeric.
  [[nodiscard]] const Codes& codes(std::size_t row, std::size_t col) const;
  /// Number of non-observed cells per variable.
  [[nodiscard]] std::map<std::string, std::size_t> imputed_counts() const;
};

/// Parses CSV rows (header first) against the schema.
RawTable parse_survey(const std::vector<csv::Row>& rows, const Schema& schema);
RawTable load_survey(const std::filesystem::path& path, const Schema& schema);

struct DropResult {
  RawTable table;
  std::size_t removed = 0;
  std::vector<std::string> warnings;
};

[[nodiscard]] bool matches(const RawCell& cell, const DegeneratePredicate& predicate);

DropResult drop_degenerate(const RawTable& table, const Schema& schema, const DegeneratePredicate& predicate);
/// Applies every predicate in schema.drop_if.
DropResult drop_degenerate(const RawTable& table, const Schema& schema);

/// Resolves missing and ambiguous cells by each variable's imputation rule.
CleanTable impute(const RawTable& table, const Schema& schema);

/// Divides numeric cells of per-capita variables by the row's household size.
CleanTable derive_per_capita(const CleanTable& table, const Schema& schema);

/// The code whose interval contains value. The lowest category is closed
/// below; all others are lower-exclusive and upper-inclusive.
int categorize(double value, const VariableSpec& spec);

CleanTable bin_measurements(const CleanTable& table, const Schema& schema);

/// impute -> derive_per_capita -> bin_measurements.
CleanTable clean_survey(const RawTable& table, const Schema& schema);

/// Re-expresses a clean table as raw cells (numbers and code lists).
RawTable to_raw(const CleanTable& table);

void write_clean_table(std::ostream& out, const CleanTable& table, std::string_view id_header);
void write_provenance(std::ostream& out, const CleanTable& table, std::string_view id_header);

}  // namespace segprof
