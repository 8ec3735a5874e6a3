#pragma once

// File formats: rule files (JSON), families and snapshots (CSV or binary),
// sparsity dumps and point-count summaries (CSV). Indices are 1-based in
// every file and 0-based in memory.

#include <sawcub/problems.hpp>

#include <json.hpp>

#include <filesystem>
#include <string>

namespace sawcub {

inline constexpr int kRuleSchemaVersion = 1;

struct RuleFile {
  int schema_version = kRuleSchemaVersion;
  Index points = 0;  // M
  AdaptiveRule<double> rule;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
};

/// Canonical JSON text (two-space indent, trailing newline). Parsing it and
/// emitting again reproduces the same bytes.
std::string emit_rule(const RuleFile& file);
RuleFile parse_rule(const std::string& text);

/// Family CSV:
///   M,k
///   W_1,...,W_M
///   then per subspace: a line with its column count n, followed by M rows
///   of n comma-separated values.
std::string emit_family_csv(const SubspaceFamily<double>& family);
SubspaceFamily<double> parse_family_csv(const std::string& text);

/// k rows of M zeros/ones, preceded by `strategy,<label>`; row i marks the
/// strictly positive entries of the subspace-i weights.
std::string emit_sparsity_csv(const AdaptiveRule<double>& rule, Index points, const std::string& label);

struct SummaryRow {
  std::string strategy;
  Index points = 0;
  double max_residual = 0;
  double wall_time_s = 0;
};
std::string emit_summary_csv(const std::vector<SummaryRow>& rows);

/// Snapshot matrix, row = spatial point, column = snapshot. CSV files start
/// with a `M,P` line followed by M rows of P values; binary files hold two
/// little-endian int64 values M, P followed by M*P doubles in column-major
/// order. The format is chosen by the `.csv` extension.
MatrixXd load_snapshots(const std::filesystem::path& path);
void save_snapshots(const std::filesystem::path& path, const MatrixXd& snapshots);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace sawcub
