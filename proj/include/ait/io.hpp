#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ait/analysis.hpp"
#include "ait/experiments.hpp"
#include "ait/probgen.hpp"
#include "ait/solver.hpp"

namespace ait {

using Json = nlohmann::ordered_json;

/// I/O failure: unreadable file, malformed content.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

/// Files ending in ".bin" use the binary layout (little-endian uint64 rows,
/// uint64 cols, column-major float64 entries); anything else is CSV with a
/// "rows,cols" header line followed by one line per row.
Matrix read_matrix(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path, const Matrix& M);

/// A matrix file with exactly one column.
Vector read_vector(const std::filesystem::path& path);
void write_vector(const std::filesystem::path& path, const Vector& v);

/// Columns t, tau, step, residual_l2, err_l1, err_l2, err_linf; the error
/// cells are empty when the trace carries no error norms.
void write_trace_csv(const std::filesystem::path& path, const SolveTrace& trace);

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);
void write_normalization_csv(const std::filesystem::path& path,
                             const std::vector<NormalizationRow>& rows);
void write_curve_csv(const std::filesystem::path& path, const std::vector<CurvePoint>& points);

struct BoundRun {
  std::uint64_t instance_seed = 0;
  BoundReport report;
};
void write_bound_csv(const std::filesystem::path& path, const std::vector<BoundRun>& runs);

void write_text(const std::filesystem::path& path, const std::string& text);
Json read_json(const std::filesystem::path& path);
/// Two-space indented JSON with a trailing newline.
void write_json(const std::filesystem::path& path, const Json& j);

Json to_json(const AnalysisReport& report);
Json to_json(const ProblemSpec& spec);
Json to_json(const BoundReport& report, bool include_rows);

/// Parses "1,inf" / "2,2" / "1.5,3" style labels.
NormPair parse_norm_pair(std::string_view text);

/// Strict field readers used by the spec parsers; they throw ConfigError
/// naming the offending key.
void require_known_keys(const Json& j, const std::vector<std::string>& allowed,
                        const std::string& where);

/// The seed field is ignored; the caller supplies it.
ProblemSpec problem_spec_from_json(const Json& j);

}  // namespace ait
