#include "ait/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ait {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

template <class T>
T parse_number(std::string_view cell, const std::filesystem::path& path, std::size_t line_no) {
  T value{};
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
    throw IoError(path.string() + ":" + std::to_string(line_no) + ": cannot parse '" +
                  std::string(cell) + "'");
  }
  return value;
}

bool is_binary(const std::filesystem::path& path) { return path.extension() == ".bin"; }

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffULL) << (8 * (7 - i));
  return r;
}

void put_u64(std::ostream& out, std::uint64_t v) {
  const std::uint64_t le = to_little(v);
  out.write(reinterpret_cast<const char*>(&le), sizeof le);
}

std::uint64_t get_u64(std::istream& in, const std::filesystem::path& path) {
  std::uint64_t le = 0;
  if (!in.read(reinterpret_cast<char*>(&le), sizeof le)) {
    throw IoError(path.string() + ": truncated binary matrix");
  }
  return to_little(le);
}

Matrix read_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::uint64_t rows = get_u64(in, path);
  const std::uint64_t cols = get_u64(in, path);
  const auto size = std::filesystem::file_size(path);
  if (rows != 0 && cols > (size / 8) / rows) {
    throw IoError(path.string() + ": header dimensions exceed file size");
  }
  if (size != 16 + rows * cols * 8) {
    throw IoError(path.string() + ": size does not match header " + std::to_string(rows) +
                  "x" + std::to_string(cols));
  }
  Matrix M(static_cast<Index>(rows), static_cast<Index>(cols));
  for (Index j = 0; j < M.cols(); ++j) {
    for (Index i = 0; i < M.rows(); ++i) {
      M(i, j) = std::bit_cast<double>(get_u64(in, path));
    }
  }
  return M;
}

void write_binary(const std::filesystem::path& path, const Matrix& M) {
  auto out = open_out(path, true);
  put_u64(out, static_cast<std::uint64_t>(M.rows()));
  put_u64(out, static_cast<std::uint64_t>(M.cols()));
  for (Index j = 0; j < M.cols(); ++j) {
    for (Index i = 0; i < M.rows(); ++i) put_u64(out, std::bit_cast<std::uint64_t>(M(i, j)));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Matrix read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!trim(line).empty()) return true;
    }
    return false;
  };
  if (!next_line()) throw IoError(path.string() + ": empty file");
  const auto header = split_commas(line);
  if (header.size() != 2) throw IoError(path.string() + ": header must be 'rows,cols'");
  const auto rows = parse_number<Index>(header[0], path, line_no);
  const auto cols = parse_number<Index>(header[1], path, line_no);
  if (rows < 0 || cols < 0) throw IoError(path.string() + ": negative dimensions");
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    if (!next_line()) {
      throw IoError(path.string() + ": expected " + std::to_string(rows) + " rows, found " +
                    std::to_string(i));
    }
    const auto cells = split_commas(line);
    if (static_cast<Index>(cells.size()) != cols) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(cols) + " values");
    }
    for (Index j = 0; j < cols; ++j) {
      M(i, j) = parse_number<double>(cells[static_cast<std::size_t>(j)], path, line_no);
    }
  }
  if (next_line()) throw IoError(path.string() + ": trailing rows after the declared count");
  return M;
}

void write_csv(const std::filesystem::path& path, const Matrix& M) {
  auto out = open_out(path);
  out << M.rows() << ',' << M.cols() << '\n';
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (j) out << ',';
      out << format_double(M(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Json json_number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double json_double(const Json& j, const std::string& key) {
  const Json& v = j.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return kInf;
  }
  throw ConfigError("field '" + key + "' must be a number");
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

Matrix read_matrix(const std::filesystem::path& path) {
  return is_binary(path) ? read_binary(path) : read_csv(path);
}

void write_matrix(const std::filesystem::path& path, const Matrix& M) {
  if (is_binary(path)) {
    write_binary(path, M);
  } else {
    write_csv(path, M);
  }
}

Vector read_vector(const std::filesystem::path& path) {
  const Matrix M = read_matrix(path);
  if (M.cols() != 1) {
    throw IoError(path.string() + ": a vector file needs exactly one column (found " +
                  std::to_string(M.cols()) + ")");
  }
  return M.col(0);
}

void write_vector(const std::filesystem::path& path, const Vector& v) {
  write_matrix(path, Matrix(v));
}

void write_trace_csv(const std::filesystem::path& path, const SolveTrace& trace) {
  auto out = open_out(path);
  out << "t,tau,step,residual_l2,err_l1,err_l2,err_linf\n";
  for (const auto& r : trace.records) {
    out << r.t << ',' << format_double(r.tau) << ',' << format_double(r.step) << ','
        << format_double(r.residual_l2);
    if (r.error_norms) {
      for (double e : *r.error_norms) out << ',' << format_double(e);
    } else {
      out << ",,,";
    }
    out << '\n';
  }
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  auto out = open_out(path);
  out << "algorithm,k,mean_precision,success_rate,mean_iterations\n";
  for (const auto& r : rows) {
    out << r.algorithm << ',' << r.k << ',' << format_double(r.mean_precision) << ','
        << format_double(r.success_rate) << ',' << format_double(r.mean_iterations) << '\n';
  }
}

void write_normalization_csv(const std::filesystem::path& path,
                             const std::vector<NormalizationRow>& rows) {
  auto out = open_out(path);
  out << "algorithm,normalized,mean_precision,success_rate,mean_iterations\n";
  for (const auto& r : rows) {
    out << r.algorithm << ',' << (r.normalized ? "true" : "false") << ','
        << format_double(r.mean_precision) << ',' << format_double(r.success_rate) << ','
        << format_double(r.mean_iterations) << '\n';
  }
}

void write_curve_csv(const std::filesystem::path& path, const std::vector<CurvePoint>& points) {
  auto out = open_out(path);
  out << "algorithm,m,n,k,m_over_n,k_over_m,success_rate_at_k,k_fail,success_rate_at_fail\n";
  for (const auto& p : points) {
    out << p.algorithm << ',' << p.m << ',' << p.n << ',' << p.k << ','
        << format_double(p.m_over_n) << ',' << format_double(p.k_over_m) << ','
        << format_double(p.success_rate_at_k) << ',';
    if (p.k_fail) out << *p.k_fail;
    out << ',';
    if (p.success_rate_at_fail) out << format_double(*p.success_rate_at_fail);
    out << '\n';
  }
}

void write_bound_csv(const std::filesystem::path& path, const std::vector<BoundRun>& runs) {
  auto out = open_out(path);
  out << "instance_seed,mode,step,rho,t,error,bound,holds\n";
  for (const auto& run : runs) {
    for (const auto& row : run.report.rows) {
      out << run.instance_seed << ',' << bound_mode_name(run.report.mode) << ','
          << format_double(run.report.step) << ',' << format_double(run.report.rho) << ','
          << row.t << ',' << format_double(row.error) << ',' << format_double(row.bound)
          << ',' << (row.error <= row.bound ? "true" : "false") << '\n';
    }
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) {
  write_text(path, j.dump(2) + "\n");
}

Json to_json(const AnalysisReport& report) {
  Json j;
  j["m"] = report.m;
  j["n"] = report.n;
  j["k_star"] = report.k_star;
  j["operator"] = report.op;
  j["c1"] = report.c1;
  j["c2"] = report.c2;
  j["norms"] = report.norms.label();
  j["mu"] = report.mu;
  Json delta = Json::object();
  for (const auto& [k, v] : report.delta) delta[std::to_string(k)] = v;
  j["delta"] = delta;
  Json beta = Json::array();
  for (const auto& entry : report.beta) {
    beta.push_back({{"k", entry.k},
                    {"norms", entry.norms.label()},
                    {"value", entry.value.value},
                    {"exact", entry.value.exact}});
  }
  j["beta"] = beta;
  j["constants"] = {{"L1", report.constants.L1},
                    {"L2", report.constants.L2},
                    {"L", report.constants.L},
                    {"inverse_L", 1.0 / report.constants.L}};
  j["beta_contraction"] =
      report.beta_contraction ? Json(*report.beta_contraction) : Json(nullptr);
  j["step_interval"] = report.steps ? Json{{"lo", report.steps->lo}, {"hi", report.steps->hi}}
                                    : Json(nullptr);
  j["rate_at_unit_step"] =
      report.rate_at_unit_step
          ? Json{{"gamma", report.rate_at_unit_step->gamma},
                 {"rho", report.rate_at_unit_step->rho}}
          : Json(nullptr);
  Json conditions = Json::object();
  for (const auto& [name, ok] : report.conditions) conditions[name] = ok;
  j["conditions"] = conditions;
  j["notes"] = report.notes;
  return j;
}

Json to_json(const ProblemSpec& spec) {
  Json j;
  j["m"] = spec.m;
  j["n"] = spec.n;
  j["k_star"] = spec.k_star;
  j["matrix_variance"] = spec.variance();
  j["signal"] = std::string(signal_dist_name(spec.signal_dist));
  j["snr_db"] = spec.snr_db ? Json(*spec.snr_db) : Json(nullptr);
  j["snr_reference"] = std::string(snr_reference_name(spec.snr_reference));
  return j;
}

Json to_json(const BoundReport& report, bool include_rows) {
  Json j;
  j["mode"] = std::string(bound_mode_name(report.mode));
  j["norms"] = report.norms.label();
  j["k_star"] = report.k_star;
  j["step"] = report.step;
  j["constant"] = report.constant;
  j["L"] = report.L;
  j["rho"] = json_number(report.rho);
  j["step_interval"] = {{"lo", report.steps.lo}, {"hi", report.steps.hi}};
  j["noise_term"] = json_number(report.noise_term);
  j["iterations"] = report.rows.empty() ? 0 : report.rows.back().t;
  j["violations"] = report.violations;
  j["holds"] = report.holds();
  if (include_rows) {
    Json rows = Json::array();
    for (const auto& r : report.rows) {
      rows.push_back({{"t", r.t}, {"error", r.error}, {"bound", json_number(r.bound)}});
    }
    j["rows"] = rows;
  }
  return j;
}

NormPair parse_norm_pair(std::string_view text) {
  const auto parts = split_commas(text);
  if (parts.size() != 2) throw ConfigError("norm pair must look like 'p,q' (e.g. 2,2 or 1,inf)");
  auto value = [&](std::string_view s) {
    if (s == "inf") return kInf;
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw ConfigError("bad norm exponent '" + std::string(s) + "'");
    }
    return v;
  };
  return NormPair(value(parts[0]), value(parts[1]));
}

void require_known_keys(const Json& j, const std::vector<std::string>& allowed,
                        const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ConfigError("unknown field '" + item.key() + "' in " + where);
    }
  }
}

ProblemSpec problem_spec_from_json(const Json& j) {
  require_known_keys(j, {"m", "n", "k_star", "matrix_variance", "signal", "snr_db", "snr_reference"}, "problem");
  ProblemSpec spec;
  try {
    if (j.contains("m")) spec.m = j.at("m").get<Index>();
    if (j.contains("n")) spec.n = j.at("n").get<Index>();
    if (j.contains("k_star")) spec.k_star = j.at("k_star").get<Index>();
    if (j.contains("matrix_variance") && !j.at("matrix_variance").is_null()) {
      spec.matrix_variance = json_double(j, "matrix_variance");
    }
    if (j.contains("signal")) {
      spec.signal_dist = signal_dist_from_name(j.at("signal").get<std::string>());
    }
    if (j.contains("snr_db") && !j.at("snr_db").is_null()) spec.snr_db = json_double(j, "snr_db");
    if (j.contains("snr_reference")) {
      spec.snr_reference = snr_reference_from_name(j.at("snr_reference").get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
  spec.validate();
  return spec;
}

}  // namespace ait
