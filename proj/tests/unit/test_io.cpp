#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "ait/io.hpp"
#include "ait/rng.hpp"

using namespace ait;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ait_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Matrix awkward_matrix() {
  CounterRng rng(8);
  Matrix M(3, 4);
  for (Index j = 0; j < 4; ++j) {
    for (Index i = 0; i < 3; ++i) M(i, j) = rng.normal() * std::pow(10.0, double(i * 7 - 7));
  }
  M(0, 0) = 0.1;
  M(1, 1) = -0.0;
  M(2, 3) = std::numeric_limits<double>::denorm_min();
  return M;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("matrix round trips are exact") {
  const fs::path dir = scratch_dir("roundtrip");
  const Matrix M = awkward_matrix();
  write_matrix(dir / "m.csv", M);
  write_matrix(dir / "m.bin", M);
  CHECK(read_matrix(dir / "m.csv") == M);
  CHECK(read_matrix(dir / "m.bin") == M);
  CHECK(fs::file_size(dir / "m.bin") == 16 + 12 * 8);

  const Vector v = M.col(2);
  write_vector(dir / "v.csv", v);
  write_vector(dir / "v.bin", v);
  CHECK(read_vector(dir / "v.csv") == v);
  CHECK(read_vector(dir / "v.bin") == v);
  CHECK_THROWS_AS(read_vector(dir / "m.csv"), IoError);

  write_matrix(dir / "empty.csv", Matrix(0, 3));
  CHECK(read_matrix(dir / "empty.csv").cols() == 3);
}

TEST_CASE("binary layout is little endian column major") {
  const fs::path dir = scratch_dir("layout");
  Matrix M(2, 2);
  M << 1, 2, 3, 4;
  write_matrix(dir / "m.bin", M);
  std::ifstream in(dir / "m.bin", std::ios::binary);
  unsigned char bytes[48];
  in.read(reinterpret_cast<char*>(bytes), 48);
  REQUIRE(in.gcount() == 48);
  CHECK(bytes[0] == 2);
  CHECK(bytes[8] == 2);
  // Second stored double is M(1, 0) = 3.0 = 0x4008000000000000.
  CHECK(bytes[16 + 8 + 7] == 0x40);
  CHECK(bytes[16 + 8 + 6] == 0x08);
}

TEST_CASE("csv format") {
  const fs::path dir = scratch_dir("csv");
  write_file(dir / "ok.csv", "2, 3\n1,2,3\n\n 4 ,5,6e-1\r\n");
  Matrix expected(2, 3);
  expected << 1, 2, 3, 4, 5, 0.6;
  CHECK(read_matrix(dir / "ok.csv") == expected);

  Matrix one(1, 2);
  one << 0.1, -2.5;
  write_matrix(dir / "one.csv", one);
  CHECK(read_file(dir / "one.csv") == "1,2\n0.1,-2.5\n");
}

TEST_CASE("malformed input is rejected") {
  const fs::path dir = scratch_dir("bad");
  const std::pair<const char*, const char*> cases[] = {
      {"empty.csv", ""},
      {"header.csv", "2\n1\n2\n"},
      {"short.csv", "2,2\n1,2\n"},
      {"wide.csv", "1,2\n1,2,3\n"},
      {"text.csv", "1,2\n1,abc\n"},
      {"trailing.csv", "1,1\n1\n2\n"},
      {"negative.csv", "-1,2\n"},
      {"partial.csv", "1,1\n1.5x\n"},
  };
  for (const auto& [name, text] : cases) {
    CAPTURE(name);
    write_file(dir / name, text);
    CHECK_THROWS_AS(read_matrix(dir / name), IoError);
  }
  CHECK_THROWS_AS(read_matrix(dir / "missing.csv"), IoError);

  write_matrix(dir / "good.bin", Matrix::Ones(3, 3));
  fs::resize_file(dir / "good.bin", 16 + 8 * 8);
  CHECK_THROWS_AS(read_matrix(dir / "good.bin"), IoError);
  write_file(dir / "tiny.bin", "abc");
  CHECK_THROWS_AS(read_matrix(dir / "tiny.bin"), IoError);
  {
    std::ofstream out(dir / "huge.bin", std::ios::binary);
    const std::uint64_t dims[2] = {1ULL << 40, 1ULL << 40};
    out.write(reinterpret_cast<const char*>(dims), sizeof dims);
  }
  CHECK_THROWS_AS(read_matrix(dir / "huge.bin"), IoError);
}

TEST_CASE("trace csv") {
  const fs::path dir = scratch_dir("trace");
  SolveTrace trace;
  TraceRecord a;
  a.t = 1;
  a.tau = 0.5;
  a.step = 1.0;
  a.residual_l2 = 2.0;
  trace.records.push_back(a);
  a.t = 2;
  a.error_norms = std::array<double, 3>{3.0, 2.0, 1.0};
  trace.records.push_back(a);
  write_trace_csv(dir / "trace.csv", trace);
  CHECK(read_file(dir / "trace.csv") ==
        "t,tau,step,residual_l2,err_l1,err_l2,err_linf\n"
        "1,0.5,1,2,,,\n"
        "2,0.5,1,2,3,2,1\n");
}

TEST_CASE("experiment tables") {
  const fs::path dir = scratch_dir("tables");
  write_sweep_csv(dir / "s.csv", {{"hard", 3, 0.25, 0.5, 10.0}});
  CHECK(read_file(dir / "s.csv") ==
        "algorithm,k,mean_precision,success_rate,mean_iterations\nhard,3,0.25,0.5,10\n");
  write_normalization_csv(dir / "n.csv", {{"soft@0.5", true, 1e-12, 1.0, 7.5}});
  CHECK(read_file(dir / "n.csv") ==
        "algorithm,normalized,mean_precision,success_rate,mean_iterations\n"
        "soft@0.5,true,1e-12,1,7.5\n");
  CurvePoint full;
  full.algorithm = "nhard";
  full.m = 16;
  full.n = 32;
  full.k = 16;
  full.m_over_n = 0.5;
  full.k_over_m = 1.0;
  full.success_rate_at_k = 0.75;
  CurvePoint cut = full;
  cut.k = 4;
  cut.k_over_m = 0.25;
  cut.k_fail = 5;
  cut.success_rate_at_fail = 0.25;
  write_curve_csv(dir / "c.csv", {full, cut});
  CHECK(read_file(dir / "c.csv") ==
        "algorithm,m,n,k,m_over_n,k_over_m,success_rate_at_k,k_fail,success_rate_at_fail\n"
        "nhard,16,32,16,0.5,1,0.75,,\n"
        "nhard,16,32,4,0.5,0.25,0.75,5,0.25\n");
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("json helpers") {
  const fs::path dir = scratch_dir("json");
  Json j = {{"b", 1}, {"a", {1, 2}}};
  write_json(dir / "x.json", j);
  CHECK(read_file(dir / "x.json").back() == '\n');
  CHECK(read_json(dir / "x.json") == j);
  write_file(dir / "bad.json", "{\"a\": ");
  CHECK_THROWS_AS(read_json(dir / "bad.json"), ConfigError);

  CHECK(parse_norm_pair("1,inf") == NormPair::l1_linf());
  CHECK(parse_norm_pair("2, 2") == NormPair::l2_l2());
  CHECK(parse_norm_pair("1.5,3").q() == 3.0);
  CHECK_THROWS_AS(parse_norm_pair("2"), ConfigError);
  CHECK_THROWS_AS(parse_norm_pair("2,3"), ConfigError);
  CHECK_THROWS_AS(parse_norm_pair("a,b"), ConfigError);

  CHECK_THROWS_AS(require_known_keys(Json{{"x", 1}}, {"y"}, "spec"), ConfigError);
  CHECK_NOTHROW(require_known_keys(Json{{"y", 1}}, {"y"}, "spec"));
  CHECK_THROWS_AS(require_known_keys(Json::array(), {"y"}, "spec"), ConfigError);
}

TEST_CASE("problem specs from json") {
  const ProblemSpec spec = problem_spec_from_json(Json{{"m", 20},
                                                       {"n", 30},
                                                       {"k_star", 2},
                                                       {"matrix_variance", 0.01},
                                                       {"signal", "binary"},
                                                       {"snr_db", 60},
                                                       {"snr_reference", "signal_entry"}});
  CHECK(spec.m == 20);
  CHECK(spec.n == 30);
  CHECK(spec.k_star == 2);
  CHECK(spec.variance() == 0.01);
  CHECK(spec.signal_dist == SignalDist::binary);
  CHECK(*spec.snr_db == 60.0);
  CHECK(spec.snr_reference == SnrReference::signal_entry);

  const Json back = to_json(spec);
  const ProblemSpec again = problem_spec_from_json(back);
  CHECK(again.variance() == spec.variance());
  CHECK(again.snr_reference == spec.snr_reference);

  const ProblemSpec defaults = problem_spec_from_json(Json::object());
  CHECK(defaults.m == 250);
  CHECK_FALSE(defaults.snr_db.has_value());

  CHECK_THROWS_AS(problem_spec_from_json(Json{{"mm", 3}}), ConfigError);
  CHECK_THROWS_AS(problem_spec_from_json(Json{{"m", "many"}}), ConfigError);
  CHECK_THROWS_AS(problem_spec_from_json(Json{{"k_star", 0}}), ConfigError);
  CHECK_THROWS_AS(problem_spec_from_json(Json{{"signal", "laplace"}}), ConfigError);
}

TEST_CASE("analysis report json") {
  const auto report = analyze(Matrix::Identity(4, 4), 1, ThresholdingOperator::soft(),
                              NormPair::l2_l2());
  const Json j = to_json(report);
  CHECK(j.at("mu") == 0.0);
  CHECK(j.at("norms") == "2,2");
  CHECK(j.at("conditions").at("gric_contraction") == true);
  CHECK(j.at("step_interval").at("lo").get<double>() < 1.0);
  CHECK(j.at("beta").size() == 4);
}
