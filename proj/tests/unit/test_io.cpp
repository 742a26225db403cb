#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "muskat/commands.hpp"
#include "muskat/errors.hpp"
#include "muskat/io.hpp"

using namespace muskat;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("muskat_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return path / name;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

const char* small_config = R"({"n1": 16, "n2_plus": 9, "n2_minus": 9, "t_end": 0.2, "output_dir": "out")";

}  // namespace

TEST_SUITE("io") {

TEST_CASE("config parsing") {
  const auto c = parse_config(R"({"n1": 64, "beta_minus": 0.5, "solver": "direct",
                                  "h0": [{"k": 1, "cos": 0.05}, {"k": 2, "sin": 0.01}]})");
  CHECK(c.sim.n1 == 64);
  CHECK(c.sim.n2_plus == 64);
  CHECK(c.sim.beta_minus == 0.5);
  CHECK(c.sim.solver == SolverKind::direct);
  REQUIRE(c.h0_modes.size() == 2);
  CHECK(c.h0_modes[1].sin == 0.01);
  const auto h = c.h0();
  CHECK(h[0] == doctest::Approx(-0.05));  // x = -pi

  CHECK_THROWS_AS(parse_config(R"({"n_1": 64})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"n1": "64"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"beta_plus": 0})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"h0": [{"k": 1, "amp": 1}]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"n1": 16, "h0": [{"k": 8, "cos": 1}]})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_config("[]"), ConfigError);

  // Echo parses back to the same configuration.
  const auto again = parse_config(config_to_json(c));
  CHECK(again.sim.beta_minus == c.sim.beta_minus);
  CHECK(again.h0_modes.size() == 2);
}

TEST_CASE("timeseries format") {
  CHECK(std::string(timeseries_header) ==
        "t,l2_h,h2_h,h2p5_h,scriptE,scriptD,rt_margin,l2_law_residual,coupling_ratio");
  EnergyReport r;
  r.t = 0.1;
  r.l2_h = 1.0 / 3.0;
  const auto row = timeseries_row(r);
  CHECK(row.rfind("0.10000000000000001,0.33333333333333331,", 0) == 0);
  CHECK(std::stod(row.substr(20)) == 1.0 / 3.0);
}

TEST_CASE("snapshots round-trip bit-exactly") {
  TempDir tmp;
  SimConfig c;
  c.n1 = 16;
  c.n2_plus = 9;
  c.n2_minus = 5;
  const auto h = PeriodicField::sample(16, [](double x) { return 0.1 * std::cos(x) + 1e-17 * x; });
  const auto f = PeriodicField::sample(16, [](double x) { return 0.1 * std::sin(2 * x); });
  const auto e = evaluate(project_zero_mean(h), Model::from_config(c, f));
  const auto s = make_snapshot(0.125, project_zero_mean(h), f, e.head);
  write_snapshot(tmp.path / "a.bin", s);
  const auto back = read_snapshot(tmp.path / "a.bin");
  CHECK(back == s);
  write_snapshot(tmp.path / "b.bin", back);
  CHECK(slurp(tmp.path / "a.bin") == slurp(tmp.path / "b.bin"));
  const auto bytes = slurp(tmp.path / "a.bin");
  CHECK(bytes.substr(0, 4) == "MSKT");
  CHECK(bytes.size() == 4 + 4 * 4 + 8 + 8 * (2 * 16 + 3 * 16 * 9 + 3 * 16 * 5));

  std::ofstream(tmp.path / "bad.bin") << "NOPE";
  CHECK_THROWS_AS(read_snapshot(tmp.path / "bad.bin"), Error);
  std::ofstream(tmp.path / "short.bin", std::ios::binary) << bytes.substr(0, 100);
  CHECK_THROWS_AS(read_snapshot(tmp.path / "short.bin"), Error);
}

TEST_CASE("cmd_run: rest state, replay, manifest") {
  TempDir tmp;
  const auto cfg = tmp.write("rest.json", std::string(small_config) + "}");
  std::ostringstream out, err;
  CHECK(cmd_run(cfg.string(), out, err) == exit_ok);
  const auto csv = lines(slurp(tmp.path / "out" / "timeseries.csv"));
  REQUIRE(csv.size() > 2);
  CHECK(csv[0] == timeseries_header);
  for (std::size_t i = 1; i < csv.size(); ++i) {
    const auto row = csv[i].substr(csv[i].find(','));
    CHECK(row == ",0,0,0,0,0,1,0,0");
  }
  CHECK(slurp(tmp.path / "out" / "timeseries.csv").find('\r') == std::string::npos);

  const auto man = nlohmann::json::parse(slurp(tmp.path / "out" / "manifest.json"));
  CHECK(man["termination"] == "completed");
  CHECK(man["version"] == version_string());
  CHECK(man["config"]["n1"] == 16);
  int manifests = 0;
  for (const auto& e : fs::directory_iterator(tmp.path / "out"))
    manifests += e.path().filename() == "manifest.json";
  CHECK(manifests == 1);
  for (const auto& name : man["files"]["snapshots"]) CHECK(fs::exists(tmp.path / "out" / name.get<std::string>()));
}

TEST_CASE("cmd_run: identical config gives identical CSV") {
  TempDir tmp;
  const std::string body = R"({"n1": 16, "n2_plus": 9, "n2_minus": 9, "t_end": 0.3,
      "h0": [{"k": 1, "cos": 0.05}, {"k": 3, "sin": 0.01}], "f": [{"k": 2, "cos": 0.1}], "output_dir": )";
  std::ostringstream out, err;
  REQUIRE(cmd_run(tmp.write("a.json", body + "\"a\"}").string(), out, err) == exit_ok);
  REQUIRE(cmd_run(tmp.write("b.json", body + "\"b\"}").string(), out, err) == exit_ok);
  CHECK(slurp(tmp.path / "a" / "timeseries.csv") == slurp(tmp.path / "b" / "timeseries.csv"));
}

TEST_CASE("cmd_run: failures") {
  TempDir tmp;
  std::ostringstream out, err;
  CHECK(cmd_run((tmp.path / "missing.json").string(), out, err) == exit_usage);
  CHECK(err.str().find("usage") != std::string::npos);

  const auto gap = tmp.write("gap.json", std::string(small_config) +
                                             R"(, "h0": [{"k": 1, "cos": 0.7}], "f": [{"k": 1, "cos": -0.4}]})");
  CHECK(cmd_run(gap.string(), out, err) == exit_physical);
  const auto man = nlohmann::json::parse(slurp(tmp.path / "out" / "manifest.json"));
  CHECK(man["termination"] == "gap_violation");
  CHECK(lines(slurp(tmp.path / "out" / "timeseries.csv")).size() == 1);
  CHECK(man["files"]["snapshots"].empty());

  const auto typo = tmp.write("typo.json", R"({"n1": 16, "beta_pluss": 1})");
  CHECK(cmd_run(typo.string(), out, err) == exit_usage);
}

TEST_CASE("cmd_dispersion") {
  std::ostringstream out, err;
  CHECK(cmd_dispersion(1, 1, 3, out, err) == exit_ok);
  const auto l = lines(out.str());
  REQUIRE(l.size() == 4);
  CHECK(l[0] == "k,sigma");
  CHECK(std::stod(l[1].substr(2)) == doctest::Approx(-std::tanh(2.0)).epsilon(1e-15));
  CHECK(cmd_dispersion(1, 1, 0, out, err) == exit_usage);
  CHECK(cmd_dispersion(-1, 1, 3, out, err) == exit_usage);
}

TEST_CASE("cmd_check") {
  TempDir tmp;
  std::ostringstream out, err;
  const auto good = tmp.write("good.json", R"({"n1": 32, "n2_plus": 17, "n2_minus": 17, "beta_minus": 0.5,
      "f": [{"k": 1, "cos": 0.1}]})");
  CHECK(cmd_check(good.string(), out, err) == exit_ok);
  CHECK(out.str().find("FAIL") == std::string::npos);

  std::ostringstream out2;
  const auto unstable = tmp.write("unstable.json", R"({"n1": 32, "n2_plus": 17, "n2_minus": 17, "dt_safety": 4})");
  CHECK(cmd_check(unstable.string(), out2, err) == exit_check_failed);
  CHECK(out2.str().find("FAIL temporal_stability") != std::string::npos);

  const auto bad = tmp.write("bad.json", R"({"beta_plus": -1})");
  CHECK(cmd_check(bad.string(), out, err) == exit_usage);
}

TEST_CASE("cmd_convergence") {
  TempDir tmp;
  std::ostringstream out, err;
  const auto rest = tmp.write("rest.json", R"({"n1": 16, "n2_plus": 5, "n2_minus": 5, "t_end": 0.1})");
  CHECK(cmd_convergence(rest.string(), out, err) == exit_ok);
  CHECK(out.str().find("order exact") != std::string::npos);

  std::ostringstream out2;
  const auto rough = tmp.write("rough.json", R"({"n1": 16, "n2_plus": 5, "n2_minus": 5, "t_end": 0.05,
      "h0": [{"k": 7, "cos": 0.001}]})");
  CHECK(cmd_convergence(rough.string(), out2, err) == exit_ok);
  CHECK(out2.str().find("warning") != std::string::npos);
}

}
