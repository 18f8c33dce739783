#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "oscerr/errors.hpp"
#include "oscerr/experiment.hpp"
#include "oscerr/plot.hpp"

using namespace oscerr;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("oscerr_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string& args, const fs::path& dir) {
  const std::string cmd = std::string(OSCERR_CLI) + " " + args + " > " + (dir / "stdout.txt").string() + " 2> " +
                          (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ExperimentConfig small_config(const fs::path& dir) {
  ExperimentConfig c;
  c.methods = {"runge2"};
  c.step_sizes = {0.01};
  c.t_end = 60.0;
  c.fit_from = 20.0;
  c.fit_to = 60.0;
  c.output_dir = dir;
  return c;
}

}  // namespace

TEST_CASE("problem specs") {
  const auto def = ProblemSpec::parse("emden:n=3,nu=1");
  CHECK(def.kind == ProblemSpec::Kind::emden);
  CHECK(def.emden.n == 3);
  CHECK(def.emden.nu == 1.0);
  CHECK(def.to_string() == "emden:n=3,nu=1");
  CHECK(ProblemSpec::parse("emden").to_string() == "emden:n=3,nu=1");

  const auto custom = ProblemSpec::parse("emden:n=5,nu=0.5,y0=2,yp0=-1");
  CHECK(custom.emden.n == 5);
  CHECK(custom.initial_state() == std::vector<double>{2.0, -1.0, 0.0});
  CHECK(ProblemSpec::parse(custom.to_string()).to_string() == custom.to_string());

  const auto airy = ProblemSpec::parse("airy");
  CHECK(airy.kind == ProblemSpec::Kind::airy);
  CHECK(airy.to_string() == "airy");
  CHECK(ProblemSpec::parse("airy:y0=0,yp0=1").to_string() == "airy:y0=0,yp0=1");
  std::vector<double> out(3);
  airy.system().rhs(std::vector<double>{2.0, 0.5, 3.0}, out);
  CHECK(out == std::vector<double>{0.5, -6.0, 1.0});

  for (const char* bad : {"duffing", "emden:n=4", "emden:n=2.5", "emden:k=1", "emden:n", "airy:nu=1", "emden:nu=-4"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(ProblemSpec::parse(bad), ArgumentError);
  }
  CHECK(stride_for_spacing(1e-3, 0.01) == 10);
  CHECK(stride_for_spacing(1.0 / 2000, 0.01) == 20);
  CHECK(stride_for_spacing(0.1, 0.01) == 1);
}

TEST_CASE("config JSON") {
  const auto c = ExperimentConfig::from_json(
      R"({"problem": "airy", "methods": ["heun3"], "step_sizes": [0.001, "1/2000"], "t_end": 100,
          "reference": {"method": "rk4", "h": 5e-5}, "plot": false, "workers": 2, "fit_window": [20, 200]})");
  CHECK(c.problem == "airy");
  CHECK(c.methods == std::vector<std::string>{"heun3"});
  CHECK(c.step_sizes == std::vector<double>{0.001, 1.0 / 2000});
  CHECK(c.reference.h == 5e-5);
  CHECK(!c.plot);
  CHECK(c.workers == 2);
  CHECK(c.fit_from == 20.0);
  CHECK(c.fit_to == 200.0);

  const auto again = ExperimentConfig::from_json(c.to_json());
  CHECK(again.to_json() == c.to_json());

  const auto defaults = ExperimentConfig::from_json("{}");
  CHECK(defaults.problem == "emden:n=3,nu=1");
  CHECK(defaults.methods.size() == 3);
  CHECK(defaults.step_sizes == std::vector<double>{1.0 / 2000});
  CHECK(defaults.t_end == 2000.0);

  for (const char* bad : {"[1]", "{", R"({"colour": 1})", R"({"t_end": "long"})", R"({"fit_window": [1]})",
                          R"({"step_sizes": ["x"]})"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ArgumentError);
  }
}

TEST_CASE("CSV round trip") {
  const auto dir = scratch("csv");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  write_csv(dir / "a.csv", {"t", "x"}, {{0.0, 0.1}, {1.0 / 3, nan}});
  write_csv(dir / "b.csv", {"t", "x"}, {{0.0, 0.1}, {1.0 / 3, nan}});
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  const auto table = read_csv(dir / "a.csv");
  CHECK(table.header == std::vector<std::string>{"t", "x"});
  CHECK(table.column("x")[0] == 1.0 / 3);
  CHECK(std::isnan(table.column("x")[1]));
  CHECK_THROWS_AS(table.column("y"), ArgumentError);
  CHECK_THROWS_AS(write_csv(dir / "c.csv", {"t"}, {{0.0}, {1.0}}), ArgumentError);
  CHECK_THROWS_AS(read_csv(dir / "missing.csv"), ArgumentError);
}

TEST_CASE("breakdown and guard detection") {
  std::vector<Peak> peaks;
  std::vector<double> env, amp;
  for (int i = 0; i < 100; ++i) {
    const double t = 10.0 * (i + 1);
    peaks.push_back({t, t < 600 ? 1.0 : 1.5});
    env.push_back(i == 20 ? 10.0 : 1.0);  // one outlier must not trigger
    amp.push_back(t < 800 ? 10.0 : 2.0);
  }
  const auto b = detect_breakdown(peaks, env);
  REQUIRE(b);
  CHECK(*b == doctest::Approx(600.0));  // the centred median flips exactly at the step
  CHECK(!detect_breakdown(std::vector<Peak>(peaks.begin(), peaks.begin() + 50), std::vector<double>(50, 1.0)));
  CHECK(*guard_time(peaks, amp) == doctest::Approx(800.0));
  CHECK_THROWS_AS(detect_breakdown(peaks, {1.0}), ArgumentError);
}

TEST_CASE("small experiment end to end") {
  const auto dir = scratch("run1");
  const auto report = run_experiment(small_config(dir));
  REQUIRE(report.cells.size() == 1);
  const auto& cell = report.cells[0];
  CHECK(cell.ok());
  CHECK(report.action_angle);
  CHECK(fs::exists(cell.error_csv));
  CHECK(fs::exists(cell.estimate_csv));
  CHECK(slurp(cell.plot).rfind("<svg", 0) == 0);
  REQUIRE(cell.fit);
  CHECK(cell.fit->exponent > 1.0);
  CHECK(fs::exists(cell.envelope_plot));

  const auto err = read_csv(cell.error_csv);
  const auto est = read_csv(cell.estimate_csv);
  CHECK(err.header == std::vector<std::string>{"t", "e1", "e2"});
  CHECK(est.header ==
        std::vector<std::string>{"t", "est1", "est2", "est1_leading_only", "env1", "env1_leading_only"});
  CHECK(err.column("t") == est.column("t"));
  CHECK(err.column("t").size() == 6001);

  const auto json = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(json["problem"] == "emden:n=3,nu=1");
  CHECK(json["cells"].size() == 1);

  // Same inputs, same bytes; the worker count does not matter.
  auto config = small_config(scratch("run2"));
  config.workers = 2;
  config.plot = false;
  const auto second = run_experiment(config);
  CHECK(slurp(second.cells[0].error_csv) == slurp(cell.error_csv));
  CHECK(slurp(second.cells[0].estimate_csv) == slurp(cell.estimate_csv));
}

TEST_CASE("experiment edge cases") {
  auto config = small_config(scratch("edge"));
  config.methods.clear();
  const auto empty = run_experiment(config);
  CHECK(empty.cells.empty());
  CHECK(empty.all_ok());

  config.methods = {"rk7"};
  CHECK_THROWS_AS(run_experiment(config), ArgumentError);
  config.methods = {"runge2"};
  config.step_sizes = {-1.0};
  CHECK_THROWS_AS(run_experiment(config), ArgumentError);

  // A diverging method is reported per cell, not thrown.
  config.step_sizes = {0.5};
  config.t_end = 400.0;
  config.plot = false;
  const auto diverged = run_experiment(config);
  REQUIRE(diverged.cells.size() == 1);
  CHECK(!diverged.cells[0].ok());
  CHECK(!diverged.all_ok());
}

TEST_CASE("Airy experiment uses the linear-oscillator estimate") {
  auto config = small_config(scratch("airy"));
  config.problem = "airy";
  config.t_end = 40.0;
  config.fit_from = 10.0;
  config.fit_to = 40.0;
  config.plot = false;
  const auto report = run_experiment(config);
  REQUIRE(report.cells.size() == 1);
  CHECK(report.cells[0].ok());
  CHECK(report.lg_s0);
  const auto est = read_csv(report.cells[0].estimate_csv);
  CHECK(std::isnan(est.column("est1")[0]));
  CHECK(std::isfinite(est.column("est1").back()));
}

TEST_CASE("plots") {
  const auto dir = scratch("plot");
  write_csv(dir / "a.csv", {"t", "v"}, {{0.0, 1.0, 2.0}, {0.0, 1.0, 0.0}});
  write_csv(dir / "b.csv", {"t", "v"}, {{0.0, 0.5, 1.0, 1.5, 2.0}, {1.0, 1.0, 1.0, 1.0, 1.0}});
  const auto same = emit_plot({{dir / "a.csv", "v", "a"}}, {"title <a&b>"}, dir / "one.svg");
  CHECK(same.empty());
  CHECK(slurp(dir / "one.svg").find("title &lt;a&amp;b&gt;") != std::string::npos);
  const auto warnings = emit_plot({{dir / "a.csv", "v", "a"}, {dir / "b.csv", "v", "b", true}}, {}, dir / "two.svg");
  CHECK(warnings.size() == 1);
  CHECK_THROWS_AS(emit_plot({}, {}, dir / "none.svg"), ArgumentError);
}

TEST_CASE("command-line exit codes") {
  const auto dir = scratch("cli");
  CHECK(cli("--help", dir) == 0);
  CHECK(cli("trees --max-order 4", dir) == 0);
  CHECK(slurp(dir / "stdout.txt").find("[[[[]]]]") != std::string::npos);
  CHECK(cli("coeffs --method runge2 --max-order 3 --modified", dir) == 0);
  CHECK(slurp(dir / "stdout.txt").find("-1/4") != std::string::npos);
  CHECK(cli("design-tuned --c2 1", dir) == 0);
  CHECK(slurp(dir / "stdout.txt").find("9/4") != std::string::npos);
  CHECK(cli("design-tuned --c2 2/3", dir) == 1);
  CHECK(cli("coeffs --method rk9", dir) == 1);
  CHECK(cli("trees --max-order 12", dir) == 1);
  CHECK(cli("no-such-command", dir) == 1);
  CHECK(cli("integrate --method rk4 --problem emden --h 1e-2 --t-end 1 --output " + (dir / "y.csv").string(), dir) == 0);
  CHECK(read_csv(dir / "y.csv").column("t").size() == 101);
  CHECK(cli("integrate --method rk4 --problem emden --h 0 --t-end 1 --output " + (dir / "y.csv").string(), dir) == 1);
  CHECK(cli("--output-dir " + (dir / "exp").string() + " experiment --methods runge2 --h 0.5 --t-end 400 --no-plot",
            dir) == 2);
  CHECK(cli("--output-dir " + (dir / "exp").string() + " experiment --methods none", dir) == 1);
}
