// Command-line front end: tree tables, B-series coefficients, integration,
// elementary integrals, estimates and the full experiment harness.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oscerr/bseries.hpp"
#include "oscerr/errors.hpp"
#include "oscerr/estimator.hpp"
#include "oscerr/experiment.hpp"
#include "oscerr/oscillators.hpp"
#include "oscerr/tableau.hpp"
#include "oscerr/trees.hpp"

namespace fs = std::filesystem;
using namespace oscerr;

namespace {

constexpr int kArgumentError = 1;
constexpr int kRunFailure = 2;

double parse_number(const std::string& text) {
  try {
    return to_double(parse_rational(text));
  } catch (const std::exception&) {
    throw ArgumentError("cannot parse number '" + text + "'");
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(item));
  return out;
}

struct Globals {
  std::string output_dir;
  unsigned workers = 0;
  std::string config;
};

fs::path resolve(const Globals& g, const std::string& file) {
  fs::path p(file);
  if (p.is_absolute() || g.output_dir.empty()) return p;
  fs::create_directories(g.output_dir);
  return fs::path(g.output_dir) / p;
}

std::vector<double> problem_initial_state(const ProblemSpec& problem, const std::string& y0_text) {
  auto y = problem.initial_state();
  if (!y0_text.empty()) {
    const auto v = parse_list(y0_text);
    if (v.size() != 2) throw ArgumentError("--y0 expects two values y(0),y'(0)");
    y[0] = v[0];
    y[1] = v[1];
  }
  return y;
}

ProblemSpec problem_with_state(const std::string& spec, const std::string& y0_text) {
  ProblemSpec p = ProblemSpec::parse(spec);
  if (y0_text.empty()) return p;
  const auto y = problem_initial_state(p, y0_text);
  std::string text = spec + (spec.find(':') == std::string::npos ? ":" : ",");
  char buf[128];
  std::snprintf(buf, sizeof buf, "y0=%.17g,yp0=%.17g", y[0], y[1]);
  return ProblemSpec::parse(text + buf);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"A priori global-error estimates for explicit Runge-Kutta methods on oscillators"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print this help message and exit");  // -h would clash with --h
  Globals g;
  app.add_option("--output-dir", g.output_dir, "Directory for output files");
  app.add_option("--workers", g.workers, "Concurrent experiment cells");
  app.add_option("--config", g.config, "JSON experiment config file");

  // trees
  int tree_order = 4;
  auto* trees_cmd = app.add_subcommand("trees", "List rooted trees with their statistics");
  trees_cmd->add_option("--max-order", tree_order, "Largest order")->check(CLI::Range(1, 10));

  // coeffs
  std::string method = "runge2";
  int coeff_order = 4;
  bool modified = false;
  auto* coeffs_cmd = app.add_subcommand("coeffs", "B-series coefficients of a method");
  coeffs_cmd->add_option("--method", method, "runge2, heun3, tuned3 or rk4");
  coeffs_cmd->add_option("--max-order", coeff_order)->check(CLI::Range(1, 10));
  coeffs_cmd->add_flag("--modified", modified, "Also print modified-equation coefficients b");

  // shared run options
  std::string problem_text = "emden:n=3,nu=1", y0_text, output, h_text = "1/1000";
  double t_end = 100.0;
  std::size_t stride = 0;

  auto* integrate_cmd = app.add_subcommand("integrate", "Fixed-step integration to CSV (t,y1,y2)");
  integrate_cmd->add_option("--method", method);
  integrate_cmd->add_option("--problem", problem_text);
  integrate_cmd->add_option("--y0", y0_text, "Initial values y,y'");
  integrate_cmd->add_option("--h", h_text, "Step size (decimal or p/q)");
  integrate_cmd->add_option("--t-end", t_end);
  integrate_cmd->add_option("--stride", stride, "Record every stride steps (0: about every 0.01)");
  integrate_cmd->add_option("--output", output)->required();

  std::string tree_text;
  bool neglect_time = false;
  auto* elint_cmd = app.add_subcommand("elint", "Elementary integral samples (t,I1,I2,I3)");
  elint_cmd->add_option("--tree", tree_text, "Bracket encoding, e.g. [[][]]")->required();
  elint_cmd->add_option("--problem", problem_text);
  elint_cmd->add_option("--y0", y0_text);
  elint_cmd->add_option("--h", h_text, "Integration step");
  elint_cmd->add_option("--t-end", t_end);
  elint_cmd->add_option("--stride", stride);
  elint_cmd->add_flag("--neglect-time-derivatives", neglect_time,
                      "Drop derivatives with respect to the time component");
  elint_cmd->add_option("--output", output)->required();

  double ref_h = 1e-4;
  std::string ref_method = "rk4";
  auto* estimate_cmd = app.add_subcommand("estimate", "Global-error estimate (t,est1,est2,est1_leading_only)");
  estimate_cmd->add_option("--method", method);
  estimate_cmd->add_option("--problem", problem_text);
  estimate_cmd->add_option("--y0", y0_text);
  estimate_cmd->add_option("--h", h_text);
  estimate_cmd->add_option("--t-end", t_end);
  estimate_cmd->add_option("--stride", stride);
  estimate_cmd->add_option("--reference-h", ref_h, "Step of the run used to fit the asymptotic parameters");
  estimate_cmd->add_option("--output", output)->required();

  // experiment
  std::string exp_problem, exp_methods, exp_steps, exp_ref_method, fit_window;
  double exp_t_end = 0, exp_ref_h = 0;
  std::size_t exp_stride = 0;
  bool no_plot = false;
  auto* experiment_cmd = app.add_subcommand("experiment", "Measured vs estimated errors for several methods");
  experiment_cmd->add_option("--problem", exp_problem);
  experiment_cmd->add_option("--methods", exp_methods, "Comma-separated method names");
  experiment_cmd->add_option("--h", exp_steps, "Comma-separated step sizes");
  experiment_cmd->add_option("--t-end", exp_t_end);
  experiment_cmd->add_option("--stride", exp_stride);
  experiment_cmd->add_option("--reference-method", exp_ref_method);
  experiment_cmd->add_option("--reference-h", exp_ref_h);
  experiment_cmd->add_option("--fit-window", fit_window, "from,to");
  experiment_cmd->add_flag("--no-plot", no_plot);

  std::string c2_text = "1";
  auto* design_cmd = app.add_subcommand("design-tuned", "Three-stage third-order method without the h^3 term");
  design_cmd->add_option("--c2", c2_text, "Second abscissa (rational)");

  std::string kind = "emden";
  int ef_n = 3;
  double ef_nu = 1.0;
  bool fit = false;
  double fit_t_end = 200.0;
  auto* problem_cmd = app.add_subcommand("problem", "Problem constants and fitted asymptotic parameters");
  problem_cmd->add_option("kind", kind, "emden or airy");
  problem_cmd->add_option("--n", ef_n);
  problem_cmd->add_option("--nu", ef_nu);
  problem_cmd->add_option("--y0", y0_text);
  problem_cmd->add_flag("--fit", fit, "Fit (c1, c2) or s0 from an accurate run");
  problem_cmd->add_option("--t-end", fit_t_end, "End of the fitting run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kArgumentError;
  }

  try {
    if (trees_cmd->parsed()) {
      std::cout << "tree\trho\talpha\tsigma\tgamma\td_prime\n";
      for (const auto& t : trees_up_to(tree_order)) {
        const auto& s = t.stats();
        std::cout << t.to_string() << '\t' << s.rho << '\t' << s.alpha << '\t' << s.sigma << '\t' << s.gamma
                  << '\t' << s.d_prime << '\n';
      }
      return 0;
    }

    if (coeffs_cmd->parsed()) {
      const auto tab = find_method(method);
      const auto a = rk_bseries(tab, coeff_order);
      std::optional<CoefficientMap> b;
      if (modified) b = modified_equation_coeffs(a, coeff_order);
      std::cout << "tree\ta" << (b ? "\tb" : "") << '\n';
      for (std::size_t i = 0; i < a.trees().size(); ++i) {
        std::cout << a.trees()[i].to_string() << '\t' << to_string(a.value(i));
        if (b) std::cout << '\t' << to_string(b->value(i));
        std::cout << '\n';
      }
      return 0;
    }

    if (integrate_cmd->parsed()) {
      const ProblemSpec problem = problem_with_state(problem_text, y0_text);
      const double h = parse_number(h_text);
      const auto tab = find_method(method);
      const auto traj = integrate(tab, problem.system(), problem.initial_state(), 0.0, h, t_end,
                                  stride ? stride : stride_for_spacing(h, 0.01));
      write_csv(resolve(g, output), {"t", "y1", "y2"}, {traj.times(), traj.component(0), traj.component(1)});
      return 0;
    }

    if (elint_cmd->parsed()) {
      const ProblemSpec problem = problem_with_state(problem_text, y0_text);
      const double h = parse_number(h_text);
      const RootedTree tree = RootedTree::parse(tree_text);
      const ScalarOscillator osc = problem.kind == ProblemSpec::Kind::emden
                                       ? ef_oscillator(problem.emden)
                                       : linear_oscillator(airy_problem(problem.y0, problem.y0p));
      ElementaryDifferentialPlan plan(osc, {tree}, neglect_time ? TimeDerivatives::neglect : TimeDerivatives::include);
      const DifferentialEvaluator eval = [&plan](std::span<const double> y, std::span<double> out) {
        plan.evaluate(y, out);
      };
      const auto sample = elementary_integral_numeric(osc.system(), tree, eval, problem.initial_state(), 0.0,
                                                      t_end, h, stride ? stride : stride_for_spacing(h, 0.01));
      write_csv(resolve(g, output), {"t", "I1", "I2", "I3"},
                {sample.times, sample.component(0), sample.component(1), sample.component(2)});
      return 0;
    }

    if (estimate_cmd->parsed()) {
      const ProblemSpec problem = problem_with_state(problem_text, y0_text);
      const double h = parse_number(h_text);
      const auto tab = find_method(method);
      const auto ctx = prepare_estimate(problem, t_end, ReferenceSpec{ref_method, ref_h});
      const auto est = tabulate_estimate(ctx, tab, h, t_end, stride ? stride : stride_for_spacing(h, 0.01));
      write_csv(resolve(g, output), {"t", "est1", "est2", "est1_leading_only"},
                {est.t, est.est1, est.est2, est.est1_leading});
      return 0;
    }

    if (experiment_cmd->parsed()) {
      ExperimentConfig config = g.config.empty() ? ExperimentConfig{} : ExperimentConfig::load(g.config);
      if (!exp_problem.empty()) config.problem = exp_problem;
      if (experiment_cmd->count("--methods")) {
        config.methods.clear();
        std::stringstream ss(exp_methods);
        std::string m;
        while (std::getline(ss, m, ','))
          if (!m.empty()) config.methods.push_back(m);
      }
      if (!exp_steps.empty()) config.step_sizes = parse_list(exp_steps);
      if (exp_t_end > 0) config.t_end = exp_t_end;
      if (exp_stride > 0) config.stride = exp_stride;
      if (!exp_ref_method.empty()) config.reference.method = exp_ref_method;
      if (exp_ref_h > 0) config.reference.h = exp_ref_h;
      if (!fit_window.empty()) {
        const auto w = parse_list(fit_window);
        if (w.size() != 2) throw ArgumentError("--fit-window expects from,to");
        config.fit_from = w[0];
        config.fit_to = w[1];
      }
      if (no_plot) config.plot = false;
      if (!g.output_dir.empty()) config.output_dir = g.output_dir;
      if (g.workers > 0) config.workers = g.workers;

      const ExperimentReport report = run_experiment(config);
      for (const auto& c : report.cells) {
        std::cout << c.method << "\th=" << c.h << '\t' << (c.ok() ? "ok" : "FAILED: " + c.failure);
        if (c.fit) std::cout << "\texponent=" << c.fit->exponent;
        if (c.breakdown_time) std::cout << "\tbreakdown_t=" << *c.breakdown_time;
        std::cout << '\n';
      }
      std::cout << "report: " << (config.output_dir / "report.json").string() << '\n';
      return report.all_ok() ? 0 : kRunFailure;
    }

    if (design_cmd->parsed()) {
      const auto tab = design_tuned_3stage(parse_rational(c2_text));
      std::cout << "c\tA\n";
      for (int i = 0; i < tab.stages(); ++i) {
        std::cout << to_string(tab.c()[static_cast<std::size_t>(i)]) << '\t';
        for (int j = 0; j < i; ++j) std::cout << (j ? " " : "") << to_string(tab.a(i, j));
        std::cout << '\n';
      }
      std::cout << "b\t";
      for (std::size_t i = 0; i < tab.b().size(); ++i) std::cout << (i ? " " : "") << to_string(tab.b()[i]);
      std::cout << '\n';
      const auto b = modified_equation_coeffs(rk_bseries(tab, 4), 4);
      std::cout << "order4 combination\t" << to_string(order4_oscillator_combination(b)) << '\n';
      return 0;
    }

    if (problem_cmd->parsed()) {
      if (kind == "emden") {
        const auto y = y0_text.empty() ? std::vector<double>{1.0, 0.0} : parse_list(y0_text);
        if (y.size() != 2) throw ArgumentError("--y0 expects two values");
        const EmdenFowlerProblem problem(ef_n, ef_nu, y[0], y[1]);
        ReferenceOscillation ref = wn_build(ef_n);
        std::printf("gamma\t%.17g\n4K\t%.17g\nchi\t%.17g\nmax_w\t%.17g\n", problem.gamma(), ref.period(),
                    ref.chi(), ref.max_w());
        if (fit) {
          const auto traj = integrate(find_method("rk4"), ef_system(problem), problem.initial_state(), 0.0, 1e-4,
                                      fit_t_end, 100);
          const auto aa = fit_action_angle(problem, traj, ref);
          std::printf("c1\t%.17g\nc2\t%.17g\n", aa.c1, aa.c2);
        }
      } else if (kind == "airy") {
        const auto y = y0_text.empty() ? std::vector<double>{1.0, 0.0} : parse_list(y0_text);
        if (y.size() != 2) throw ArgumentError("--y0 expects two values");
        auto lin = airy_problem(y[0], y[1]);
        if (fit) {
          const auto traj = integrate(find_method("rk4"), linear_system(lin), lin.initial_state(), 0.0, 1e-4,
                                      fit_t_end, 100);
          lin.s0 = fit_liouville_green(lin, traj, 0.5 * fit_t_end);
          std::printf("s0\t%.17g\t%.17g\n", lin.s0[0], lin.s0[1]);
        } else {
          std::printf("g(t)\tt\n");
        }
      } else {
        throw ArgumentError("unknown problem kind '" + kind + "'");
      }
      return 0;
    }
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kArgumentError;
  } catch (const DegenerateParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kArgumentError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRunFailure;
  }
  return 0;
}
