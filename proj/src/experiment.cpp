#include "oscerr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/quadrature/gauss.hpp>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "oscerr/errors.hpp"
#include "oscerr/plot.hpp"

namespace oscerr {

namespace {

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ArgumentError("cannot parse " + what + " from '" + text + "'");
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Problem specs

ProblemSpec ProblemSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  ProblemSpec spec;
  if (head == "emden") {
    spec.kind = Kind::emden;
  } else if (head == "airy") {
    spec.kind = Kind::airy;
  } else {
    throw ArgumentError("unknown problem '" + text + "' (expected emden:n=..,nu=.. or airy)");
  }
  int n = 3;
  double nu = 1.0;
  if (colon != std::string::npos) {
    std::stringstream rest(text.substr(colon + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ArgumentError("expected key=value in problem spec, got '" + item + "'");
      const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
      if (key == "n" && spec.kind == Kind::emden) {
        const double v = parse_double(value, "n");
        if (v != std::floor(v)) throw ArgumentError("n must be an integer");
        n = static_cast<int>(v);
      } else if (key == "nu" && spec.kind == Kind::emden) {
        nu = parse_double(value, "nu");
      } else if (key == "y0") {
        spec.y0 = parse_double(value, "y0");
      } else if (key == "yp0") {
        spec.y0p = parse_double(value, "yp0");
      } else {
        throw ArgumentError("unknown problem parameter '" + key + "'");
      }
    }
  }
  if (spec.kind == Kind::emden) spec.emden = EmdenFowlerProblem(n, nu, spec.y0, spec.y0p);
  return spec;
}

std::string ProblemSpec::to_string() const {
  std::string out;
  if (kind == Kind::emden) {
    out = "emden:n=" + std::to_string(emden.n) + ",nu=" + format_double(emden.nu);
  } else {
    out = "airy";
  }
  if (y0 != 1.0 || y0p != 0.0)
    out += std::string(kind == Kind::airy ? ":" : ",") + "y0=" + format_double(y0) + ",yp0=" + format_double(y0p);
  return out;
}

OdeSystem ProblemSpec::system() const {
  if (kind == Kind::emden) return ef_system(emden);
  return linear_system(airy_problem(y0, y0p));
}

std::vector<double> ProblemSpec::initial_state() const { return {y0, y0p, 0.0}; }

std::size_t stride_for_spacing(double h, double spacing) {
  if (!(h > 0)) throw ArgumentError("step size must be positive");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(spacing / h)));
}

// ---------------------------------------------------------------------------
// Config and report

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ArgumentError("config must be a JSON object");
  ExperimentConfig c;
  try {
    for (auto& [key, value] : j.items()) {
      if (key == "problem") {
        c.problem = value.get<std::string>();
      } else if (key == "methods") {
        c.methods = value.get<std::vector<std::string>>();
      } else if (key == "step_sizes") {
        c.step_sizes.clear();
        for (auto& v : value)
          c.step_sizes.push_back(v.is_string() ? to_double(parse_rational(v.get<std::string>())) : v.get<double>());
      } else if (key == "t_end") {
        c.t_end = value.get<double>();
      } else if (key == "stride") {
        c.stride = value.get<std::size_t>();
      } else if (key == "reference") {
        if (value.contains("method")) c.reference.method = value["method"].get<std::string>();
        if (value.contains("h")) c.reference.h = value["h"].get<double>();
      } else if (key == "output_dir") {
        c.output_dir = value.get<std::string>();
      } else if (key == "plot") {
        c.plot = value.get<bool>();
      } else if (key == "workers") {
        c.workers = value.get<unsigned>();
      } else if (key == "fit_window") {
        auto w = value.get<std::vector<double>>();
        if (w.size() != 2) throw ArgumentError("fit_window needs two numbers");
        c.fit_from = w[0];
        c.fit_to = w[1];
      } else {
        throw ArgumentError("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("bad config value: ") + e.what());
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ArgumentError("cannot read config file " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["problem"] = problem;
  j["methods"] = methods;
  j["step_sizes"] = step_sizes;
  j["t_end"] = t_end;
  j["stride"] = stride;
  j["reference"] = {{"method", reference.method}, {"h", reference.h}};
  j["output_dir"] = output_dir.string();
  j["plot"] = plot;
  j["workers"] = workers;
  j["fit_window"] = {fit_from, fit_to};
  return j.dump(2);
}

bool ExperimentReport::all_ok() const {
  return std::all_of(cells.begin(), cells.end(), [](const CellResult& c) { return c.ok(); });
}

std::string ExperimentReport::to_json() const {
  nlohmann::json j;
  j["problem"] = problem;
  if (action_angle) j["action_angle"] = {{"c1", action_angle->c1}, {"c2", action_angle->c2}};
  if (lg_s0) j["lg_s0"] = {(*lg_s0)[0], (*lg_s0)[1]};
  j["cells"] = nlohmann::json::array();
  for (const auto& c : cells) {
    nlohmann::json cell;
    cell["method"] = c.method;
    cell["h"] = c.h;
    cell["ok"] = c.ok();
    if (!c.ok()) cell["failure"] = c.failure;
    cell["error_csv"] = c.error_csv.string();
    cell["estimate_csv"] = c.estimate_csv.string();
    if (!c.plot.empty()) cell["plot"] = c.plot.string();
    if (!c.envelope_plot.empty()) cell["envelope_plot"] = c.envelope_plot.string();
    if (c.fit)
      cell["envelope_fit"] = {{"amplitude", c.fit->amplitude},
                              {"exponent", c.fit->exponent},
                              {"peaks", c.fit->peaks},
                              {"window", {c.fit_from, c.fit_to}}};
    cell["breakdown_time"] = c.breakdown_time ? nlohmann::json(*c.breakdown_time) : nlohmann::json(nullptr);
    cell["guard_time"] = c.guard_time ? nlohmann::json(*c.guard_time) : nlohmann::json(nullptr);
    j["cells"].push_back(cell);
  }
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// CSV

void write_csv(const std::filesystem::path& file, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) throw ArgumentError("CSV header and columns differ in count");
  std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (auto& c : columns)
    if (c.size() != rows) throw ArgumentError("CSV columns differ in length");
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw ArgumentError("cannot write " + file.string());
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  std::string line;
  for (std::size_t r = 0; r < rows; ++r) {
    line.clear();
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i) line += ',';
      line += format_double(columns[i][r]);
    }
    line += '\n';
    out << line;
  }
}

const std::vector<double>& CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return columns[i];
  throw ArgumentError("CSV has no column '" + name + "'");
}

CsvTable read_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ArgumentError("cannot read " + file.string());
  CsvTable table;
  std::string line, cell;
  if (!std::getline(in, line)) throw ArgumentError(file.string() + " is empty");
  {
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) table.header.push_back(cell);
  }
  table.columns.resize(table.header.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::size_t i = 0;
    while (std::getline(ss, cell, ',')) {
      if (i >= table.columns.size()) throw ArgumentError("ragged row in " + file.string());
      double v = std::numeric_limits<double>::quiet_NaN();
      if (cell != "nan" && cell != "-nan") v = parse_double(cell, "CSV value");
      table.columns[i++].push_back(v);
    }
    if (i != table.columns.size()) throw ArgumentError("ragged row in " + file.string());
  }
  return table;
}

// ---------------------------------------------------------------------------
// Estimates

EstimateContext prepare_estimate(const ProblemSpec& problem, double t_end, const ReferenceSpec& reference) {
  EstimateContext ctx;
  ctx.problem = problem;
  const auto method = find_method(reference.method);
  const auto y0 = problem.initial_state();
  const std::size_t stride = stride_for_spacing(reference.h, 0.01);
  if (problem.kind == ProblemSpec::Kind::emden) {
    const Trajectory traj = integrate(method, problem.system(), y0, 0.0, reference.h, t_end, stride);
    ReferenceOscillation ref = wn_build(problem.emden.n);
    const ActionAngle aa = fit_action_angle(problem.emden, traj, ref);
    ref.c1 = aa.c1;
    ref.c2 = aa.c2;
    ctx.oscillation = ref;
  } else {
    LinearOscillatorProblem lin = airy_problem(problem.y0, problem.y0p);
    const Trajectory traj = integrate(method, linear_system(lin), y0, 0.0, reference.h, t_end, stride);
    lin.s0 = fit_liouville_green(lin, traj, std::max(lin.t_min, 0.5 * t_end));
    ctx.linear = lin;
  }
  return ctx;
}

namespace {

bool has_closed_form(const ProblemSpec& p, const std::string& method) {
  return p.kind == ProblemSpec::Kind::emden && p.emden.n == 3 && p.emden.nu == 1.0 &&
         (method == "runge2" || method == "heun3" || method == "tuned3");
}

}  // namespace

EstimateTable tabulate_estimate(const EstimateContext& ctx, const ButcherTableau& method, double h,
                                double t_end, std::size_t stride) {
  const long long steps = step_count(0.0, h, t_end);
  const auto st = static_cast<long long>(stride);
  const std::size_t samples = static_cast<std::size_t>(steps / st) + 1;
  EstimateTable tab;
  tab.t.resize(samples);
  for (std::size_t k = 0; k < samples; ++k) tab.t[k] = static_cast<double>(k * stride) * h;
  tab.est1.assign(samples, 0.0);
  tab.est2.assign(samples, 0.0);
  tab.est1_leading.assign(samples, 0.0);

  if (ctx.problem.kind == ProblemSpec::Kind::emden && has_closed_form(ctx.problem, method.name())) {
    const ErrorEstimate est = ef_error_estimate(method.name());
    const int lead = est.leading_h_power();
    const auto& ref = *ctx.oscillation;
    tab.envelope1.resize(samples);
    tab.envelope1_leading.resize(samples);
    for (std::size_t k = 0; k < samples; ++k) {
      const Vec2 full = est.evaluate(ref, h, tab.t[k]);
      tab.est1[k] = full[0];
      tab.est2[k] = full[1];
      tab.est1_leading[k] = est.evaluate(ref, h, tab.t[k], lead)[0];
      tab.envelope1[k] = est.envelope(ref, h, tab.t[k])[0];
      tab.envelope1_leading[k] = est.envelope(ref, h, tab.t[k], lead)[0];
    }
    return tab;
  }

  const CoefficientMap a = rk_bseries(method, 2 * 4 + 1);
  int p = 0;
  try {
    p = method_order(a);
  } catch (const CoverageError&) {
    throw ArgumentError("method " + method.name() + " has order above the supported range");
  }

  if (ctx.problem.kind == ProblemSpec::Kind::emden) {
    const int max_order = 2 * p;
    const CoefficientMap b = modified_equation_coeffs(rk_bseries(method, max_order), max_order);
    std::vector<RootedTree> trees;
    for (std::size_t i = 0; i < b.trees().size(); ++i)
      if (b.trees()[i].order() >= 2 && b.value(i) != 0) trees.push_back(b.trees()[i]);
    const auto run = elementary_integrals(ef_oscillator(ctx.problem.emden), trees, ctx.problem.initial_state(),
                                          0.0, t_end, h, stride);
    for (std::size_t k = 0; k < samples && k < run.solution.size(); ++k) {
      const auto terms = error_series_terms(b, run, h, k, max_order);
      for (const auto& term : terms) {
        tab.est1[k] += term[0];
        tab.est2[k] += term[1];
      }
      tab.est1_leading[k] = terms[static_cast<std::size_t>(p - 1)][0];
    }
    return tab;
  }

  // Airy: accumulate ∫ g^q interval by interval.
  const auto& lin = *ctx.linear;
  const CoefficientMap b = modified_equation_coeffs(rk_bseries(method, 2 * p), 2 * p);
  const auto terms = linosc_terms(b, p, h);
  std::vector<double> integral(terms.size(), 0.0);
  const double s0_norm = std::hypot(lin.s0[0], lin.s0[1]);
  tab.envelope1.assign(samples, std::numeric_limits<double>::quiet_NaN());
  tab.envelope1_leading.assign(samples, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k < samples; ++k) {
    if (k > 0) {
      for (std::size_t i = 0; i < terms.size(); ++i) {
        const double q = terms[i].g_power;
        auto f = [&](double s) { return std::pow(std::max(lin.g(s, 0), 0.0), q); };
        integral[i] += boost::math::quadrature::gauss<double, 15>::integrate(f, tab.t[k - 1], tab.t[k]);
      }
    }
    const double t = tab.t[k];
    if (t < lin.t_min) {
      tab.est1[k] = tab.est2[k] = tab.est1_leading[k] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    Vec2 amp{0.0, 0.0}, lead{0.0, 0.0};
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const double v = terms[i].weight * integral[i];
      amp[terms[i].rotated ? 0 : 1] += v;
      if (terms[i].h_power == p) lead[terms[i].rotated ? 0 : 1] += v;
    }
    const LiouvilleGreen lg = liouville_green(lin, t);
    tab.est1[k] = amp[0] * lg.yR[0] + amp[1] * lg.y[0];
    tab.est2[k] = amp[0] * lg.yR[1] + amp[1] * lg.y[1];
    tab.est1_leading[k] = lead[0] * lg.yR[0] + lead[1] * lg.y[0];
    const double scale = std::pow(lin.g(t, 0), -0.25) * s0_norm;
    tab.envelope1[k] = scale * std::hypot(amp[0], amp[1]);
    tab.envelope1_leading[k] = scale * std::hypot(lead[0], lead[1]);
  }
  return tab;
}

std::optional<double> detect_breakdown(const std::vector<Peak>& measured,
                                       const std::vector<double>& estimated_envelope, double tolerance,
                                       double t_from, std::size_t half_window) {
  if (measured.size() != estimated_envelope.size())
    throw ArgumentError("breakdown detection needs one envelope value per peak");
  std::vector<double> deviation(measured.size());
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const double e = estimated_envelope[i];
    deviation[i] = e > 0 ? std::abs(measured[i].value / e - 1.0) : std::numeric_limits<double>::infinity();
  }
  std::vector<double> window;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    if (measured[i].t < t_from) continue;
    const std::size_t lo = i >= half_window ? i - half_window : 0;
    const std::size_t hi = std::min(measured.size(), i + half_window + 1);
    window.assign(deviation.begin() + static_cast<std::ptrdiff_t>(lo), deviation.begin() + static_cast<std::ptrdiff_t>(hi));
    auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
    std::nth_element(window.begin(), mid, window.end());
    if (*mid > tolerance) return measured[i].t;
  }
  return std::nullopt;
}

std::optional<double> guard_time(const std::vector<Peak>& measured, const std::vector<double>& solution_amplitude) {
  if (measured.size() != solution_amplitude.size())
    throw ArgumentError("guard detection needs one amplitude value per peak");
  for (std::size_t i = 0; i < measured.size(); ++i)
    if (measured[i].value >= 0.5 * solution_amplitude[i]) return measured[i].t;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Experiment

namespace {

std::string cell_stem(const std::string& method, double h) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_h%.6g", method.c_str(), h);
  return buf;
}

std::vector<double> solution_amplitude_at(const EstimateContext& ctx, const std::vector<double>& times) {
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    if (ctx.oscillation) {
      out.push_back(t > 0 ? ef_amplitude(ctx.problem.emden, *ctx.oscillation, t)
                          : std::numeric_limits<double>::infinity());
    } else {
      const auto& lin = *ctx.linear;
      out.push_back(t >= lin.t_min ? std::pow(lin.g(t, 0), -0.25) * std::hypot(lin.s0[0], lin.s0[1])
                                   : std::numeric_limits<double>::infinity());
    }
  }
  return out;
}

CellResult run_cell(const ExperimentConfig& config, const EstimateContext& ctx, const std::string& method_name,
                    double h) {
  CellResult cell;
  cell.method = method_name;
  cell.h = h;
  const std::string stem = cell_stem(method_name, h);
  cell.error_csv = config.output_dir / (stem + "_error.csv");
  cell.estimate_csv = config.output_dir / (stem + "_estimate.csv");
  try {
    const ButcherTableau method = find_method(method_name);
    const std::size_t stride = config.stride ? config.stride : stride_for_spacing(h, 0.01);
    const OdeSystem ode = ctx.problem.system();
    const ErrorRun run = measure_global_error(method, ode, ctx.problem.initial_state(), 0.0, h, config.t_end,
                                              stride, config.reference);
    if (run.failure_time) cell.failure = run.failure + " at t=" + format_double(*run.failure_time);

    const auto times = run.errors.times();
    const auto e1 = run.errors.component(0), e2 = run.errors.component(1);
    write_csv(cell.error_csv, {"t", "e1", "e2"}, {times, e1, e2});

    const EstimateTable est = tabulate_estimate(ctx, method, h, config.t_end, stride);
    if (est.envelope1.empty()) {
      write_csv(cell.estimate_csv, {"t", "est1", "est2", "est1_leading_only"},
                {est.t, est.est1, est.est2, est.est1_leading});
    } else {
      write_csv(cell.estimate_csv, {"t", "est1", "est2", "est1_leading_only", "env1", "env1_leading_only"},
                {est.t, est.est1, est.est2, est.est1_leading, est.envelope1, est.envelope1_leading});
    }

    cell.fit_from = config.fit_from;
    cell.fit_to = std::min(config.fit_to, config.t_end);
    try {
      cell.fit = envelope_fit(times, e1, cell.fit_from, cell.fit_to);
    } catch (const FitError&) {
      cell.fit.reset();
    }

    const auto peaks = oscillation_peaks(times, e1, 0.0, times.empty() ? 0.0 : times.back());
    if (!est.envelope1.empty() && !peaks.empty()) {
      std::vector<double> env, peak_times;
      const double spacing = run.errors.sample_spacing();
      for (const auto& pk : peaks) {
        const auto k = static_cast<std::size_t>(std::llround(pk.t / spacing));
        env.push_back(k < est.envelope1.size() ? est.envelope1[k] : std::numeric_limits<double>::quiet_NaN());
        peak_times.push_back(pk.t);
      }
      cell.breakdown_time = detect_breakdown(peaks, env);
      cell.guard_time = guard_time(peaks, solution_amplitude_at(ctx, peak_times));
    }

    if (config.plot) {
      cell.plot = config.output_dir / (stem + ".svg");
      PlotStyle style;
      style.title = method_name + ", h = " + format_double(h) + ", first component";
      style.panels = {{0.0, std::min(50.0, config.t_end)}, {0.0, config.t_end}};
      emit_plot({{cell.error_csv, "e1", "measured error", false},
                 {cell.estimate_csv, "est1_leading_only", "leading term", true},
                 {cell.estimate_csv, "est1", "full estimate", false}},
                style, cell.plot);
      if (cell.fit) {
        cell.envelope_plot = config.output_dir / (stem + "_envelope.svg");
        emit_envelope_plot(oscillation_peaks(times, e1, cell.fit_from, cell.fit_to), *cell.fit,
                           method_name + " error envelope", cell.envelope_plot);
      }
    }
  } catch (const std::exception& e) {
    cell.failure = e.what();
  }
  return cell;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
  const ProblemSpec problem = ProblemSpec::parse(config.problem);
  if (!(config.t_end > 0)) throw ArgumentError("t_end must be positive");
  for (const auto& m : config.methods) find_method(m);
  for (double h : config.step_sizes)
    if (!(h > 0)) throw ArgumentError("step sizes must be positive");

  ExperimentReport report;
  report.problem = problem.to_string();
  if (config.methods.empty() || config.step_sizes.empty()) return report;

  std::filesystem::create_directories(config.output_dir);
  const EstimateContext ctx = prepare_estimate(problem, config.t_end, config.reference);
  if (ctx.oscillation) report.action_angle = ActionAngle{ctx.oscillation->c1, ctx.oscillation->c2};
  if (ctx.linear) report.lg_s0 = ctx.linear->s0;

  std::vector<std::pair<std::string, double>> jobs;
  for (const auto& m : config.methods)
    for (double h : config.step_sizes) jobs.emplace_back(m, h);
  report.cells.resize(jobs.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++)
      report.cells[i] = run_cell(config, ctx, jobs[i].first, jobs[i].second);
  };
  const unsigned count = std::max(1u, std::min<unsigned>(config.workers, static_cast<unsigned>(jobs.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < count; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::ofstream(config.output_dir / "report.json") << report.to_json() << '\n';
  return report;
}

}  // namespace oscerr
