#pragma once

// Experiment harness: problem specs, configs, per-(method, h) cells, CSV and
// JSON output.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "oscerr/estimator.hpp"

namespace oscerr {

/// "emden:n=3,nu=1" (optionally y0=..,yp0=..) or "airy".
struct ProblemSpec {
  enum class Kind { emden, airy };
  Kind kind = Kind::emden;
  EmdenFowlerProblem emden{};
  double y0 = 1.0;
  double y0p = 0.0;

  static ProblemSpec parse(const std::string& text);
  std::string to_string() const;

  OdeSystem system() const;
  std::vector<double> initial_state() const;
};

/// Samples a series every `spacing` time units (at least one step).
std::size_t stride_for_spacing(double h, double spacing);

struct ExperimentConfig {
  std::string problem = "emden:n=3,nu=1";
  std::vector<std::string> methods{"runge2", "heun3", "tuned3"};
  std::vector<double> step_sizes{1.0 / 2000};
  double t_end = 2000.0;
  /// Sample spacing in method steps; 0 picks the stride closest to 0.01 time units.
  std::size_t stride = 0;
  ReferenceSpec reference{};
  std::filesystem::path output_dir = "out";
  bool plot = true;
  unsigned workers = 1;
  /// Window for the envelope fit of the first error component.
  double fit_from = 50.0;
  double fit_to = 1000.0;

  /// Reads a JSON object; absent keys keep their defaults. Throws ArgumentError.
  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& file);
  std::string to_json() const;
};

struct CellResult {
  std::string method;
  double h = 0.0;
  std::filesystem::path error_csv;
  std::filesystem::path estimate_csv;
  std::filesystem::path plot;
  std::filesystem::path envelope_plot;
  std::optional<EnvelopeFit> fit;
  double fit_from = 0.0;
  double fit_to = 0.0;
  std::optional<double> breakdown_time;
  std::optional<double> guard_time;
  std::string failure;  // empty on success

  bool ok() const { return failure.empty(); }
};

struct ExperimentReport {
  std::string problem;
  std::optional<ActionAngle> action_angle;  // Emden–Fowler only
  std::optional<Vec2> lg_s0;                // Airy only
  std::vector<CellResult> cells;            // method-major, in config order

  bool all_ok() const;
  std::string to_json() const;
};

/// Everything needed to tabulate an estimate on a method's sample grid.
struct EstimateContext {
  ProblemSpec problem;
  std::optional<ReferenceOscillation> oscillation;   // Emden–Fowler
  std::optional<LinearOscillatorProblem> linear;     // Airy, with fitted s0
};

/// Runs the reference solver over [0, t_end] and fits the asymptotic
/// parameters (c1, c2) or s0.
EstimateContext prepare_estimate(const ProblemSpec& problem, double t_end,
                                 const ReferenceSpec& reference = {});

/// est1, est2 and est1 restricted to the leading power of h, on the grid
/// t = k·h·stride. n = 3, ν = 1 uses the closed forms; other Emden–Fowler
/// problems use the numeric error series, Airy the linear-oscillator sums.
struct EstimateTable {
  std::vector<double> t, est1, est2, est1_leading;
  std::vector<double> envelope1, envelope1_leading;  // empty unless closed form
};

EstimateTable tabulate_estimate(const EstimateContext& context, const ButcherTableau& method, double h,
                                double t_end, std::size_t stride);

/// First peak time t >= t_from at which the running median (over 2·half_window+1
/// peaks) of |measured/estimated - 1| exceeds `tolerance`.
std::optional<double> detect_breakdown(const std::vector<Peak>& measured,
                                       const std::vector<double>& estimated_envelope,
                                       double tolerance = 0.1, double t_from = 50.0,
                                       std::size_t half_window = 5);

/// First peak time at which the measured error reaches half of the local
/// solution amplitude; comparisons beyond it are not meaningful.
std::optional<double> guard_time(const std::vector<Peak>& measured,
                                 const std::vector<double>& solution_amplitude);

/// Writes a header row and rows with 17 significant digits.
void write_csv(const std::filesystem::path& file, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  const std::vector<double>& column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& file);

ExperimentReport run_experiment(const ExperimentConfig& config);

}  // namespace oscerr
