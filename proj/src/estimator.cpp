#include "oscerr/estimator.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <map>

#include "oscerr/errors.hpp"

namespace oscerr {

std::vector<double> ElementaryIntegralSample::component(std::size_t i) const {
  std::vector<double> out(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) out[k] = values[k * dimension + i];
  return out;
}

const ElementaryIntegralSample* ElementaryIntegralRun::find(const RootedTree& tree) const {
  for (const auto& s : integrals)
    if (s.tree == tree) return &s;
  return nullptr;
}

ElementaryIntegralRun elementary_integrals(const OdeSystem& ode, const std::vector<RootedTree>& trees,
                                           const DifferentialEvaluator& differentials,
                                           std::span<const double> y0, double t0, double t_end,
                                           double h_fine, std::size_t stride) {
  if (!ode.jacobian) throw ArgumentError("elementary integrals need the Jacobian of the system");
  if (y0.size() != ode.dimension) throw ArgumentError("initial state has wrong dimension");
  const std::size_t d = ode.dimension;
  const std::size_t m = trees.size();

  OdeSystem augmented;
  augmented.dimension = d * (1 + m);
  std::vector<double> jac(d * d), diffs(d * m);
  augmented.rhs = [&, d, m](std::span<const double> x, std::span<double> out) {
    auto y = x.subspan(0, d);
    ode.rhs(y, out.subspan(0, d));
    ode.jacobian(y, jac);
    differentials(y, diffs);
    for (std::size_t i = 0; i < m; ++i) {
      const double* I = x.data() + d * (1 + i);
      double* dI = out.data() + d * (1 + i);
      for (std::size_t r = 0; r < d; ++r) {
        double acc = diffs[i * d + r];
        for (std::size_t c = 0; c < d; ++c) acc += jac[r * d + c] * I[c];
        dI[r] = acc;
      }
    }
  };

  std::vector<double> x0(augmented.dimension, 0.0);
  std::copy(y0.begin(), y0.end(), x0.begin());
  Trajectory full = integrate(find_method("rk4"), augmented, x0, t0, h_fine, t_end, stride);

  ElementaryIntegralRun run;
  run.solution = Trajectory(t0, h_fine, stride, d);
  run.integrals.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    run.integrals[i].tree = trees[i];
    run.integrals[i].dimension = d;
    run.integrals[i].times = full.times();
    run.integrals[i].values.reserve(full.size() * d);
  }
  for (std::size_t k = 0; k < full.size(); ++k) {
    auto x = full.state(k);
    run.solution.push_back(x.subspan(0, d));
    for (std::size_t i = 0; i < m; ++i) {
      auto I = x.subspan(d * (1 + i), d);
      run.integrals[i].values.insert(run.integrals[i].values.end(), I.begin(), I.end());
    }
  }
  return run;
}

ElementaryIntegralRun elementary_integrals(const ScalarOscillator& oscillator,
                                           const std::vector<RootedTree>& trees,
                                           std::span<const double> y0, double t0, double t_end,
                                           double h_fine, std::size_t stride) {
  ElementaryDifferentialPlan plan(oscillator, trees);
  DifferentialEvaluator eval = [&plan](std::span<const double> y, std::span<double> out) {
    plan.evaluate(y, out);
  };
  return elementary_integrals(oscillator.system(), trees, eval, y0, t0, t_end, h_fine, stride);
}

ElementaryIntegralSample elementary_integral_numeric(const OdeSystem& ode, const RootedTree& tree,
                                                     const DifferentialEvaluator& differential,
                                                     std::span<const double> y0, double t0,
                                                     double t_end, double h_fine, std::size_t stride) {
  auto run = elementary_integrals(ode, {tree}, differential, y0, t0, t_end, h_fine, stride);
  return std::move(run.integrals.front());
}

std::vector<std::vector<double>> error_series_terms(const CoefficientMap& b,
                                                    const ElementaryIntegralRun& run, double h,
                                                    std::size_t sample, int max_tree_order) {
  if (max_tree_order > b.max_order())
    throw CoverageError("error series truncation exceeds the coverage of b");
  const std::size_t d = run.solution.dimension();
  std::vector<std::vector<double>> terms(static_cast<std::size_t>(std::max(0, max_tree_order - 1)),
                                         std::vector<double>(d, 0.0));
  const auto trees = b.trees();
  for (std::size_t i = 0; i < trees.size(); ++i) {
    const RootedTree& tree = trees[i];
    const int rho = tree.order();
    if (rho < 2 || rho > max_tree_order || b.value(i) == 0) continue;
    const auto* sample_set = run.find(tree);
    if (!sample_set) throw CoverageError("missing elementary integral for tree " + tree.to_string());
    if (sample >= sample_set->times.size()) throw CoverageError("sample index beyond integral data");
    const Rational w = b.value(i) * static_cast<long>(tree.stats().alpha) / factorial(rho);
    const double weight = to_double(w) * std::pow(h, rho - 1);
    auto I = sample_set->at(sample);
    auto& term = terms[static_cast<std::size_t>(rho - 2)];
    for (std::size_t r = 0; r < d; ++r) term[r] += weight * I[r];
  }
  return terms;
}

std::vector<double> error_series(const CoefficientMap& b, const ElementaryIntegralRun& run, double h,
                                 std::size_t sample, int max_tree_order) {
  auto terms = error_series_terms(b, run, h, sample, max_tree_order);
  std::vector<double> total(run.solution.dimension(), 0.0);
  for (const auto& t : terms)
    for (std::size_t r = 0; r < total.size(); ++r) total[r] += t[r];
  return total;
}

// ---------------------------------------------------------------------------

int ErrorEstimate::leading_h_power() const {
  int lowest = 1 << 20;
  for (const auto& comp : components)
    for (const auto& term : comp) lowest = std::min(lowest, term.h_power);
  return lowest;
}

namespace {

// The closed forms are written in terms of the Jacobi function sd(.|1/2).
// Since w3(x) = 2^{-1/4} sd(2^{1/4} x), the sd phase is 2^{1/4} times the w3
// phase, sd' = w3', sd^3 = 2^{3/4} w3^3, the sd amplitude parameter is
// 2^{1/4} c1 and the mean of sd^2 is sqrt(2) chi.
const double kSdScale = std::pow(2.0, 0.25);

double shape_value(PhaseShape shape, const ReferenceOscillation& ref, double theta) {
  switch (shape) {
    case PhaseShape::sd_prime:
      return ref.wp(theta);
    case PhaseShape::sd_cubed:
      return std::pow(kSdScale * ref.w(theta), 3);
    case PhaseShape::generic:
      break;
  }
  throw ArgumentError("generic phase shape has no closed form");
}

double shape_max(PhaseShape shape, const ReferenceOscillation& ref) {
  return shape == PhaseShape::sd_prime ? 1.0 : std::pow(kSdScale * ref.max_w(), 3);
}

double term_amplitude(const EstimateTerm& term, const ReferenceOscillation& ref, double h, double t) {
  double v = to_double(term.coefficient) * std::sqrt(2.0) * std::pow(kSdScale * ref.c1, term.c1_power) *
             std::pow(t, to_double(term.t_exponent)) * std::pow(h, term.h_power);
  if (term.uses_chi) v *= std::sqrt(2.0) * ref.chi();
  return v;
}

void require_cubic(const ReferenceOscillation& ref) {
  if (ref.n() != 3) throw ArgumentError("closed-form estimates exist only for n = 3");
}

}  // namespace

Vec2 ErrorEstimate::evaluate(const ReferenceOscillation& ref, double h, double t, int max_h_power) const {
  require_cubic(ref);
  const double theta = ref.c1 * std::pow(t, 4.0 / 3.0) + ref.c2;
  Vec2 out{0.0, 0.0};
  for (std::size_t c = 0; c < 2; ++c)
    for (const auto& term : components[c])
      if (term.h_power <= max_h_power)
        out[c] += term_amplitude(term, ref, h, t) * shape_value(term.shape, ref, theta);
  return out;
}

Vec2 ErrorEstimate::envelope(const ReferenceOscillation& ref, double h, double t, int max_h_power) const {
  require_cubic(ref);
  Vec2 out{0.0, 0.0};
  for (std::size_t c = 0; c < 2; ++c) {
    std::map<PhaseShape, double> by_shape;
    for (const auto& term : components[c])
      if (term.h_power <= max_h_power) by_shape[term.shape] += term_amplitude(term, ref, h, t);
    for (auto& [shape, amp] : by_shape) out[c] += std::abs(amp) * shape_max(shape, ref);
  }
  return out;
}

namespace {

EstimateTerm term(int hp, const char* coeff, int c1p, bool chi, const char* exponent, PhaseShape shape) {
  return {hp, parse_rational(coeff), c1p, chi, parse_rational(exponent), shape};
}

}  // namespace

ErrorEstimate ef_error_estimate(const std::string& method_id) {
  using enum PhaseShape;
  ErrorEstimate e;
  e.method = method_id;
  if (method_id == "runge2") {
    e.components[0] = {term(2, "4/15", 4, true, "11/6", sd_prime),
                       term(3, "256/6237", 6, false, "7/2", sd_prime)};
    e.components[1] = {term(2, "-8/45", 5, true, "13/6", sd_cubed),
                       term(3, "-512/18711", 7, false, "23/6", sd_cubed)};
  } else if (method_id == "heun3") {
    e.components[0] = {term(3, "-512/35721", 6, false, "7/2", sd_prime),
                       term(4, "50208/229635", 6, false, "5/2", sd_prime),
                       term(5, "557056/34543665", 8, true, "25/6", sd_prime)};
    e.components[1] = {term(3, "1024/107163", 7, false, "23/6", sd_cubed),
                       term(4, "-60416/688905", 7, false, "17/6", sd_cubed),
                       term(5, "-1114112/103630995", 9, true, "9/2", sd_cubed)};
  } else if (method_id == "tuned3") {
    e.components[0] = {term(4, "-5008/25515", 6, false, "5/2", sd_prime),
                       term(5, "-78848/1279395", 8, true, "25/6", sd_prime)};
    e.components[1] = {term(4, "10016/76545", 7, false, "17/6", sd_cubed),
                       term(5, "157696/3838185", 9, true, "9/2", sd_cubed)};
  } else {
    throw ArgumentError("no closed-form estimate for method '" + method_id +
                        "' (expected runge2, heun3 or tuned3)");
  }
  return e;
}

Vec2 closed_form_estimate_ef(const std::string& method_id, const ReferenceOscillation& ref, double h,
                             double t) {
  return ef_error_estimate(method_id).evaluate(ref, h, t);
}

Vec2 ef_growth_exponents(double gamma, int h_power) {
  if (h_power % 2 == 0) {
    const int r = h_power / 2;
    return {4 * gamma * r + gamma + 1, 4 * gamma * r + 3 * gamma + 1};
  }
  const int r = (h_power - 1) / 2;
  return {4 * gamma * r + 5 * gamma + 2, 4 * gamma * r + 7 * gamma + 2};
}

// ---------------------------------------------------------------------------

namespace {

double integral_of_g_power(const LinearOscillatorProblem& problem, double power, double t) {
  auto f = [&](double s) { return std::pow(std::max(problem.g(s, 0), 0.0), power); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, t, 20, 1e-13);
}

}  // namespace

std::vector<LinoscTerm> linosc_terms(const CoefficientMap& b, int p, double h) {
  std::vector<LinoscTerm> terms;
  for (int k = p; k < 2 * p; ++k) {
    const Rational coeff = b.at(RootedTree::tall(k + 1)) / factorial(k + 1);
    if (coeff == 0) continue;
    const int r = k / 2;
    LinoscTerm term;
    term.h_power = k;
    term.rotated = k % 2 == 0;
    // (-1)^r for the yR sums, (-1)^{r+1} for the y sums
    const bool negative = term.rotated ? r % 2 == 1 : r % 2 == 0;
    term.weight = (negative ? -1.0 : 1.0) * to_double(coeff) * std::pow(h, k);
    term.g_power = term.rotated ? r + 0.5 : r + 1.0;
    terms.push_back(term);
  }
  return terms;
}

Vec2 linosc_amplitudes(const LinearOscillatorProblem& problem, const CoefficientMap& b, int p, double h,
                       double t) {
  Vec2 amp{0.0, 0.0};
  for (const auto& term : linosc_terms(b, p, h))
    amp[term.rotated ? 0 : 1] += term.weight * integral_of_g_power(problem, term.g_power, t);
  return amp;
}

Vec2 linosc_estimate(const LinearOscillatorProblem& problem, const CoefficientMap& b, int p, double h,
                     double t) {
  const Vec2 amp = linosc_amplitudes(problem, b, p, h, t);
  const LiouvilleGreen lg = liouville_green(problem, t);
  return {amp[0] * lg.yR[0] + amp[1] * lg.y[0], amp[0] * lg.yR[1] + amp[1] * lg.y[1]};
}

// ---------------------------------------------------------------------------

ErrorRun measure_global_error(const ButcherTableau& method, const OdeSystem& ode,
                              std::span<const double> y0, double t0, double h, double t_end,
                              std::size_t stride, const ReferenceSpec& reference) {
  if (stride == 0) throw ArgumentError("stride must be positive");
  if (!(reference.h > 0) || !(h > 0)) throw ArgumentError("step sizes must be positive");
  // reference.h is an upper bound: the reference takes `sub` equal substeps per method step.
  const double ratio = h / reference.h;
  const auto sub = std::max<long long>(10, static_cast<long long>(std::ceil(ratio * (1 - 1e-12))));
  const double h_ref = h / static_cast<double>(sub);
  const long long n = step_count(t0, h, t_end);

  const ButcherTableau ref_method = find_method(reference.method);
  RungeKuttaStepper fast(method, ode), accurate(ref_method, ode);
  std::vector<double> y(y0.begin(), y0.end()), z(y0.begin(), y0.end()), diff(ode.dimension, 0.0);

  ErrorRun out;
  out.errors = Trajectory(t0, h, stride, ode.dimension);
  out.errors.push_back(diff);
  const auto st = static_cast<long long>(stride);
  for (long long k = 1; k <= n; ++k) {
    const double t = t0 + static_cast<double>(k) * h;
    try {
      fast.step(y, h, k);
    } catch (const DivergenceError&) {
      out.failure_time = t;
      out.failure = method.name() + " diverged";
      break;
    }
    try {
      for (long long j = 0; j < sub; ++j) accurate.step(z, h_ref, k * sub + j);
    } catch (const DivergenceError&) {
      out.failure_time = t;
      out.failure = "reference diverged";
      break;
    }
    if (k % st == 0) {
      for (std::size_t m = 0; m < diff.size(); ++m) diff[m] = y[m] - z[m];
      out.errors.push_back(diff);
    }
  }
  return out;
}

std::vector<ParameterError> parameter_space_error(const Trajectory& errors,
                                                  const ReferenceOscillation& ref,
                                                  const EmdenFowlerProblem& problem, double t_min) {
  std::vector<ParameterError> out;
  for (std::size_t k = 0; k < errors.size(); ++k) {
    const double t = errors.time(k);
    if (t < t_min) continue;
    ParameterError pe;
    pe.t = t;
    try {
      const XtMap x = xt_map(problem, ref, t, t_min);
      pe.value = x.inverse * Vec2{errors(k, 0), errors(k, 1)};
      pe.valid = true;
    } catch (const DomainError&) {
      pe.valid = false;
    }
    out.push_back(pe);
  }
  return out;
}

std::vector<Peak> oscillation_peaks(std::span<const double> times, std::span<const double> values,
                                    double t_from, double t_to) {
  std::vector<Peak> peaks;
  if (times.size() != values.size()) throw ArgumentError("times and values differ in length");
  bool started = false;
  int sign = 0;
  Peak current;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < t_from) continue;
    if (times[k] > t_to) break;
    const double v = values[k];
    const int s = v > 0 ? 1 : (v < 0 ? -1 : 0);
    if (s == 0) continue;
    if (sign != 0 && s != sign) {
      if (started) peaks.push_back(current);
      started = true;
      current = {times[k], std::abs(v)};
    } else if (std::abs(v) > current.value) {
      current = {times[k], std::abs(v)};
    }
    sign = s;
  }
  return peaks;
}

EnvelopeFit power_law_fit(std::span<const double> times, std::span<const double> values) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] > 0 && values[k] > 0)) continue;
    const double x = std::log(times[k]), y = std::log(values[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw FitError("power-law fit needs at least two positive samples");
  const double dn = static_cast<double>(n);
  const double denom = dn * sxx - sx * sx;
  if (denom == 0.0) throw FitError("degenerate power-law fit");
  EnvelopeFit fit;
  fit.exponent = (dn * sxy - sx * sy) / denom;
  fit.amplitude = std::exp((sy - fit.exponent * sx) / dn);
  fit.peaks = n;
  return fit;
}

EnvelopeFit envelope_fit(std::span<const double> times, std::span<const double> values, double t_from,
                         double t_to) {
  auto peaks = oscillation_peaks(times, values, t_from, t_to);
  if (peaks.size() < 10)
    throw FitError("envelope fit needs at least 10 oscillation peaks, found " + std::to_string(peaks.size()));
  std::vector<double> t, v;
  for (auto& p : peaks) {
    t.push_back(p.t);
    v.push_back(p.value);
  }
  auto fit = power_law_fit(t, v);
  fit.peaks = peaks.size();
  return fit;
}

}  // namespace oscerr
