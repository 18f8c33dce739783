#include "oscerr/oscillators.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <map>
#include <numbers>

#include "oscerr/errors.hpp"

namespace oscerr {

Mat2 inverse(const Mat2& m) {
  const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  if (det == 0.0 || !std::isfinite(det)) throw DomainError("singular 2x2 matrix");
  return {{{m[1][1] / det, -m[0][1] / det}, {-m[1][0] / det, m[0][0] / det}}};
}

Vec2 operator*(const Mat2& m, const Vec2& v) {
  return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]};
}

Mat2 operator*(const Mat2& a, const Mat2& b) {
  Mat2 r{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
  return r;
}

namespace {

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// F2 of a vertex with k children, `leaves` of which are leaves, given the
// product of F1 over the non-leaf children.
double second_component(const ScalarOscillator& osc, int k, int leaves, double nonleaf_product,
                        double y1, double y2, double y3, TimeDerivatives mode) {
  if (nonleaf_product == 0.0) return 0.0;
  // A leaf child's differential is (y2, force, 1); it enters either through
  // the y1-slot (factor y2) or the y3-slot (factor 1). Non-leaf children have
  // a vanishing third component.
  const int max_time = mode == TimeDerivatives::include ? leaves : 0;
  double sum = 0.0;
  for (int j = 0; j <= max_time; ++j) {
    const double p = osc.partial(k - j, j, y1, y3);
    if (p == 0.0) continue;
    sum += binomial(leaves, j) * p * ipow(y2, leaves - j);
  }
  return sum * nonleaf_product;
}

}  // namespace

OdeSystem ScalarOscillator::system() const {
  OdeSystem sys;
  sys.dimension = 3;
  auto partial = partial_;
  sys.rhs = [partial](std::span<const double> y, std::span<double> out) {
    out[0] = y[1];
    out[1] = partial(0, 0, y[0], y[2]);
    out[2] = 1.0;
  };
  sys.jacobian = [partial](std::span<const double> y, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[1] = 1.0;
    out[3] = partial(1, 0, y[0], y[2]);
    out[5] = partial(0, 1, y[0], y[2]);
  };
  return sys;
}

Vec3 ScalarOscillator::elementary_differential(const RootedTree& tree, std::span<const double> y,
                                               TimeDerivatives mode) const {
  ElementaryDifferentialPlan plan(*this, {tree}, mode);
  std::array<double, 3> out{};
  plan.evaluate(y, out);
  return out;
}

ElementaryDifferentialPlan::ElementaryDifferentialPlan(ScalarOscillator oscillator,
                                                       std::vector<RootedTree> trees,
                                                       TimeDerivatives mode)
    : oscillator_(std::move(oscillator)), mode_(mode), requested_(std::move(trees)) {
  std::map<RootedTree, std::size_t> slots;
  std::vector<RootedTree> all;
  std::function<void(const RootedTree&)> collect = [&](const RootedTree& t) {
    if (slots.count(t)) return;
    for (const auto& c : t.children()) collect(c);
    slots.emplace(t, all.size());
    all.push_back(t);
  };
  for (const auto& t : requested_) collect(t);
  entries_.resize(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (const auto& c : all[i].children()) {
      if (c.is_leaf())
        ++entries_[i].leaf_children;
      else
        entries_[i].children.push_back(slots.at(c));
    }
  }
  for (const auto& t : requested_) requested_slot_.push_back(slots.at(t));
  values_.resize(all.size());
}

void ElementaryDifferentialPlan::evaluate(std::span<const double> y, std::span<double> out) const {
  const double y1 = y[0], y2 = y[1], y3 = y[2];
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const Entry& e = entries_[i];
    const int k = static_cast<int>(e.children.size()) + e.leaf_children;
    double prod = 1.0;
    for (auto c : e.children) prod *= values_[c][0];
    Vec3& v = values_[i];
    if (k == 0) {
      v = {y2, oscillator_.partial(0, 0, y1, y3), 1.0};
      continue;
    }
    if (k == 1)
      v[0] = e.leaf_children == 1 ? oscillator_.partial(0, 0, y1, y3) : values_[e.children[0]][1];
    else
      v[0] = 0.0;
    v[1] = second_component(oscillator_, k, e.leaf_children, prod, y1, y2, y3, mode_);
    v[2] = 0.0;
  }
  for (std::size_t r = 0; r < requested_slot_.size(); ++r)
    for (int m = 0; m < 3; ++m) out[3 * r + static_cast<std::size_t>(m)] = values_[requested_slot_[r]][static_cast<std::size_t>(m)];
}

// ---------------------------------------------------------------------------

EmdenFowlerProblem::EmdenFowlerProblem(int n_, double nu_, double y0_, double y0p_)
    : n(n_), nu(nu_), y0(y0_), y0p(y0p_) {
  if (n < 3 || n % 2 == 0) throw ArgumentError("Emden–Fowler exponent n must be an odd integer >= 3");
  if (!(nu > -(n + 3) / 2.0)) throw ArgumentError("Emden–Fowler requires nu > -(n+3)/2");
}

ScalarOscillator ef_oscillator(const EmdenFowlerProblem& problem) {
  const int n = problem.n;
  const double nu = problem.nu;
  const bool integer_nu = nu == std::floor(nu);
  return ScalarOscillator([n, nu, integer_nu](int a, int b, double y1, double y3) {
    if (a > n) return 0.0;
    if (y3 < 0.0 && !integer_nu) throw DomainError("t^nu undefined for t < 0 and non-integer nu");
    double time_factor = 1.0;
    for (int i = 0; i < b; ++i) time_factor *= nu - i;
    if (time_factor == 0.0) return 0.0;
    double space_factor = 1.0;
    for (int i = 0; i < a; ++i) space_factor *= n - i;
    return -space_factor * ipow(y1, n - a) * time_factor * std::pow(y3, nu - b);
  });
}

OdeSystem ef_system(const EmdenFowlerProblem& problem) { return ef_oscillator(problem).system(); }

Vec3 elementary_differential(const EmdenFowlerProblem& problem, const RootedTree& tree,
                             std::span<const double> state, TimeDerivatives mode) {
  return ef_oscillator(problem).elementary_differential(tree, state, mode);
}

ActionAngle fit_action_angle(const EmdenFowlerProblem& problem, const Trajectory& trajectory,
                             const ReferenceOscillation& ref) {
  if (trajectory.dimension() < 2) throw FitError("trajectory needs (y, y') components");
  if (ref.n() != problem.n) throw ArgumentError("reference oscillation has a different n");
  const int n = problem.n;
  const double g = problem.gamma();
  const double scale = std::pow(1 + 2 * g, 2.0 / (n - 1));
  const double q = 1 + 2 * g;

  std::vector<double> crossings;
  for (std::size_t k = 0; k + 1 < trajectory.size(); ++k) {
    const double ya = trajectory(k, 0), yb = trajectory(k + 1, 0);
    if (!(ya < 0.0 && yb >= 0.0) || trajectory.time(k) <= 0.0) continue;
    // Cubic Hermite on [ta, tb] using y and y'; refine the root by bisection.
    const double ta = trajectory.time(k), tb = trajectory.time(k + 1), dt = tb - ta;
    const double da = trajectory(k, 1) * dt, db = trajectory(k + 1, 1) * dt;
    auto p = [&](double x) {
      const double x2 = x * x, x3 = x2 * x;
      return (2 * x3 - 3 * x2 + 1) * ya + (x3 - 2 * x2 + x) * da + (-2 * x3 + 3 * x2) * yb +
             (x3 - x2) * db;
    };
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (p(mid) < 0.0 ? lo : hi) = mid;
    }
    crossings.push_back(ta + 0.5 * (lo + hi) * dt);
  }
  if (crossings.size() < 4) throw FitError("trajectory does not contain enough oscillations to fit");

  const double from = crossings[crossings.size() - 4];
  const double to = crossings.back();
  double energy = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const double t = trajectory.time(k);
    if (t < from || t > to) continue;
    const double y = trajectory(k, 0), yp = trajectory(k, 1);
    const double u = y * std::pow(t, g) / scale;
    const double du = (yp * std::pow(t, g) + g * std::pow(t, g - 1) * y) / (scale * q * std::pow(t, 2 * g));
    energy += std::pow(u, n + 1) / (n + 1) + 0.5 * du * du;
    ++count;
  }
  energy /= static_cast<double>(count);
  if (!(energy > 0.0)) throw FitError("non-positive oscillator energy");

  ActionAngle aa;
  // u = c1^{2/(n-1)} w(c1 s + c2) has energy c1^{2(n+1)/(n-1)} / 2.
  aa.c1 = std::pow(2 * energy, (n - 1) / (2.0 * (n + 1)));
  const double period = ref.period();
  // w has an upward zero at phase 0 (mod 4K); average the last two crossings
  // on the circle.
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = crossings.size() - 2; i < crossings.size(); ++i) {
    const double phase = -aa.c1 * std::pow(crossings[i], q);
    const double angle = 2 * std::numbers::pi * phase / period;
    sx += std::cos(angle);
    sy += std::sin(angle);
  }
  double c2 = std::atan2(sy, sx) * period / (2 * std::numbers::pi);
  if (c2 < 0) c2 += period;
  aa.c2 = c2;
  return aa;
}

double ef_phase(const EmdenFowlerProblem& problem, const ReferenceOscillation& ref, double t) {
  return ref.c1 * std::pow(t, 1 + 2 * problem.gamma()) + ref.c2;
}

double ef_amplitude(const EmdenFowlerProblem& problem, const ReferenceOscillation& ref, double t) {
  const int n = problem.n;
  const double g = problem.gamma();
  return std::pow((1 + 2 * g) * ref.c1, 2.0 / (n - 1)) * std::pow(t, -g) * ref.max_w();
}

XtMap xt_map(const EmdenFowlerProblem& problem, const ReferenceOscillation& ref, double t,
             double t_min) {
  if (t < t_min) throw DomainError("X_t is only evaluated for t >= " + std::to_string(t_min));
  const int n = problem.n;
  const double g = problem.gamma();
  const double q = 2.0 / (n - 1);
  const double c1 = ref.c1;
  const double s = std::pow(t, 1 + 2 * g);
  const double theta = c1 * s + ref.c2;
  const double w = ref.w(theta), wp = ref.wp(theta), wpp = -std::pow(w, n);
  const double A = std::pow(1 + 2 * g, q);
  const double B = std::pow(1 + 2 * g, 1 + q);
  const double tm = std::pow(t, -g), tp = std::pow(t, g);

  XtMap x;
  x.value = {A * std::pow(c1, q) * tm * w, B * std::pow(c1, 1 + q) * tp * wp};
  x.jacobian[0][0] = A * tm * (q * std::pow(c1, q - 1) * w + std::pow(c1, q) * wp * s);
  x.jacobian[0][1] = A * std::pow(c1, q) * tm * wp;
  x.jacobian[1][0] = B * tp * ((1 + q) * std::pow(c1, q) * wp + std::pow(c1, 1 + q) * wpp * s);
  x.jacobian[1][1] = B * std::pow(c1, 1 + q) * tp * wpp;
  x.inverse = inverse(x.jacobian);
  return x;
}

// ---------------------------------------------------------------------------

double LinearOscillatorProblem::theta(double t) const {
  if (theta_closed_form) return theta_closed_form(t);
  auto integrand = [this](double s) { return std::sqrt(std::max(g(s, 0), 0.0)); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, t, 20, 1e-13);
}

LinearOscillatorProblem airy_problem(double y0, double y0p) {
  LinearOscillatorProblem p;
  p.g = [](double t, int k) { return k == 0 ? t : (k == 1 ? 1.0 : 0.0); };
  p.theta_closed_form = [](double t) { return 2.0 / 3.0 * std::pow(t, 1.5); };
  p.y0 = y0;
  p.y0p = y0p;
  return p;
}

LinearOscillatorProblem harmonic_problem(double omega, double y0, double y0p) {
  if (!(omega > 0)) throw ArgumentError("harmonic oscillator needs omega > 0");
  LinearOscillatorProblem p;
  p.g = [omega](double, int k) { return k == 0 ? omega * omega : 0.0; };
  p.theta_closed_form = [omega](double t) { return omega * t; };
  p.y0 = y0;
  p.y0p = y0p;
  p.t_min = 0.0;
  return p;
}

ScalarOscillator linear_oscillator(const LinearOscillatorProblem& problem) {
  auto g = problem.g;
  return ScalarOscillator([g](int a, int b, double y1, double y3) {
    if (a == 0) return -g(y3, b) * y1;
    if (a == 1) return -g(y3, b);
    return 0.0;
  });
}

OdeSystem linear_system(const LinearOscillatorProblem& problem) {
  return linear_oscillator(problem).system();
}

Mat2 rotation(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {{{c, s}, {-s, c}}};
}

Mat2 lg_scaling(const LinearOscillatorProblem& problem, double t) {
  const double g = problem.g(t, 0);
  if (!(g > 0.0)) throw DomainError("g(t) must be positive for the Liouville–Green form");
  const double r = std::pow(g, 0.25);
  return {{{1.0 / r, 0.0}, {0.0, r}}};
}

LiouvilleGreen liouville_green(const LinearOscillatorProblem& problem, double t) {
  if (t < problem.t_min) throw DomainError("Liouville–Green form used below t_min");
  const Mat2 L = lg_scaling(problem, t);
  const double th = problem.theta(t);
  return {L * (rotation(th) * problem.s0), L * (rotation(th + std::numbers::pi / 2) * problem.s0)};
}

Vec2 fit_liouville_green(const LinearOscillatorProblem& problem, const Trajectory& trajectory,
                         double t_from) {
  Vec2 acc{0.0, 0.0};
  std::size_t count = 0;
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const double t = trajectory.time(k);
    if (t < t_from || t < problem.t_min) continue;
    const Mat2 Linv = inverse(lg_scaling(problem, t));
    const Vec2 s = rotation(-problem.theta(t)) * (Linv * Vec2{trajectory(k, 0), trajectory(k, 1)});
    acc[0] += s[0];
    acc[1] += s[1];
    ++count;
  }
  if (count == 0) throw FitError("no samples beyond t_from for the Liouville–Green fit");
  return {acc[0] / static_cast<double>(count), acc[1] / static_cast<double>(count)};
}

}  // namespace oscerr
