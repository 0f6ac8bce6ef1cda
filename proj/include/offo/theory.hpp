#pragma once

#include <array>
#include <numbers>
#include <optional>
#include <string>

#include "offo/record_io.hpp"

namespace offo {

/// Raised when a bound needs L or f_low and the problem does not provide them.
class UnknownConstants : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TheoryParams {
  std::size_t n = 1;
  double lipschitz = 1.0;  // L
  double kappa_b = 1.0;    // uniform bound on ||B_k||
  double gamma0 = 0.0;     // f(x0) - f_low
  double sigma = 0.01;
  double theta = 1.0;
  double tau = 1.0;
  double nu = 0.1;
  double mu = 0.1;
  double eta = 0.0;  // diminishing scheme only; 0 means tau * theta * sigma / 2

  void validate() const {
    if (n == 0) throw std::invalid_argument("theory: n must be positive");
    if (!(lipschitz > 0.0)) throw std::invalid_argument("theory: L must be positive");
    if (!(kappa_b >= 1.0)) throw std::invalid_argument("theory: kappa_B must be >= 1");
    if (!(gamma0 >= 0.0)) throw std::invalid_argument("theory: Gamma0 must be nonnegative");
    auto unit = [](double v) { return v > 0.0 && v <= 1.0; };
    if (!unit(sigma) || !unit(theta) || !unit(tau)) {
      throw std::invalid_argument("theory: sigma, theta and tau must lie in (0,1]");
    }
  }

  double eta_or_default() const { return eta > 0.0 ? eta : 0.5 * tau * theta * sigma; }
};

/// Closed-form majorant of |W_{-1}(-e^{-x-1})| for x > 0.
inline double lambert_bound(double x) { return 1.0 + std::sqrt(2.0 * x) + x; }

/// Lower branch of the Lambert function on [-1/e, 0).
inline double lambert_w_minus1(double z) {
  constexpr double inv_e = 1.0 / std::numbers::e;
  if (!(z >= -inv_e && z < 0.0)) {
    throw std::domain_error("lambert_w_minus1: argument must lie in [-1/e, 0)");
  }
  const double dist = std::numbers::e * z + 1.0;  // 0 at the branch point
  if (dist <= 4.0 * std::numeric_limits<double>::epsilon()) return -1.0;

  // Start: branch-point series near -1/e, otherwise the closed-form majorant.
  double w;
  if (dist < 0.25) {
    const double p = -std::sqrt(2.0 * dist);
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  } else {
    w = -lambert_bound(-std::log(-z) - 1.0);
  }

  // Halley on h(w) = w + log(-w) - log(-z), which avoids underflow of e^w.
  const double target = std::log(-z);
  for (int it = 0; it < 100; ++it) {
    const double h = w + std::log(-w) - target;
    const double h1 = 1.0 + 1.0 / w;
    const double h2 = -1.0 / (w * w);
    const double denom = 2.0 * h1 * h1 - h * h2;
    if (denom == 0.0) break;
    double next = w - 2.0 * h * h1 / denom;
    if (next > -1.0) next = 0.5 * (w - 1.0);  // stay on the lower branch
    const bool done = std::abs(next - w) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(w);
    w = next;
    if (done) break;
  }
  return w;
}

struct KappaAdag {
  double value = 0.0;
  std::array<double, 3> terms{};  // sigma, exponential term, Lambert term
  double lambert_argument = 0.0;
};

/// Complexity constant of the Adagrad-like weights.
inline KappaAdag kappa_adag(const TheoryParams& p) {
  p.validate();
  const double n = static_cast<double>(p.n);
  const double kb = p.kappa_b;
  const double scale = 8.0 * n * kb * (kb + p.lipschitz) / (p.tau * std::pow(p.theta, 2.5));
  KappaAdag out;
  out.lambert_argument = -1.0 / scale * p.sigma;
  out.terms[0] = p.sigma;
  out.terms[1] = 0.5 * std::exp(2.0 * p.gamma0 * p.theta / (n * (kb + p.lipschitz)));
  const double w = lambert_w_minus1(out.lambert_argument);
  out.terms[2] = (0.5 / p.sigma) * scale * scale * w * w;
  out.value = std::max({out.terms[0], out.terms[1], out.terms[2]});
  return out;
}

struct DiminishingConstants {
  double j_eta = 0.0;
  double kappa_diamond = 0.0;
  double eta = 0.0;
};

/// Constants of the diminishing-stepsize rate; sigma plays the role of the weight floor.
inline DiminishingConstants diminishing_constants(const TheoryParams& p) {
  p.validate();
  if (!(p.nu > 0.0)) throw std::invalid_argument("theory: nu must be positive");
  const double eta = p.eta_or_default();
  const double smin = p.sigma;
  if (!(eta > 0.0 && eta < p.tau * p.theta * smin)) {
    throw std::invalid_argument("theory: eta must lie in (0, tau*theta*sigma_min)");
  }
  const double kb = p.kappa_b;
  DiminishingConstants out;
  out.eta = eta;
  out.j_eta = std::pow(kb * (kb + p.lipschitz) / (smin * (p.tau * smin - eta)), 1.0 / p.nu);
  out.kappa_diamond = 2.0 * (out.j_eta + 1.0) * (4.0 * kb / eta) *
                      (p.gamma0 + static_cast<double>(p.n) * kb * (kb + p.lipschitz) * out.j_eta / p.theta);
  return out;
}

/// Latest iteration at which an eps-critical point must have been found.
inline double stop_iteration_bound(double kappa, double epsilon) {
  if (!(kappa > 0.0 && epsilon > 0.0)) throw std::invalid_argument("stop_iteration_bound: need kappa, eps > 0");
  return kappa * kappa / (epsilon * epsilon);
}

/// Sum_{j<=k} a_j / (xi + b_j) <= log((xi + b_k)/xi) for every prefix, b_j = sum_{i<=j} a_i.
inline bool check_series_lemma(ConstSpan a, double xi, double slack = 1e-12) {
  if (!(xi > 0.0)) throw std::invalid_argument("check_series_lemma: xi must be positive");
  double b = 0.0, lhs = 0.0;
  for (double aj : a) {
    if (!(aj >= 0.0)) throw std::invalid_argument("check_series_lemma: entries must be nonnegative");
    b += aj;
    lhs += aj / (xi + b);
    const double rhs = std::log1p(b / xi);
    if (lhs > rhs + slack * (1.0 + rhs)) return false;
  }
  return true;
}

/// Outcome of scanning one record against a proved bound.
struct BoundCheck {
  std::string name;
  double bound = 0.0;  // constant part of the bound
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::optional<std::size_t> first_violation;
  double min_margin = kInf;  // min over checked k of (bound_k - lhs_k)

  bool passed() const noexcept { return violations == 0; }
};

namespace detail {

inline void require_history(const RunRecord& rec) {
  if (rec.log.empty()) throw std::invalid_argument("theory: record has no iteration history");
}

inline void note(BoundCheck& c, std::size_t k, double lhs, double rhs) {
  ++c.checked;
  c.min_margin = std::min(c.min_margin, rhs - lhs);
  if (!(lhs <= rhs)) {
    ++c.violations;
    if (!c.first_violation) c.first_violation = k;
  }
}

}  // namespace detail

/// Cumulative squared criticality stays below kappa_adag at every k.
inline BoundCheck check_adagrad_rate(const RunRecord& rec, const TheoryParams& p) {
  detail::require_history(rec);
  BoundCheck c;
  c.name = "adagrad_rate";
  c.bound = kappa_adag(p).value;
  double sum = 0.0;
  for (const auto& e : rec.log) {
    sum += e.chi_sq;
    detail::note(c, e.k, sum, c.bound);
  }
  return c;
}

/// Running minimum of the squared criticality against 2 kappa_diamond (j_eta+1) / k^(1-mu), k > j_eta.
inline BoundCheck check_diminishing_rate(const RunRecord& rec, const TheoryParams& p) {
  detail::require_history(rec);
  if (!(p.nu <= p.mu && p.mu < 1.0)) throw std::invalid_argument("theory: need 0 < nu <= mu < 1");
  const DiminishingConstants dc = diminishing_constants(p);
  BoundCheck c;
  c.name = "diminishing_rate";
  c.bound = 2.0 * dc.kappa_diamond * (dc.j_eta + 1.0);
  double running_min = kInf;
  for (const auto& e : rec.log) {
    running_min = std::min(running_min, e.chi_sq);
    const double k = static_cast<double>(e.k);
    if (!(k > dc.j_eta)) continue;
    detail::note(c, e.k, running_min, c.bound / std::pow(k, 1.0 - p.mu));
  }
  return c;
}

/// Constants for a record: L and f_low from the problem, kappa_B from the run, Gamma0 by direct evaluation.
inline TheoryParams theory_params(const Problem& problem, const RunRecord& rec) {
  if (!problem.known_lipschitz) throw UnknownConstants("problem '" + problem.name + "' has no known Lipschitz constant");
  if (!problem.known_flow) throw UnknownConstants("problem '" + problem.name + "' has no known lower bound");
  TheoryParams p;
  p.n = problem.dim;
  p.lipschitz = std::max(*problem.known_lipschitz, std::numeric_limits<double>::min());
  p.kappa_b = std::max(1.0, rec.kappa_b_max);
  p.gamma0 = std::max(0.0, problem.value(problem.x0) - *problem.known_flow);
  p.sigma = rec.config.weights.sigma;
  p.theta = rec.config.weights.theta;
  p.tau = rec.config.tau;
  p.nu = rec.config.weights.nu;
  p.mu = rec.config.weights.mu;
  return p;
}

struct TheoryReport {
  std::string problem;
  std::string scheme;
  TheoryParams params;
  std::optional<KappaAdag> adag;
  std::optional<DiminishingConstants> diminishing;
  BoundCheck rate;
  std::optional<double> stop_bound;  // adagrad only
  std::optional<bool> stop_bound_respected;

  bool passed() const noexcept { return rate.passed() && stop_bound_respected.value_or(true); }
};

/// All applicable checks for one record.
inline TheoryReport theory_report(const Problem& problem, const RunRecord& rec) {
  TheoryReport r;
  r.problem = rec.problem;
  r.scheme = to_string(rec.config.weights.scheme);
  r.params = theory_params(problem, rec);
  if (rec.config.weights.scheme == WeightScheme::adagrad) {
    r.adag = kappa_adag(r.params);
    r.rate = check_adagrad_rate(rec, r.params);
    if (rec.converged() && rec.config.epsilon > 0.0) {
      r.stop_bound = stop_iteration_bound(r.adag->value, rec.config.epsilon);
      r.stop_bound_respected = static_cast<double>(rec.iterations) <= *r.stop_bound;
    }
  } else {
    r.diminishing = diminishing_constants(r.params);
    r.params.eta = r.diminishing->eta;
    r.rate = check_diminishing_rate(rec, r.params);
  }
  return r;
}

inline Json to_json(const BoundCheck& c) {
  Json j;
  j["name"] = c.name;
  j["bound"] = detail::real_json(c.bound);
  j["checked"] = c.checked;
  j["violations"] = c.violations;
  j["first_violation"] = c.first_violation ? Json(*c.first_violation) : Json(nullptr);
  j["min_margin"] = detail::real_json(c.min_margin);
  return j;
}

inline Json to_json(const TheoryReport& r) {
  Json j;
  j["problem"] = r.problem;
  j["scheme"] = r.scheme;
  const auto& p = r.params;
  j["params"] = {{"n", p.n},         {"L", p.lipschitz}, {"kappa_B", p.kappa_b}, {"Gamma0", p.gamma0},
                 {"sigma", p.sigma}, {"theta", p.theta}, {"tau", p.tau},         {"nu", p.nu},
                 {"mu", p.mu},       {"eta", p.eta}};
  if (r.adag) {
    j["kappa_adag"] = detail::real_json(r.adag->value);
    j["kappa_adag_terms"] = {detail::real_json(r.adag->terms[0]), detail::real_json(r.adag->terms[1]),
                             detail::real_json(r.adag->terms[2])};
  }
  if (r.diminishing) {
    j["j_eta"] = detail::real_json(r.diminishing->j_eta);
    j["kappa_diamond"] = detail::real_json(r.diminishing->kappa_diamond);
  }
  j["rate"] = to_json(r.rate);
  j["stop_bound"] = r.stop_bound ? detail::real_json(*r.stop_bound) : Json(nullptr);
  j["stop_bound_respected"] = r.stop_bound_respected ? Json(*r.stop_bound_respected) : Json(nullptr);
  j["passed"] = r.passed();
  return j;
}

}  // namespace offo
