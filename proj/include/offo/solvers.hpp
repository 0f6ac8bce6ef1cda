#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>

#include "offo/criticality.hpp"
#include "offo/curvature.hpp"
#include "offo/oracle.hpp"
#include "offo/step.hpp"
#include "offo/weights.hpp"

namespace offo {

enum class Algorithm { astr1b, trinf };

inline const char* to_string(Algorithm a) noexcept { return a == Algorithm::astr1b ? "astr1b" : "trinf"; }

inline Algorithm algorithm_from_string(const std::string& s) {
  if (s == "astr1b") return Algorithm::astr1b;
  if (s == "trinf") return Algorithm::trinf;
  throw std::invalid_argument("unknown algorithm '" + s + "'");
}

/// Classical l-infinity trust-region parameters (baseline only).
struct TrustRegionParams {
  double eta1 = 1e-4;
  double eta2 = 0.95;
  double contract = 0.5;
  double expand = 2.0;
  double initial_radius = 1.0;
  double max_radius = 1e10;
};

struct SolverConfig {
  std::string name;  // preset label, free-form
  Algorithm algorithm = Algorithm::astr1b;
  WeightParams weights;
  std::size_t memory = 0;  // secant pairs; 0 means B = 0
  double tau = 1.0;
  double epsilon = 1e-3;
  std::size_t max_iter = 100000;
  double alpha = 1.0;  // constant premultiplier of the linear step
  std::optional<std::size_t> max_inner;  // refinement products; unset means 3n
  double inner_tolerance = 1e-4;
  TrustRegionParams trinf;
  bool log_iterations = true;

  void validate() const {
    weights.validate();
    if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("config: tau must lie in (0,1]");
    if (!(epsilon >= 0.0)) throw std::invalid_argument("config: epsilon must be nonnegative");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("config: alpha must lie in (0,1]");
    const auto& t = trinf;
    if (!(0.0 < t.eta1 && t.eta1 < t.eta2 && t.eta2 < 1.0)) {
      throw std::invalid_argument("config: need 0 < eta1 < eta2 < 1");
    }
    if (!(0.0 < t.contract && t.contract < 1.0 && t.expand > 1.0)) {
      throw std::invalid_argument("config: need 0 < contract < 1 < expand");
    }
    if (!(t.initial_radius > 0.0)) throw std::invalid_argument("config: initial radius must be positive");
  }

  std::size_t inner_limit(std::size_t n) const { return max_inner.value_or(3 * n); }
};

/// The six named configurations of the benchmark.
inline SolverConfig preset(const std::string& name) {
  SolverConfig c;
  c.name = name;
  if (name == "astr1b0" || name == "astr1b1" || name == "astr1b3") {
    c.algorithm = Algorithm::astr1b;
  } else if (name == "trinf0" || name == "trinf1" || name == "trinf3") {
    c.algorithm = Algorithm::trinf;
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  c.memory = static_cast<std::size_t>(name.back() - '0');
  return c;
}

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"astr1b0", "astr1b1", "astr1b3", "trinf0", "trinf1", "trinf3"};
  return names;
}

enum class Termination { converged, max_iter, oracle_failure };

inline const char* to_string(Termination t) noexcept {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iter: return "max_iter";
    case Termination::oracle_failure: return "oracle_failure";
  }
  return "?";
}

inline Termination termination_from_string(const std::string& s) {
  if (s == "converged") return Termination::converged;
  if (s == "max_iter") return Termination::max_iter;
  if (s == "oracle_failure") return Termination::oracle_failure;
  throw std::invalid_argument("unknown termination '" + s + "'");
}

struct IterationLog {
  std::size_t k = 0;
  std::string x_digest;
  std::optional<double> f;  // only when the algorithm evaluated it
  double criticality = 0.0;
  double chi_sq = 0.0;  // sum_i chi_{i,k}^2
  // Step data; absent on the terminating entry.
  bool has_step = false;
  double w_min = 0.0;
  double w_max = 0.0;
  double radius_max = 0.0;
  double gamma = 1.0;
  double step_norm = 0.0;
  double model_value = 0.0;
  double kappa_b = 1.0;
  // Baseline only.
  std::optional<double> tr_radius;
  std::optional<double> rho;
  std::optional<bool> accepted;
};

struct RunRecord {
  std::string problem;
  std::size_t dim = 0;
  SolverConfig config;
  NoiseSpec noise;
  std::vector<IterationLog> log;
  Termination termination = Termination::max_iter;
  std::size_t iterations = 0;  // index k at which the run stopped
  EvalCounts evals;
  double final_criticality = kInf;
  Vector x_final;
  double kappa_b_max = 1.0;
  std::string message;
  double wall_seconds = 0.0;

  bool converged() const noexcept { return termination == Termination::converged; }
};

/// Full per-iteration state handed to observers (tests and the theory harness).
struct IterationView {
  std::size_t k;
  ConstSpan x;
  ConstSpan g;
  const ChiVector& chi;
  ConstSpan weights;  // empty for the baseline
  double weight_floor;
  const StepBundle& step;
  double kappa_b;
  ConstSpan x_next;  // equals x on a rejected baseline step
  bool accepted;
};

using IterationObserver = std::function<void(const IterationView&)>;

namespace detail {

inline Vector take_step(ConstSpan x, ConstSpan s, const Bounds& bounds) {
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + s[i];
  bounds.project(out);
  return out;
}

inline double sum_sq(ConstSpan v) { return linalg::dot(v, v); }

inline void fill_step_log(IterationLog& e, ConstSpan w, const StepBundle& st, double kappa_b) {
  e.has_step = true;
  if (!w.empty()) {
    e.w_min = *std::min_element(w.begin(), w.end());
    e.w_max = *std::max_element(w.begin(), w.end());
  }
  e.radius_max = linalg::norm_inf(st.radii);
  e.gamma = st.gamma;
  e.step_norm = linalg::norm2(st.s_final);
  e.model_value = st.model_value;
  e.kappa_b = kappa_b;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace detail

/// Objective-free adaptive trust-region iteration. Only gradients are ever requested.
template <CurvatureModel Model>
RunRecord astr1b_solve(const Problem& problem, const SolverConfig& config, const NoiseSpec& noise,
                       Model& model, const IterationObserver& observer = {}) {
  problem.validate();
  config.validate();
  if (config.algorithm != Algorithm::astr1b) throw std::invalid_argument("astr1b_solve: wrong algorithm tag");

  const std::size_t n = problem.dim;
  const detail::Stopwatch clock;
  RunRecord rec;
  rec.problem = problem.name;
  rec.dim = n;
  rec.config = config;
  rec.noise = noise;

  Oracle oracle(problem, noise);
  WeightState weights(config.weights, n);
  const RefineOptions ropt{config.tau, config.inner_limit(n), config.inner_tolerance};
  const bool want_kappa = config.log_iterations || static_cast<bool>(observer);

  Vector x = problem.x0;
  Vector g_prev, s_prev;
  try {
    for (std::size_t k = 0;; ++k) {
      Vector g = *oracle.evaluate(x, false, true).gradient;
      if (!s_prev.empty()) {
        Vector y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = g[i] - g_prev[i];
        if (linalg::norm2(s_prev) > 0.0) model.push(s_prev, y);
      }
      const ChiVector c = chi(x, g, problem.bounds, 1.0);
      const double crit = criticality_norm(c);

      IterationLog entry;
      if (config.log_iterations) {
        entry.k = k;
        entry.x_digest = hex_digest(x);
        entry.criticality = crit;
        entry.chi_sq = detail::sum_sq(c.values);
      }
      rec.final_criticality = crit;
      rec.iterations = k;
      if (crit <= config.epsilon || k >= config.max_iter) {
        rec.termination = crit <= config.epsilon ? Termination::converged : Termination::max_iter;
        if (config.log_iterations) rec.log.push_back(std::move(entry));
        break;
      }

      const Vector w = weights.update(c);
      StepBundle st = compute_step(x, g, problem.bounds, radii(c, w), model, ropt, config.alpha);
      const double kappa_b = want_kappa ? model.norm_bound() : 1.0;
      rec.kappa_b_max = std::max(rec.kappa_b_max, kappa_b);
      Vector x_next = detail::take_step(x, st.s_final, problem.bounds);

      if (observer) {
        observer(IterationView{k, x, g, c, w, weights.floor(), st, kappa_b, x_next, true});
      }
      if (config.log_iterations) {
        detail::fill_step_log(entry, w, st, kappa_b);
        rec.log.push_back(std::move(entry));
      }

      s_prev.assign(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) s_prev[i] = x_next[i] - x[i];
      g_prev = std::move(g);
      x = std::move(x_next);
    }
  } catch (const NumericalFailure& e) {
    rec.termination = Termination::oracle_failure;
    rec.message = e.what();
  }
  rec.x_final = x;
  rec.evals = oracle.counts();
  rec.wall_seconds = clock.seconds();
  return rec;
}

/// Function-value l-infinity trust-region baseline sharing the step machinery.
template <CurvatureModel Model>
RunRecord trinf_solve(const Problem& problem, const SolverConfig& config, const NoiseSpec& noise,
                      Model& model, const IterationObserver& observer = {}) {
  problem.validate();
  config.validate();
  if (config.algorithm != Algorithm::trinf) throw std::invalid_argument("trinf_solve: wrong algorithm tag");

  const std::size_t n = problem.dim;
  const detail::Stopwatch clock;
  const auto& tr = config.trinf;
  RunRecord rec;
  rec.problem = problem.name;
  rec.dim = n;
  rec.config = config;
  rec.noise = noise;

  Oracle oracle(problem, noise);
  const RefineOptions ropt{config.tau, config.inner_limit(n), config.inner_tolerance};
  const bool want_kappa = config.log_iterations || static_cast<bool>(observer);

  Vector x = problem.x0;
  try {
    OracleResult first = oracle.evaluate(x, true, true);
    double fx = *first.f_value;
    Vector g = std::move(*first.gradient);
    double delta = tr.initial_radius;
    bool f_fresh = true;  // fx belongs to the logged entry

    for (std::size_t k = 0;; ++k) {
      const ChiVector c = chi(x, g, problem.bounds, 1.0);
      const double crit = criticality_norm(c);

      IterationLog entry;
      if (config.log_iterations) {
        entry.k = k;
        entry.x_digest = hex_digest(x);
        if (f_fresh) entry.f = fx;
        entry.criticality = crit;
        entry.chi_sq = detail::sum_sq(c.values);
        entry.tr_radius = delta;
      }
      rec.final_criticality = crit;
      rec.iterations = k;
      if (crit <= config.epsilon || k >= config.max_iter) {
        rec.termination = crit <= config.epsilon ? Termination::converged : Termination::max_iter;
        if (config.log_iterations) rec.log.push_back(std::move(entry));
        break;
      }

      StepBundle st = compute_step(x, g, problem.bounds, Vector(n, delta), model, ropt);
      const double kappa_b = want_kappa ? model.norm_bound() : 1.0;
      rec.kappa_b_max = std::max(rec.kappa_b_max, kappa_b);
      Vector x_trial = detail::take_step(x, st.s_final, problem.bounds);
      const double predicted = -st.model_value;
      const bool nonzero_step = linalg::norm_inf(st.s_final) > 0.0;

      double rho = -kInf;
      double f_trial = fx;
      if (nonzero_step) {
        f_trial = *oracle.evaluate(x_trial, true, false).f_value;
        if (predicted > 0.0) {
          rho = (fx - f_trial) / predicted;
        } else if (!noise.active()) {
          throw std::logic_error("trinf_solve: nonpositive model decrease on a noiseless run");
        }
      }
      const bool accept = rho >= tr.eta1;

      if (observer) {
        observer(IterationView{k, x, g, c, {}, 0.0, st, kappa_b, accept ? ConstSpan(x_trial) : ConstSpan(x),
                               accept});
      }
      if (config.log_iterations) {
        detail::fill_step_log(entry, {}, st, kappa_b);
        entry.rho = rho;
        entry.accepted = accept;
        rec.log.push_back(std::move(entry));
      }

      if (rho >= tr.eta2) {
        delta = std::min(tr.expand * delta, tr.max_radius);
      } else if (rho < tr.eta1) {
        delta *= tr.contract;
      }

      f_fresh = false;
      if (accept) {
        Vector g_trial = *oracle.evaluate(x_trial, false, true).gradient;
        Vector s(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
          s[i] = x_trial[i] - x[i];
          y[i] = g_trial[i] - g[i];
        }
        if (linalg::norm2(s) > 0.0) model.push(s, y);
        x = std::move(x_trial);
        g = std::move(g_trial);
        fx = f_trial;
        f_fresh = true;
      }
    }
  } catch (const NumericalFailure& e) {
    rec.termination = Termination::oracle_failure;
    rec.message = e.what();
  }
  rec.x_final = x;
  rec.evals = oracle.counts();
  rec.wall_seconds = clock.seconds();
  return rec;
}

inline RunRecord astr1b_solve(const Problem& problem, const SolverConfig& config, const NoiseSpec& noise = {},
                              const IterationObserver& observer = {}) {
  SecantMemory memory(problem.dim, config.memory);
  return astr1b_solve(problem, config, noise, memory, observer);
}

inline RunRecord trinf_solve(const Problem& problem, const SolverConfig& config, const NoiseSpec& noise = {},
                             const IterationObserver& observer = {}) {
  SecantMemory memory(problem.dim, config.memory);
  return trinf_solve(problem, config, noise, memory, observer);
}

/// Dispatch on config.algorithm.
inline RunRecord solve(const Problem& problem, const SolverConfig& config, const NoiseSpec& noise = {},
                       const IterationObserver& observer = {}) {
  switch (config.algorithm) {
    case Algorithm::astr1b: return astr1b_solve(problem, config, noise, observer);
    case Algorithm::trinf: return trinf_solve(problem, config, noise, observer);
  }
  throw std::invalid_argument("solve: unknown algorithm");
}

}  // namespace offo
