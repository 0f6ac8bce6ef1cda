// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "offo/offo.hpp"

using namespace offo;

namespace {

// Tolerances, pinned.
constexpr double kContractTol = 1e-10;       // model decrease and linear-step descent
constexpr double kDecreaseSlack = 1e-8;      // relative slack on the exact-f decrease inequality
constexpr double kAdagradRelTol = 1e-12;     // iterate agreement with plain Adagrad
constexpr double kLambertResidual = 1e-12;   // |w e^w - z| / |z|
constexpr double kLambertBranch = 1e-10;     // |W(-1/e) + 1|
constexpr double kDeskSeconds = 120.0;       // noiseless desk plan budget
constexpr double kNoisySeconds = 900.0;      // noisy reliability budget
constexpr double kRobustMin = 90.0;          // astr1b0 reliability at sigma = 0.05, percent
constexpr double kBaselineMax = 50.0;        // trinf0 reliability at sigma = 0.05, percent
constexpr double kNoise = 0.05;
constexpr std::size_t kSeeds = 10;
constexpr std::size_t kRateIterations = 10000;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, const Outcome& o) {
  std::printf("%s  %2d  %-34s %s\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str());
  std::fflush(stdout);
  failures += o.pass ? 0 : 1;
}

template <typename... Args>
std::string format(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Invariant counters gathered by the per-iteration observer.
struct Invariants {
  std::size_t steps = 0, infeasible = 0, radius = 0, model = 0;
  std::size_t linear_checks = 0, linear_fail = 0;  // per-coordinate and aggregate linear-step descent
  std::size_t decrease_checks = 0, decrease_fail = 0;
  double worst_decrease_margin = kInf;
};

IterationObserver invariant_observer(const Problem& p, const SolverConfig& c, bool noiseless, Invariants& inv) {
  const bool adaptive = c.algorithm == Algorithm::astr1b;
  return [&p, &inv, adaptive, noiseless, tau = c.tau](const IterationView& v) {
    ++inv.steps;
    if (!p.bounds.contains(v.x_next)) ++inv.infeasible;
    for (std::size_t i = 0; i < p.dim; ++i) {
      if (std::abs(v.step.s_final[i]) > v.step.radii[i]) {
        ++inv.radius;
        break;
      }
    }
    if (v.step.model_value > v.step.model_quadratic + kContractTol) ++inv.model;
    if (!adaptive || !noiseless) return;

    // Linear-step descent, coordinatewise and aggregate.
    double sum_min = 0.0, sum_sq_ratio = 0.0, gs = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < p.dim; ++i) {
      const double chi = v.chi[i], w = v.weights[i], sl = v.step.s_linear[i];
      const double floor_i = std::min(chi * chi / w, chi);
      ++inv.linear_checks;
      if (std::abs(v.g[i] * sl) < floor_i - kContractTol) ++inv.linear_fail;
      sum_min += floor_i;
      sum_sq_ratio += chi * chi / (w * w);
      gs += v.g[i] * sl;
      ss += sl * sl;
    }
    ++inv.linear_checks;
    if (std::abs(gs) < v.weight_floor * ss - kContractTol) ++inv.linear_fail;

    // Decrease with exact f, only where the Lipschitz constant is known.
    if (!p.known_lipschitz) return;
    const double kb = std::max(1.0, v.kappa_b), lip = *p.known_lipschitz;
    const double f0 = p.value(v.x), f1 = p.value(v.x_next);
    const double rhs = f0 - tau * v.weight_floor / (2.0 * kb) * sum_min + 0.5 * (kb + lip) * sum_sq_ratio;
    const double margin = rhs + kDecreaseSlack * (1.0 + std::abs(f0)) - f1;
    ++inv.decrease_checks;
    if (margin < 0.0) ++inv.decrease_fail;
    inv.worst_decrease_margin = std::min(inv.worst_decrease_margin, margin);
  };
}

// Runs every plan cell with the invariant observer attached; same iterates as run_plan.
std::vector<RunRecord> run_observed(const ExperimentPlan& plan, Invariants& inv) {
  std::vector<RunRecord> out;
  for (const auto& key : plan_cells(plan)) {
    SolverConfig cfg = preset(key.algorithm);
    cfg.epsilon = plan.epsilon;
    cfg.max_iter = plan.max_iter;
    cfg.log_iterations = plan.log_iterations;
    const Problem p = registry_get(key.problem.name, key.problem.dim);
    const NoiseSpec noise = noise_for(plan, key.problem, key.noise, key.seed);
    out.push_back(solve(p, cfg, noise, invariant_observer(p, cfg, key.noise == 0.0, inv)));
  }
  return out;
}

bool is_adaptive(const std::string& algo) { return preset(algo).algorithm == Algorithm::astr1b; }

// 1
Outcome objective_free(const std::vector<RunRecord>& desk, double seconds) {
  Outcome o;
  std::size_t adaptive = 0, with_f = 0, converged = 0;
  for (const auto& r : desk) {
    if (!is_adaptive(r.config.name)) continue;
    ++adaptive;
    with_f += r.evals.f > 0 ? 1 : 0;
    converged += r.converged() ? 1 : 0;
  }
  o.pass = adaptive > 0 && with_f == 0 && seconds < kDeskSeconds;
  o.detail = format("%zu adaptive runs, %zu evaluated f, %zu converged; desk plan %.1fs (limit %.0fs)", adaptive,
                    with_f, converged, seconds, kDeskSeconds);
  return o;
}

// 2
Outcome step_contract(const Invariants& inv) {
  Outcome o;
  o.pass = inv.steps > 0 && inv.infeasible == 0 && inv.radius == 0 && inv.model == 0;
  o.detail = format("%zu steps: %zu infeasible, %zu outside radius, %zu model increases", inv.steps, inv.infeasible,
                    inv.radius, inv.model);
  return o;
}

// 3
Outcome linear_descent(const Invariants& inv) {
  Outcome o;
  o.pass = inv.linear_checks > 0 && inv.linear_fail == 0;
  o.detail = format("%zu checks, %zu violations", inv.linear_checks, inv.linear_fail);
  return o;
}

// 4
Outcome exact_decrease(const Invariants& inv) {
  Outcome o;
  o.pass = inv.decrease_checks > 0 && inv.decrease_fail == 0;
  o.detail = format("%zu checks, %zu violations, worst margin %.3e", inv.decrease_checks, inv.decrease_fail,
                    inv.worst_decrease_margin);
  return o;
}

// 5
Outcome adagrad_equivalence() {
  Outcome o;
  std::ostringstream detail;
  for (const auto& name : {"convex-quad", "rosenbrock"}) {
    const Problem p = registry_get(name, default_dim(name));
    SolverConfig c = preset("astr1b0");
    c.epsilon = 0.0;
    c.max_iter = 100;
    c.log_iterations = false;
    std::vector<Vector> xs{p.x0};
    solve(p, c, {}, [&](const IterationView& v) { xs.emplace_back(v.x_next.begin(), v.x_next.end()); });
    // plain Adagrad, written out here
    Vector x = p.x0, acc(p.dim, 0.0), g(p.dim);
    double worst = 0.0;
    for (std::size_t k = 0; k < 100 && k + 1 < xs.size(); ++k) {
      p.gradient(x, g);
      for (std::size_t i = 0; i < p.dim; ++i) {
        acc[i] += g[i] * g[i];
        x[i] -= g[i] / std::sqrt(c.weights.sigma + acc[i]);
      }
      double scale = 1.0;
      for (double xi : x) scale = std::max(scale, std::abs(xi));
      for (std::size_t i = 0; i < p.dim; ++i) worst = std::max(worst, std::abs(xs[k + 1][i] - x[i]) / scale);
    }
    const bool ok = xs.size() == 101 && worst <= kAdagradRelTol;
    o.pass = o.pass && ok;
    detail << name << " n=" << p.dim << " iters=" << xs.size() - 1 << " max rel diff=" << format("%.2e", worst) << "; ";
  }
  o.detail = detail.str();
  return o;
}

// 6 and 7 share the protocol: long runs with epsilon = 0 on problems with known constants.
Outcome rate_protocol(bool diminishing) {
  Outcome o;
  std::ostringstream detail;
  std::size_t problems = 0, checked = 0, violations = 0;
  for (const auto& name : {"boxquad-convex", "ncvx-quad", "bqp-band", "torsion"}) {
    Problem p = registry_get(name, default_dim(name));
    SolverConfig c = preset("astr1b0");
    c.epsilon = 0.0;
    c.max_iter = kRateIterations;
    if (diminishing) {
      // Curvature normalized to L = 1 and unit weight floor keep the onset index within the run.
      p = scaled(p, 1.0 / *p.known_lipschitz);
      c.weights.scheme = WeightScheme::maxchi;
      c.weights.sigma = 1.0;
      c.weights.nu = 0.1;
      c.weights.mu = 0.1;
    }
    const RunRecord r = solve(p, c);
    TheoryParams tp = theory_params(p, r);
    BoundCheck chk;
    double onset = 0.0;
    if (diminishing) {
      tp.eta = 1e-3;
      onset = diminishing_constants(tp).j_eta;
      chk = check_diminishing_rate(r, tp);
    } else {
      chk = check_adagrad_rate(r, tp);
    }
    ++problems;
    checked += chk.checked;
    violations += chk.violations;
    detail << name << ": " << chk.checked << " checked";
    if (diminishing) detail << format(" (onset %.0f)", onset);
    detail << ", " << chk.violations << " viol; ";
  }
  o.pass = problems >= 3 && checked > 0 && violations == 0;
  o.detail = detail.str();
  return o;
}

// 8
Outcome lambert() {
  Outcome o;
  double worst = 0.0;
  for (int j = 0; j < 1000; ++j) {
    const double t = static_cast<double>(j) / 999.0;
    const double z = std::max(-std::exp(std::log(1e-12) + t * (-1.0 - std::log(1e-12))), -std::exp(-1.0));
    const double w = lambert_w_minus1(z);
    worst = std::max(worst, std::abs(w * std::exp(w) - z) / std::abs(z));
  }
  const double branch = std::abs(lambert_w_minus1(-1.0 / std::numbers::e) + 1.0);
  std::size_t bound_fail = 0;
  for (int j = 0; j <= 1000; ++j) {
    const double x = 1e-6 * std::pow(1e9, static_cast<double>(j) / 1000.0);
    const double z = -std::exp(-x - 1.0);
    if (z == 0.0) continue;
    if (std::abs(lambert_w_minus1(z)) > lambert_bound(x) * (1.0 + 1e-12)) ++bound_fail;
  }
  o.pass = worst <= kLambertResidual && branch <= kLambertBranch && bound_fail == 0;
  o.detail = format("max rel residual %.2e, |W(-1/e)+1| %.2e, bound violations %zu", worst, branch, bound_fail);
  return o;
}

// 9
Outcome series_lemma() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t violations = 0;
  constexpr int kSequences = 100000;
  for (int t = 0; t < kSequences; ++t) {
    Vector a(1 + rng() % 100);
    for (double& v : a) v = rng() % 5 == 0 ? 0.0 : std::exp(20.0 * u(rng) - 10.0);
    const double xi = std::exp(std::log(1e-3) + u(rng) * std::log(1e4));
    violations += check_series_lemma(a, xi) ? 0 : 1;
  }
  o.pass = violations == 0;
  o.detail = format("%d sequences, %zu violations", kSequences, violations);
  return o;
}

// 10
Outcome noise_robustness(Invariants& inv) {
  Outcome o;
  ExperimentPlan plan;
  plan.algorithms = {"astr1b0", "trinf0"};
  plan.noise_levels = {kNoise};
  plan.seeds = kSeeds;
  const auto t0 = std::chrono::steady_clock::now();
  const auto runs = summarize(run_observed(plan, inv));
  const double seconds = seconds_since(t0);
  const ProfileReport rep = reliability_table(runs, plan.algorithms);
  const double robust = rep.reliability.at("astr1b0").at(kNoise).percent;
  const double baseline = rep.reliability.at("trinf0").at(kNoise).percent;
  o.pass = robust >= kRobustMin && baseline <= kBaselineMax && seconds < kNoisySeconds;
  o.detail = format("astr1b0 %.1f%% (need >= %.0f), trinf0 %.1f%% (need <= %.0f), separation %.1f pp, %.1fs", robust,
                    kRobustMin, baseline, kBaselineMax, robust - baseline, seconds);
  return o;
}

// 11
Outcome noiseless_profile(const std::vector<RunRecord>& desk) {
  Outcome o;
  const auto areas = profile_area(summarize(desk), preset_names());
  double worst_baseline = kInf, best_adaptive = -kInf;
  std::ostringstream detail;
  for (const auto& [algo, a] : areas) {
    detail << algo << format("=%.4f ", a);
    if (is_adaptive(algo)) {
      best_adaptive = std::max(best_adaptive, a);
    } else {
      worst_baseline = std::min(worst_baseline, a);
    }
  }
  o.pass = areas.size() == 6 && worst_baseline > best_adaptive;
  o.detail = detail.str();
  return o;
}

// 12
Outcome reproducibility() {
  Outcome o;
  ExperimentPlan plan;
  plan.noise_levels = {0.0, kNoise};
  plan.seeds = 2;
  plan.max_iter = 5000;
  plan.log_iterations = true;
  auto artifacts = [&plan] {
    const auto records = run_plan(plan);
    std::string all;
    for (const auto& r : records) all += run_record_string(r);
    const auto runs = summarize(records);
    all += bench_document(&plan, runs, reliability_table(runs, plan.algorithms)).dump();
    return all;
  };
  const std::string a = artifacts(), b = artifacts();
  plan.workers = 2;
  const std::string c = artifacts();
  o.pass = !a.empty() && a == b && a == c;
  o.detail = format("%zu bytes of records and report; repeat %s, two workers %s", a.size(),
                    a == b ? "identical" : "DIFFERENT", a == c ? "identical" : "DIFFERENT");
  return o;
}

}  // namespace

int main() {
  Invariants inv;
  ExperimentPlan desk;
  desk.noise_levels = {0.0};
  desk.seeds = 1;
  const auto t0 = std::chrono::steady_clock::now();
  const auto desk_runs = run_observed(desk, inv);
  const double desk_seconds = seconds_since(t0);

  // the noisy runs below also feed the step contract, so it is reported after them
  const Outcome c10 = noise_robustness(inv);

  report(1, "objective-free iterations", objective_free(desk_runs, desk_seconds));
  report(2, "step contract", step_contract(inv));
  report(3, "linear-step descent", linear_descent(inv));
  report(4, "exact-f decrease", exact_decrease(inv));
  report(5, "Adagrad equivalence", adagrad_equivalence());
  report(6, "Adagrad-like rate", rate_protocol(false));
  report(7, "diminishing-weight rate", rate_protocol(true));
  report(8, "Lambert W lower branch", lambert());
  report(9, "series lemma", series_lemma());
  report(10, "noise robustness", c10);
  report(11, "noiseless profile ordering", noiseless_profile(desk_runs));
  report(12, "bitwise reproducibility", reproducibility());
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
