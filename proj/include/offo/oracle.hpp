#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include "offo/types.hpp"

namespace offo {

/// Componentwise box [lower, upper]; infinite entries allowed.
struct Bounds {
  Vector lower;
  Vector upper;

  static Bounds unbounded(std::size_t n) { return {Vector(n, -kInf), Vector(n, kInf)}; }
  static Bounds box(std::size_t n, double lo, double hi) { return {Vector(n, lo), Vector(n, hi)}; }

  std::size_t size() const noexcept { return lower.size(); }

  void validate(std::size_t n) const {
    if (lower.size() != n || upper.size() != n) {
      throw std::invalid_argument("Bounds: length does not match problem dimension");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (std::isnan(lower[i]) || std::isnan(upper[i]) || lower[i] > upper[i]) {
        throw std::invalid_argument("Bounds: lower > upper at index " + std::to_string(i));
      }
    }
  }

  bool contains(ConstSpan x) const noexcept {
    if (x.size() != lower.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
    }
    return true;
  }

  /// Clamp in place. A no-op for points already inside.
  void project(MutSpan x) const noexcept {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
  }
};

using ValueFn = std::function<double(ConstSpan)>;
using GradientFn = std::function<void(ConstSpan, MutSpan)>;
using HessVecFn = std::function<void(ConstSpan x, ConstSpan v, MutSpan out)>;

/// A bound-constrained minimization problem. Immutable once built.
struct Problem {
  std::string name;
  std::size_t dim = 0;
  Bounds bounds;
  ValueFn value;
  GradientFn gradient;
  Vector x0;
  std::optional<double> known_lipschitz;
  std::optional<double> known_flow;
  // Exact Hessian-vector product where the registry can supply one (quadratics).
  HessVecFn hessian_vector;

  void validate() const {
    if (dim == 0) throw std::invalid_argument("Problem: dimension must be positive");
    bounds.validate(dim);
    if (x0.size() != dim) throw std::invalid_argument("Problem: x0 has wrong length");
    if (!bounds.contains(x0)) throw DomainError("Problem '" + name + "': x0 is infeasible");
    if (!value || !gradient) throw std::invalid_argument("Problem: missing oracle");
    if (known_lipschitz && !(*known_lipschitz > 0.0)) {
      throw std::invalid_argument("Problem: known Lipschitz constant must be positive");
    }
  }
};

struct EvalCounts {
  std::uint64_t f = 0;
  std::uint64_t g = 0;
  friend bool operator==(const EvalCounts&, const EvalCounts&) = default;
};

struct OracleResult {
  std::optional<double> f_value;
  std::optional<Vector> gradient;
  EvalCounts eval_counts;
};

/// Relative Gaussian noise: each present scalar q becomes q * (1 + level * z).
struct NoiseSpec {
  double level = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  bool active() const noexcept { return level != 0.0; }
};

inline constexpr std::uint64_t kFunctionStream = 0;
inline constexpr std::uint64_t kGradientStream = 1;

/// Perturb the present fields of `result` with draws from the stream identified
/// by (seed, stream_id, call_index). The value draw (if any) comes first, then
/// one independent draw per gradient component.
inline OracleResult add_noise(OracleResult result, const NoiseSpec& spec, std::uint64_t call_index) {
  if (!spec.active()) return result;
  if (spec.level < 0.0 || spec.level > 1.0) throw std::invalid_argument("noise level outside [0,1]");
  std::uint64_t key = splitmix64(spec.seed);
  key = splitmix64(key ^ splitmix64(spec.stream_id + 0x632be59bd9b4e019ULL));
  key = splitmix64(key ^ splitmix64(call_index + 0x8cb92ba72f3d8dd7ULL));
  std::mt19937_64 engine(key);
  std::normal_distribution<double> normal(0.0, 1.0);
  if (result.f_value) *result.f_value *= 1.0 + spec.level * normal(engine);
  if (result.gradient) {
    for (double& gi : *result.gradient) gi *= 1.0 + spec.level * normal(engine);
  }
  return result;
}

/// Per-run evaluation front end: feasibility guard, counters and noise.
class Oracle {
 public:
  explicit Oracle(const Problem& problem, NoiseSpec noise = {})
      : problem_(&problem), noise_(noise) {}

  OracleResult evaluate(ConstSpan x, bool want_f, bool want_g) {
    if (!want_f && !want_g) throw std::invalid_argument("evaluate: nothing requested");
    linalg::check_same_size(x.size(), problem_->dim, "evaluate");
    if (!problem_->bounds.contains(x)) {
      throw DomainError("evaluate: point outside the feasible box of '" + problem_->name + "'");
    }
    OracleResult out;
    if (want_f) {
      OracleResult part;
      part.f_value = problem_->value(x);
      if (!std::isfinite(*part.f_value)) {
        throw NumericalFailure("evaluate: non-finite objective value", Vector(x.begin(), x.end()));
      }
      NoiseSpec s = noise_;
      s.stream_id = noise_.stream_id * 2 + kFunctionStream;
      out.f_value = add_noise(std::move(part), s, counts_.f).f_value;
      ++counts_.f;
    }
    if (want_g) {
      OracleResult part;
      part.gradient = Vector(problem_->dim);
      problem_->gradient(x, *part.gradient);
      for (double gi : *part.gradient) {
        if (!std::isfinite(gi)) {
          throw NumericalFailure("evaluate: non-finite gradient", Vector(x.begin(), x.end()));
        }
      }
      NoiseSpec s = noise_;
      s.stream_id = noise_.stream_id * 2 + kGradientStream;
      out.gradient = add_noise(std::move(part), s, counts_.g).gradient;
      ++counts_.g;
    }
    out.eval_counts = counts_;
    return out;
  }

  const EvalCounts& counts() const noexcept { return counts_; }
  const Problem& problem() const noexcept { return *problem_; }
  const NoiseSpec& noise() const noexcept { return noise_; }

 private:
  const Problem* problem_;
  NoiseSpec noise_;
  EvalCounts counts_;
};

/// Counter-free convenience wrapper.
inline OracleResult evaluate(const Problem& problem, ConstSpan x, bool want_f, bool want_g) {
  Oracle oracle(problem);
  return oracle.evaluate(x, want_f, want_g);
}

}  // namespace offo
