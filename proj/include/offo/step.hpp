#pragma once

#include "offo/criticality.hpp"
#include "offo/curvature.hpp"

namespace offo {

/// Everything computed for one trial step.
struct StepBundle {
  Vector radii;
  Vector s_linear;
  double gamma = 1.0;
  Vector s_quadratic;
  Vector s_final;
  double model_quadratic = 0.0;  // model value at s_quadratic
  double model_value = 0.0;      // model value at s_final
};

/// Delta_i = chi_i / w_i.
inline Vector radii(const ChiVector& chi_k, ConstSpan w) {
  linalg::check_same_size(chi_k.size(), w.size(), "radii");
  Vector out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w[i] > 0.0)) throw std::invalid_argument("radii: weights must be positive");
    out[i] = chi_k[i] / w[i];
  }
  return out;
}

/// Minimizer of g^T s over {x + s in F, |s_i| <= radius_i}; separable, so solved per coordinate.
inline Vector gcp_linear(ConstSpan x, ConstSpan g, const Bounds& bounds, ConstSpan radius) {
  linalg::check_same_size(x.size(), g.size(), "gcp_linear");
  linalg::check_same_size(x.size(), radius.size(), "gcp_linear");
  Vector s(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (g[i] == 0.0) continue;
    const double d = delta_feasible(x[i], bounds.lower[i], bounds.upper[i], g[i], radius[i]);
    s[i] = g[i] > 0.0 ? -d : d;
  }
  return s;
}

/// g^T s + 0.5 s^T B s.
template <SymmetricOperator Op>
double model_value(ConstSpan g, const Op& B, ConstSpan s) {
  Vector bs(s.size());
  B.apply(s, bs);
  return linalg::dot(g, s) + 0.5 * linalg::dot(s, bs);
}

struct QuadraticCauchy {
  double gamma = 1.0;
  Vector s_quadratic;
};

/// s^Q = gamma s^L with gamma = min(1, |g^T s^L| / s^L^T B s^L) under positive curvature, else 1.
template <SymmetricOperator Op>
QuadraticCauchy gcp_quadratic(ConstSpan s_linear, ConstSpan g, const Op& B) {
  Vector bs(s_linear.size());
  B.apply(s_linear, bs);
  const double curv = linalg::dot(s_linear, bs);
  double gamma = 1.0;
  if (curv > 0.0) gamma = std::min(1.0, std::abs(linalg::dot(g, s_linear)) / curv);
  QuadraticCauchy out{gamma, Vector(s_linear.begin(), s_linear.end())};
  if (gamma != 1.0) {
    for (double& v : out.s_quadratic) v *= gamma;
  }
  return out;
}

struct RefineOptions {
  double tau = 1.0;
  std::size_t max_inner = 0;
  double relative_tolerance = 1e-4;
};

namespace detail {

// Largest t >= 0 with lo <= s + t p <= hi, and the index that blocks it.
inline std::pair<double, std::size_t> max_feasible_step(ConstSpan s, ConstSpan p, ConstSpan lo,
                                                        ConstSpan hi) {
  double t = kInf;
  std::size_t blocking = s.size();
  for (std::size_t i = 0; i < s.size(); ++i) {
    double ti = kInf;
    if (p[i] > 0.0) {
      ti = (hi[i] - s[i]) / p[i];
    } else if (p[i] < 0.0) {
      ti = (lo[i] - s[i]) / p[i];
    }
    ti = std::max(ti, 0.0);
    if (ti < t) {
      t = ti;
      blocking = i;
    }
  }
  return {t, blocking};
}

}  // namespace detail

/// Improve s^Q by projected truncated conjugate gradients on the model over the box
/// max(l - x, -Delta) <= s <= min(u - x, Delta). Variables sitting on a face with the
/// model gradient pushing outward are frozen; CG runs on the rest and restarts whenever
/// a new face is hit. Stops on negative curvature (after moving to the box boundary),
/// on the relative residual test, or after `max_inner` products. The result is kept only
/// if its model value does not exceed tau * model(s^Q); otherwise s^Q is returned.
template <SymmetricOperator Op>
Vector refine(ConstSpan x, ConstSpan g, const Op& B, const Bounds& bounds, ConstSpan radius,
              ConstSpan s_quadratic, const RefineOptions& opt) {
  const std::size_t n = x.size();
  Vector sq(s_quadratic.begin(), s_quadratic.end());
  if (opt.max_inner == 0) return sq;

  Vector lo(n), hi(n);
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = std::max(bounds.lower[i] - x[i], -radius[i]);
    hi[i] = std::min(bounds.upper[i] - x[i], radius[i]);
    if (lo[i] > 0.0) lo[i] = 0.0;  // rounding in l - x
    if (hi[i] < 0.0) hi[i] = 0.0;
  }

  Vector s = sq;
  for (std::size_t i = 0; i < n; ++i) s[i] = std::clamp(s[i], lo[i], hi[i]);

  Vector r(n), bp(n), p(n);
  std::vector<char> free(n);
  std::size_t inner = 0;
  double r0_norm = -1.0;
  bool done = false;

  while (!done && inner < opt.max_inner) {
    B.apply(s, r);
    for (std::size_t i = 0; i < n; ++i) r[i] += g[i];
    for (std::size_t i = 0; i < n; ++i) {
      const bool at_lo = s[i] <= lo[i] && r[i] > 0.0;
      const bool at_hi = s[i] >= hi[i] && r[i] < 0.0;
      free[i] = !(lo[i] == hi[i] || at_lo || at_hi);
      if (!free[i]) r[i] = 0.0;
    }
    double rr = linalg::dot(r, r);
    if (r0_norm < 0.0) r0_norm = std::sqrt(rr);
    if (std::sqrt(rr) <= opt.relative_tolerance * r0_norm || rr == 0.0) break;
    for (std::size_t i = 0; i < n; ++i) p[i] = -r[i];

    bool restart = false;
    while (!restart && inner < opt.max_inner) {
      B.apply(p, bp);
      ++inner;
      for (std::size_t i = 0; i < n; ++i) {
        if (!free[i]) bp[i] = 0.0;
      }
      const double curv = linalg::dot(p, bp);
      const auto [tmax, blocking] = detail::max_feasible_step(s, p, lo, hi);
      if (!(curv > 0.0)) {
        if (std::isfinite(tmax)) {
          linalg::axpy(tmax, p, s);
          if (blocking < n) s[blocking] = p[blocking] > 0.0 ? hi[blocking] : lo[blocking];
        }
        done = true;
        break;
      }
      const double alpha = rr / curv;
      if (alpha >= tmax) {
        linalg::axpy(tmax, p, s);
        if (blocking < n) s[blocking] = p[blocking] > 0.0 ? hi[blocking] : lo[blocking];
        restart = true;
        break;
      }
      linalg::axpy(alpha, p, s);
      linalg::axpy(alpha, bp, r);
      const double rr_new = linalg::dot(r, r);
      if (std::sqrt(rr_new) <= opt.relative_tolerance * r0_norm) {
        done = true;
        break;
      }
      const double beta = rr_new / rr;
      rr = rr_new;
      for (std::size_t i = 0; i < n; ++i) p[i] = free[i] ? -r[i] + beta * p[i] : 0.0;
    }
  }

  for (std::size_t i = 0; i < n; ++i) s[i] = std::clamp(s[i], lo[i], hi[i]);
  for (double v : s) {
    if (!std::isfinite(v)) return sq;
  }
  const double mq = model_value(g, B, sq);
  const double ms = model_value(g, B, s);
  if (ms <= mq && ms <= opt.tau * mq) return s;
  return sq;
}

/// Full trial-step pipeline: linear GCP, quadratic GCP, then refinement when B is nonzero.
template <CurvatureModel Model>
StepBundle compute_step(ConstSpan x, ConstSpan g, const Bounds& bounds, Vector radius, const Model& B,
                        const RefineOptions& opt, double premultiplier = 1.0) {
  StepBundle out;
  out.radii = std::move(radius);
  out.s_linear = gcp_linear(x, g, bounds, out.radii);
  if (premultiplier != 1.0) {
    for (double& v : out.s_linear) v *= premultiplier;
  }
  if (B.is_zero()) {
    out.gamma = 1.0;
    out.s_quadratic = out.s_linear;
    out.s_final = out.s_linear;
    out.model_quadratic = linalg::dot(g, out.s_linear);
    out.model_value = out.model_quadratic;
    return out;
  }
  auto q = gcp_quadratic(out.s_linear, g, B);
  out.gamma = q.gamma;
  out.s_quadratic = std::move(q.s_quadratic);
  out.model_quadratic = model_value(g, B, out.s_quadratic);
  out.s_final = refine(x, g, B, bounds, out.radii, out.s_quadratic, opt);
  out.model_value = model_value(g, B, out.s_final);
  return out;
}

}  // namespace offo
