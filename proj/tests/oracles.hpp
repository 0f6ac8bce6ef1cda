#pragma once

// Reference computations written independently of the library, used to freeze expected values.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "offo/offo.hpp"

namespace oracles {

using offo::Vector;

/// Small but legal dimension for every registry family.
inline std::size_t small_dim(const std::string& name) {
  if (name == "quad-1d") return 1;
  if (name == "rosenbrock" || name == "rosenbrock-box") return 2;
  if (name == "obstacle-lower" || name == "obstacle-both" || name == "torsion" || name == "journal-bearing") return 16;
  if (name == "explin") return 12;
  return 8;
}

/// Uniform point in the box; infinite sides are replaced by x0 +- 2.
inline Vector random_feasible(const offo::Problem& p, std::mt19937_64& rng) {
  Vector x(p.dim);
  for (std::size_t i = 0; i < p.dim; ++i) {
    double lo = p.bounds.lower[i], hi = p.bounds.upper[i];
    if (!std::isfinite(lo)) lo = (std::isfinite(hi) ? std::min(hi, p.x0[i]) : p.x0[i]) - 2.0;
    if (!std::isfinite(hi)) hi = std::max(lo, p.x0[i]) + 2.0;
    x[i] = std::uniform_real_distribution<double>(lo, hi)(rng);
  }
  return x;
}

/// Central differences; steps shrink near a bound so every probe stays feasible.
inline Vector fd_gradient(const offo::Problem& p, const Vector& x, double h = 1e-6) {
  Vector g(p.dim);
  for (std::size_t i = 0; i < p.dim; ++i) {
    const double scale = std::max(1.0, std::abs(x[i]));
    double hp = h * scale, hm = h * scale;
    hp = std::min(hp, p.bounds.upper[i] - x[i]);
    hm = std::min(hm, x[i] - p.bounds.lower[i]);
    Vector a = x, b = x;
    a[i] += hp;
    b[i] -= hm;
    g[i] = (p.value(a) - p.value(b)) / (hp + hm);
  }
  return g;
}

/// Lower-branch Lambert W by bisection of w e^w = z on [-60, -1].
inline double lambert_bisect(double z) {
  double lo = -60.0, hi = -1.0;  // w e^w increases from ~0- at lo down to -1/e at hi
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid * std::exp(mid) > z) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Dense BFGS recursion B <- B - B s s^T B / s^T B s + y y^T / y^T s starting from b0 I.
inline Eigen::MatrixXd dense_bfgs(std::size_t n, double b0, const std::vector<std::pair<Vector, Vector>>& pairs) {
  Eigen::MatrixXd b = b0 * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const auto& [sv, yv] : pairs) {
    const Eigen::Map<const Eigen::VectorXd> s(sv.data(), static_cast<Eigen::Index>(n));
    const Eigen::Map<const Eigen::VectorXd> y(yv.data(), static_cast<Eigen::Index>(n));
    const Eigen::VectorXd bs = b * s;
    b = b - bs * bs.transpose() / s.dot(bs) + y * y.transpose() / y.dot(s);
  }
  return b;
}

/// |min over feasible t in [0, alpha] of -g t sign(g)| evaluated on a dense grid.
inline double chi_grid(double x, double lo, double hi, double g, double alpha, int points = 200001) {
  if (g == 0.0) return 0.0;
  double best = 0.0;
  for (int j = 0; j < points; ++j) {
    const double t = alpha * static_cast<double>(j) / static_cast<double>(points - 1);
    const double xt = g > 0.0 ? x - t : x + t;
    if (xt < lo || xt > hi) continue;
    best = std::min(best, -std::abs(g) * t);
  }
  return std::abs(best);
}

/// Plain Adagrad with a sigma-shifted accumulator: w = sqrt(sigma + sum g^2), x <- x - g / w.
inline std::vector<Vector> adagrad_iterates(const std::function<Vector(const Vector&)>& grad, Vector x,
                                            double sigma, int iterations) {
  std::vector<Vector> out{x};
  Vector acc(x.size(), 0.0);
  for (int k = 0; k < iterations; ++k) {
    const Vector g = grad(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
      acc[i] += g[i] * g[i];
      x[i] -= g[i] / std::sqrt(sigma + acc[i]);
    }
    out.push_back(x);
  }
  return out;
}

/// Profile area computed directly from the step function rho(t) on a fine grid of t.
inline double area_by_quadrature(const std::vector<double>& ratios, std::size_t instances, int points = 2000001) {
  double sum = 0.0;
  const double h = 9.0 / static_cast<double>(points - 1);
  for (int j = 0; j < points; ++j) {
    const double t = 1.0 + h * j;
    std::size_t c = 0;
    for (double r : ratios) c += r <= t ? 1 : 0;
    const double rho = static_cast<double>(c) / static_cast<double>(instances);
    sum += (j == 0 || j == points - 1 ? 0.5 : 1.0) * rho * h;
  }
  return sum / 10.0;
}

}  // namespace oracles
