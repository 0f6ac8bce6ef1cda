#pragma once

#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "offo/oracle.hpp"

namespace offo {

namespace detail {

/// Sparse symmetric matrix stored by rows; used for the quadratic families.
struct SparseSym {
  std::size_t n = 0;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;

  explicit SparseSym(std::size_t dim) : n(dim), rows(dim) {}

  void add(std::size_t i, std::size_t j, double v) {
    rows[i].emplace_back(j, v);
    if (i != j) rows[j].emplace_back(i, v);
  }

  void apply(ConstSpan x, MutSpan out) const {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (const auto& [j, v] : rows[i]) acc += v * x[j];
      out[i] = acc;
    }
  }

  /// Gershgorin bound on the spectral norm.
  double row_sum_bound() const {
    double m = 0.0;
    for (const auto& r : rows) {
      double s = 0.0;
      for (const auto& [j, v] : r) s += std::abs(v);
      m = std::max(m, s);
    }
    return m;
  }
};

/// Solve A z = b by conjugate gradients (A symmetric positive definite).
inline Vector cg_solve(const SparseSym& a, ConstSpan b) {
  const std::size_t n = a.n;
  Vector z(n, 0.0), r(b.begin(), b.end()), p = r, ap(n);
  double rr = linalg::dot(r, r);
  const double stop = 1e-28 * std::max(1.0, rr);
  for (std::size_t it = 0; it < 10 * n + 100 && rr > stop; ++it) {
    a.apply(p, ap);
    const double alpha = rr / linalg::dot(p, ap);
    linalg::axpy(alpha, p, z);
    linalg::axpy(-alpha, ap, r);
    const double rr_new = linalg::dot(r, r);
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + (rr_new / rr) * p[i];
    rr = rr_new;
  }
  return z;
}

/// f(x) = 0.5 x^T A x - b^T x with exact gradient and Hessian products.
inline Problem make_quadratic(std::string name, std::shared_ptr<const SparseSym> a, Vector b, Bounds bounds,
                              Vector x0) {
  Problem p;
  p.name = std::move(name);
  p.dim = a->n;
  p.bounds = std::move(bounds);
  p.x0 = std::move(x0);
  auto bb = std::make_shared<const Vector>(std::move(b));
  p.value = [a, bb](ConstSpan x) {
    Vector ax(x.size());
    a->apply(x, ax);
    return 0.5 * linalg::dot(x, ax) - linalg::dot(*bb, x);
  };
  p.gradient = [a, bb](ConstSpan x, MutSpan g) {
    a->apply(x, g);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= (*bb)[i];
  };
  p.hessian_vector = [a](ConstSpan, ConstSpan v, MutSpan out) { a->apply(v, out); };
  p.known_lipschitz = a->row_sum_bound();
  return p;
}

// Minimum of 0.5 d t^2 - b t over [lo, hi], by enumeration of endpoints and the stationary point.
inline double min_1d_quadratic(double d, double b, double lo, double hi) {
  auto q = [&](double t) { return 0.5 * d * t * t - b * t; };
  double best = kInf;
  if (std::isfinite(lo)) best = std::min(best, q(lo));
  if (std::isfinite(hi)) best = std::min(best, q(hi));
  if (d > 0.0) {
    const double t = b / d;
    if (t >= lo && t <= hi) best = std::min(best, q(t));
  } else if (!std::isfinite(lo) || !std::isfinite(hi)) {
    if (d < 0.0 || b != 0.0) return -kInf;
  }
  return best;
}

inline Problem make_diagonal_quadratic(std::string name, Vector d, Vector b, Bounds bounds, Vector x0) {
  const std::size_t n = d.size();
  auto a = std::make_shared<SparseSym>(n);
  double flow = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    a->add(i, i, d[i]);
    flow += min_1d_quadratic(d[i], b[i], bounds.lower[i], bounds.upper[i]);
  }
  Problem p = make_quadratic(std::move(name), a, std::move(b), std::move(bounds), std::move(x0));
  p.known_flow = flow;
  return p;
}

// 5-point Laplacian stencil (unscaled) on an m x m interior grid with zero Dirichlet boundary.
inline std::shared_ptr<SparseSym> grid_laplacian(std::size_t m) {
  auto a = std::make_shared<SparseSym>(m * m);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      const std::size_t i = r * m + c;
      a->add(i, i, 4.0);
      if (c + 1 < m) a->add(i, i + 1, -1.0);
      if (r + 1 < m) a->add(i, i + m, -1.0);
    }
  }
  return a;
}

inline std::size_t grid_side(std::size_t n, const std::string& name) {
  std::size_t m = 1;
  while (m * m < n) ++m;
  if (m * m != n || m < 2) {
    throw std::invalid_argument("registry: '" + name + "' needs a square dimension >= 4, got " + std::to_string(n));
  }
  return m;
}

inline double unconstrained_quadratic_min(const SparseSym& a, ConstSpan b) {
  const Vector z = cg_solve(a, b);
  return -0.5 * linalg::dot(b, z);
}

}  // namespace detail

/// Names accepted by registry_get.
inline const std::vector<std::string>& registry_names() {
  static const std::vector<std::string> names{
      "boxquad-convex", "ncvx-quad", "convex-quad", "bqp-band",     "obstacle-lower", "obstacle-both",
      "torsion",        "explin",    "genroseb",    "ncvx-coupled", "qing-box", "journal-bearing",  "rosenbrock-box", "rosenbrock", "quad-1d"};
  return names;
}

/// Build a registry problem. Throws std::invalid_argument on unknown names or dimensions.
inline Problem registry_get(const std::string& name, std::size_t n) {
  using namespace detail;
  if (n == 0) throw std::invalid_argument("registry: dimension must be positive");
  auto require = [&](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument("registry: '" + name + "' " + what + ", got n=" + std::to_string(n));
  };

  Problem p;
  if (name == "boxquad-convex") {
    // D = diag(1..n); unconstrained minimizers cycle through interior, above and below [0,1].
    Vector d(n), b(n);
    static constexpr double kTarget[3] = {0.5, 1.5, -0.5};
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = static_cast<double>(i + 1);
      b[i] = d[i] * kTarget[i % 3];
    }
    p = make_diagonal_quadratic(name, d, b, Bounds::box(n, 0.0, 1.0), Vector(n, 0.25));
  } else if (name == "ncvx-quad") {
    // Indefinite diagonal: even coordinates convex, odd ones concave, on [0,2].
    Vector d(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = i % 2 == 0 ? 1.0 + static_cast<double>(i % 4) : -(0.5 + 0.5 * static_cast<double>(i % 3));
      b[i] = 0.5 + 0.25 * static_cast<double>(i % 5);
    }
    p = make_diagonal_quadratic(name, d, b, Bounds::box(n, 0.0, 2.0), Vector(n, 1.0));
  } else if (name == "convex-quad") {
    // tridiag(-1, 2.5, -1), spectrum inside [0.5, 4.5], no bounds.
    auto a = std::make_shared<SparseSym>(n);
    for (std::size_t i = 0; i < n; ++i) {
      a->add(i, i, 2.5);
      if (i + 1 < n) a->add(i, i + 1, -1.0);
    }
    Vector b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = 1.0 + 0.5 * static_cast<double>(i % 3);
    const double flow = unconstrained_quadratic_min(*a, b);
    p = make_quadratic(name, a, b, Bounds::unbounded(n), Vector(n, 0.0));
    p.known_flow = flow;
  } else if (name == "bqp-band") {
    // Banded convex QP on [-0.5, 0.5] with alternating linear term.
    auto a = std::make_shared<SparseSym>(n);
    for (std::size_t i = 0; i < n; ++i) {
      a->add(i, i, 3.0);
      if (i + 1 < n) a->add(i, i + 1, -1.0);
      if (i + 2 < n) a->add(i, i + 2, 0.25);
    }
    Vector b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = 2.0 * (static_cast<double>(i % 3) - 1.0) + 0.3;
    const double flow = unconstrained_quadratic_min(*a, b);
    p = make_quadratic(name, a, b, Bounds::box(n, -0.5, 0.5), Vector(n, 0.0));
    p.known_flow = flow;
  } else if (name == "obstacle-lower" || name == "obstacle-both") {
    // Membrane over the unit square with unit load and oscillating obstacle(s); finite-element scaling.
    const std::size_t m = grid_side(n, name);
    auto a = grid_laplacian(m);
    const double h = 1.0 / static_cast<double>(m + 1);
    Bounds bounds = Bounds::unbounded(n);
    Vector x0(n);
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < m; ++c) {
        const std::size_t i = r * m + c;
        const double xs = static_cast<double>(c + 1) * h;
        const double ys = static_cast<double>(r + 1) * h;
        const double wave = std::sin(9.2 * std::numbers::pi * xs) * std::sin(9.3 * std::numbers::pi * ys);
        bounds.lower[i] = wave * wave * wave;
        if (name == "obstacle-both") bounds.upper[i] = wave * wave + 0.02;
        x0[i] = std::max(bounds.lower[i], std::min(bounds.upper[i], 0.0));
      }
    }
    Vector b(n, h * h);
    const double flow = unconstrained_quadratic_min(*a, b);
    p = make_quadratic(name, a, b, std::move(bounds), std::move(x0));
    p.known_flow = flow;
  } else if (name == "torsion") {
    // Elastic-plastic torsion: |u| bounded by the distance to the boundary, load 5, started at the upper bound.
    const std::size_t m = grid_side(n, name);
    auto a = grid_laplacian(m);
    const double h = 1.0 / static_cast<double>(m + 1);
    Vector b(n, 5.0 * h * h);
    Bounds bounds{Vector(n), Vector(n)};
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < m; ++c) {
        const std::size_t i = r * m + c;
        const double dist = static_cast<double>(std::min({r + 1, c + 1, m - r, m - c})) * h;
        bounds.lower[i] = -dist;
        bounds.upper[i] = dist;
      }
    }
    Vector x0 = bounds.upper;
    const double flow = unconstrained_quadratic_min(*a, b);
    p = make_quadratic(name, a, b, std::move(bounds), std::move(x0));
    p.known_flow = flow;
  } else if (name == "journal-bearing") {
    // Pressure in a lubricated journal bearing on (0, 2 pi) x (0, 20), eccentricity 0.1, u >= 0.
    const std::size_t m = grid_side(n, name);
    constexpr double ecc = 0.1;
    const double hx = 2.0 * std::numbers::pi / static_cast<double>(m + 1);
    const double hy = 20.0 / static_cast<double>(m + 1);
    auto wq = [&](double xi) { return std::pow(1.0 + ecc * std::cos(xi), 3); };
    auto a = std::make_shared<SparseSym>(n);
    Vector b(n), x0(n);
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < m; ++c) {
        const std::size_t i = r * m + c;
        const double xi = static_cast<double>(c + 1) * hx;
        // x-edges to the left and right, y-edges below and above (zero boundary values)
        const double left = hy / hx * wq(xi - 0.5 * hx);
        const double right = hy / hx * wq(xi + 0.5 * hx);
        const double vert = hx / hy * wq(xi);
        a->add(i, i, left + right + 2.0 * vert);
        if (c + 1 < m) a->add(i, i + 1, -right);
        if (r + 1 < m) a->add(i, i + m, -vert);
        b[i] = ecc * std::sin(xi) * hx * hy;
        x0[i] = std::max(std::sin(xi), 0.0);
      }
    }
    const double flow = unconstrained_quadratic_min(*a, b);
    p = make_quadratic(name, a, b, Bounds{Vector(n, 0.0), Vector(n, kInf)}, std::move(x0));
    p.known_flow = flow;
  } else if (name == "explin") {
    // Exponential coupling on the first tenth, linear pull 10 i toward the upper bound everywhere.
    require(n >= 10, "needs n >= 10");
    const std::size_t coupled = n / 10;
    auto c = std::make_shared<Vector>(n);
    for (std::size_t i = 0; i < n; ++i) (*c)[i] = 10.0 * static_cast<double>(i + 1);
    p.name = name;
    p.dim = n;
    p.bounds = Bounds::box(n, 0.0, 10.0);
    p.x0 = Vector(n, 0.0);
    p.value = [c, coupled](ConstSpan x) {
      double f = 0.0;
      for (std::size_t i = 0; i < coupled; ++i) f += std::exp(0.1 * x[i] * x[i + 1]);
      for (std::size_t i = 0; i < x.size(); ++i) f -= (*c)[i] * x[i];
      return f;
    };
    p.gradient = [c, coupled](ConstSpan x, MutSpan g) {
      for (std::size_t i = 0; i < x.size(); ++i) g[i] = -(*c)[i];
      for (std::size_t i = 0; i < coupled; ++i) {
        const double e = 0.1 * std::exp(0.1 * x[i] * x[i + 1]);
        g[i] += e * x[i + 1];
        g[i + 1] += e * x[i];
      }
    };
    // f >= coupled terms (positive) minus the linear part at the upper bound.
    double flow = 0.0;
    for (std::size_t i = 0; i < n; ++i) flow -= (*c)[i] * 10.0;
    p.known_flow = flow;
  } else if (name == "ncvx-coupled") {
    // sum_i 0.5 p_i (i+1) (x_i + x_{2i+1 mod n} + x_{3i+2 mod n})^2, p_i = +1 on the first half, -1 after.
    require(n >= 3, "needs n >= 3");
    auto a = std::make_shared<SparseSym>(n);
    double flow = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t idx[3] = {i, (2 * i + 1) % n, (3 * i + 2) % n};
      const double q = (i < n / 2 ? 1.0 : -1.0) * static_cast<double>(i + 1);
      for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t c = r; c < 3; ++c) a->add(idx[r], idx[c], r != c && idx[r] == idx[c] ? 2.0 * q : q);
      }
      // each term is q t^2 / 2 with t in [0.3, 30]
      flow += q > 0.0 ? 0.5 * q * 0.09 : 0.5 * q * 900.0;
    }
    p = make_quadratic(name, a, Vector(n, 0.0), Bounds::box(n, 0.1, 10.0), Vector(n, 0.5));
    p.known_flow = flow;
  } else if (name == "qing-box") {
    // sum (x_i^2 - (i+1))^2 on [0.5, 9.5]; separable, minimizers sqrt(i+1) clipped to the box.
    p.name = name;
    p.dim = n;
    p.bounds = Bounds::box(n, 0.5, 9.5);
    p.x0 = Vector(n, 1.0);
    p.value = [](ConstSpan x) {
      double f = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = x[i] * x[i] - static_cast<double>(i + 1);
        f += t * t;
      }
      return f;
    };
    p.gradient = [](ConstSpan x, MutSpan g) {
      for (std::size_t i = 0; i < x.size(); ++i) g[i] = 4.0 * x[i] * (x[i] * x[i] - static_cast<double>(i + 1));
    };
    double flow = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = std::clamp(std::sqrt(static_cast<double>(i + 1)), 0.5, 9.5);
      flow += (t * t - static_cast<double>(i + 1)) * (t * t - static_cast<double>(i + 1));
    }
    p.known_flow = flow;
  } else if (name == "genroseb" || name == "rosenbrock-box" || name == "rosenbrock") {
    require(n >= 2, "needs n >= 2");
    const bool gen = name == "genroseb";
    p.name = name;
    p.dim = n;
    if (gen) {
      // 1 + sum 100 (x_{i+1} - x_i^2)^2 + (x_{i+1} - 1)^2 on [0.2, 0.5].
      p.bounds = Bounds::box(n, 0.2, 0.5);
      p.x0 = Vector(n);
      for (std::size_t i = 0; i < n; ++i) {
        p.x0[i] = std::clamp(static_cast<double>(i + 1) / static_cast<double>(n + 1), 0.2, 0.5);
      }
      p.value = [](ConstSpan x) {
        double f = 1.0;
        for (std::size_t i = 0; i + 1 < x.size(); ++i) {
          const double t = x[i + 1] - x[i] * x[i];
          f += 100.0 * t * t + (x[i + 1] - 1.0) * (x[i + 1] - 1.0);
        }
        return f;
      };
      p.gradient = [](ConstSpan x, MutSpan g) {
        std::fill(g.begin(), g.end(), 0.0);
        for (std::size_t i = 0; i + 1 < x.size(); ++i) {
          const double t = x[i + 1] - x[i] * x[i];
          g[i] += -400.0 * x[i] * t;
          g[i + 1] += 200.0 * t + 2.0 * (x[i + 1] - 1.0);
        }
      };
      p.known_flow = 1.0;
    } else {
      // sum 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2, optionally on [-2, 2].
      p.bounds = name == "rosenbrock-box" ? Bounds::box(n, -2.0, 2.0) : Bounds::unbounded(n);
      p.x0 = Vector(n);
      for (std::size_t i = 0; i < n; ++i) p.x0[i] = i % 2 == 0 ? -1.2 : 1.0;
      p.value = [](ConstSpan x) {
        double f = 0.0;
        for (std::size_t i = 0; i + 1 < x.size(); ++i) {
          const double t = x[i + 1] - x[i] * x[i];
          f += 100.0 * t * t + (1.0 - x[i]) * (1.0 - x[i]);
        }
        return f;
      };
      p.gradient = [](ConstSpan x, MutSpan g) {
        std::fill(g.begin(), g.end(), 0.0);
        for (std::size_t i = 0; i + 1 < x.size(); ++i) {
          const double t = x[i + 1] - x[i] * x[i];
          g[i] += -400.0 * x[i] * t - 2.0 * (1.0 - x[i]);
          g[i + 1] += 200.0 * t;
        }
      };
      p.known_flow = 0.0;
    }
  } else if (name == "quad-1d") {
    require(n == 1, "is one-dimensional");
    p = make_diagonal_quadratic(name, {1.0}, {0.0}, Bounds::unbounded(1), {1.0});
  } else {
    throw std::invalid_argument("registry: unknown problem '" + name + "'");
  }
  p.validate();
  return p;
}

/// Copy of `p` with the objective multiplied by `factor` > 0. Bounds and start are kept; known constants follow.
inline Problem scaled(Problem p, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw std::invalid_argument("scaled: factor must be positive");
  p.name += "-scaled";
  p.value = [f = std::move(p.value), factor](ConstSpan x) { return factor * f(x); };
  p.gradient = [g = std::move(p.gradient), factor](ConstSpan x, MutSpan out) {
    g(x, out);
    for (double& v : out) v *= factor;
  };
  if (p.hessian_vector) {
    p.hessian_vector = [h = std::move(p.hessian_vector), factor](ConstSpan x, ConstSpan v, MutSpan out) {
      h(x, v, out);
      for (double& o : out) o *= factor;
    };
  }
  if (p.known_lipschitz) *p.known_lipschitz *= factor;
  if (p.known_flow) *p.known_flow *= factor;
  return p;
}

struct SuiteEntry {
  std::string name;
  std::size_t dim;
};

/// Default benchmark suite: one instance per structural family at n = 100 (10 x 10 grids).
inline std::vector<SuiteEntry> desk_suite() {
  return {{"boxquad-convex", 100}, {"ncvx-quad", 100},       {"ncvx-coupled", 100}, {"convex-quad", 100},
          {"bqp-band", 100},       {"obstacle-lower", 100},  {"obstacle-both", 100}, {"torsion", 100},
          {"journal-bearing", 100}, {"explin", 100},         {"qing-box", 100},     {"genroseb", 100}};
}

/// Dimension used when none is given: the suite instance, else the smallest sensible size.
inline std::size_t default_dim(const std::string& name) {
  for (const auto& e : desk_suite()) {
    if (e.name == name) return e.dim;
  }
  if (name == "quad-1d") return 1;
  if (name == "rosenbrock" || name == "rosenbrock-box") return 2;
  throw std::invalid_argument("registry: unknown problem '" + name + "'");
}

}  // namespace offo
