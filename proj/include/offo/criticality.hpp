#pragma once

#include "offo/oracle.hpp"
#include "offo/types.hpp"

namespace offo {

/// Largest move along -sign(g_i) e_i within [0, alpha] that stays inside [lo, hi].
/// The g_i == 0 case is resolved before the sign is looked at.
inline double delta_feasible(double x, double lo, double hi, double g, double alpha) noexcept {
  if (g == 0.0) return 0.0;
  const double room = g < 0.0 ? hi - x : x - lo;
  return std::max(0.0, std::min(alpha, room));
}

/// Componentwise feasible linear decrease chi_i(x, alpha) = delta_i * |g_i|.
struct ChiVector {
  Vector values;
  double alpha = 1.0;

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

inline ChiVector chi(ConstSpan x, ConstSpan g, const Bounds& bounds, double alpha = 1.0) {
  linalg::check_same_size(x.size(), g.size(), "chi");
  linalg::check_same_size(x.size(), bounds.size(), "chi");
  if (!bounds.contains(x)) throw DomainError("chi: infeasible point");
  if (!(alpha >= 0.0)) throw std::invalid_argument("chi: alpha must be nonnegative");
  ChiVector out{Vector(x.size()), alpha};
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.values[i] = delta_feasible(x[i], bounds.lower[i], bounds.upper[i], g[i], alpha) * std::abs(g[i]);
  }
  return out;
}

/// sqrt(sum chi_i^2); zero exactly at first-order critical points.
inline double criticality_norm(const ChiVector& c) noexcept { return linalg::norm2(c.values); }

}  // namespace offo
