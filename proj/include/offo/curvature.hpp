#pragma once

#include <concepts>
#include <deque>
#include <optional>

#include "offo/types.hpp"

namespace offo {

/// Symmetric operator exposed only through products.
template <class Op>
concept SymmetricOperator = requires(const Op& op, ConstSpan v, MutSpan out) {
  { op.apply(v, out) } -> std::same_as<void>;
};

/// Curvature model driven by the solvers: products, secant updates and a norm bound.
template <class M>
concept CurvatureModel = SymmetricOperator<M> && requires(M& m, const M& cm, ConstSpan s, ConstSpan y) {
  { m.push(s, y) } -> std::same_as<bool>;
  { cm.norm_bound() } -> std::convertible_to<double>;
  { cm.is_zero() } -> std::convertible_to<bool>;
};

template <SymmetricOperator Op>
Vector apply(const Op& op, ConstSpan v) {
  Vector out(v.size());
  op.apply(v, out);
  return out;
}

/// max(1, ||B||) estimated with `iters` steps of power iteration.
template <SymmetricOperator Op>
double power_norm_estimate(const Op& op, std::size_t n, int iters = 50) {
  if (n == 0) return 1.0;
  Vector v(n), w(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * static_cast<double>(i % 7);
  double nv = linalg::norm2(v);
  for (double& vi : v) vi /= nv;
  double est = 0.0;
  for (int it = 0; it < iters; ++it) {
    op.apply(v, w);
    est = linalg::norm2(w);
    if (!(est > 0.0) || !std::isfinite(est)) break;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / est;
  }
  return std::max(1.0, std::isfinite(est) ? est : kInf);
}

/// B = 0.
struct ZeroOperator {
  void apply(ConstSpan, MutSpan out) const { std::fill(out.begin(), out.end(), 0.0); }
  bool push(ConstSpan, ConstSpan) { return false; }
  double norm_bound() const { return 1.0; }
  bool is_zero() const { return true; }
};

/// Fixed dense symmetric matrix (row-major). Secant pushes are ignored.
class DenseOperator {
 public:
  DenseOperator(std::size_t n, Vector row_major) : n_(n), a_(std::move(row_major)) {
    linalg::check_same_size(a_.size(), n * n, "DenseOperator");
  }

  void apply(ConstSpan v, MutSpan out) const {
    for (std::size_t i = 0; i < n_; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n_; ++j) acc += a_[i * n_ + j] * v[j];
      out[i] = acc;
    }
  }
  bool push(ConstSpan, ConstSpan) { return false; }
  double norm_bound() const { return power_norm_estimate(*this, n_); }
  bool is_zero() const {
    return std::all_of(a_.begin(), a_.end(), [](double x) { return x == 0.0; });
  }

 private:
  std::size_t n_;
  Vector a_;
};

/// Limited-memory BFGS approximation of the Hessian itself (not its inverse).
///
/// Stored pairs are unrolled into B = b0 I + sum_j (b_j b_j^T - a_j a_j^T), with
/// a_j = B_{j-1} s_j / sqrt(s_j^T B_{j-1} s_j) and b_j = y_j / sqrt(y_j^T s_j).
/// An empty memory represents B = 0.
class SecantMemory {
 public:
  static constexpr double kCurvatureThreshold = 1e-8;

  SecantMemory(std::size_t n, std::size_t capacity) : n_(n), capacity_(capacity) {}

  /// Admit (s, y) iff s^T y > 1e-8 ||s|| ||y||. Returns whether it was stored.
  bool push(ConstSpan s, ConstSpan y) {
    linalg::check_same_size(s.size(), n_, "secant_push");
    linalg::check_same_size(y.size(), n_, "secant_push");
    const double ns = linalg::norm2(s);
    if (!(ns > 0.0)) throw std::invalid_argument("secant_push: zero step");
    if (capacity_ == 0) return false;
    const double sy = linalg::dot(s, y);
    const double ny = linalg::norm2(y);
    if (!(sy > kCurvatureThreshold * ns * ny) || !std::isfinite(sy)) return false;
    pairs_.push_back({Vector(s.begin(), s.end()), Vector(y.begin(), y.end())});
    if (pairs_.size() > capacity_) pairs_.pop_front();
    b0_scale_ = linalg::dot(y, y) / sy;
    rebuild();
    norm_cache_.reset();
    return true;
  }

  void apply(ConstSpan v, MutSpan out) const {
    linalg::check_same_size(v.size(), n_, "apply_B");
    if (pairs_.empty()) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    for (std::size_t i = 0; i < n_; ++i) out[i] = b0_scale_ * v[i];
    for (std::size_t j = 0; j < pairs_.size(); ++j) {
      linalg::axpy(linalg::dot(b_[j], v), b_[j], out);
      linalg::axpy(-linalg::dot(a_[j], v), a_[j], out);
    }
  }

  /// Cached until the next admitted pair.
  double norm_bound() const {
    if (pairs_.empty()) return 1.0;
    if (!norm_cache_) norm_cache_ = power_norm_estimate(*this, n_);
    return *norm_cache_;
  }
  bool is_zero() const noexcept { return pairs_.empty(); }

  std::size_t size() const noexcept { return pairs_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t dim() const noexcept { return n_; }
  double b0_scale() const noexcept { return b0_scale_; }

  struct Pair {
    Vector s;
    Vector y;
  };
  const std::deque<Pair>& pairs() const noexcept { return pairs_; }

 private:
  void rebuild() {
    a_.assign(pairs_.size(), Vector(n_));
    b_.assign(pairs_.size(), Vector(n_));
    Vector bs(n_);
    for (std::size_t j = 0; j < pairs_.size(); ++j) {
      const Vector& s = pairs_[j].s;
      const Vector& y = pairs_[j].y;
      for (std::size_t i = 0; i < n_; ++i) bs[i] = b0_scale_ * s[i];
      for (std::size_t l = 0; l < j; ++l) {
        linalg::axpy(linalg::dot(b_[l], s), b_[l], bs);
        linalg::axpy(-linalg::dot(a_[l], s), a_[l], bs);
      }
      const double sbs = linalg::dot(s, bs);
      const double sy = linalg::dot(s, y);
      // Rounding can leave s^T B s nonpositive on ill-conditioned pairs; such a pair contributes nothing.
      if (!(sbs > kCurvatureThreshold * b0_scale_ * linalg::dot(s, s)) || !std::isfinite(sbs)) {
        std::fill(a_[j].begin(), a_[j].end(), 0.0);
        std::fill(b_[j].begin(), b_[j].end(), 0.0);
        continue;
      }
      const double ra = 1.0 / std::sqrt(sbs);
      const double rb = 1.0 / std::sqrt(sy);
      for (std::size_t i = 0; i < n_; ++i) {
        a_[j][i] = bs[i] * ra;
        b_[j][i] = y[i] * rb;
      }
    }
  }

  std::size_t n_;
  std::size_t capacity_;
  std::deque<Pair> pairs_;
  double b0_scale_ = 1.0;
  std::vector<Vector> a_;
  std::vector<Vector> b_;
  mutable std::optional<double> norm_cache_;
};

inline double operator_norm_bound(const SecantMemory& m) { return m.norm_bound(); }

static_assert(CurvatureModel<SecantMemory>);
static_assert(CurvatureModel<ZeroOperator>);
static_assert(CurvatureModel<DenseOperator>);

}  // namespace offo
