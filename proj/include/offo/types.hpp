#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace offo {

using Vector = std::vector<double>;
using ConstSpan = std::span<const double>;
using MutSpan = std::span<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Thrown when a point lies outside the feasible box.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Thrown when an oracle returns a non-finite value. Carries the offending point.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, Vector x)
      : std::runtime_error(what), x_(std::move(x)) {}
  const Vector& point() const noexcept { return x_; }

 private:
  Vector x_;
};

namespace linalg {

inline double dot(ConstSpan a, ConstSpan b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double norm2(ConstSpan a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(ConstSpan a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// y += alpha * x
inline void axpy(double alpha, ConstSpan x, MutSpan y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void check_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

}  // namespace linalg

/// FNV-1a over raw bytes; used for iterate digests and stable name hashing.
inline std::uint64_t fnv1a(const void* data, std::size_t len,
                           std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::string hex_digest(ConstSpan x) {
  const std::uint64_t h = fnv1a(x.data(), x.size_bytes());
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) out[static_cast<std::size_t>(15 - i)] = kHex[(h >> (4 * i)) & 0xF];
  return out;
}

}  // namespace offo
