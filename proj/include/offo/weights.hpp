#pragma once

#include <string>

#include "offo/criticality.hpp"

namespace offo {

enum class WeightScheme { adagrad, maxchi };

inline const char* to_string(WeightScheme s) noexcept {
  return s == WeightScheme::adagrad ? "adagrad" : "maxchi";
}

inline WeightScheme weight_scheme_from_string(const std::string& s) {
  if (s == "adagrad") return WeightScheme::adagrad;
  if (s == "maxchi") return WeightScheme::maxchi;
  throw std::invalid_argument("unknown weight scheme '" + s + "'");
}

struct WeightParams {
  WeightScheme scheme = WeightScheme::adagrad;
  double sigma = 0.01;  // floor constant
  double theta = 1.0;
  double nu = 0.1;  // maxchi only
  double mu = 0.1;  // maxchi only

  void validate() const {
    if (!(sigma > 0.0 && sigma <= 1.0)) throw std::invalid_argument("weights: sigma must lie in (0,1]");
    if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("weights: theta must lie in (0,1]");
    if (scheme == WeightScheme::maxchi && !(nu > 0.0 && nu <= mu && mu < 1.0)) {
      throw std::invalid_argument("weights: need 0 < nu <= mu < 1");
    }
  }
};

/// Per-coordinate weight accumulator.
///
/// adagrad: w_{i,k} = sqrt(sigma + sum_{j<=k} chi_{i,j}^2), i.e. the upper end of the
///          admissible interval [sqrt(theta) v, v].
/// maxchi:  w_{i,k} = max(sigma, v_{i,k}) * (k+1)^nu with v_{i,k} = max_{j<=k} |chi_{i,j}|.
class WeightState {
 public:
  WeightState(WeightParams params, std::size_t n) : params_(params), accum_(n, 0.0) {
    params_.validate();
  }

  /// Fold in chi_k and return w_k. Advances k by one.
  Vector update(const ChiVector& chi_k) {
    linalg::check_same_size(chi_k.size(), accum_.size(), "weights_update");
    ++k_;
    Vector w(accum_.size());
    if (params_.scheme == WeightScheme::adagrad) {
      for (std::size_t i = 0; i < w.size(); ++i) {
        accum_[i] += chi_k[i] * chi_k[i];
        w[i] = std::sqrt(params_.sigma + accum_[i]);
      }
    } else {
      const double growth = std::pow(static_cast<double>(k_ + 1), params_.nu);
      for (std::size_t i = 0; i < w.size(); ++i) {
        accum_[i] = std::max(accum_[i], std::abs(chi_k[i]));
        w[i] = std::max(params_.sigma, accum_[i]) * growth;
      }
    }
    return w;
  }

  /// Checked variant: `k` must be exactly the next iteration index.
  Vector update(const ChiVector& chi_k, long k) {
    if (k != k_ + 1) {
      throw std::logic_error("weights_update: expected iteration " + std::to_string(k_ + 1) +
                             ", got " + std::to_string(k));
    }
    return update(chi_k);
  }

  /// Provable lower bound on every weight this state can produce.
  double floor() const noexcept {
    return params_.scheme == WeightScheme::adagrad ? std::sqrt(params_.sigma) : params_.sigma;
  }

  const WeightParams& params() const noexcept { return params_; }
  /// Sum of squares (adagrad) or running max (maxchi), per coordinate.
  const Vector& accum() const noexcept { return accum_; }
  long k() const noexcept { return k_; }

 private:
  WeightParams params_;
  Vector accum_;
  long k_ = -1;
};

inline WeightState weights_init(WeightParams params, std::size_t n) { return WeightState(params, n); }

inline double weight_floor(const WeightState& s) noexcept { return s.floor(); }

}  // namespace offo
