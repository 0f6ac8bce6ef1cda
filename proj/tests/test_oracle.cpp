#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace offo;

namespace {

Problem half_norm_sq(Bounds bounds) {
  Problem p;
  p.name = "half-norm";
  p.dim = 2;
  p.bounds = std::move(bounds);
  p.value = [](ConstSpan x) { return 0.5 * linalg::dot(x, x); };
  p.gradient = [](ConstSpan x, MutSpan g) { std::copy(x.begin(), x.end(), g.begin()); };
  p.x0 = {0.0, 0.0};
  return p;
}

}  // namespace

TEST(Oracle, GradientOnlyRequest) {
  const Problem p = half_norm_sq(Bounds::unbounded(2));
  Oracle o(p);
  const auto r = o.evaluate(Vector{1.0, 0.0}, false, true);
  EXPECT_FALSE(r.f_value.has_value());
  ASSERT_TRUE(r.gradient.has_value());
  EXPECT_EQ(*r.gradient, (Vector{1.0, 0.0}));
  EXPECT_EQ(r.eval_counts, (EvalCounts{0, 1}));
}

TEST(Oracle, ValueOnlyRequest) {
  const Problem p = half_norm_sq(Bounds::unbounded(2));
  const auto r = evaluate(p, Vector{1.0, 0.0}, true, false);
  ASSERT_TRUE(r.f_value.has_value());
  EXPECT_DOUBLE_EQ(*r.f_value, 0.5);
  EXPECT_FALSE(r.gradient.has_value());
}

TEST(Oracle, InfeasiblePointIsDomainError) {
  const Problem p = half_norm_sq(Bounds::box(2, -kInf, 1.0));
  EXPECT_THROW(evaluate(p, Vector{2.0, 0.0}, false, true), DomainError);
}

TEST(Oracle, NothingRequested) {
  const Problem p = half_norm_sq(Bounds::unbounded(2));
  EXPECT_THROW(evaluate(p, Vector{0.0, 0.0}, false, false), std::invalid_argument);
}

TEST(Oracle, NonFiniteOutputCarriesPoint) {
  Problem p = half_norm_sq(Bounds::unbounded(2));
  p.gradient = [](ConstSpan, MutSpan g) { g[0] = std::nan(""); g[1] = 0.0; };
  try {
    evaluate(p, Vector{0.25, 0.5}, false, true);
    FAIL() << "expected NumericalFailure";
  } catch (const NumericalFailure& e) {
    EXPECT_EQ(e.point(), (Vector{0.25, 0.5}));
  }
}

TEST(Noise, ZeroLevelIsIdentity) {
  OracleResult r;
  r.f_value = 3.0;
  r.gradient = Vector{1.0, -2.0};
  const auto out = add_noise(r, NoiseSpec{0.0, 5, 1}, 7);
  EXPECT_EQ(*out.f_value, 3.0);
  EXPECT_EQ(*out.gradient, (Vector{1.0, -2.0}));
}

TEST(Noise, RelativePerturbationUsesSeededStream) {
  OracleResult r;
  r.gradient = Vector{1.0, 1.0};
  const NoiseSpec spec{0.05, 11, 3};
  const auto out = add_noise(r, spec, 0);
  // Recover z from the unit gradient and re-apply to another gradient with the same draws.
  const double z1 = ((*out.gradient)[0] - 1.0) / 0.05;
  const double z2 = ((*out.gradient)[1] - 1.0) / 0.05;
  OracleResult r2;
  r2.gradient = Vector{2.0, -4.0};
  const auto out2 = add_noise(r2, spec, 0);
  EXPECT_NEAR((*out2.gradient)[0], 2.0 * (1.0 + 0.05 * z1), 1e-15);
  EXPECT_NEAR((*out2.gradient)[1], -4.0 * (1.0 + 0.05 * z2), 1e-15);
  EXPECT_NE(z1, z2);
}

TEST(Noise, SameCallIndexIsBitwiseIdentical) {
  OracleResult r;
  r.gradient = Vector(50, 1.0);
  const NoiseSpec spec{0.05, 42, 9};
  EXPECT_EQ(*add_noise(r, spec, 17).gradient, *add_noise(r, spec, 17).gradient);
  EXPECT_NE(*add_noise(r, spec, 17).gradient, *add_noise(r, spec, 18).gradient);
  EXPECT_NE(*add_noise(r, spec, 17).gradient, *add_noise(r, NoiseSpec{0.05, 42, 10}, 17).gradient);
}

TEST(Noise, EqualSpecsGiveIdenticalSequences) {
  const Problem p = registry_get("bqp-band", 8);
  Oracle a(p, {0.15, 3, 4}), b(p, {0.15, 3, 4});
  for (int k = 0; k < 20; ++k) {
    const auto ra = a.evaluate(p.x0, true, true);
    const auto rb = b.evaluate(p.x0, true, true);
    EXPECT_EQ(*ra.f_value, *rb.f_value);
    EXPECT_EQ(*ra.gradient, *rb.gradient);
  }
  EXPECT_EQ(a.counts(), (EvalCounts{20, 20}));
}

TEST(Noise, UnbiasedAtDeskScale) {
  const double level = 0.05;
  const int draws = 100000;
  OracleResult r;
  r.gradient = Vector{1.0};
  double sum = 0.0;
  for (int k = 0; k < draws; ++k) sum += (*add_noise(r, {level, 2024, 0}, static_cast<std::uint64_t>(k)).gradient)[0] - 1.0;
  EXPECT_LE(std::abs(sum / draws), 3.0 * level / std::sqrt(static_cast<double>(draws)));
}

TEST(Noise, LevelOutsideUnitIntervalRejected) {
  OracleResult r;
  r.gradient = Vector{1.0};
  EXPECT_THROW(add_noise(r, {1.5, 0, 0}, 0), std::invalid_argument);
}

class RegistryOracle : public ::testing::TestWithParam<std::string> {};

TEST_P(RegistryOracle, RejectsEveryInfeasiblePoint) {
  const Problem p = registry_get(GetParam(), oracles::small_dim(GetParam()));
  std::mt19937_64 rng(7);
  std::size_t tried = 0;
  for (int t = 0; t < 1000; ++t) {
    Vector x = oracles::random_feasible(p, rng);
    const std::size_t i = rng() % p.dim;
    const bool above = (rng() & 1U) != 0U;
    const double edge = above ? p.bounds.upper[i] : p.bounds.lower[i];
    if (!std::isfinite(edge)) continue;
    x[i] = above ? edge + 1e-9 * (1.0 + std::abs(edge)) : edge - 1e-9 * (1.0 + std::abs(edge));
    ++tried;
    EXPECT_THROW(evaluate(p, x, true, true), DomainError);
  }
  if (tried == 0) GTEST_SKIP() << "unbounded problem";
}

TEST_P(RegistryOracle, GradientMatchesFiniteDifferences) {
  const Problem p = registry_get(GetParam(), oracles::small_dim(GetParam()));
  std::mt19937_64 rng(11);
  for (int t = 0; t < 100; ++t) {
    const Vector x = oracles::random_feasible(p, rng);
    Vector g(p.dim);
    p.gradient(x, g);
    const Vector fd = oracles::fd_gradient(p, x);
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < p.dim; ++i) {
      err = std::max(err, std::abs(g[i] - fd[i]));
      scale = std::max(scale, std::abs(g[i]));
    }
    EXPECT_LE(err, 1e-5 * std::max(1.0, scale)) << "point " << t;
  }
}

INSTANTIATE_TEST_SUITE_P(All, RegistryOracle, ::testing::ValuesIn(registry_names()),
                         [](const auto& info) {
                           std::string s = info.param;
                           std::replace(s.begin(), s.end(), '-', '_');
                           return s;
                         });
