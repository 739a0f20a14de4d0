#include <gtest/gtest.h>

#include <cmath>

#include "error.hpp"
#include "regress.hpp"
#include "test_support.hpp"

namespace hifi {
namespace {

using testing::Gaussian;
using testing::MakeTable;
using testing::Standardized;

// Closed-form two-regressor OLS without intercept, for cross-checking.
double TwoColumnMse(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& y) {
  const double saa = a.dot(a), sbb = b.dot(b), sab = a.dot(b), say = a.dot(y), sby = b.dot(y);
  const double det = saa * sbb - sab * sab;
  const double ca = (sbb * say - sab * sby) / det;
  const double cb = (saa * sby - sab * say) / det;
  return (y - ca * a - cb * b).squaredNorm() / static_cast<double>(y.size());
}

double OneColumnMse(const Eigen::VectorXd& a, const Eigen::VectorXd& y) {
  const double c = a.dot(y) / a.dot(a);
  return (y - c * a).squaredNorm() / static_cast<double>(y.size());
}

Dataset RandomThree(size_t n, uint64_t seed) {
  auto a = Gaussian(n, seed), b = Gaussian(n, seed + 1), c = Gaussian(n, seed + 2), e = Gaussian(n, seed + 3);
  std::vector<double> y(n);
  for (size_t i = 0; i < n; ++i) {
    b[i] += 0.4 * a[i];
    y[i] = 0.5 * a[i] - 0.3 * b[i] + 0.2 * c[i] * c[i] + e[i];
  }
  return Standardized(MakeTable({"a", "b", "c"}, {a, b, c}, y));
}

TEST(FeatureSubsetTest, SortedUniqueAndOrdered) {
  const FeatureSubset s({3, 1});
  EXPECT_EQ(s.indices(), (std::vector<int>{1, 3}));
  EXPECT_EQ(s.With(2).indices(), (std::vector<int>{1, 2, 3}));
  EXPECT_THROW(FeatureSubset({1, 1}), Error);
  EXPECT_THROW(s.With(3), Error);
  EXPECT_THROW(s.With(-1), Error);
  EXPECT_TRUE(FeatureSubset({5}) < FeatureSubset({0, 1}));
  EXPECT_TRUE(FeatureSubset({0, 2}) < FeatureSubset({1, 2}));
  EXPECT_EQ(FeatureSubset().ToString({"a"}), "{}");
  EXPECT_EQ(FeatureSubset({0, 1}).ToString({"a", "b"}), "a+b");
}

TEST(FitTest, PerfectFit) {
  const std::vector<double> x = {1, 2, 4, 7};
  const Dataset d = Standardized(MakeTable({"x"}, {x}, x));
  const FittedModel m = Fit(d, {}, true, 0);
  ASSERT_EQ(m.coefficients.rows(), 1);
  EXPECT_NEAR(m.coefficients(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(m.error, 0.0, 1e-24);
  EXPECT_NEAR(Mse(m), 0.0, 1e-24);
}

TEST(FitTest, EmptyModelPredictsZero) {
  const Dataset d = RandomThree(57, 11);
  const FittedModel m = Fit(d, {}, false, 0);
  EXPECT_EQ(m.coefficients.rows(), 0);
  EXPECT_EQ(m.residuals, d.target());
  EXPECT_NEAR(m.error, 56.0 / 57.0, 1e-13);
}

TEST(FitTest, DuplicateColumnsMinimumNorm) {
  const auto x = Gaussian(300, 5), e = Gaussian(300, 6);
  std::vector<double> y(300);
  for (size_t i = 0; i < 300; ++i) y[i] = x[i] + e[i];
  const Dataset d = Standardized(MakeTable({"x", "z"}, {x, x}, y));
  const FittedModel both = Fit(d, FeatureSubset({1}), true, 0);
  const FittedModel single = Fit(d, {}, true, 0);
  EXPECT_EQ(both.rank, 1);
  EXPECT_NEAR(both.coefficients(0, 0), both.coefficients(1, 0), 1e-12);
  EXPECT_NEAR(both.coefficients(0, 0) * 2, single.coefficients(0, 0), 1e-12);
  EXPECT_LT((both.residuals - single.residuals).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(FitTest, MatchesClosedForm) {
  const Dataset d = RandomThree(400, 21);
  const Eigen::VectorXd a = d.column(0), b = d.column(1), y = d.target();
  LocoEvaluator eval(d);
  EXPECT_NEAR(eval.Error(FeatureSubset({0, 1})), TwoColumnMse(a, b, y), 1e-12);
  EXPECT_NEAR(eval.Loco(0, FeatureSubset({1})), OneColumnMse(b, y) - TwoColumnMse(a, b, y), 1e-12);
  EXPECT_NEAR(eval.PairwisePower(0), y.squaredNorm() / 400.0 - OneColumnMse(a, y), 1e-12);
}

TEST(MseTest, RowsAndEmptyRows) {
  const Dataset d = RandomThree(20, 1);
  const FittedModel m = Fit(d, {}, false, 0);
  const std::vector<size_t> rows = {0, 3};
  const double expect = (d.target()(0) * d.target()(0) + d.target()(3) * d.target()(3)) / 2;
  EXPECT_DOUBLE_EQ(Mse(m, std::span<const size_t>(rows)), expect);
  const std::vector<size_t> none;
  EXPECT_THROW(Mse(m, std::span<const size_t>(none)), Error);
}

TEST(LocoTest, EmptySubsetEqualsPairwisePower) {
  const Dataset d = RandomThree(200, 3);
  LocoEvaluator eval(d);
  for (int j = 0; j < 3; ++j) EXPECT_EQ(eval.Loco(j, {}), eval.PairwisePower(j));
  EXPECT_EQ(Loco(d, 1, {}), PairwisePower(d, 1));
}

TEST(LocoTest, NestedMonotonicityInSample) {
  const Dataset d = RandomThree(150, 8);
  LocoEvaluator eval(d);
  for (const auto& big : OrderedSubsets({0, 1, 2})) {
    for (int j : big) {
      std::vector<int> rest;
      for (int k : big) {
        if (k != j) rest.push_back(k);
      }
      EXPECT_LE(eval.Error(big), eval.Error(FeatureSubset(rest)) + 1e-12);
      EXPECT_GE(eval.Loco(j, FeatureSubset(rest)), -1e-12);
    }
  }
}

TEST(LocoTest, IndependentDriverNearZero) {
  const size_t n = 20000;
  const auto x = Gaussian(n, 41), y = Gaussian(n, 42);
  const Dataset d = Standardized(MakeTable({"x"}, {x}, y));
  EXPECT_LT(std::abs(PairwisePower(d, 0)), 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST(LocoTest, SuppressorAndDuplicatePopulationValues) {
  const size_t n = 100000;
  const auto x = Gaussian(n, 51), eta = Gaussian(n, 52), e = Gaussian(n, 53);
  std::vector<double> z(n), yd(n);
  for (size_t i = 0; i < n; ++i) {
    z[i] = x[i] + eta[i];
    yd[i] = x[i] + e[i];
  }
  const Dataset sup = Standardized(MakeTable({"x", "z"}, {x, z}, eta));
  EXPECT_NEAR(Loco(sup, 0, FeatureSubset({1})), 0.5, 0.02);
  EXPECT_NEAR(PairwisePower(sup, 0), 0.0, 0.02);
  const Dataset dup = Standardized(MakeTable({"x", "z"}, {x, x}, yd));
  EXPECT_NEAR(Loco(dup, 0, FeatureSubset({1})), 0.0, 1e-9);
  EXPECT_NEAR(PairwisePower(dup, 0), 0.5, 0.02);
}

TEST(LocoTest, PerfectAndHalfExplainedVariance) {
  const size_t n = 100000;
  const auto x = Gaussian(n, 61), e = Gaussian(n, 62);
  std::vector<double> y(n);
  for (size_t i = 0; i < n; ++i) y[i] = x[i] + e[i];
  EXPECT_NEAR(PairwisePower(Standardized(MakeTable({"x"}, {x}, y)), 0), 0.5, 0.02);
  EXPECT_NEAR(PairwisePower(Standardized(MakeTable({"x"}, {x}, x)), 0), (n - 1.0) / n, 1e-9);
}

TEST(CacheTest, TransparentAndDeterministic) {
  const Dataset d = RandomThree(300, 9);
  LocoEvaluator cached(d, {}, DefaultRegressor(), 8192);
  LocoEvaluator uncached(d, {}, DefaultRegressor(), 0);
  LocoEvaluator tiny(d, {}, DefaultRegressor(), 2);
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& s : OrderedSubsets({1, 2})) {
      const double a = cached.Loco(0, s);
      EXPECT_EQ(a, uncached.Loco(0, s));
      EXPECT_EQ(a, tiny.Loco(0, s));
    }
  }
  EXPECT_GT(cached.cache().hits(), 0u);
  EXPECT_EQ(uncached.cache().hits(), 0u);
  EXPECT_LE(tiny.cache().size(), 2u);
  const FittedModel f1 = Fit(d, FeatureSubset({1, 2}), true, 0);
  const FittedModel f2 = Fit(d, FeatureSubset({1, 2}), true, 0);
  EXPECT_EQ(f1.coefficients, f2.coefficients);
  EXPECT_EQ(f1.residuals, f2.residuals);
}

TEST(CacheTest, KeyIncludesScheme) {
  const Dataset d = RandomThree(100, 4);
  ModelCache cache;
  int fits = 0;
  auto fit = [&] {
    ++fits;
    return FittedModel{};
  };
  cache.GetOrFit({EvalScheme::InSample(), FeatureSubset({0})}, fit);
  cache.GetOrFit({EvalScheme::CrossFit(5, 1), FeatureSubset({0})}, fit);
  cache.GetOrFit({EvalScheme::CrossFit(5, 2), FeatureSubset({0})}, fit);
  cache.GetOrFit({EvalScheme::CrossFit(5, 2), FeatureSubset({0})}, fit);
  EXPECT_EQ(fits, 3);
  EXPECT_EQ(cache.hits(), 1u);
}

TEST(CrossFitTest, OutOfFoldResiduals) {
  const Dataset d = RandomThree(103, 14);
  const EvalScheme scheme = EvalScheme::CrossFit(4, 99);
  const auto folds = FoldAssignment(103, 4, 99);
  std::vector<int> sizes(4, 0);
  for (int f : folds) ++sizes[static_cast<size_t>(f)];
  EXPECT_LE(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()), 1);

  const FittedModel m = Fit(d, FeatureSubset({1}), true, 0, scheme);
  EXPECT_EQ(m.coefficients.cols(), 4);
  for (int f = 0; f < 4; ++f) {
    std::vector<Eigen::Index> train;
    for (Eigen::Index i = 0; i < 103; ++i) {
      if (folds[static_cast<size_t>(i)] != f) train.push_back(i);
    }
    Eigen::MatrixXd x(static_cast<Eigen::Index>(train.size()), 2);
    Eigen::VectorXd y(static_cast<Eigen::Index>(train.size()));
    for (size_t r = 0; r < train.size(); ++r) {
      x.row(static_cast<Eigen::Index>(r)) = d.values().row(train[r]).head(2);
      y(static_cast<Eigen::Index>(r)) = d.target()(train[r]);
    }
    const Eigen::VectorXd beta = x.colPivHouseholderQr().solve(y);
    for (Eigen::Index i = 0; i < 103; ++i) {
      if (folds[static_cast<size_t>(i)] != f) continue;
      const double pred = d.values().row(i).head(2).dot(beta);
      EXPECT_NEAR(m.residuals(i), d.target()(i) - pred, 1e-10);
    }
  }
  EXPECT_THROW(EvalScheme::CrossFit(1, 0).Validate(), Error);
}

TEST(LocoWithColumnTest, OriginalColumnReproducesLoco) {
  const Dataset d = RandomThree(120, 2);
  LocoEvaluator eval(d);
  const FeatureSubset s({1, 2});
  EXPECT_NEAR(eval.LocoWithColumn(0, s, 2, d.column(2)), eval.Loco(0, s), 1e-12);
  EXPECT_THROW(eval.LocoWithColumn(0, FeatureSubset({1}), 2, d.column(2)), Error);
}

}  // namespace
}  // namespace hifi
