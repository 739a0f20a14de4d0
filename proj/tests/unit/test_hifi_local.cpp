#include <gtest/gtest.h>

#include <cmath>

#include "error.hpp"
#include "hifi_local.hpp"
#include "test_support.hpp"

namespace hifi {
namespace {

using testing::Gaussian;
using testing::MakeTable;
using testing::Standardized;
using testing::Synthetic;

SurrogateConfig Config(uint64_t seed) {
  SurrogateConfig c;
  c.seed = seed;
  return c;
}

double NaivePearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    ma += a[i] / n;
    mb += b[i] / n;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

TEST(LocalLocoTest, MeanEqualsGlobal) {
  const Dataset d = Synthetic(SynthFamily::kCorrelatedBlock, 700, 5, std::nullopt, 6);
  LocoEvaluator eval(d);
  for (const auto& s : OrderedSubsets({1, 2, 4})) {
    EXPECT_NEAR(LocalLocoColumn(eval, 0, s).mean(), eval.Loco(0, s), 1e-12);
  }
  EXPECT_NEAR(LocalLoco(eval, 0, FeatureSubset({1}), 3), LocalLocoColumn(eval, 0, FeatureSubset({1}))(3), 0.0);
  EXPECT_THROW(LocalLoco(eval, 0, {}, 700), Error);
}

TEST(LocalLocoTest, ExactModelsGiveZero) {
  // y = a + b exactly: the full model and the {b} model with a duplicate of a
  // predict every pattern perfectly.
  const auto a = Gaussian(50, 1), b = Gaussian(50, 2);
  std::vector<double> y(50);
  for (size_t i = 0; i < 50; ++i) y[i] = a[i] + b[i];
  const Dataset d = Standardized(MakeTable({"a", "b", "a2"}, {a, b, a}, y));
  LocoEvaluator eval(d);
  const Eigen::VectorXd l = LocalLocoColumn(eval, 0, FeatureSubset({1, 2}));
  EXPECT_LT(l.cwiseAbs().maxCoeff(), 1e-20);
}

TEST(LocalLocoTest, SuppressorHasNegativePatterns) {
  const Dataset d = Synthetic(SynthFamily::kSuppressor, 2000, 7, 0.5);
  LocoEvaluator eval(d);
  const Eigen::VectorXd l = LocalLocoColumn(eval, 0, FeatureSubset({1}));
  EXPECT_LT(l.minCoeff(), 0.0);
  EXPECT_GT(l.mean(), 0.0);
}

TEST(LocalScoresTest, AveragingAndLocalIdentities) {
  const Dataset d = Synthetic(SynthFamily::kCorrelatedBlock, 900, 11, std::nullopt, 6);
  LocoEvaluator eval(d);
  const auto decomps = DecomposeAll(eval, Config(3));
  const LocalHifiScores s = ComputeLocalScores(eval, decomps, 2);
  const Eigen::VectorXd mu = s.unique.ColumnMeans(), mr = s.redundant.ColumnMeans(),
                        ms = s.synergistic.ColumnMeans(), ml = s.loco_max.ColumnMeans();
  for (size_t j = 0; j < decomps.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    EXPECT_NEAR(mu[jj], decomps[j].unique, 1e-10);
    EXPECT_NEAR(mr[jj], decomps[j].redundant, 1e-10);
    EXPECT_NEAR(ms[jj], decomps[j].synergistic, 1e-10);
    EXPECT_NEAR(ml[jj], decomps[j].l_max, 1e-10);
  }
  const Eigen::MatrixXd sum = s.unique.values + s.redundant.values + s.synergistic.values;
  EXPECT_LT((sum - s.loco_max.values).cwiseAbs().maxCoeff(), 1e-10);
  const LocalTriple t = LocalScores(eval, decomps[2], 17);
  EXPECT_NEAR(t.unique, s.unique.values(17, 2), 1e-15);
  EXPECT_NEAR(t.synergistic, s.synergistic.values(17, 2), 1e-15);
  EXPECT_EQ(s.unique.feature_names, d.feature_names());
  EXPECT_EQ(ScoreKindName(s.unique.kind), "u");
}

TEST(LocalScoresTest, SingleFeature) {
  const auto x = Gaussian(80, 3), e = Gaussian(80, 4);
  std::vector<double> y(80);
  for (size_t i = 0; i < 80; ++i) y[i] = x[i] + e[i];
  const Dataset d = Standardized(MakeTable({"x"}, {x}, y));
  LocoEvaluator eval(d);
  const auto decomps = DecomposeAll(eval, Config(1));
  const LocalHifiScores s = ComputeLocalScores(eval, decomps);
  const Eigen::VectorXd l0 = LocalLocoColumn(eval, 0, {});
  EXPECT_EQ(s.redundant.values.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(s.synergistic.values.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LT((s.unique.values.col(0) - l0).cwiseAbs().maxCoeff(), 1e-15);
  // Empty-model residual is y itself.
  const auto m = eval.Model(FeatureSubset({0}));
  for (Eigen::Index i = 0; i < 80; ++i) {
    EXPECT_NEAR(l0(i), d.target()(i) * d.target()(i) - m->residuals(i) * m->residuals(i), 1e-15);
  }
}

TEST(LocalScoresTest, RowPermutationInvariant) {
  SyntheticSpec spec;
  spec.family = SynthFamily::kCorrelatedBlock;
  spec.n_patterns = 400;
  spec.n_features = 4;
  spec.seed = 13;
  const RawTable raw = Generate(spec).table;
  RawTable rev = raw;
  for (auto& c : rev.features) std::reverse(c.begin(), c.end());
  std::reverse(rev.target.begin(), rev.target.end());
  const Dataset d1 = Standardized(raw), d2 = Standardized(rev);
  LocoEvaluator e1(d1), e2(d2);
  const auto a = ComputeLocalScores(e1, DecomposeAll(e1, Config(2)));
  const auto b = ComputeLocalScores(e2, DecomposeAll(e2, Config(2)));
  EXPECT_LT((a.unique.values - b.unique.values.colwise().reverse()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((a.synergistic.values - b.synergistic.values.colwise().reverse()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(ClassesTest, TertilesBalancedWithIndexTies) {
  const std::vector<double> q = {5, 6, 5, 7, 5, 6, 3, 8, 6};
  const ClassLabels c = TertileClasses(q);
  EXPECT_EQ(c.names, (std::vector<std::string>{"Low", "Medium", "High"}));
  // Rank order: 3(6) 5(0) 5(2) | 5(4) 6(1) 6(5) | 6(8) 7(3) 8(7)
  EXPECT_EQ(c.label, (std::vector<int>{0, 1, 0, 2, 1, 1, 0, 2, 2}));
  const std::vector<std::string> g = {"b", "a", "b", "c"};
  const ClassLabels h = ClassesFromColumn(g);
  EXPECT_EQ(h.names, (std::vector<std::string>{"b", "a", "c"}));
  EXPECT_EQ(h.label, (std::vector<int>{0, 1, 0, 2}));
}

TEST(PearsonTest, MatchesNaiveAndDegenerate) {
  const auto a = Gaussian(300, 1);
  auto b = Gaussian(300, 2);
  for (size_t i = 0; i < 300; ++i) b[i] += 0.3 * a[i];
  EXPECT_NEAR(PearsonCorrelation(a, b), NaivePearson(a, b), 1e-12);
  const std::vector<double> flat = {1, 1, 1}, one = {2};
  EXPECT_TRUE(std::isnan(PearsonCorrelation(flat, std::vector<double>{1, 2, 3})));
  EXPECT_TRUE(std::isnan(PearsonCorrelation(one, one)));
}

TEST(ThresholdTest, NoDiscardIsPlainCorrelation) {
  const Dataset d = Synthetic(SynthFamily::kCorrelatedBlock, 500, 19, std::nullopt, 4);
  LocoEvaluator eval(d);
  const Eigen::VectorXd u = LocalLocoColumn(eval, 0, FeatureSubset({1}));
  const std::vector<double> sweep = {0, 50, 85};
  const auto t = UThresholdAnalysis(d, 0, {u.data(), 500}, sweep, std::nullopt, 10);
  ASSERT_EQ(t.levels.size(), 3u);
  std::vector<double> x(500), y(500);
  for (Eigen::Index i = 0; i < 500; ++i) {
    x[static_cast<size_t>(i)] = d.values()(i, 0);
    y[static_cast<size_t>(i)] = d.target()(i);
  }
  EXPECT_NEAR(t.levels[0].pearson, NaivePearson(x, y), 1e-12);
  EXPECT_EQ(t.levels[0].retained.size(), 500u);
  EXPECT_EQ(t.levels[1].retained.size(), 250u);
  EXPECT_EQ(t.levels[2].retained.size(), 75u);
  EXPECT_EQ(t.bin_edges.size(), 11u);
  for (Eigen::Index i = 0; i < 500; ++i) {
    const bool kept = std::binary_search(t.levels[2].retained.begin(), t.levels[2].retained.end(), static_cast<size_t>(i));
    if (!kept) {
      for (size_t r : t.levels[2].retained) EXPECT_GE(u[static_cast<Eigen::Index>(r)], u[i]);
    }
  }
  const std::vector<double> all = {100};
  EXPECT_THROW(UThresholdAnalysis(d, 0, {u.data(), 500}, all, std::nullopt), Error);
}

TEST(ThresholdTest, ClassHistogramsCountRetained) {
  const Dataset d = Synthetic(SynthFamily::kCorrelatedBlock, 300, 23, std::nullopt, 4);
  LocoEvaluator eval(d);
  const Eigen::VectorXd u = LocalLocoColumn(eval, 0, FeatureSubset({1}));
  std::vector<double> raw(300);
  for (Eigen::Index i = 0; i < 300; ++i) raw[static_cast<size_t>(i)] = d.target()(i);
  const std::vector<double> sweep = {0, 85};
  const auto t = UThresholdAnalysis(d, 0, {u.data(), 300}, sweep, TertileClasses(raw), 30);
  for (const auto& level : t.levels) {
    ASSERT_EQ(level.classes.size(), 3u);
    size_t total = 0;
    for (const auto& c : level.classes) {
      size_t sum = 0;
      for (size_t k : c.counts) sum += k;
      EXPECT_EQ(sum, c.n);
      total += c.n;
    }
    EXPECT_EQ(total, level.retained.size());
  }
  EXPECT_EQ(t.levels[0].classes[0].n, 100u);
}

TEST(ThresholdTest, LinearSignalCorrelationNonDecreasing) {
  const size_t n = 10000;
  const auto x = Gaussian(n, 71), e = Gaussian(n, 72), w = Gaussian(n, 73);
  std::vector<double> y(n);
  for (size_t i = 0; i < n; ++i) y[i] = x[i] + e[i];
  const Dataset d = Standardized(MakeTable({"x", "w"}, {x, w}, y));
  LocoEvaluator eval(d);
  const auto f = DecomposeFeature(eval, 0, Config(5));
  const Eigen::VectorXd u = LocalLocoColumn(eval, 0, f.min_path.final_subset);
  const std::vector<double> sweep = {0, 10, 20, 30, 40, 50, 60, 70, 80};
  const auto t = UThresholdAnalysis(d, 0, {u.data(), n}, sweep, std::nullopt);
  for (size_t k = 1; k < t.levels.size(); ++k) EXPECT_GE(t.levels[k].pearson, t.levels[k - 1].pearson - 0.02);
}

}  // namespace
}  // namespace hifi
