#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "dataset.hpp"
#include "error.hpp"
#include "test_support.hpp"

namespace hifi {
namespace {

CsvOptions Target(const std::string& t) {
  CsvOptions o;
  o.target = t;
  return o;
}

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kArgument;
}

std::string MessageOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(Csv, ThreeRowsTwoFeatures) {
  std::istringstream in("a,b,y\n1,4,7\n2,5,8\n3,6,10\n");
  const RawTable t = ParseCsv(in, Target("y"));
  EXPECT_EQ(t.n_rows(), 3u);
  EXPECT_EQ(t.n_features(), 2u);
  EXPECT_EQ(t.feature_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(t.target, (std::vector<double>{7, 8, 10}));
  EXPECT_EQ(t.features[1], (std::vector<double>{4, 5, 6}));
}

TEST(Csv, QuotedHeaderBomAndCrlf) {
  std::istringstream in("\xEF\xBB\xBF\"a\",\"y\"\r\n1,2\r\n3,5\r\n");
  const RawTable t = ParseCsv(in, Target("y"));
  EXPECT_EQ(t.feature_names, std::vector<std::string>{"a"});
  EXPECT_EQ(t.target, (std::vector<double>{2, 5}));
}

TEST(Csv, IdColumnsCarriedButNotModeled) {
  CsvOptions o = Target("y");
  o.id_columns = {"province"};
  o.exclude_columns = {"c"};
  std::istringstream in("province,a,c,y\n\"Madrid, ES\",1,9,2\nSevilla,2,9,4\n");
  const RawTable t = ParseCsv(in, o);
  EXPECT_EQ(t.feature_names, std::vector<std::string>{"a"});
  ASSERT_EQ(t.id_names, std::vector<std::string>{"province"});
  EXPECT_EQ(t.ids[0][0], "Madrid, ES");
  EXPECT_EQ(t.excluded_columns, std::vector<std::string>{"c"});
  EXPECT_EQ(t.column_order.size(), 4u);
}

TEST(Csv, Errors) {
  auto parse = [](const std::string& text, CsvOptions o) {
    return [=] {
      std::istringstream in(text);
      ParseCsv(in, o);
    };
  };
  EXPECT_EQ(CodeOf(parse("a,b\n1,2\n", Target("y"))), ErrorCode::kConfig);
  EXPECT_EQ(CodeOf(parse("a,y\n1,2,3\n", Target("y"))), ErrorCode::kIo);
  const std::string bad = MessageOf(parse("a,y\n1,2\nfoo,3\n", Target("y")));
  EXPECT_NE(bad.find("row 2"), std::string::npos) << bad;
  EXPECT_NE(bad.find("'a'"), std::string::npos) << bad;
  EXPECT_EQ(CodeOf(parse("a,y\n1,\n2,3\n", Target("y"))), ErrorCode::kIo);
  EXPECT_EQ(CodeOf([] { LoadCsv("/nonexistent/file.csv", Target("y")); }), ErrorCode::kIo);
}

TEST(Csv, DropMissingRows) {
  CsvOptions o = Target("y");
  o.drop_missing_rows = true;
  std::istringstream in("a,b,y\n1,2,3\n4,,6\n7,8,10\n2,1,NA\n");
  const RawTable t = ParseCsv(in, o);
  EXPECT_EQ(t.n_rows(), 2u);
  EXPECT_EQ(t.dropped_rows, (std::vector<size_t>{2, 4}));
  const auto [data, report] = Standardize(t);
  EXPECT_EQ(data.n_patterns(), 2u);
  EXPECT_EQ(report.dropped_rows, (std::vector<size_t>{2, 4}));
}

TEST(Csv, WriteRoundTrip) {
  CsvOptions o = Target("y");
  o.id_columns = {"id"};
  std::istringstream in("id,a,y\nr1,0.1,3\n\"r,2\",-2.5e-7,4\n");
  const RawTable t = ParseCsv(in, o);
  const auto path = testing::TempDir("csv_roundtrip") / "t.csv";
  WriteCsv(t, path);
  const RawTable back = LoadCsv(path, o);
  EXPECT_EQ(back.features, t.features);
  EXPECT_EQ(back.target, t.target);
  EXPECT_EQ(back.ids, t.ids);
}

TEST(Standardize, ThreePoints) {
  const Dataset d = testing::Standardized(testing::MakeTable({"a"}, {{1, 2, 3}}, {3, 1, 2}));
  EXPECT_NEAR(d.values()(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(d.values()(1, 0), 0.0, 1e-15);
  EXPECT_NEAR(d.values()(2, 0), 1.0, 1e-15);
}

TEST(Standardize, ZeroVarianceNamesColumn) {
  const std::string msg = MessageOf(
      [] { Standardize(testing::MakeTable({"a", "flat"}, {{1, 2, 3}, {5, 5, 5}}, {1, 2, 4})); });
  EXPECT_NE(msg.find("zero variance"), std::string::npos);
  EXPECT_NE(msg.find("flat"), std::string::npos);
}

TEST(Standardize, IdempotentAndMomentsInvert) {
  const auto a = testing::Gaussian(500, 1);
  auto b = testing::Gaussian(500, 2);
  for (auto& v : b) v = 40 + 7 * v;
  const auto y = testing::Gaussian(500, 3);
  const RawTable raw = testing::MakeTable({"a", "b"}, {a, b}, y);
  const auto [d1, report] = Standardize(raw);

  std::vector<std::vector<double>> cols(2, std::vector<double>(500));
  std::vector<double> t(500);
  for (size_t i = 0; i < 500; ++i) {
    for (size_t j = 0; j < 2; ++j) cols[j][i] = d1.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    t[i] = d1.target()(static_cast<Eigen::Index>(i));
  }
  const Dataset d2 = testing::Standardized(testing::MakeTable({"a", "b"}, cols, t));
  EXPECT_LT((d1.values() - d2.values()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((d1.target() - d2.target()).cwiseAbs().maxCoeff(), 1e-10);

  const ColumnReport* rb = report.Find("b");
  ASSERT_NE(rb, nullptr);
  EXPECT_EQ(rb->role, "feature");
  double worst = 0.0;
  for (size_t i = 0; i < 500; ++i) worst = std::max(worst, std::abs(d1.values()(static_cast<Eigen::Index>(i), 1) * rb->sd + rb->mean - b[i]));
  EXPECT_LT(worst, 1e-9);
  EXPECT_EQ(report.columns.size(), 3u);
}

TEST(Standardize, RowOrderPreserved) {
  const Dataset d = testing::Standardized(testing::MakeTable({"a"}, {{10, 30, 20, 40}}, {1, 2, 3, 5}));
  EXPECT_LT(d.values()(0, 0), d.values()(2, 0));
  EXPECT_LT(d.values()(2, 0), d.values()(1, 0));
  EXPECT_LT(d.values()(1, 0), d.values()(3, 0));
}

TEST(DatasetInvariants, RejectsBadInput) {
  Eigen::MatrixXd x(2, 1);
  x << 1, 2;
  Eigen::VectorXd y(2);
  y << -std::sqrt(0.5), std::sqrt(0.5);
  EXPECT_THROW(Dataset(x, y, {"a"}), Error);
  Eigen::MatrixXd ok(2, 1);
  ok << -std::sqrt(0.5), std::sqrt(0.5);
  EXPECT_NO_THROW(Dataset(ok, y, {"a"}));
  ok(0, 0) = std::nan("");
  EXPECT_THROW(Dataset(ok, y, {"a"}), Error);
}

}  // namespace
}  // namespace hifi
