#include "doctest.h"

#include "fvc/feature_matrix.hpp"

#include <limits>
#include <stdexcept>

using namespace fvc;

TEST_CASE("construction enforces shape and finiteness") {
  CHECK_THROWS_AS(FeatureMatrix(Eigen::MatrixXd(0, 3), ClassLabel::cover), std::invalid_argument);
  CHECK_THROWS_AS(FeatureMatrix(Eigen::MatrixXd(3, 0), ClassLabel::cover), std::invalid_argument);

  Eigen::MatrixXd bad = Eigen::MatrixXd::Ones(2, 2);
  bad(1, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(FeatureMatrix(bad, ClassLabel::stego), std::invalid_argument);
  bad(1, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(FeatureMatrix(bad, ClassLabel::stego), std::invalid_argument);
}

TEST_CASE("from_rows rejects ragged input") {
  const auto m = FeatureMatrix::from_rows({{1, 2}, {3, 4}}, ClassLabel::cover);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 2);
  CHECK(m(1, 0) == 3.0);
  CHECK_THROWS_AS(FeatureMatrix::from_rows({{1, 2}, {3}}, ClassLabel::cover),
                  std::invalid_argument);
  CHECK_THROWS_AS(FeatureMatrix::from_rows({}, ClassLabel::cover), std::invalid_argument);
}

TEST_CASE("labels and meta") {
  CHECK(to_string(ClassLabel::cover) == "cover");
  CHECK(parse_label("stego") == ClassLabel::stego);
  CHECK_FALSE(parse_label("Stego").has_value());

  Meta meta;
  meta_set(meta, "model", "Zhu-Net");
  meta_set(meta, "bpp", "0.4");
  meta_set(meta, "model", "SR-Net");
  CHECK(meta.size() == 2);
  CHECK(meta.front().first == "model");
  CHECK(meta_get(meta, "model") == "SR-Net");
  CHECK_FALSE(meta_get(meta, "missing").has_value());
}

TEST_CASE("select_rows and equality") {
  const auto m = FeatureMatrix::from_rows({{1}, {2}, {3}}, ClassLabel::stego, {{"k", "v"}});
  const auto s = m.select_rows({2, 0});
  CHECK(s.rows() == 2);
  CHECK(s(0, 0) == 3.0);
  CHECK(s.meta() == m.meta());
  CHECK(m == m.select_rows({0, 1, 2}));
  CHECK_FALSE(m == s);
  CHECK_THROWS_AS(m.select_rows({3}), std::out_of_range);
}
