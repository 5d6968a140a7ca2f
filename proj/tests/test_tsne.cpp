#include "doctest.h"

#include "fvc/parallel.hpp"
#include "fvc/rng.hpp"
#include "fvc/tsne.hpp"
#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

using namespace fvc;
using namespace fvc::tsne;

namespace {

PointSet equilateral() {
  PointSet p(3, 2);
  p << 0.0, 0.0, 1.0, 0.0, 0.5, std::sqrt(3.0) / 2.0;
  return p;
}

PointSet random_points(Rng& rng, Eigen::Index n, Eigen::Index d, double scale = 1.0) {
  PointSet p(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) p(i, j) = scale * rng.normal();
  return p;
}

PointSet clusters(Rng& rng, int count, int per_cluster, Eigen::Index d, double spacing,
                  double spread) {
  PointSet p(count * per_cluster, d);
  for (int c = 0; c < count; ++c)
    for (int i = 0; i < per_cluster; ++i)
      for (Eigen::Index j = 0; j < d; ++j)
        p(c * per_cluster + i, j) = (j == c % d ? spacing * (c + 1) : 0.0) + spread * rng.normal();
  return p;
}

void check_probability_matrix(const Eigen::MatrixXd& M) {
  CHECK((M - M.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(M.minCoeff() >= 0.0);
  CHECK(M.diagonal().cwiseAbs().maxCoeff() == 0.0);
  CHECK(std::abs(M.sum() - 1.0) <= 1e-10);
}

}  // namespace

TEST_CASE("high affinities of an equilateral triangle are uniform") {
  const auto P = high_affinities(equilateral(), 2.0).P;
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 3; ++j)
      CHECK(P(i, j) == doctest::Approx(i == j ? 0.0 : 1.0 / 6.0).epsilon(1e-12));
  const auto global = high_affinities(equilateral(), 2.0, Bandwidth::global).P;
  CHECK(global(0, 1) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("bisection hits the target row perplexity") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto points = random_points(rng, 4, 3);
    const auto cond = conditional_affinities(points, 2.0);
    CHECK(cond.unconverged_rows == 0);
    for (Eigen::Index i = 0; i < 4; ++i) {
      CHECK(cond.P(i, i) == 0.0);
      CHECK(cond.P.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(row_perplexity(cond.P.row(i)) - 2.0) <= 1e-5);
    }
  }
  // Larger sets and a more typical perplexity.
  const auto points = random_points(rng, 40, 6, 3.0);
  const auto cond = conditional_affinities(points, 10.0);
  for (Eigen::Index i = 0; i < 40; ++i)
    CHECK(std::abs(row_perplexity(cond.P.row(i)) - 10.0) <= 1e-5);
}

TEST_CASE("high affinities are symmetric probability matrices") {
  Rng rng(8);
  for (auto mode : {Bandwidth::per_point, Bandwidth::global}) {
    const auto P = high_affinities(random_points(rng, 25, 4), 5.0, mode).P;
    check_probability_matrix(P);
  }
}

TEST_CASE("global bandwidth matches the mean row perplexity") {
  Rng rng(9);
  const auto points = random_points(rng, 30, 3);
  const auto P = high_affinities(points, 8.0, Bandwidth::global).P;
  // Literal all-pairs form: p_ij proportional to exp(-beta d_ij) for one beta,
  // so log-ratios are linear in squared distance with a shared slope.
  const double d01 = (points.row(0) - points.row(1)).squaredNorm();
  const double d02 = (points.row(0) - points.row(2)).squaredNorm();
  const double d34 = (points.row(3) - points.row(4)).squaredNorm();
  const double d35 = (points.row(3) - points.row(5)).squaredNorm();
  const double beta_a = std::log(P(0, 1) / P(0, 2)) / (d02 - d01);
  const double beta_b = std::log(P(3, 4) / P(3, 5)) / (d35 - d34);
  CHECK(beta_a == doctest::Approx(beta_b).epsilon(1e-8));
}

TEST_CASE("high affinity errors") {
  CHECK_THROWS_AS(high_affinities(equilateral(), 3.0), std::invalid_argument);
  CHECK_THROWS_AS(high_affinities(equilateral(), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(high_affinities(PointSet::Zero(2, 2), 1.0), std::invalid_argument);
  PointSet bad = equilateral();
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(high_affinities(bad, 1.5), std::invalid_argument);
}

TEST_CASE("low affinities") {
  SUBCASE("two points split evenly") {
    PointSet p(2, 2);
    p << 3.0, -1.0, 0.2, 7.0;
    const auto Q = low_affinities(p);
    CHECK(Q(0, 1) == doctest::Approx(0.5));
    CHECK(Q(1, 0) == doctest::Approx(0.5));
  }
  SUBCASE("equilateral") {
    const auto Q = low_affinities(equilateral());
    CHECK(Q(0, 2) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  }
  SUBCASE("collinear 0, 1, 2") {
    PointSet p(3, 1);
    p << 0.0, 1.0, 2.0;
    const auto Q = low_affinities(p);
    // Kernels 1/2, 1/2, 1/5 over each unordered pair; total over ordered pairs 2.4.
    CHECK(Q(0, 1) == doctest::Approx(0.5 / 2.4).epsilon(1e-14));
    CHECK(Q(1, 2) == doctest::Approx(0.5 / 2.4).epsilon(1e-14));
    CHECK(Q(0, 2) == doctest::Approx(0.2 / 2.4).epsilon(1e-14));
  }
  SUBCASE("coincident points") {
    const auto Q = low_affinities(PointSet::Zero(4, 2));
    CHECK(Q(0, 3) == doctest::Approx(1.0 / 12.0));
  }
  SUBCASE("always a probability matrix") {
    Rng rng(2);
    for (int t = 0; t < 10; ++t) check_probability_matrix(low_affinities(random_points(rng, 12, 2)));
  }
}

TEST_CASE("kl divergence") {
  const auto P = high_affinities(equilateral(), 2.0).P;
  CHECK(kl_divergence(P, P) == doctest::Approx(0.0).epsilon(1e-15));

  PointSet distorted(3, 2);
  distorted << 0.0, 0.0, 3.0, 0.0, 0.2, 0.4;
  const auto Q = low_affinities(distorted);
  double direct = 0.0;
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 3; ++j)
      if (i != j) direct += P(i, j) * std::log(P(i, j) / Q(i, j));
  CHECK(kl_divergence(P, Q) > 0.0);
  CHECK(kl_divergence(P, Q) == doctest::Approx(direct).epsilon(1e-12));

  Rng rng(31);
  for (int t = 0; t < 20; ++t) {
    const auto Pr = high_affinities(random_points(rng, 10, 3), 3.0).P;
    const auto Qr = low_affinities(random_points(rng, 10, 2));
    CHECK(kl_divergence(Pr, Qr) >= 0.0);
    CHECK(kl_divergence(Pr, Pr) == doctest::Approx(0.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(kl_divergence(P, Eigen::MatrixXd::Zero(2, 2)), std::invalid_argument);
}

TEST_CASE("gradient vanishes when Q equals P") {
  Rng rng(12);
  const auto Y = random_points(rng, 8, 2);
  const auto Q = low_affinities(Y);
  CHECK(gradient(Q, Q, Y).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gradient matches central finite differences of the KL objective") {
  Rng rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    const auto X = random_points(rng, 10, 5);
    const auto P = high_affinities(X, 4.0).P;
    const auto Y = random_points(rng, 10, 2);
    const auto analytic = gradient(P, low_affinities(Y), Y);
    const auto numeric = test::finite_difference(
        [&](const Eigen::MatrixXd& y) { return test::kl_of_layout(P, y); }, Y, 1e-5);
    for (Eigen::Index i = 0; i < Y.rows(); ++i)
      for (Eigen::Index d = 0; d < Y.cols(); ++d)
        CHECK(test::relative_error(analytic(i, d), numeric(i, d)) <= 1e-4);
  }
}

TEST_CASE("gradient pulls an under-represented pair together") {
  PointSet Y(3, 2);
  Y << -1.0, 0.0, 1.0, 0.0, 0.0, 5.0;
  Eigen::MatrixXd P(3, 3);
  P << 0.0, 0.4, 0.05, 0.4, 0.0, 0.05, 0.05, 0.05, 0.0;
  const auto Q = low_affinities(Y);
  REQUIRE(P(0, 1) > Q(0, 1));
  const auto G = gradient(P, Q, Y);
  const Eigen::RowVector2d toward = Y.row(1) - Y.row(0);
  CHECK((-G.row(0)).dot(toward) > 0.0);
  CHECK((-G.row(1)).dot(-toward) > 0.0);
}

TEST_CASE("translation leaves Q, KL and gradient unchanged") {
  Rng rng(77);
  const auto P = high_affinities(random_points(rng, 9, 4), 3.0).P;
  const auto Y = random_points(rng, 9, 2);
  PointSet shifted = Y;
  shifted.rowwise() += Eigen::RowVector2d(12.5, -3.25);
  const auto Q1 = low_affinities(Y);
  const auto Q2 = low_affinities(shifted);
  CHECK((Q1 - Q2).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(kl_divergence(P, Q1) == doctest::Approx(kl_divergence(P, Q2)).epsilon(1e-12));
  CHECK((gradient(P, Q1, Y) - gradient(P, Q2, shifted)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("gradient shape checks") {
  const auto Y = equilateral();
  CHECK_THROWS_AS(gradient(Eigen::MatrixXd::Zero(2, 2), low_affinities(Y), Y),
                  std::invalid_argument);
}

TEST_CASE("embedding reduces KL on three clusters and is deterministic") {
  Rng rng(5);
  const auto points = clusters(rng, 3, 20, 10, 10.0, 1.0);
  // The default step of 200 oscillates at this size; 100 descends cleanly.
  Config config;
  config.learning_rate = 100.0;
  config.seed = 17;
  const auto a = embed(points, config);
  REQUIRE(a.kl_trace.size() == static_cast<std::size_t>(config.iterations));
  for (double kl : a.kl_trace) CHECK(kl >= 0.0);
  CHECK(a.final_kl < 0.5 * a.kl_trace.front());
  CHECK(a.coords.allFinite());

  double tail_min = a.kl_trace.back();
  for (std::size_t t = a.kl_trace.size() - 10; t < a.kl_trace.size(); ++t)
    tail_min = std::min(tail_min, a.kl_trace[t]);
  CHECK(tail_min < a.kl_trace.front());

  const auto b = embed(points, config);
  CHECK(a.coords == b.coords);
  CHECK(a.kl_trace == b.kl_trace);
}

TEST_CASE("embedding is independent of the thread limit") {
  Rng rng(6);
  const auto points = clusters(rng, 2, 15, 5, 8.0, 1.0);
  Config config;
  config.perplexity = 10.0;
  config.iterations = 200;
  set_thread_limit(0);
  const auto serial = embed(points, config);
  set_thread_limit(4);
  const auto threaded = embed(points, config);
  set_thread_limit(0);
  CHECK(serial.coords == threaded.coords);
}

TEST_CASE("separated clusters stay apart in the embedding") {
  Rng rng(13);
  const int per = 25;
  PointSet points(2 * per, 6);
  for (int i = 0; i < 2 * per; ++i)
    for (Eigen::Index j = 0; j < 6; ++j)
      points(i, j) = (i >= per && j == 0 ? 10.0 : 0.0) + rng.normal() / std::sqrt(6.0);
  Config config;
  config.perplexity = 15.0;
  const auto e = embed(points, config);
  double intra = 0.0, inter = 0.0;
  int n_intra = 0, n_inter = 0;
  for (int i = 0; i < 2 * per; ++i)
    for (int j = i + 1; j < 2 * per; ++j) {
      const double d = (e.coords.row(i) - e.coords.row(j)).norm();
      if ((i < per) == (j < per)) {
        intra += d;
        ++n_intra;
      } else {
        inter += d;
        ++n_inter;
      }
    }
  CHECK(inter / n_inter > intra / n_intra);
}

TEST_CASE("strict configuration and joint embedding of two classes") {
  Rng rng(3);
  const auto cover_pts = clusters(rng, 1, 12, 4, 0.0, 1.0);
  PointSet stego_pts = clusters(rng, 1, 12, 4, 0.0, 1.0);
  stego_pts.col(1).array() += 6.0;
  const FeatureMatrix cover((cover_pts.array() + 10.0).matrix(), ClassLabel::cover);
  const FeatureMatrix stego((stego_pts.array() + 10.0).matrix(), ClassLabel::stego);

  auto config = Config::strict_literal();
  config.perplexity = 5.0;
  config.iterations = 300;
  CHECK(config.early_exaggeration == 1.0);
  const auto e = embed(cover, stego, config);
  CHECK(e.coords.rows() == 24);
  CHECK(e.labels.front() == ClassLabel::cover);
  CHECK(e.labels.back() == ClassLabel::stego);
  CHECK(e.final_kl < e.kl_trace.front());

  Config zero;
  zero.iterations = 0;
  zero.perplexity = 5.0;
  const auto idle = embed(cover_pts, zero);
  CHECK(idle.kl_trace.empty());
  CHECK(idle.coords.cwiseAbs().maxCoeff() < 1e-2);
}

TEST_CASE("embed validates configuration") {
  const auto pts = equilateral();
  Config c;
  c.perplexity = 1.5;
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(embed(pts, c), std::invalid_argument);
  c.learning_rate = 200.0;
  c.early_exaggeration = 0.5;
  CHECK_THROWS_AS(embed(pts, c), std::invalid_argument);
  c.early_exaggeration = 4.0;
  CHECK_THROWS_AS(embed(pts, c, {ClassLabel::cover}), std::invalid_argument);
  c.perplexity = 30.0;
  CHECK_THROWS_AS(embed(pts, c), std::invalid_argument);
}
