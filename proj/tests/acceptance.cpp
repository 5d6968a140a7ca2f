// Acceptance suite: one PASS/FAIL line per required criterion. Exits non-zero
// if any criterion fails, including its runtime budget.

#include "fvc/feature_mod.hpp"
#include "fvc/io.hpp"
#include "fvc/rng.hpp"
#include "fvc/stats.hpp"
#include "fvc/synth.hpp"
#include "fvc/tsne.hpp"
#include "oracles.hpp"

#include <bit>
#include <chrono>
#include <cstdint>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace fvc;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_seconds;  // 0: no runtime bound
  std::function<Outcome()> check;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

Outcome confidence_radii() {
  Outcome out;
  const double r98 = confidence_radius(0.5741, 100, ConfidenceLevel::p98);
  const double r95 = confidence_radius(0.5741, 100, ConfidenceLevel::p95);
  const double r90 = confidence_radius(0.5741, 100, ConfidenceLevel::p90);
  const double opt = confidence_radius(0.6359, 100, ConfidenceLevel::p95);
  out.ok = std::abs(r98 - 0.115) <= 0.0005 && std::abs(r95 - 0.097) <= 0.0005 &&
           std::abs(r90 - 0.081) <= 0.0005 && std::abs(opt - 0.094) <= 0.0005;
  out.detail = fmt("0.5741 -> %.4f/%.4f/%.4f, 0.6359@95 -> %.4f", r98, r95, r90, opt);
  return out;
}

Outcome cv_oracle() {
  Rng rng(2718);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = static_cast<Eigen::Index>(1 + rng.below(50));
    const auto m = static_cast<Eigen::Index>(1 + rng.below(20));
    const double offset = -50.0 + 100.0 * rng.uniform();
    const double spread = 0.1 + 10.0 * rng.uniform();
    Eigen::MatrixXd X(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < m; ++j) X(i, j) = offset + spread * rng.normal();
    const auto stats = class_stats(FeatureMatrix(X, ClassLabel::stego));
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto want = test::column_oracle(X, j);
      const auto& got = stats.dims[static_cast<std::size_t>(j)];
      worst = std::max({worst, test::relative_error(got.mean, want.mean),
                        test::relative_error(got.std, want.std),
                        test::relative_error(got.cv, want.cv)});
    }
  }
  return {worst <= 1e-12, fmt("1000 matrices, worst relative error %.3g", worst)};
}

Outcome ranking() {
  const std::vector<ModelScore> scores{
      {"Ye-Net", 2.59}, {"Yedroudj-Net", 2.58}, {"Zhu-Net", 1.75}, {"SR-Net", 3.82}};
  const auto ranked = rank_models(scores);
  std::string order;
  for (const auto& name : ranked) order += (order.empty() ? "" : ", ") + name;
  const bool ok =
      ranked == std::vector<std::string>{"Zhu-Net", "Yedroudj-Net", "Ye-Net", "SR-Net"};
  return {ok, order};
}

Outcome gradient_check() {
  Rng rng(1234);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd X(10, 5), Y(10, 2);
    for (Eigen::Index i = 0; i < 10; ++i) {
      for (Eigen::Index j = 0; j < 5; ++j) X(i, j) = rng.normal();
      for (Eigen::Index j = 0; j < 2; ++j) Y(i, j) = rng.normal();
    }
    const auto P = tsne::high_affinities(X, 4.0).P;
    const auto analytic = tsne::gradient(P, tsne::low_affinities(Y), Y);
    const auto numeric = test::finite_difference(
        [&](const Eigen::MatrixXd& y) { return test::kl_of_layout(P, y); }, Y, 1e-5);
    for (Eigen::Index i = 0; i < 10; ++i)
      for (Eigen::Index d = 0; d < 2; ++d)
        worst = std::max(worst, test::relative_error(analytic(i, d), numeric(i, d)));
  }
  return {worst <= 1e-4, fmt("20 instances, worst relative error %.3g", worst)};
}

Outcome tsne_descent() {
  Rng rng(5);
  tsne::PointSet points(60, 10);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 20; ++i)
      for (Eigen::Index j = 0; j < 10; ++j)
        points(c * 20 + i, j) = (j == c ? 10.0 * (c + 1) : 0.0) + rng.normal();
  tsne::Config config;
  config.learning_rate = 100.0;
  config.seed = 17;
  const auto a = tsne::embed(points, config);
  const auto b = tsne::embed(points, config);
  const double initial = a.kl_trace.front();
  const bool identical = a.coords == b.coords && a.kl_trace == b.kl_trace;
  Outcome out;
  out.ok = a.kl_trace.size() <= 1000 && a.final_kl < 0.5 * initial && identical;
  out.detail = fmt("initial KL %.4f, final KL %.4f, ratio %.4f", initial, a.final_kl,
                   a.final_kl / initial);
  out.detail += identical ? ", rerun bit-identical" : ", rerun differs";
  return out;
}

Outcome sweep_correlation() {
  const std::vector<double> levels{0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0};
  const auto result = synth::cv_accuracy_sweep(levels, synth::sweep_scenario(), {});
  return {!result.degenerate && result.spearman_rho <= -0.8,
          fmt("8 levels, spearman rho %.4f (accuracy %.3f .. %.3f)", result.spearman_rho,
              result.points.front().accuracy, result.points.back().accuracy)};
}

Outcome masking_gain() {
  const auto config = synth::ablation_scenario();
  const auto r = synth::masking_ablation(config, 3, {});
  std::vector<std::size_t> noise;
  for (std::size_t j = config.dims_informative; j < config.dims(); ++j) noise.push_back(j);
  const bool exact = r.mask.zeroed == noise;
  Outcome out;
  out.ok = exact && r.accuracy_after >= r.accuracy_before + 0.02;
  out.detail = fmt("accuracy %.4f -> %.4f (gain %.4f)", r.accuracy_before, r.accuracy_after,
                   r.accuracy_after - r.accuracy_before);
  out.detail += exact ? ", mask = noise columns" : ", mask differs from noise columns";
  return out;
}

bool same_bits(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (std::bit_cast<std::uint64_t>(a(i, j)) != std::bit_cast<std::uint64_t>(b(i, j)))
        return false;
  return true;
}

Outcome format_golden() {
  const std::string expected = std::string("FVC1") + std::string("\x01\x00\x00\x00", 4) +
                               std::string("\x01\x00\x00\x00", 4) + std::string("\x00", 1) +
                               std::string("\x00\x00\x00\x00", 4) +
                               std::string("\x00\x00\x00\x00\x00\x00\xF0\x3F", 8);
  std::ostringstream out(std::ios::binary);
  io::write_matrix_binary(FeatureMatrix(Eigen::MatrixXd::Ones(1, 1), ClassLabel::cover), out);
  const bool layout = out.str() == expected;

  Rng rng(99);
  bool exact = true;
  for (int t = 0; t < 50 && exact; ++t) {
    Eigen::MatrixXd v(1 + static_cast<Eigen::Index>(rng.below(20)),
                      1 + static_cast<Eigen::Index>(rng.below(20)));
    for (Eigen::Index i = 0; i < v.size(); ++i)
      v(i) = std::ldexp(rng.normal(), static_cast<int>(rng.below(200)) - 100);
    const FeatureMatrix m(v, t % 2 ? ClassLabel::stego : ClassLabel::cover,
                          {{"trial", std::to_string(t)}});
    std::ostringstream bin(std::ios::binary), csv;
    io::write_matrix_binary(m, bin);
    io::write_matrix_csv(m, csv);
    std::istringstream bin_in(bin.str(), std::ios::binary), csv_in(csv.str());
    const auto from_bin = io::read_matrix_binary(bin_in);
    const auto from_csv = io::read_matrix_csv(csv_in);
    // CSV carries no metadata.
    exact = same_bits(from_bin, m) && from_bin.meta() == m.meta() && same_bits(from_csv, m) &&
            from_bin.label() == m.label() && from_csv.label() == m.label();
  }

  auto kind_of = [](const std::string& bytes) -> std::optional<io::ParseErrorKind> {
    std::istringstream in(bytes, std::ios::binary);
    try {
      io::read_matrix_binary(in);
    } catch (const io::ParseError& e) {
      return e.kind();
    }
    return std::nullopt;
  };
  std::string bad_magic = expected, nan_payload = expected;
  bad_magic[0] = 'G';
  nan_payload.replace(17, 8, std::string("\x00\x00\x00\x00\x00\x00\xF8\x7F", 8));
  const auto k1 = kind_of(bad_magic);
  const auto k2 = kind_of(expected.substr(0, 20));
  const auto k3 = kind_of(nan_payload);
  const bool rejected = k1 && k2 && k3 && std::set{*k1, *k2, *k3}.size() == 3;

  Outcome o;
  o.ok = layout && exact && rejected;
  o.detail = std::string("1x1 layout ") + (layout ? "ok" : "WRONG") + ", round trips " +
             (exact ? "bit-exact" : "INEXACT") + ", malformed corpus " +
             (rejected ? "rejected with distinct kinds" : "NOT distinctly rejected");
  return o;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"confidence-interval reproduction", 1.0, confidence_radii},
      {"cv oracle equivalence", 5.0, cv_oracle},
      {"ranking fixture", 0.0, ranking},
      {"t-sne gradient check", 5.0, gradient_check},
      {"t-sne descent", 30.0, tsne_descent},
      {"cv-accuracy correlation", 30.0, sweep_correlation},
      {"masking improvement", 30.0, masking_gain},
      {"format golden tests", 0.0, format_golden},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    Outcome outcome;
    const auto start = std::chrono::steady_clock::now();
    try {
      outcome = c.check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("threw: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = c.budget_seconds == 0.0 || seconds < c.budget_seconds;
    const bool pass = outcome.ok && in_budget;
    failures += !pass;
    std::printf("%s  %-34s %8.3fs  %s%s\n", pass ? "PASS" : "FAIL", c.name.c_str(), seconds,
                outcome.detail.c_str(), in_budget ? "" : " (over runtime budget)");
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
