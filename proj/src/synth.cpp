#include "fvc/synth.hpp"

#include "fvc/parallel.hpp"
#include "fvc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fvc::synth {

Config ablation_scenario() {
  Config c;
  c.n_per_class = 15;
  c.n_test_per_class = 500;
  c.dims_informative = 4;
  c.dims_noise = 3;
  c.separation = 2.0;
  c.dispersion = 1.0;
  c.noise_dispersion = 5.0;
  c.mean_offset = 20.0;
  return c;
}

Config sweep_scenario() {
  Config c;
  c.n_per_class = 100;
  c.n_test_per_class = 500;
  c.dims_informative = 4;
  c.dims_noise = 0;
  c.separation = 3.0;
  c.dispersion = 1.0;
  c.mean_offset = 20.0;
  return c;
}

namespace {

FeatureMatrix draw_class(Rng& rng, std::size_t n, const Eigen::RowVectorXd& centroid,
                         const Eigen::RowVectorXd& spread, ClassLabel label, const char* split,
                         const Config& config) {
  const auto m = centroid.size();
  Eigen::MatrixXd values(static_cast<Eigen::Index>(n), m);
  for (Eigen::Index i = 0; i < values.rows(); ++i)
    for (Eigen::Index j = 0; j < m; ++j) values(i, j) = centroid(j) + spread(j) * rng.normal();
  Meta meta = {{"source", "synthetic"},
               {"split", split},
               {"seed", std::to_string(config.seed)},
               {"dims_informative", std::to_string(config.dims_informative)},
               {"dims_noise", std::to_string(config.dims_noise)}};
  return FeatureMatrix(std::move(values), label, std::move(meta));
}

double softplus(double s) {
  return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
}

double sigmoid(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

void check_pair(const ClassPair& pair, const char* what) {
  if (pair.cover.cols() != pair.stego.cols())
    throw std::invalid_argument(std::string(what) + ": cover has " +
                                std::to_string(pair.cover.cols()) + " columns, stego has " +
                                std::to_string(pair.stego.cols()));
}

}  // namespace

Dataset generate(const Config& config) {
  if (config.dims() == 0) throw std::invalid_argument("synthetic scenario has no dimensions");
  if (config.n_per_class == 0) throw std::invalid_argument("synthetic scenario has no samples");
  if (!(config.dispersion >= 0.0) || !(config.noise_dispersion >= 0.0))
    throw std::invalid_argument("spreads must be non-negative");
  if (!std::isfinite(config.separation) || !std::isfinite(config.mean_offset))
    throw std::invalid_argument("separation and offset must be finite");

  const auto m = static_cast<Eigen::Index>(config.dims());
  const auto informative = static_cast<Eigen::Index>(config.dims_informative);
  Eigen::RowVectorXd cover_centroid = Eigen::RowVectorXd::Constant(m, config.mean_offset);
  Eigen::RowVectorXd stego_centroid = cover_centroid;
  if (informative > 0) {
    const double half = config.separation / (2.0 * std::sqrt(static_cast<double>(informative)));
    cover_centroid.head(informative).array() -= half;
    stego_centroid.head(informative).array() += half;
  }
  Eigen::RowVectorXd spread(m);
  spread.head(informative).setConstant(config.dispersion);
  spread.tail(m - informative).setConstant(config.noise_dispersion);

  Rng rng(config.seed);
  auto train_cover = draw_class(rng, config.n_per_class, cover_centroid, spread,
                                ClassLabel::cover, "train", config);
  auto train_stego = draw_class(rng, config.n_per_class, stego_centroid, spread,
                                ClassLabel::stego, "train", config);
  auto test_cover = draw_class(rng, config.test_per_class(), cover_centroid, spread,
                               ClassLabel::cover, "test", config);
  auto test_stego = draw_class(rng, config.test_per_class(), stego_centroid, spread,
                               ClassLabel::stego, "test", config);
  return Dataset{{std::move(train_cover), std::move(train_stego)},
                 {std::move(test_cover), std::move(test_stego)}};
}

double LinearClassifier::decision(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  return x.dot(weights.transpose()) + bias;
}

LinearClassifier train_classifier(const ClassPair& train, const TrainOptions& options) {
  check_pair(train, "train_classifier");
  if (options.epochs < 0) throw std::invalid_argument("epochs must be non-negative");
  if (!(options.rate > 0.0)) throw std::invalid_argument("learning rate must be positive");

  const auto n_cover = train.cover.rows();
  const auto n_total = n_cover + train.stego.rows();
  const auto m = train.cover.cols();

  Eigen::MatrixXd X(n_total, m);
  X << train.cover.values(), train.stego.values();
  Eigen::VectorXd y(n_total);
  y.head(n_cover).setZero();
  y.tail(n_total - n_cover).setOnes();

  Eigen::RowVectorXd center(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    detail::CompensatedSum sum;
    for (Eigen::Index i = 0; i < n_total; ++i) sum.add(X(i, j));
    center(j) = sum.value() / static_cast<double>(n_total);
  }
  const Eigen::MatrixXd Z = X.rowwise() - center;

  Rng rng(options.seed);
  Eigen::VectorXd w(m);
  for (Eigen::Index j = 0; j < m; ++j) w(j) = 0.01 * rng.normal();
  double b = 0.0;

  LinearClassifier out;
  out.training_trace.reserve(static_cast<std::size_t>(options.epochs));
  const double inv_n = 1.0 / static_cast<double>(n_total);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const Eigen::VectorXd s = (Z * w).array() + b;
    Eigen::VectorXd residual(n_total);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n_total; ++i) {
      residual(i) = sigmoid(s(i)) - y(i);
      loss += y(i) > 0.5 ? softplus(-s(i)) : softplus(s(i));
    }
    out.training_trace.push_back(loss * inv_n);
    w -= options.rate * inv_n * (Z.transpose() * residual);
    b -= options.rate * inv_n * residual.sum();
  }

  out.weights = w;
  out.bias = b - center.dot(w.transpose());
  return out;
}

double log_loss(const LinearClassifier& classifier, const ClassPair& data) {
  check_pair(data, "log_loss");
  double loss = 0.0;
  for (Eigen::Index i = 0; i < data.cover.rows(); ++i)
    loss += softplus(classifier.decision(data.cover.values().row(i)));
  for (Eigen::Index i = 0; i < data.stego.rows(); ++i)
    loss += softplus(-classifier.decision(data.stego.values().row(i)));
  return loss / static_cast<double>(data.cover.rows() + data.stego.rows());
}

AccuracyRecord evaluate(const LinearClassifier& classifier, const ClassPair& test) {
  check_pair(test, "evaluate");
  if (static_cast<Eigen::Index>(classifier.weights.size()) != test.cover.cols())
    throw std::invalid_argument("evaluate: classifier expects " +
                                std::to_string(classifier.weights.size()) + " columns, data has " +
                                std::to_string(test.cover.cols()));
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < test.cover.rows(); ++i)
    if (!classifier.predicts_stego(test.cover.values().row(i))) ++correct;
  for (Eigen::Index i = 0; i < test.stego.rows(); ++i)
    if (classifier.predicts_stego(test.stego.values().row(i))) ++correct;
  return accuracy(correct, static_cast<std::size_t>(test.cover.rows() + test.stego.rows()));
}

namespace {

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

RankCorrelation spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("spearman: length mismatch");
  if (xs.size() < 3) throw std::invalid_argument("spearman: at least 3 pairs required");

  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return {0.0, true};
  return {std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0), false};
}

SweepResult cv_accuracy_sweep(std::span<const double> levels, const Config& base,
                              const TrainOptions& options) {
  if (levels.size() < 3) throw std::invalid_argument("sweep needs at least 3 levels");

  SweepResult result;
  result.points.resize(levels.size());
  parallel_for(levels.size(), [&](std::size_t i) {
    Config config = base;
    config.dispersion = levels[i];
    const auto data = generate(config);
    const auto stats = class_stats(data.train.stego);
    const auto classifier = train_classifier(data.train, options);
    result.points[i] = {levels[i], stats.avg_cv, evaluate(classifier, data.test).value};
  });

  std::vector<double> cvs, accs;
  for (const auto& p : result.points) {
    cvs.push_back(p.stego_avg_cv);
    accs.push_back(p.accuracy);
  }
  const auto rho = spearman(cvs, accs);
  result.spearman_rho = rho.rho;
  result.degenerate = rho.degenerate;
  return result;
}

AblationResult masking_ablation(const Dataset& data, std::size_t k, const TrainOptions& options) {
  AblationResult result;
  const auto before = train_classifier(data.train, options);
  result.accuracy_before = evaluate(before, data.test).value;

  result.train_stego_stats = class_stats(data.train.stego);
  result.mask = select_mask(result.train_stego_stats, k);

  const ClassPair train{apply_mask(data.train.cover, result.mask),
                        apply_mask(data.train.stego, result.mask)};
  const ClassPair test{apply_mask(data.test.cover, result.mask),
                       apply_mask(data.test.stego, result.mask)};
  const auto after = train_classifier(train, options);
  result.accuracy_after = evaluate(after, test).value;
  return result;
}

AblationResult masking_ablation(const Config& config, std::size_t k, const TrainOptions& options) {
  return masking_ablation(generate(config), k, options);
}

}  // namespace fvc::synth
