#include "fvc/tsne.hpp"

#include "fvc/parallel.hpp"
#include "fvc/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fvc::tsne {

Config Config::strict_literal() {
  Config c;
  c.bandwidth = Bandwidth::global;
  c.early_exaggeration = 1.0;
  return c;
}

namespace {

Eigen::MatrixXd squared_distances(const PointSet& points) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = (points.row(i) - points.row(j)).squaredNorm();
      D(i, j) = d;
      D(j, i) = d;
    }
  return D;
}

void check_points(const PointSet& points, double perplexity) {
  const Eigen::Index n = points.rows();
  if (n < 3) throw std::invalid_argument("t-SNE needs at least 3 points");
  if (points.cols() < 1) throw std::invalid_argument("t-SNE points have no coordinates");
  if (!points.allFinite()) throw std::invalid_argument("t-SNE points must be finite");
  if (!(perplexity > 0.0) || perplexity >= static_cast<double>(n))
    throw std::invalid_argument("perplexity " + std::to_string(perplexity) +
                                " must lie in (0, " + std::to_string(n) + ")");
}

// Fills row i of P with exp(-beta (D_ij - min_j D_ij)) normalised over j != i
// and returns the row perplexity exp(H).
double fill_conditional_row(const Eigen::MatrixXd& D, Eigen::Index i, double beta,
                            Eigen::MatrixXd& P) {
  const Eigen::Index n = D.rows();
  double dmin = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j)
    if (j != i) dmin = std::min(dmin, D(i, j));

  double sum = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double v = j == i ? 0.0 : std::exp(-beta * (D(i, j) - dmin));
    P(i, j) = v;
    sum += v;
  }
  double entropy = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    P(i, j) /= sum;
    const double p = P(i, j);
    if (p > 0.0) entropy -= p * std::log(p);
  }
  return std::exp(entropy);
}

// Bisection on a precision so that perplexity_of(beta) matches target.
// perplexity_of must be non-increasing in beta.
template <typename Fn>
std::pair<double, bool> bisect_precision(Fn&& perplexity_of, double target) {
  double beta = 1.0;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  double best_beta = beta;
  double best_gap = std::numeric_limits<double>::infinity();
  for (int step = 0; step < kMaxBisectionSteps; ++step) {
    const double perp = perplexity_of(beta);
    const double gap = perp - target;
    if (std::abs(gap) < best_gap) {
      best_gap = std::abs(gap);
      best_beta = beta;
    }
    if (std::abs(gap) < kPerplexityTolerance) return {beta, true};
    if (gap > 0.0) {
      lo = beta;
      beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
    } else {
      hi = beta;
      beta = 0.5 * (beta + lo);
    }
  }
  return {best_beta, false};
}

}  // namespace

double row_perplexity(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  double entropy_bits = 0.0;
  for (Eigen::Index j = 0; j < row.size(); ++j)
    if (row(j) > 0.0) entropy_bits -= row(j) * std::log2(row(j));
  return std::exp2(entropy_bits);
}

ConditionalAffinities conditional_affinities(const PointSet& points, double perplexity) {
  check_points(points, perplexity);
  const Eigen::Index n = points.rows();
  const Eigen::MatrixXd D = squared_distances(points);

  ConditionalAffinities out;
  out.P = Eigen::MatrixXd::Zero(n, n);
  out.beta = Eigen::VectorXd::Zero(n);
  std::vector<char> converged(static_cast<std::size_t>(n), 0);

  parallel_for(static_cast<std::size_t>(n), [&](std::size_t row) {
    const auto i = static_cast<Eigen::Index>(row);
    auto [beta, ok] = bisect_precision(
        [&](double b) { return fill_conditional_row(D, i, b, out.P); }, perplexity);
    fill_conditional_row(D, i, beta, out.P);
    out.beta(i) = beta;
    converged[row] = ok ? 1 : 0;
  });
  for (char c : converged)
    if (!c) ++out.unconverged_rows;
  return out;
}

HighAffinities high_affinities(const PointSet& points, double perplexity, Bandwidth bandwidth) {
  check_points(points, perplexity);
  const Eigen::Index n = points.rows();
  HighAffinities out;

  if (bandwidth == Bandwidth::per_point) {
    auto cond = conditional_affinities(points, perplexity);
    out.P = (cond.P + cond.P.transpose()) / (2.0 * static_cast<double>(n));
    out.unconverged_rows = cond.unconverged_rows;
    return out;
  }

  const Eigen::MatrixXd D = squared_distances(points);
  Eigen::MatrixXd scratch(n, n);
  auto mean_perplexity = [&](double beta) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) total += fill_conditional_row(D, i, beta, scratch);
    return total / static_cast<double>(n);
  };
  auto [beta, ok] = bisect_precision(mean_perplexity, perplexity);
  out.unconverged_rows = ok ? 0 : static_cast<std::size_t>(n);

  double dmin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) dmin = std::min(dmin, D(i, j));

  out.P = Eigen::MatrixXd::Zero(n, n);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) {
        out.P(i, j) = std::exp(-beta * (D(i, j) - dmin));
        sum += out.P(i, j);
      }
  out.P /= sum;
  return out;
}

Eigen::MatrixXd student_kernel(const PointSet& coords) {
  const Eigen::Index n = coords.rows();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double k = 1.0 / (1.0 + (coords.row(i) - coords.row(j)).squaredNorm());
      K(i, j) = k;
      K(j, i) = k;
    }
  return K;
}

Eigen::MatrixXd low_affinities(const PointSet& coords) {
  if (coords.rows() < 2) throw std::invalid_argument("low_affinities needs at least 2 points");
  if (!coords.allFinite()) throw std::invalid_argument("embedding coordinates must be finite");
  Eigen::MatrixXd K = student_kernel(coords);
  return K / K.sum();
}

double kl_divergence(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q) {
  if (P.rows() != Q.rows() || P.cols() != Q.cols())
    throw std::invalid_argument("kl_divergence: shape mismatch");
  double kl = 0.0;
  for (Eigen::Index j = 0; j < P.cols(); ++j)
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
      const double p = P(i, j);
      if (p > 0.0) kl += p * std::log(p / std::max(Q(i, j), kProbabilityFloor));
    }
  return kl;
}

Eigen::MatrixXd gradient(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q,
                         const PointSet& coords) {
  const Eigen::Index n = coords.rows();
  if (P.rows() != n || P.cols() != n || Q.rows() != n || Q.cols() != n)
    throw std::invalid_argument("gradient: affinity matrices must be n x n for n points");
  const Eigen::MatrixXd K = student_kernel(coords);
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(n, coords.cols());
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t row) {
    const auto i = static_cast<Eigen::Index>(row);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double w = (P(i, j) - Q(i, j)) * K(i, j);
      grad.row(i) += w * (coords.row(i) - coords.row(j));
    }
    grad.row(i) *= 4.0;
  });
  return grad;
}

Embedding embed(const PointSet& points, const Config& config, std::vector<ClassLabel> labels) {
  if (config.out_dims < 1) throw std::invalid_argument("t-SNE output dimension must be >= 1");
  if (!(config.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (config.iterations < 0) throw std::invalid_argument("iterations must be non-negative");
  if (!(config.momentum_early >= 0.0) || !(config.momentum_late >= 0.0))
    throw std::invalid_argument("momentum must be non-negative");
  if (!(config.early_exaggeration >= 1.0))
    throw std::invalid_argument("early exaggeration must be >= 1");
  if (!(config.init_scale > 0.0)) throw std::invalid_argument("init scale must be positive");
  if (!labels.empty() && labels.size() != static_cast<std::size_t>(points.rows()))
    throw std::invalid_argument("label count does not match point count");

  const auto affinities = high_affinities(points, config.perplexity, config.bandwidth);
  const Eigen::MatrixXd& P = affinities.P;
  const Eigen::Index n = points.rows();

  Rng rng(config.seed);
  PointSet Y(n, config.out_dims);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index d = 0; d < Y.cols(); ++d) Y(i, d) = config.init_scale * rng.normal();
  PointSet Y_prev = Y;

  Embedding out;
  out.labels = std::move(labels);
  out.unconverged_rows = affinities.unconverged_rows;
  out.kl_trace.reserve(static_cast<std::size_t>(config.iterations));

  const Eigen::MatrixXd P_exaggerated = P * config.early_exaggeration;
  for (int t = 0; t < config.iterations; ++t) {
    const Eigen::MatrixXd Q = low_affinities(Y);
    out.kl_trace.push_back(kl_divergence(P, Q));

    const bool exaggerate = t < config.exaggeration_iterations && config.early_exaggeration > 1.0;
    const Eigen::MatrixXd grad = gradient(exaggerate ? P_exaggerated : P, Q, Y);
    const double momentum = t < config.momentum_switch ? config.momentum_early
                                                       : config.momentum_late;
    // Descend: the divergence is minimised.
    PointSet Y_next = Y - config.learning_rate * grad + momentum * (Y - Y_prev);
    Y_prev = std::move(Y);
    Y = std::move(Y_next);
  }
  if (!Y.allFinite()) throw std::runtime_error("t-SNE diverged to non-finite coordinates");
  out.final_kl = kl_divergence(P, low_affinities(Y));
  out.coords = std::move(Y);
  return out;
}

Embedding embed(const FeatureMatrix& cover, const FeatureMatrix& stego, const Config& config) {
  if (cover.cols() != stego.cols())
    throw std::invalid_argument("cover and stego matrices have different column counts");
  PointSet points(cover.rows() + stego.rows(), cover.cols());
  points << cover.values(), stego.values();
  std::vector<ClassLabel> labels(static_cast<std::size_t>(cover.rows()), ClassLabel::cover);
  labels.resize(static_cast<std::size_t>(points.rows()), ClassLabel::stego);
  return embed(points, config, std::move(labels));
}

}  // namespace fvc::tsne
