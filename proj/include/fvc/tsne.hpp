#pragma once

#include "fvc/feature_matrix.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace fvc::tsne {

// Row i of a point set is point i.
using PointSet = Eigen::MatrixXd;

enum class Bandwidth {
  // One Gaussian bandwidth per point, found by perplexity bisection.
  per_point,
  // A single bandwidth shared by all points and an all-pairs normaliser,
  // exactly the literal kernel form. The bandwidth is bisected so that the
  // mean row perplexity hits the target.
  global,
};

struct Config {
  int out_dims = 2;
  double perplexity = 30.0;
  double learning_rate = 200.0;
  int iterations = 1000;
  double momentum_early = 0.5;
  double momentum_late = 0.8;
  int momentum_switch = 250;
  double early_exaggeration = 4.0;  // 1 disables it
  int exaggeration_iterations = 50;
  double init_scale = 1e-4;
  Bandwidth bandwidth = Bandwidth::per_point;
  std::uint64_t seed = 42;

  // Literal-formula run: global bandwidth and no exaggeration.
  static Config strict_literal();
};

inline constexpr double kPerplexityTolerance = 1e-5;
inline constexpr int kMaxBisectionSteps = 200;
inline constexpr double kProbabilityFloor = 1e-12;

// Row-normalised Gaussian affinities p_{j|i} with a per-row precision
// beta_i = 1 / (2 sigma_i^2).
struct ConditionalAffinities {
  Eigen::MatrixXd P;
  Eigen::VectorXd beta;
  std::size_t unconverged_rows = 0;
};

ConditionalAffinities conditional_affinities(const PointSet& points, double perplexity);

// 2^H of one row of conditional probabilities (H in bits).
double row_perplexity(const Eigen::Ref<const Eigen::RowVectorXd>& row);

struct HighAffinities {
  Eigen::MatrixXd P;                 // symmetric, zero diagonal, sums to 1
  std::size_t unconverged_rows = 0;  // bisection hit the step limit
};

// Throws std::invalid_argument for n < 3, non-finite points, or
// perplexity outside (0, n).
HighAffinities high_affinities(const PointSet& points, double perplexity,
                               Bandwidth bandwidth = Bandwidth::per_point);

// Student-t kernel (1 + |y_i - y_j|^2)^-1 with zero diagonal.
Eigen::MatrixXd student_kernel(const PointSet& coords);

// Normalised Student-t affinities over all ordered pairs i != j.
Eigen::MatrixXd low_affinities(const PointSet& coords);

// sum_ij p_ij log(p_ij / max(q_ij, floor)); zero-p terms are skipped.
double kl_divergence(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q);

// dC/dy_i = 4 sum_j (p_ij - q_ij)(y_i - y_j)(1 + |y_i - y_j|^2)^-1
Eigen::MatrixXd gradient(const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q,
                         const PointSet& coords);

struct Embedding {
  PointSet coords;
  std::vector<double> kl_trace;  // KL of the layout entering each iteration
  double final_kl = 0.0;         // KL of the returned layout
  std::vector<ClassLabel> labels;
  std::size_t unconverged_rows = 0;
};

Embedding embed(const PointSet& points, const Config& config,
                std::vector<ClassLabel> labels = {});

// Joint run over both classes; cover rows come first.
Embedding embed(const FeatureMatrix& cover, const FeatureMatrix& stego, const Config& config);

}  // namespace fvc::tsne
