#pragma once

#include "fvc/feature_matrix.hpp"
#include "fvc/feature_mod.hpp"
#include "fvc/stats.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fvc::synth {

// Two spherical clusters offset from the origin by mean_offset in every
// dimension. Informative dimensions separate the classes; noise dimensions
// share one centroid and carry a large class-independent spread.
struct Config {
  std::size_t n_per_class = 100;
  std::size_t n_test_per_class = 0;  // 0: same as n_per_class
  std::size_t dims_informative = 4;
  std::size_t dims_noise = 0;
  double separation = 2.0;  // Euclidean distance between class centroids
  double dispersion = 1.0;
  double noise_dispersion = 5.0;
  double mean_offset = 20.0;
  std::uint64_t seed = 42;

  std::size_t dims() const { return dims_informative + dims_noise; }
  std::size_t test_per_class() const { return n_test_per_class ? n_test_per_class : n_per_class; }
};

// Ablation scenario: small training split, three loud noise columns.
Config ablation_scenario();
// Base scenario for the dispersion sweep.
Config sweep_scenario();

struct ClassPair {
  FeatureMatrix cover;
  FeatureMatrix stego;
};

struct Dataset {
  ClassPair train;
  ClassPair test;
};

// Throws std::invalid_argument for zero dimensions, zero samples, or
// negative spreads.
Dataset generate(const Config& config);

// ---------------------------------------------------------------------------

struct TrainOptions {
  int epochs = 100;
  double rate = 0.01;
  std::uint64_t seed = 42;
};

// Logistic-regression stand-in for a fully connected classification layer.
// decision(x) = weights . x + bias; positive means stego.
struct LinearClassifier {
  Eigen::VectorXd weights;
  double bias = 0.0;
  std::vector<double> training_trace;  // mean log-loss before each epoch

  double decision(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  bool predicts_stego(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    return decision(x) > 0.0;
  }
};

// Full-batch gradient descent on the mean log-loss. Inputs are centred on the
// pooled training mean but not rescaled, so loud columns dominate the
// updates the way raw pre-classifier features do. Initial weights are small
// seeded deviates.
LinearClassifier train_classifier(const ClassPair& train, const TrainOptions& options);

// Mean log-loss of the classifier on a labelled pair.
double log_loss(const LinearClassifier& classifier, const ClassPair& data);

AccuracyRecord evaluate(const LinearClassifier& classifier, const ClassPair& test);

// ---------------------------------------------------------------------------

struct RankCorrelation {
  double rho = 0.0;
  bool degenerate = false;  // a rank vector was constant; rho reported as 0
};

// Spearman rank correlation with average ranks for ties. Throws
// std::invalid_argument on length mismatch or fewer than 3 pairs.
RankCorrelation spearman(std::span<const double> xs, std::span<const double> ys);

struct SweepPoint {
  double level = 0.0;
  double stego_avg_cv = 0.0;
  double accuracy = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  double spearman_rho = 0.0;
  bool degenerate = false;
};

// Each level regenerates the base scenario with dispersion = level using the
// same data seed, so levels differ only in spread.
SweepResult cv_accuracy_sweep(std::span<const double> levels, const Config& base,
                              const TrainOptions& options);

struct AblationResult {
  double accuracy_before = 0.0;
  double accuracy_after = 0.0;
  ModificationMask mask;
  ClassFeatureStats train_stego_stats;
};

// Train, select a mask from training stego statistics only, zero those
// columns in every split and class, retrain from scratch, re-evaluate.
AblationResult masking_ablation(const Config& config, std::size_t k, const TrainOptions& options);

// Same flow on explicit splits.
AblationResult masking_ablation(const Dataset& data, std::size_t k, const TrainOptions& options);

}  // namespace fvc::synth
