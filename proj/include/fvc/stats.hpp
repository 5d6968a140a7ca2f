#pragma once

#include "fvc/feature_matrix.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace fvc {

// ---------------------------------------------------------------------------
// Detection accuracy
// ---------------------------------------------------------------------------

struct AccuracyRecord {
  std::size_t correct = 0;
  std::size_t total = 0;
  double value = 0.0;  // correct / total, in [0, 1]
};

// Throws std::invalid_argument when total == 0 or correct > total.
AccuracyRecord accuracy(std::size_t correct, std::size_t total);

// ---------------------------------------------------------------------------
// Per-dimension variation coefficients
// ---------------------------------------------------------------------------

inline constexpr double kDefaultEpsilon = 1e-12;

struct DimensionStat {
  std::size_t index = 0;
  double mean = 0.0;
  double std = 0.0;  // population deviation (divisor n)
  double cv = 0.0;   // std / |mean|
  bool degenerate = false;
};

struct ClassFeatureStats {
  ClassLabel label = ClassLabel::cover;
  std::vector<DimensionStat> dims;
  double avg_cv = 0.0;
  std::size_t excluded_count = 0;
  // Set when every dimension is degenerate; avg_cv is then 0.
  bool all_degenerate = false;
};

namespace detail {

// Neumaier-compensated running sum. Order of add() calls is the summation
// order, so callers iterate in ascending index for reproducible bits.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace detail

// Mean, population deviation and CV of one column, two-pass.
template <typename Derived>
DimensionStat column_stat(const Eigen::MatrixBase<Derived>& column, std::size_t index,
                          double epsilon = kDefaultEpsilon) {
  const Eigen::Index n = column.size();
  detail::CompensatedSum sum;
  for (Eigen::Index i = 0; i < n; ++i) sum.add(static_cast<double>(column(i)));
  const double mean = sum.value() / static_cast<double>(n);

  detail::CompensatedSum sq;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = static_cast<double>(column(i)) - mean;
    sq.add(d * d);
  }
  const double std = std::sqrt(sq.value() / static_cast<double>(n));

  DimensionStat out;
  out.index = index;
  out.mean = mean;
  out.std = std;
  if (std::abs(mean) < epsilon) {
    // Zero-mean columns have no usable CV. A flat zero column is simply 0.
    out.degenerate = std >= epsilon;
    out.cv = 0.0;
  } else {
    out.cv = std / std::abs(mean);
  }
  return out;
}

// Mean of cv over non-degenerate dimensions; 0 when none remain.
double average_cv(std::span<const DimensionStat> dims);
double average_cv(const ClassFeatureStats& stats);

// Column statistics of an arbitrary dense block (rows are samples).
template <typename Derived>
ClassFeatureStats class_stats(const Eigen::MatrixBase<Derived>& values, ClassLabel label,
                              double epsilon = kDefaultEpsilon);

// Throws std::invalid_argument when epsilon <= 0.
ClassFeatureStats class_stats(const FeatureMatrix& matrix, double epsilon = kDefaultEpsilon);

// Fills avg_cv, excluded_count and all_degenerate from dims.
void finalize_class_stats(ClassFeatureStats& stats);

// ---------------------------------------------------------------------------
// Model ranking
// ---------------------------------------------------------------------------

struct ModelScore {
  std::string name;
  double avg_cv = 0.0;
};

// Names in ascending avg_cv order; equal scores fall back to name order.
std::vector<std::string> rank_models(std::span<const ModelScore> entries);

// ---------------------------------------------------------------------------
// Grouped accuracy and confidence radii
// ---------------------------------------------------------------------------

struct GroupedEvaluation {
  std::size_t group_size = 0;
  std::vector<std::size_t> corrects;
  std::vector<double> deltas;
  double mean_acc = 0.0;

  std::size_t groups() const { return corrects.size(); }
};

// Throws std::invalid_argument on group_size == 0, fewer than two groups, or
// a group with more correct samples than group_size.
GroupedEvaluation grouped_eval(std::span<const std::size_t> corrects, std::size_t group_size);

enum class ConfidenceLevel { p98, p95, p90 };

// Normal critical values as tabulated for two-sided 98/95/90% intervals.
double z_value(ConfidenceLevel level);
double level_fraction(ConfidenceLevel level);

// Accepts a fraction (0.95) or a percentage (95). Unknown levels throw
// std::invalid_argument.
ConfidenceLevel parse_confidence_level(double level);

// scale * z * sqrt(mean_acc (1 - mean_acc) / groups). scale = 10 reproduces
// the printed form of the interval formula; the tabulated radii use 1.
double confidence_radius(double mean_acc, std::size_t groups, ConfidenceLevel level,
                         double scale = 1.0);
double confidence_radius(double mean_acc, std::size_t groups, double level, double scale = 1.0);

struct ConfidenceReport {
  double mean_acc = 0.0;
  std::size_t groups = 0;
  std::map<ConfidenceLevel, double> radii;
  double scale = 1.0;
};

ConfidenceReport confidence_report(const GroupedEvaluation& eval,
                                   std::span<const ConfidenceLevel> levels,
                                   double scale = 1.0);
ConfidenceReport confidence_report(const GroupedEvaluation& eval, double scale = 1.0);

// ---------------------------------------------------------------------------

template <typename Derived>
ClassFeatureStats class_stats(const Eigen::MatrixBase<Derived>& values, ClassLabel label,
                              double epsilon) {
  ClassFeatureStats stats;
  stats.label = label;
  stats.dims.reserve(static_cast<std::size_t>(values.cols()));
  for (Eigen::Index j = 0; j < values.cols(); ++j)
    stats.dims.push_back(column_stat(values.col(j), static_cast<std::size_t>(j), epsilon));
  finalize_class_stats(stats);
  return stats;
}

}  // namespace fvc
