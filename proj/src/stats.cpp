#include "fvc/stats.hpp"

#include "fvc/parallel.hpp"

#include <algorithm>
#include <stdexcept>

namespace fvc {

AccuracyRecord accuracy(std::size_t correct, std::size_t total) {
  if (total == 0) throw std::invalid_argument("accuracy: total must be at least 1");
  if (correct > total)
    throw std::invalid_argument("accuracy: correct count " + std::to_string(correct) +
                                " exceeds total " + std::to_string(total));
  return {correct, total, static_cast<double>(correct) / static_cast<double>(total)};
}

double average_cv(std::span<const DimensionStat> dims) {
  detail::CompensatedSum sum;
  std::size_t used = 0;
  for (const auto& d : dims) {
    if (d.degenerate) continue;
    sum.add(d.cv);
    ++used;
  }
  return used == 0 ? 0.0 : sum.value() / static_cast<double>(used);
}

double average_cv(const ClassFeatureStats& stats) { return average_cv(stats.dims); }

void finalize_class_stats(ClassFeatureStats& stats) {
  stats.excluded_count = static_cast<std::size_t>(
      std::count_if(stats.dims.begin(), stats.dims.end(),
                    [](const DimensionStat& d) { return d.degenerate; }));
  stats.all_degenerate = !stats.dims.empty() && stats.excluded_count == stats.dims.size();
  stats.avg_cv = average_cv(stats.dims);
}

ClassFeatureStats class_stats(const FeatureMatrix& matrix, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("class_stats: epsilon must be positive");
  const auto& values = matrix.values();
  ClassFeatureStats stats;
  stats.label = matrix.label();
  stats.dims.resize(static_cast<std::size_t>(values.cols()));
  parallel_for(stats.dims.size(), [&](std::size_t j) {
    stats.dims[j] = column_stat(values.col(static_cast<Eigen::Index>(j)), j, epsilon);
  });
  finalize_class_stats(stats);
  return stats;
}

std::vector<std::string> rank_models(std::span<const ModelScore> entries) {
  if (entries.empty()) throw std::invalid_argument("rank_models: no entries");
  std::vector<ModelScore> sorted(entries.begin(), entries.end());
  for (const auto& e : sorted)
    if (!std::isfinite(e.avg_cv))
      throw std::invalid_argument("rank_models: non-finite score for " + e.name);
  std::sort(sorted.begin(), sorted.end(), [](const ModelScore& a, const ModelScore& b) {
    if (a.avg_cv != b.avg_cv) return a.avg_cv < b.avg_cv;
    return a.name < b.name;
  });
  std::vector<std::string> names;
  names.reserve(sorted.size());
  for (auto& e : sorted) names.push_back(std::move(e.name));
  return names;
}

GroupedEvaluation grouped_eval(std::span<const std::size_t> corrects, std::size_t group_size) {
  if (group_size == 0) throw std::invalid_argument("grouped_eval: group size must be at least 1");
  if (corrects.size() < 2)
    throw std::invalid_argument("grouped_eval: at least two groups are required");
  GroupedEvaluation eval;
  eval.group_size = group_size;
  eval.corrects.assign(corrects.begin(), corrects.end());
  eval.deltas.reserve(corrects.size());
  detail::CompensatedSum sum;
  for (std::size_t i = 0; i < corrects.size(); ++i) {
    if (corrects[i] > group_size)
      throw std::invalid_argument("grouped_eval: group " + std::to_string(i) + " has " +
                                  std::to_string(corrects[i]) + " correct of " +
                                  std::to_string(group_size));
    const double delta = static_cast<double>(corrects[i]) / static_cast<double>(group_size);
    eval.deltas.push_back(delta);
    sum.add(delta);
  }
  eval.mean_acc = sum.value() / static_cast<double>(corrects.size());
  return eval;
}

double z_value(ConfidenceLevel level) {
  switch (level) {
    case ConfidenceLevel::p98: return 2.33;
    case ConfidenceLevel::p95: return 1.96;
    case ConfidenceLevel::p90: return 1.64;
  }
  throw std::invalid_argument("unknown confidence level");
}

double level_fraction(ConfidenceLevel level) {
  switch (level) {
    case ConfidenceLevel::p98: return 0.98;
    case ConfidenceLevel::p95: return 0.95;
    case ConfidenceLevel::p90: return 0.90;
  }
  throw std::invalid_argument("unknown confidence level");
}

ConfidenceLevel parse_confidence_level(double level) {
  const double fraction = level > 1.0 ? level / 100.0 : level;
  for (auto l : {ConfidenceLevel::p98, ConfidenceLevel::p95, ConfidenceLevel::p90})
    if (std::abs(fraction - level_fraction(l)) < 1e-9) return l;
  throw std::invalid_argument("unsupported confidence level " + std::to_string(level) +
                              " (expected 98, 95 or 90)");
}

double confidence_radius(double mean_acc, std::size_t groups, ConfidenceLevel level,
                         double scale) {
  if (!(mean_acc >= 0.0 && mean_acc <= 1.0))
    throw std::invalid_argument("confidence_radius: mean accuracy outside [0, 1]");
  if (groups < 2) throw std::invalid_argument("confidence_radius: at least two groups required");
  if (!(scale > 0.0)) throw std::invalid_argument("confidence_radius: scale must be positive");
  return scale * z_value(level) *
         std::sqrt(mean_acc * (1.0 - mean_acc) / static_cast<double>(groups));
}

double confidence_radius(double mean_acc, std::size_t groups, double level, double scale) {
  return confidence_radius(mean_acc, groups, parse_confidence_level(level), scale);
}

ConfidenceReport confidence_report(const GroupedEvaluation& eval,
                                   std::span<const ConfidenceLevel> levels, double scale) {
  ConfidenceReport report;
  report.mean_acc = eval.mean_acc;
  report.groups = eval.groups();
  report.scale = scale;
  for (auto level : levels)
    report.radii[level] = confidence_radius(eval.mean_acc, eval.groups(), level, scale);
  return report;
}

ConfidenceReport confidence_report(const GroupedEvaluation& eval, double scale) {
  static constexpr ConfidenceLevel all[] = {ConfidenceLevel::p98, ConfidenceLevel::p95,
                                            ConfidenceLevel::p90};
  return confidence_report(eval, all, scale);
}

}  // namespace fvc
