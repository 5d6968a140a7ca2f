#include "fvc/feature_matrix.hpp"

#include <stdexcept>

namespace fvc {

std::string_view to_string(ClassLabel label) {
  return label == ClassLabel::cover ? "cover" : "stego";
}

std::optional<ClassLabel> parse_label(std::string_view text) {
  if (text == "cover") return ClassLabel::cover;
  if (text == "stego") return ClassLabel::stego;
  return std::nullopt;
}

std::optional<std::string> meta_get(const Meta& meta, std::string_view key) {
  for (const auto& [k, v] : meta)
    if (k == key) return v;
  return std::nullopt;
}

void meta_set(Meta& meta, std::string key, std::string value) {
  for (auto& [k, v] : meta) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  meta.emplace_back(std::move(key), std::move(value));
}

FeatureMatrix::FeatureMatrix(Values values, ClassLabel label, Meta meta)
    : values_(std::move(values)), label_(label), meta_(std::move(meta)) {
  if (values_.rows() < 1 || values_.cols() < 1)
    throw std::invalid_argument("feature matrix needs at least one row and one column");
  if (!values_.allFinite())
    throw std::invalid_argument("feature matrix contains a non-finite value");
}

FeatureMatrix FeatureMatrix::from_rows(const std::vector<std::vector<double>>& rows,
                                       ClassLabel label, Meta meta) {
  if (rows.empty() || rows.front().empty())
    throw std::invalid_argument("feature matrix needs at least one row and one column");
  const auto m = rows.front().size();
  Values values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m)
      throw std::invalid_argument("ragged row " + std::to_string(i) + ": expected " +
                                  std::to_string(m) + " entries, got " +
                                  std::to_string(rows[i].size()));
    for (std::size_t j = 0; j < m; ++j)
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return FeatureMatrix(std::move(values), label, std::move(meta));
}

FeatureMatrix FeatureMatrix::with_values(Values values) const {
  return FeatureMatrix(std::move(values), label_, meta_);
}

FeatureMatrix FeatureMatrix::with_meta(Meta meta) const {
  return FeatureMatrix(values_, label_, std::move(meta));
}

FeatureMatrix FeatureMatrix::select_rows(const std::vector<Eigen::Index>& indices) const {
  Values out(static_cast<Eigen::Index>(indices.size()), values_.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto i = indices[r];
    if (i < 0 || i >= values_.rows()) throw std::out_of_range("row index out of range");
    out.row(static_cast<Eigen::Index>(r)) = values_.row(i);
  }
  return FeatureMatrix(std::move(out), label_, meta_);
}

bool operator==(const FeatureMatrix& a, const FeatureMatrix& b) {
  return a.label_ == b.label_ && a.meta_ == b.meta_ && a.values_.rows() == b.values_.rows() &&
         a.values_.cols() == b.values_.cols() && a.values_ == b.values_;
}

}  // namespace fvc
