#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fvc {

enum class ClassLabel : unsigned char { cover = 0, stego = 1 };

std::string_view to_string(ClassLabel label);
std::optional<ClassLabel> parse_label(std::string_view text);

// Ordered key/value metadata. Insertion order is kept so that files written
// by other tools re-serialize byte-for-byte.
using Meta = std::vector<std::pair<std::string, std::string>>;

std::optional<std::string> meta_get(const Meta& meta, std::string_view key);
void meta_set(Meta& meta, std::string key, std::string value);

// n x m feature vectors of one sample class. Row i is sample i, column j is
// feature dimension j. Every value is finite; construction enforces it.
class FeatureMatrix {
 public:
  using Values = Eigen::MatrixXd;

  FeatureMatrix(Values values, ClassLabel label, Meta meta = {});

  // Builds from row vectors; every row must have the same length.
  static FeatureMatrix from_rows(const std::vector<std::vector<double>>& rows,
                                 ClassLabel label, Meta meta = {});

  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }
  const Values& values() const { return values_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return values_(i, j); }
  ClassLabel label() const { return label_; }
  const Meta& meta() const { return meta_; }

  FeatureMatrix with_values(Values values) const;
  FeatureMatrix with_meta(Meta meta) const;

  // Subset of rows, in the order given.
  FeatureMatrix select_rows(const std::vector<Eigen::Index>& indices) const;

  friend bool operator==(const FeatureMatrix& a, const FeatureMatrix& b);

 private:
  Values values_;
  ClassLabel label_;
  Meta meta_;
};

}  // namespace fvc
