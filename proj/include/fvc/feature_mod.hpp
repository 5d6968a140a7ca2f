#pragma once

#include "fvc/feature_matrix.hpp"
#include "fvc/stats.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace fvc {

inline constexpr std::size_t kDefaultMaskSize = 3;
// Zeroing more columns than this starves the classifier of input.
inline constexpr std::size_t kRecommendedMaxMaskSize = 3;

// Columns zeroed before classification.
struct ModificationMask {
  std::size_t cols = 0;
  std::vector<std::size_t> zeroed;  // sorted ascending, unique
  std::size_t k = 0;
  ClassLabel source_label = ClassLabel::stego;
  bool oversized = false;  // k above kRecommendedMaxMaskSize

  bool empty() const { return zeroed.empty(); }
  friend bool operator==(const ModificationMask&, const ModificationMask&) = default;
};

// Picks the k non-degenerate columns with the largest stego CV. Equal CVs
// prefer the lower column index. Fewer than k columns are returned when
// not enough non-degenerate columns exist.
ModificationMask select_mask(const ClassFeatureStats& stego_stats, std::size_t k);

// Copy of matrix with every masked column set to exactly 0.
FeatureMatrix apply_mask(const FeatureMatrix& matrix, const ModificationMask& mask);

// Line-oriented text form:
//   # fvc mask v1
//   cols=<m>
//   k=<k>
//   source_label=<cover|stego>
//   zeroed=<count>
//   <index>        (one per line, ascending)
std::string format_mask(const ModificationMask& mask);
ModificationMask parse_mask(std::string_view text);

}  // namespace fvc
