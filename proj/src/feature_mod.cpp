#include "fvc/feature_mod.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace fvc {

ModificationMask select_mask(const ClassFeatureStats& stego_stats, std::size_t k) {
  if (stego_stats.label != ClassLabel::stego)
    throw std::invalid_argument("select_mask: statistics must come from the stego class");
  const std::size_t m = stego_stats.dims.size();
  if (k > m)
    throw std::invalid_argument("select_mask: k = " + std::to_string(k) + " exceeds " +
                                std::to_string(m) + " columns");

  std::vector<std::size_t> candidates;
  candidates.reserve(m);
  for (std::size_t j = 0; j < m; ++j)
    if (!stego_stats.dims[j].degenerate) candidates.push_back(j);

  std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
    return stego_stats.dims[a].cv > stego_stats.dims[b].cv;
  });
  candidates.resize(std::min(k, candidates.size()));
  std::sort(candidates.begin(), candidates.end());

  ModificationMask mask;
  mask.cols = m;
  mask.zeroed = std::move(candidates);
  mask.k = k;
  mask.source_label = ClassLabel::stego;
  mask.oversized = k > kRecommendedMaxMaskSize;
  return mask;
}

FeatureMatrix apply_mask(const FeatureMatrix& matrix, const ModificationMask& mask) {
  if (static_cast<std::size_t>(matrix.cols()) != mask.cols)
    throw std::invalid_argument("apply_mask: matrix has " + std::to_string(matrix.cols()) +
                                " columns, mask expects " + std::to_string(mask.cols));
  FeatureMatrix::Values values = matrix.values();
  for (auto j : mask.zeroed) values.col(static_cast<Eigen::Index>(j)).setZero();
  return matrix.with_values(std::move(values));
}

std::string format_mask(const ModificationMask& mask) {
  std::ostringstream out;
  out << "# fvc mask v1\n";
  out << "cols=" << mask.cols << '\n';
  out << "k=" << mask.k << '\n';
  out << "source_label=" << to_string(mask.source_label) << '\n';
  out << "zeroed=" << mask.zeroed.size() << '\n';
  for (auto j : mask.zeroed) out << j << '\n';
  return out.str();
}

namespace {

std::size_t parse_count(std::string_view text, std::size_t line) {
  std::size_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty())
    throw std::invalid_argument("mask line " + std::to_string(line) + ": expected a count, got '" +
                                std::string(text) + "'");
  return value;
}

std::string_view expect_field(std::string_view line, std::string_view key, std::size_t lineno) {
  if (line.size() <= key.size() || line.substr(0, key.size()) != key ||
      line[key.size()] != '=')
    throw std::invalid_argument("mask line " + std::to_string(lineno) + ": expected '" +
                                std::string(key) + "='");
  return line.substr(key.size() + 1);
}

}  // namespace

ModificationMask parse_mask(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();

  if (lines.size() < 5 || lines[0] != "# fvc mask v1")
    throw std::invalid_argument("mask: missing '# fvc mask v1' header");

  ModificationMask mask;
  mask.cols = parse_count(expect_field(lines[1], "cols", 2), 2);
  mask.k = parse_count(expect_field(lines[2], "k", 3), 3);
  const auto label = parse_label(expect_field(lines[3], "source_label", 4));
  if (!label) throw std::invalid_argument("mask line 4: unknown label");
  mask.source_label = *label;
  const auto count = parse_count(expect_field(lines[4], "zeroed", 5), 5);
  if (lines.size() != 5 + count)
    throw std::invalid_argument("mask: header announces " + std::to_string(count) +
                                " indices, found " + std::to_string(lines.size() - 5));
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = parse_count(lines[5 + i], 6 + i);
    if (j >= mask.cols)
      throw std::invalid_argument("mask line " + std::to_string(6 + i) + ": index " +
                                  std::to_string(j) + " out of range");
    if (!mask.zeroed.empty() && j <= mask.zeroed.back())
      throw std::invalid_argument("mask line " + std::to_string(6 + i) +
                                  ": indices must be strictly ascending");
    mask.zeroed.push_back(j);
  }
  if (mask.zeroed.size() > mask.k)
    throw std::invalid_argument("mask: more zeroed columns than k");
  mask.oversized = mask.k > kRecommendedMaxMaskSize;
  return mask;
}

}  // namespace fvc
