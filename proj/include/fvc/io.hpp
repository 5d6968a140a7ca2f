#pragma once

#include "fvc/feature_matrix.hpp"
#include "fvc/feature_mod.hpp"
#include "fvc/stats.hpp"
#include "fvc/synth.hpp"
#include "fvc/tsne.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fvc::io {

// FVC1 layout, all integers little-endian:
//   0   magic "FVC1"
//   4   n          u32
//   8   m          u32
//   12  label      u8   (0 cover, 1 stego)
//   13  meta_len   u32
//   17  meta       meta_len bytes of "key=value\n" lines
//   ..  payload    n*m IEEE-754 binary64, row-major
inline constexpr char kMagic[4] = {'F', 'V', 'C', '1'};
inline constexpr std::size_t kHeaderSize = 17;
inline constexpr std::uint32_t kMaxMetaBytes = 16u << 20;

enum class ParseErrorKind {
  bad_magic,
  unsupported_version,
  truncated_header,
  truncated_payload,
  invalid_shape,
  invalid_label,
  invalid_meta,
  non_finite_value,
  trailing_data,
  // CSV
  bad_header,
  empty_table,
  mixed_labels,
  ragged_row,
  non_numeric,
};

std::string_view to_string(ParseErrorKind kind);

// Location is a byte offset for binary input and a 1-based line for CSV.
class ParseError : public std::runtime_error {
 public:
  enum class Unit { byte, line };

  ParseError(ParseErrorKind kind, Unit unit, std::uint64_t location, const std::string& detail);

  ParseErrorKind kind() const { return kind_; }
  Unit unit() const { return unit_; }
  std::uint64_t location() const { return location_; }

 private:
  ParseErrorKind kind_;
  Unit unit_;
  std::uint64_t location_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_matrix_binary(const FeatureMatrix& matrix, std::ostream& out);
FeatureMatrix read_matrix_binary(std::istream& in);

// Header "label,f0,...,f{m-1}", one row per sample, reals at 17 significant
// digits. Meta is not carried.
void write_matrix_csv(const FeatureMatrix& matrix, std::ostream& out);
FeatureMatrix read_matrix_csv(std::istream& in);

// Path helpers. A ".csv" extension selects CSV, anything else FVC1.
void save_matrix(const FeatureMatrix& matrix, const std::filesystem::path& path);
FeatureMatrix load_matrix(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

// ---------------------------------------------------------------------------

struct AccuracyComparison {
  double before = 0.0;
  double after = 0.0;
};

struct AnalysisReport {
  std::string tool_version = FVC_VERSION;
  std::string command;
  std::map<std::string, std::string> config;  // fully resolved settings
  std::map<std::string, std::string> inputs;  // provenance
  std::vector<ClassFeatureStats> classes;
  std::optional<ModificationMask> mask;
  std::optional<ConfidenceReport> confidence;
  std::optional<synth::SweepResult> sweep;
  std::optional<AccuracyComparison> accuracy;
};

// JSON with lexicographically ordered keys; optional sections are omitted
// when empty.
std::string format_report(const AnalysisReport& report);
AnalysisReport parse_report(std::string_view text);
void write_report(const AnalysisReport& report, std::ostream& out);
void write_report(const AnalysisReport& report, const std::filesystem::path& path);

// Tab-separated table with a header row; reals at 17 significant digits.
void write_plot_table(std::ostream& out, std::span<const std::string> header,
                      const std::vector<std::vector<double>>& rows);
void write_sweep_table(std::ostream& out, const synth::SweepResult& sweep);
// label, y1, y2 (more columns for higher output dimensions)
void write_embedding_table(std::ostream& out, const tsne::Embedding& embedding);

// Shortest text for a double with 17 significant digits ("%.17g").
std::string format_real(double value);

}  // namespace fvc::io
