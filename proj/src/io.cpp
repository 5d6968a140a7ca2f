#include "fvc/io.hpp"

#include "json.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace fvc::io {

using nlohmann::json;

std::string_view to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::bad_magic: return "bad magic";
    case ParseErrorKind::unsupported_version: return "unsupported version";
    case ParseErrorKind::truncated_header: return "truncated header";
    case ParseErrorKind::truncated_payload: return "truncated payload";
    case ParseErrorKind::invalid_shape: return "invalid shape";
    case ParseErrorKind::invalid_label: return "invalid label";
    case ParseErrorKind::invalid_meta: return "invalid meta";
    case ParseErrorKind::non_finite_value: return "non-finite value";
    case ParseErrorKind::trailing_data: return "trailing data";
    case ParseErrorKind::bad_header: return "bad header";
    case ParseErrorKind::empty_table: return "empty table";
    case ParseErrorKind::mixed_labels: return "mixed labels";
    case ParseErrorKind::ragged_row: return "ragged row";
    case ParseErrorKind::non_numeric: return "non-numeric cell";
  }
  return "parse error";
}

namespace {

std::string describe(ParseErrorKind kind, ParseError::Unit unit, std::uint64_t location,
                     const std::string& detail) {
  std::string msg(to_string(kind));
  msg += unit == ParseError::Unit::byte ? " at byte offset " : " at line ";
  msg += std::to_string(location);
  if (!detail.empty()) msg += ": " + detail;
  return msg;
}

[[noreturn]] void fail_at_byte(ParseErrorKind kind, std::uint64_t offset,
                               const std::string& detail = {}) {
  throw ParseError(kind, ParseError::Unit::byte, offset, detail);
}

[[noreturn]] void fail_at_line(ParseErrorKind kind, std::uint64_t line,
                               const std::string& detail = {}) {
  throw ParseError(kind, ParseError::Unit::line, line, detail);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                         static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(bytes, 4);
}

void put_f64(std::ostream& out, double value) {
  const auto bits = std::bit_cast<std::uint64_t>(value);
  char bytes[8];
  for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  out.write(bytes, 8);
}

// Reads exactly count bytes; returns how many were available.
std::size_t read_bytes(std::istream& in, unsigned char* dst, std::size_t count) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(count));
  return static_cast<std::size_t>(in.gcount());
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::string encode_meta(const Meta& meta) {
  std::string out;
  for (const auto& [k, v] : meta) {
    if (k.empty() || k.find_first_of("=\n") != std::string::npos)
      throw std::invalid_argument("meta key '" + k + "' must be non-empty without '=' or newline");
    if (v.find('\n') != std::string::npos)
      throw std::invalid_argument("meta value for '" + k + "' contains a newline");
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

Meta decode_meta(std::string_view text, std::uint64_t base_offset) {
  Meta meta;
  std::uint64_t offset = base_offset;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto line = text.substr(0, nl);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos || eq == 0)
      fail_at_byte(ParseErrorKind::invalid_meta, offset, "expected key=value");
    meta.emplace_back(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
    if (nl == std::string_view::npos) break;
    offset += nl + 1;
    text.remove_prefix(nl + 1);
  }
  return meta;
}

void check_stream(std::ostream& out) {
  if (!out) throw IoError("write failed");
}

}  // namespace

ParseError::ParseError(ParseErrorKind kind, Unit unit, std::uint64_t location,
                       const std::string& detail)
    : std::runtime_error(describe(kind, unit, location, detail)),
      kind_(kind),
      unit_(unit),
      location_(location) {}

std::string format_real(double value) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::general, 17);
  return std::string(buf.data(), ptr);
}

// ---------------------------------------------------------------------------
// FVC1

void write_matrix_binary(const FeatureMatrix& matrix, std::ostream& out) {
  const std::string meta = encode_meta(matrix.meta());
  if (matrix.rows() > UINT32_MAX || matrix.cols() > UINT32_MAX || meta.size() > UINT32_MAX)
    throw std::invalid_argument("matrix too large for the FVC1 format");
  out.write(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(matrix.rows()));
  put_u32(out, static_cast<std::uint32_t>(matrix.cols()));
  out.put(static_cast<char>(matrix.label()));
  put_u32(out, static_cast<std::uint32_t>(meta.size()));
  out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  const auto& values = matrix.values();
  for (Eigen::Index i = 0; i < values.rows(); ++i)
    for (Eigen::Index j = 0; j < values.cols(); ++j) put_f64(out, values(i, j));
  check_stream(out);
}

FeatureMatrix read_matrix_binary(std::istream& in) {
  std::array<unsigned char, kHeaderSize> header{};
  const auto got = read_bytes(in, header.data(), 4);
  if (got >= 3 && header[0] == 'F' && header[1] == 'V' && header[2] == 'C' &&
      (got < 4 || header[3] != '1')) {
    if (got < 4) fail_at_byte(ParseErrorKind::truncated_header, got, "stream ends inside magic");
    fail_at_byte(ParseErrorKind::unsupported_version, 3,
                 std::string("format version '") + static_cast<char>(header[3]) + "'");
  }
  for (std::size_t b = 0; b < got; ++b)
    if (header[b] != static_cast<unsigned char>(kMagic[b]))
      fail_at_byte(ParseErrorKind::bad_magic, b, "expected FVC1");
  if (got < 4) fail_at_byte(ParseErrorKind::truncated_header, got, "stream ends inside magic");

  const auto rest = read_bytes(in, header.data() + 4, kHeaderSize - 4);
  if (rest < kHeaderSize - 4)
    fail_at_byte(ParseErrorKind::truncated_header, 4 + rest, "header needs 17 bytes");

  const std::uint32_t n = get_u32(&header[4]);
  const std::uint32_t m = get_u32(&header[8]);
  const unsigned char label_code = header[12];
  const std::uint32_t meta_len = get_u32(&header[13]);
  if (n == 0) fail_at_byte(ParseErrorKind::invalid_shape, 4, "row count is zero");
  if (m == 0) fail_at_byte(ParseErrorKind::invalid_shape, 8, "column count is zero");
  if (label_code > 1)
    fail_at_byte(ParseErrorKind::invalid_label, 12,
                 "label code " + std::to_string(label_code) + " is not 0 or 1");
  if (static_cast<std::uint64_t>(n) * m > (std::uint64_t{1} << 31))
    fail_at_byte(ParseErrorKind::invalid_shape, 4, "matrix exceeds 2^31 values");

  if (meta_len > kMaxMetaBytes)
    fail_at_byte(ParseErrorKind::invalid_meta, 13,
                 "meta block of " + std::to_string(meta_len) + " bytes exceeds the 16 MiB limit");
  std::string meta_text(meta_len, '\0');
  const auto meta_got =
      read_bytes(in, reinterpret_cast<unsigned char*>(meta_text.data()), meta_len);
  if (meta_got < meta_len)
    fail_at_byte(ParseErrorKind::truncated_header, kHeaderSize + meta_got,
                 "meta block shorter than announced " + std::to_string(meta_len) + " bytes");
  Meta meta = decode_meta(meta_text, kHeaderSize);

  const std::uint64_t payload_start = kHeaderSize + meta_len;
  Eigen::MatrixXd values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  std::array<unsigned char, 8> cell{};
  std::uint64_t offset = payload_start;
  for (Eigen::Index i = 0; i < values.rows(); ++i)
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      const auto cell_got = read_bytes(in, cell.data(), 8);
      if (cell_got < 8)
        fail_at_byte(ParseErrorKind::truncated_payload, offset + cell_got,
                     "expected " + std::to_string(static_cast<std::uint64_t>(n) * m * 8) +
                         " payload bytes");
      std::uint64_t bits = 0;
      for (int b = 7; b >= 0; --b) bits = (bits << 8) | cell[static_cast<std::size_t>(b)];
      const double v = std::bit_cast<double>(bits);
      if (!std::isfinite(v))
        fail_at_byte(ParseErrorKind::non_finite_value, offset,
                     "row " + std::to_string(i) + ", column " + std::to_string(j));
      values(i, j) = v;
      offset += 8;
    }
  if (in.peek() != std::char_traits<char>::eof())
    fail_at_byte(ParseErrorKind::trailing_data, offset, "bytes after payload");

  return FeatureMatrix(std::move(values), static_cast<ClassLabel>(label_code), std::move(meta));
}

// ---------------------------------------------------------------------------
// CSV

void write_matrix_csv(const FeatureMatrix& matrix, std::ostream& out) {
  out << "label";
  for (Eigen::Index j = 0; j < matrix.cols(); ++j) out << ",f" << j;
  out << '\n';
  const auto label = to_string(matrix.label());
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    out << label;
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) out << ',' << format_real(matrix(i, j));
    out << '\n';
  }
  check_stream(out);
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  while (true) {
    const auto comma = line.find(',');
    cells.push_back(line.substr(0, comma));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace

FeatureMatrix read_matrix_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) fail_at_line(ParseErrorKind::empty_table, 1, "no header row");
  ++lineno;
  const auto header = split_commas(trim(line));
  if (header.size() < 2 || trim(header[0]) != "label")
    fail_at_line(ParseErrorKind::bad_header, 1, "expected 'label,f0,...'");
  for (std::size_t j = 1; j < header.size(); ++j)
    if (trim(header[j]) != "f" + std::to_string(j - 1))
      fail_at_line(ParseErrorKind::bad_header, 1,
                   "column " + std::to_string(j) + " should be named f" + std::to_string(j - 1));
  const std::size_t m = header.size() - 1;

  std::optional<ClassLabel> label;
  std::vector<double> data;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto row = trim(line);
    if (row.empty()) continue;
    const auto cells = split_commas(row);
    if (cells.size() != m + 1)
      fail_at_line(ParseErrorKind::ragged_row, lineno,
                   "expected " + std::to_string(m + 1) + " cells, got " +
                       std::to_string(cells.size()));
    const auto this_label = parse_label(trim(cells[0]));
    if (!this_label)
      fail_at_line(ParseErrorKind::mixed_labels, lineno,
                   "label '" + std::string(trim(cells[0])) + "' is not cover or stego");
    if (label && *label != *this_label)
      fail_at_line(ParseErrorKind::mixed_labels, lineno, "file mixes cover and stego rows");
    label = this_label;
    for (std::size_t j = 1; j <= m; ++j) {
      const auto cell = trim(cells[j]);
      double v = 0.0;
      const auto* end = cell.data() + cell.size();
      auto [ptr, ec] = std::from_chars(cell.data(), end, v);
      if (cell.empty() || ec != std::errc() || ptr != end)
        fail_at_line(ParseErrorKind::non_numeric, lineno,
                     "cell '" + std::string(cell) + "' in column f" + std::to_string(j - 1));
      if (!std::isfinite(v))
        fail_at_line(ParseErrorKind::non_finite_value, lineno,
                     "column f" + std::to_string(j - 1));
      data.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) fail_at_line(ParseErrorKind::empty_table, lineno, "no data rows");

  Eigen::MatrixXd values(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < m; ++j)
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data[i * m + j];
  return FeatureMatrix(std::move(values), *label);
}

// ---------------------------------------------------------------------------
// Files

namespace {
bool is_csv(const std::filesystem::path& path) { return path.extension() == ".csv"; }
}  // namespace

void save_matrix(const FeatureMatrix& matrix, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  if (is_csv(path))
    write_matrix_csv(matrix, out);
  else
    write_matrix_binary(matrix, out);
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

FeatureMatrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return is_csv(path) ? read_matrix_csv(in) : read_matrix_binary(in);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Reports

namespace {

std::string level_key(ConfidenceLevel level) {
  switch (level) {
    case ConfidenceLevel::p98: return "98";
    case ConfidenceLevel::p95: return "95";
    case ConfidenceLevel::p90: return "90";
  }
  return "?";
}

json stats_to_json(const ClassFeatureStats& s) {
  json dims = json::array();
  for (const auto& d : s.dims)
    dims.push_back({{"index", d.index},
                    {"mean", d.mean},
                    {"std", d.std},
                    {"cv", d.cv},
                    {"degenerate", d.degenerate}});
  return {{"label", std::string(to_string(s.label))},
          {"avg_cv", s.avg_cv},
          {"excluded_count", s.excluded_count},
          {"all_degenerate", s.all_degenerate},
          {"dims", std::move(dims)}};
}

ClassLabel label_from_json(const json& j) {
  const auto label = parse_label(j.get<std::string>());
  if (!label) throw std::invalid_argument("report: unknown class label");
  return *label;
}

ClassFeatureStats stats_from_json(const json& j) {
  ClassFeatureStats s;
  s.label = label_from_json(j.at("label"));
  s.avg_cv = j.at("avg_cv").get<double>();
  s.excluded_count = j.at("excluded_count").get<std::size_t>();
  s.all_degenerate = j.at("all_degenerate").get<bool>();
  for (const auto& d : j.at("dims"))
    s.dims.push_back({d.at("index").get<std::size_t>(), d.at("mean").get<double>(),
                      d.at("std").get<double>(), d.at("cv").get<double>(),
                      d.at("degenerate").get<bool>()});
  return s;
}

}  // namespace

std::string format_report(const AnalysisReport& report) {
  json doc;
  doc["tool_version"] = report.tool_version;
  doc["command"] = report.command;
  doc["config"] = report.config;
  doc["inputs"] = report.inputs;
  if (!report.classes.empty()) {
    json classes = json::array();
    for (const auto& s : report.classes) classes.push_back(stats_to_json(s));
    doc["classes"] = std::move(classes);
  }
  if (report.mask)
    doc["mask"] = {{"cols", report.mask->cols},
                   {"k", report.mask->k},
                   {"source_label", std::string(to_string(report.mask->source_label))},
                   {"zeroed", report.mask->zeroed},
                   {"oversized", report.mask->oversized}};
  if (report.confidence) {
    json radii = json::object();
    for (const auto& [level, r] : report.confidence->radii) radii[level_key(level)] = r;
    doc["confidence"] = {{"mean_acc", report.confidence->mean_acc},
                         {"groups", report.confidence->groups},
                         {"scale", report.confidence->scale},
                         {"radii", std::move(radii)}};
  }
  if (report.sweep) {
    json points = json::array();
    for (const auto& p : report.sweep->points)
      points.push_back(
          {{"level", p.level}, {"stego_avg_cv", p.stego_avg_cv}, {"accuracy", p.accuracy}});
    doc["sweep"] = {{"points", std::move(points)},
                    {"spearman_rho", report.sweep->spearman_rho},
                    {"degenerate", report.sweep->degenerate}};
  }
  if (report.accuracy)
    doc["accuracy"] = {{"before", report.accuracy->before}, {"after", report.accuracy->after}};
  return doc.dump(2) + "\n";
}

AnalysisReport parse_report(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("report is not valid JSON: ") + e.what());
  }
  try {
    AnalysisReport r;
    r.tool_version = doc.at("tool_version").get<std::string>();
    r.command = doc.at("command").get<std::string>();
    r.config = doc.at("config").get<std::map<std::string, std::string>>();
    r.inputs = doc.at("inputs").get<std::map<std::string, std::string>>();
    if (doc.contains("classes"))
      for (const auto& c : doc["classes"]) r.classes.push_back(stats_from_json(c));
    if (doc.contains("mask")) {
      const auto& m = doc["mask"];
      ModificationMask mask;
      mask.cols = m.at("cols").get<std::size_t>();
      mask.k = m.at("k").get<std::size_t>();
      mask.source_label = label_from_json(m.at("source_label"));
      mask.zeroed = m.at("zeroed").get<std::vector<std::size_t>>();
      mask.oversized = m.at("oversized").get<bool>();
      r.mask = std::move(mask);
    }
    if (doc.contains("confidence")) {
      const auto& c = doc["confidence"];
      ConfidenceReport conf;
      conf.mean_acc = c.at("mean_acc").get<double>();
      conf.groups = c.at("groups").get<std::size_t>();
      conf.scale = c.at("scale").get<double>();
      for (const auto& [key, value] : c.at("radii").items())
        conf.radii[parse_confidence_level(std::stod(key))] = value.get<double>();
      r.confidence = std::move(conf);
    }
    if (doc.contains("sweep")) {
      const auto& s = doc["sweep"];
      synth::SweepResult sweep;
      for (const auto& p : s.at("points"))
        sweep.points.push_back({p.at("level").get<double>(), p.at("stego_avg_cv").get<double>(),
                                p.at("accuracy").get<double>()});
      sweep.spearman_rho = s.at("spearman_rho").get<double>();
      sweep.degenerate = s.at("degenerate").get<bool>();
      r.sweep = std::move(sweep);
    }
    if (doc.contains("accuracy"))
      r.accuracy = AccuracyComparison{doc["accuracy"].at("before").get<double>(),
                                      doc["accuracy"].at("after").get<double>()};
    return r;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed report: ") + e.what());
  }
}

void write_report(const AnalysisReport& report, std::ostream& out) {
  out << format_report(report);
  check_stream(out);
}

void write_report(const AnalysisReport& report, const std::filesystem::path& path) {
  write_text_file(path, format_report(report));
}

// ---------------------------------------------------------------------------
// Plot tables

void write_plot_table(std::ostream& out, std::span<const std::string> header,
                      const std::vector<std::vector<double>>& rows) {
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "\t" : "") << header[c];
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::invalid_argument("plot table row width does not match header");
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "\t" : "") << format_real(row[c]);
    out << '\n';
  }
  check_stream(out);
}

void write_sweep_table(std::ostream& out, const synth::SweepResult& sweep) {
  const std::string header[] = {"level", "avg_cv", "accuracy"};
  std::vector<std::vector<double>> rows;
  for (const auto& p : sweep.points) rows.push_back({p.level, p.stego_avg_cv, p.accuracy});
  write_plot_table(out, header, rows);
}

void write_embedding_table(std::ostream& out, const tsne::Embedding& embedding) {
  const auto& Y = embedding.coords;
  if (!embedding.labels.empty() && embedding.labels.size() != static_cast<std::size_t>(Y.rows()))
    throw std::invalid_argument("embedding labels do not match point count");
  out << "label";
  for (Eigen::Index d = 0; d < Y.cols(); ++d) out << "\ty" << d + 1;
  out << '\n';
  for (Eigen::Index i = 0; i < Y.rows(); ++i) {
    out << (embedding.labels.empty() ? std::string_view("unlabeled")
                                     : to_string(embedding.labels[static_cast<std::size_t>(i)]));
    for (Eigen::Index d = 0; d < Y.cols(); ++d) out << '\t' << format_real(Y(i, d));
    out << '\n';
  }
  check_stream(out);
}

}  // namespace fvc::io
