#include "cli.hpp"

#include "fvc/feature_mod.hpp"
#include "fvc/io.hpp"
#include "fvc/parallel.hpp"
#include "fvc/rng.hpp"
#include "fvc/stats.hpp"
#include "fvc/synth.hpp"
#include "fvc/tsne.hpp"

#include "CLI11.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

namespace fvc::cli {

namespace fs = std::filesystem;

namespace {

// Thrown for bad user input that the modules would not catch themselves.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

void require_file(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path))
    throw UsageError(std::string(what) + " '" + path + "' does not exist");
}

std::string real(double v) { return io::format_real(v); }

void record_meta(io::AnalysisReport& report, const std::string& prefix,
                 const FeatureMatrix& matrix) {
  report.inputs[prefix + ".rows"] = std::to_string(matrix.rows());
  report.inputs[prefix + ".cols"] = std::to_string(matrix.cols());
  report.inputs[prefix + ".label"] = std::string(to_string(matrix.label()));
  for (const auto& [k, v] : matrix.meta()) report.inputs[prefix + ".meta." + k] = v;
}

FeatureMatrix load_labeled(const std::string& path, ClassLabel expected, const char* what) {
  require_file(path, what);
  auto matrix = io::load_matrix(path);
  if (matrix.label() != expected)
    throw UsageError(std::string(what) + " '" + path + "' holds " +
                     std::string(to_string(matrix.label())) + " samples");
  return matrix;
}

void print_class_line(std::ostream& out, const ClassFeatureStats& s) {
  out << to_string(s.label) << "\tavg_cv=" << real(s.avg_cv) << "\tdims=" << s.dims.size()
      << "\texcluded=" << s.excluded_count << '\n';
}

void warn_stats(std::ostream& err, const ClassFeatureStats& s) {
  if (s.all_degenerate)
    err << "fvc: warning: every " << to_string(s.label)
        << " dimension has a near-zero mean; avg_cv reported as 0\n";
}

std::vector<std::size_t> parse_group_counts(const std::string& text) {
  std::vector<std::size_t> counts;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string cell;
    std::istringstream cells(line);
    while (std::getline(cells, cell, ',')) {
      const auto first = cell.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      const auto last = cell.find_last_not_of(" \t\r");
      const auto token = cell.substr(first, last - first + 1);
      std::size_t value = 0;
      const auto* end = token.data() + token.size();
      auto [ptr, ec] = std::from_chars(token.data(), end, value);
      if (ec != std::errc() || ptr != end) {
        if (lineno == 1 && counts.empty()) break;  // header row
        throw UsageError("groups file line " + std::to_string(lineno) + ": '" + token +
                         "' is not a count");
      }
      counts.push_back(value);
    }
  }
  return counts;
}

std::vector<ConfidenceLevel> parse_levels(const std::vector<double>& raw) {
  std::vector<ConfidenceLevel> levels;
  for (double v : raw) levels.push_back(parse_confidence_level(v));
  return levels;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string cover, stego, output;
  double epsilon = kDefaultEpsilon;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  if (!(a.epsilon > 0.0)) throw UsageError("--epsilon must be positive");
  const auto cover = load_labeled(a.cover, ClassLabel::cover, "cover file");
  const auto stego = load_labeled(a.stego, ClassLabel::stego, "stego file");
  if (cover.cols() != stego.cols())
    throw UsageError("cover and stego files have different column counts");

  io::AnalysisReport report;
  report.command = "eval";
  report.config = {{"epsilon", real(a.epsilon)}};
  report.inputs = {{"cover", a.cover}, {"stego", a.stego}};
  record_meta(report, "cover", cover);
  record_meta(report, "stego", stego);
  report.classes = {class_stats(cover, a.epsilon), class_stats(stego, a.epsilon)};
  io::write_report(report, fs::path(a.output));

  for (const auto& s : report.classes) {
    print_class_line(out, s);
    warn_stats(err, s);
  }
  return kExitOk;
}

struct MaskArgs {
  std::string stego_stats, stego, output;
  std::size_t k = kDefaultMaskSize;
  double epsilon = kDefaultEpsilon;
};

int cmd_mask(const MaskArgs& a, std::ostream& out, std::ostream& err) {
  if (a.stego_stats.empty() == a.stego.empty())
    throw UsageError("mask needs exactly one of --stego-stats or --stego");

  io::AnalysisReport source;
  ClassFeatureStats stats;
  if (!a.stego.empty()) {
    stats = class_stats(load_labeled(a.stego, ClassLabel::stego, "stego file"), a.epsilon);
  } else {
    require_file(a.stego_stats, "stats report");
    source = io::parse_report(io::read_text_file(a.stego_stats));
    bool found = false;
    for (const auto& s : source.classes)
      if (s.label == ClassLabel::stego) {
        stats = s;
        found = true;
      }
    if (!found) throw UsageError("report '" + a.stego_stats + "' has no stego statistics");
  }

  const auto mask = select_mask(stats, a.k);
  io::write_text_file(a.output, format_mask(mask));
  if (mask.oversized)
    err << "fvc: warning: zeroing more than " << kRecommendedMaxMaskSize
        << " columns can starve the classifier\n";
  out << "zeroed";
  for (auto j : mask.zeroed) out << ' ' << j;
  out << '\n';
  return kExitOk;
}

struct ApplyArgs {
  std::string input, mask, output;
};

int cmd_apply(const ApplyArgs& a, std::ostream& out) {
  require_file(a.input, "input file");
  require_file(a.mask, "mask file");
  const auto matrix = io::load_matrix(a.input);
  const auto mask = parse_mask(io::read_text_file(a.mask));
  io::save_matrix(apply_mask(matrix, mask), a.output);
  out << "zeroed " << mask.zeroed.size() << " of " << mask.cols << " columns\n";
  return kExitOk;
}

struct CiArgs {
  std::string groups, output;
  std::size_t group_size = 0;
  std::vector<double> levels = {98, 95, 90};
  double scale = 1.0;
};

int cmd_ci(const CiArgs& a, std::ostream& out) {
  require_file(a.groups, "groups file");
  if (!(a.scale > 0.0)) throw UsageError("--eq4-scale must be positive");
  const auto counts = parse_group_counts(io::read_text_file(a.groups));
  const auto eval = grouped_eval(counts, a.group_size);
  const auto levels = parse_levels(a.levels);
  const auto conf = confidence_report(eval, levels, a.scale);

  io::AnalysisReport report;
  report.command = "ci";
  std::string level_list;
  for (auto l : levels)
    level_list += (level_list.empty() ? "" : ",") + real(level_fraction(l));
  report.config = {{"group_size", std::to_string(a.group_size)},
                   {"levels", level_list},
                   {"scale", real(a.scale)}};
  report.inputs = {{"groups", a.groups}, {"group_count", std::to_string(eval.groups())}};
  report.confidence = conf;
  io::write_report(report, fs::path(a.output));

  out << "mean_acc=" << real(conf.mean_acc) << "\tgroups=" << conf.groups << '\n';
  for (auto l : levels)
    out << "radius@" << real(level_fraction(l) * 100.0) << "%=" << real(conf.radii.at(l)) << '\n';
  return kExitOk;
}

struct EmbedArgs {
  std::string cover, stego, output;
  double perplexity = 30.0;
  int iterations = 1000;
  double rate = 200.0;
  unsigned long long seed = kDefaultSeed;
  bool strict = false;
  bool per_class = false;
};

int cmd_embed(const EmbedArgs& a, std::ostream& out, std::ostream& err) {
  const auto cover = load_labeled(a.cover, ClassLabel::cover, "cover file");
  const auto stego = load_labeled(a.stego, ClassLabel::stego, "stego file");
  if (cover.cols() != stego.cols())
    throw UsageError("cover and stego files have different column counts");

  tsne::Config config = a.strict ? tsne::Config::strict_literal() : tsne::Config{};
  config.perplexity = a.perplexity;
  config.iterations = a.iterations;
  config.learning_rate = a.rate;
  config.seed = a.seed;

  tsne::Embedding result;
  if (a.per_class) {
    auto c = tsne::embed(cover.values(), config,
                         std::vector<ClassLabel>(cover.rows(), ClassLabel::cover));
    auto s = tsne::embed(stego.values(), config,
                         std::vector<ClassLabel>(stego.rows(), ClassLabel::stego));
    result.coords.resize(c.coords.rows() + s.coords.rows(), c.coords.cols());
    result.coords << c.coords, s.coords;
    result.labels = c.labels;
    result.labels.insert(result.labels.end(), s.labels.begin(), s.labels.end());
    result.unconverged_rows = c.unconverged_rows + s.unconverged_rows;
    result.final_kl = c.final_kl + s.final_kl;
  } else {
    result = tsne::embed(cover, stego, config);
  }

  std::ofstream file(a.output, std::ios::binary | std::ios::trunc);
  if (!file) throw io::IoError("cannot open '" + a.output + "' for writing");
  io::write_embedding_table(file, result);

  if (result.unconverged_rows > 0)
    err << "fvc: warning: bandwidth search did not converge for " << result.unconverged_rows
        << " points\n";
  out << "points=" << result.coords.rows() << "\tfinal_kl=" << real(result.final_kl) << '\n';
  return kExitOk;
}

// Scenario flags shared by the synth subcommands.
void add_scenario_flags(CLI::App* app, synth::Config& c) {
  app->add_option("--n-per-class", c.n_per_class, "Training samples per class")
      ->capture_default_str();
  app->add_option("--n-test-per-class", c.n_test_per_class,
                  "Test samples per class (0: same as training)")
      ->capture_default_str();
  app->add_option("--dims-informative", c.dims_informative)->capture_default_str();
  app->add_option("--dims-noise", c.dims_noise)->capture_default_str();
  app->add_option("--separation", c.separation)->capture_default_str();
  app->add_option("--noise-dispersion", c.noise_dispersion)->capture_default_str();
  app->add_option("--mean-offset", c.mean_offset)->capture_default_str();
}

void add_train_flags(CLI::App* app, synth::TrainOptions& t) {
  app->add_option("--epochs", t.epochs, "Classifier training epochs")->capture_default_str();
  app->add_option("--rate", t.rate, "Classifier learning rate")->capture_default_str();
}

std::map<std::string, std::string> describe(const synth::Config& c,
                                            const synth::TrainOptions& t) {
  return {{"n_per_class", std::to_string(c.n_per_class)},
          {"n_test_per_class", std::to_string(c.test_per_class())},
          {"dims_informative", std::to_string(c.dims_informative)},
          {"dims_noise", std::to_string(c.dims_noise)},
          {"separation", real(c.separation)},
          {"dispersion", real(c.dispersion)},
          {"noise_dispersion", real(c.noise_dispersion)},
          {"mean_offset", real(c.mean_offset)},
          {"seed", std::to_string(c.seed)},
          {"epochs", std::to_string(t.epochs)},
          {"rate", real(t.rate)}};
}

struct SweepArgs {
  synth::Config scenario = synth::sweep_scenario();
  synth::TrainOptions train;
  std::vector<double> levels = {0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0};
  unsigned long long seed = kDefaultSeed;
  std::string output, table;
};

int cmd_sweep(SweepArgs a, std::ostream& out) {
  a.scenario.seed = a.seed;
  a.train.seed = a.seed;
  const auto sweep = synth::cv_accuracy_sweep(a.levels, a.scenario, a.train);

  io::AnalysisReport report;
  report.command = "synth sweep";
  report.config = describe(a.scenario, a.train);
  report.config.erase("dispersion");
  std::string levels;
  for (double l : a.levels) levels += (levels.empty() ? "" : ",") + real(l);
  report.config["levels"] = levels;
  report.inputs = {{"source", "synthetic"}};
  report.sweep = sweep;
  io::write_report(report, fs::path(a.output));
  if (!a.table.empty()) {
    std::ofstream file(a.table, std::ios::binary | std::ios::trunc);
    if (!file) throw io::IoError("cannot open '" + a.table + "' for writing");
    io::write_sweep_table(file, sweep);
  }

  for (const auto& p : sweep.points)
    out << "level=" << real(p.level) << "\tavg_cv=" << real(p.stego_avg_cv)
        << "\taccuracy=" << real(p.accuracy) << '\n';
  out << "spearman_rho=" << real(sweep.spearman_rho) << (sweep.degenerate ? " (degenerate)" : "")
      << '\n';
  return kExitOk;
}

struct AblationArgs {
  synth::Config scenario = synth::ablation_scenario();
  synth::TrainOptions train;
  std::size_t k = kDefaultMaskSize;
  unsigned long long seed = kDefaultSeed;
  std::string output;
};

int cmd_ablation(AblationArgs a, std::ostream& out) {
  a.scenario.seed = a.seed;
  a.train.seed = a.seed;
  const auto result = synth::masking_ablation(a.scenario, a.k, a.train);

  io::AnalysisReport report;
  report.command = "synth ablation";
  report.config = describe(a.scenario, a.train);
  report.config["k"] = std::to_string(a.k);
  report.inputs = {{"source", "synthetic"}};
  report.classes = {result.train_stego_stats};
  report.mask = result.mask;
  report.accuracy = io::AccuracyComparison{result.accuracy_before, result.accuracy_after};
  io::write_report(report, fs::path(a.output));

  out << "accuracy_before=" << real(result.accuracy_before)
      << "\taccuracy_after=" << real(result.accuracy_after) << "\tzeroed=";
  for (std::size_t i = 0; i < result.mask.zeroed.size(); ++i)
    out << (i ? "," : "") << result.mask.zeroed[i];
  out << '\n';
  return kExitOk;
}

struct GenerateArgs {
  synth::Config scenario = synth::ablation_scenario();
  unsigned long long seed = kDefaultSeed;
  std::string out_dir;
  bool csv = false;
};

int cmd_generate(GenerateArgs a, std::ostream& out) {
  a.scenario.seed = a.seed;
  const auto data = synth::generate(a.scenario);
  fs::create_directories(a.out_dir);
  const std::string ext = a.csv ? ".csv" : ".fvc";
  const fs::path dir(a.out_dir);
  io::save_matrix(data.train.cover, dir / ("train_cover" + ext));
  io::save_matrix(data.train.stego, dir / ("train_stego" + ext));
  io::save_matrix(data.test.cover, dir / ("test_cover" + ext));
  io::save_matrix(data.test.stego, dir / ("test_stego" + ext));
  out << "wrote 4 matrices to " << a.out_dir << '\n';
  return kExitOk;
}

struct PipelineArgs {
  std::string cover, stego, test_cover, test_stego, out_dir;
  std::size_t k = kDefaultMaskSize;
  unsigned long long seed = kDefaultSeed;
  double test_fraction = 0.5;
  double epsilon = kDefaultEpsilon;
  synth::TrainOptions train;
};

// Seeded split of one class into (train, test).
std::pair<FeatureMatrix, FeatureMatrix> split_rows(const FeatureMatrix& m, double test_fraction,
                                                   Rng& rng) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  shuffle(order, rng);
  const auto n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(order.size())));
  if (n_test == 0 || n_test >= order.size())
    throw UsageError("--test-fraction leaves an empty split for " +
                     std::string(to_string(m.label())) + " (" + std::to_string(m.rows()) +
                     " rows)");
  std::vector<Eigen::Index> test(order.begin(), order.begin() + static_cast<long>(n_test));
  std::vector<Eigen::Index> train(order.begin() + static_cast<long>(n_test), order.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {m.select_rows(train), m.select_rows(test)};
}

int cmd_pipeline(PipelineArgs a, std::ostream& out, std::ostream& err) {
  if (a.test_cover.empty() != a.test_stego.empty())
    throw UsageError("--test-cover and --test-stego must be given together");
  const auto cover = load_labeled(a.cover, ClassLabel::cover, "cover file");
  const auto stego = load_labeled(a.stego, ClassLabel::stego, "stego file");
  if (cover.cols() != stego.cols())
    throw UsageError("cover and stego files have different column counts");
  a.train.seed = a.seed;

  io::AnalysisReport report;
  report.command = "pipeline";
  report.config = {{"k", std::to_string(a.k)},
                   {"seed", std::to_string(a.seed)},
                   {"epsilon", real(a.epsilon)},
                   {"epochs", std::to_string(a.train.epochs)},
                   {"rate", real(a.train.rate)}};
  report.inputs = {{"cover", a.cover}, {"stego", a.stego}};

  std::optional<synth::Dataset> data;
  if (!a.test_cover.empty()) {
    auto test_cover = load_labeled(a.test_cover, ClassLabel::cover, "test cover file");
    auto test_stego = load_labeled(a.test_stego, ClassLabel::stego, "test stego file");
    if (test_cover.cols() != cover.cols() || test_stego.cols() != cover.cols())
      throw UsageError("test files have a different column count");
    report.inputs["test_cover"] = a.test_cover;
    report.inputs["test_stego"] = a.test_stego;
    data.emplace(synth::Dataset{{cover, stego}, {std::move(test_cover), std::move(test_stego)}});
  } else {
    if (!(a.test_fraction > 0.0 && a.test_fraction < 1.0))
      throw UsageError("--test-fraction must lie in (0, 1)");
    report.config["test_fraction"] = real(a.test_fraction);
    Rng rng(derive_seed(a.seed, 1));
    auto [train_cover, test_cover] = split_rows(cover, a.test_fraction, rng);
    auto [train_stego, test_stego] = split_rows(stego, a.test_fraction, rng);
    data.emplace(synth::Dataset{{std::move(train_cover), std::move(train_stego)},
                                {std::move(test_cover), std::move(test_stego)}});
  }

  // Mask selection sees only the training stego statistics.
  const auto train_cover_stats = class_stats(data->train.cover, a.epsilon);
  const auto train_stego_stats = class_stats(data->train.stego, a.epsilon);
  const auto mask = select_mask(train_stego_stats, a.k);

  const auto before = synth::train_classifier(data->train, a.train);
  const double acc_before = synth::evaluate(before, data->test).value;
  const synth::ClassPair masked_train{apply_mask(data->train.cover, mask),
                                      apply_mask(data->train.stego, mask)};
  const synth::ClassPair masked_test{apply_mask(data->test.cover, mask),
                                     apply_mask(data->test.stego, mask)};
  const auto after = synth::train_classifier(masked_train, a.train);
  const double acc_after = synth::evaluate(after, masked_test).value;

  report.classes = {train_cover_stats, train_stego_stats};
  report.mask = mask;
  report.accuracy = io::AccuracyComparison{acc_before, acc_after};

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  io::write_report(report, dir / "report.json");
  io::write_text_file(dir / "mask.txt", format_mask(mask));
  io::save_matrix(apply_mask(cover, mask), dir / "cover_masked.fvc");
  io::save_matrix(apply_mask(stego, mask), dir / "stego_masked.fvc");

  warn_stats(err, train_stego_stats);
  if (mask.oversized)
    err << "fvc: warning: zeroing more than " << kRecommendedMaxMaskSize
        << " columns can starve the classifier\n";
  out << "accuracy_before=" << real(acc_before) << "\taccuracy_after=" << real(acc_after)
      << "\tzeroed=" << mask.zeroed.size() << '\n';
  return kExitOk;
}

std::string one_line(std::string msg) {
  for (auto& c : msg)
    if (c == '\n' || c == '\r') c = ' ';
  return msg;
}

}  // namespace

void configure_threads_from_env() {
  if (const char* env = std::getenv("FVC_THREADS")) {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0') {
      set_thread_limit(static_cast<std::size_t>(v));
      return;
    }
  }
  set_thread_limit(std::thread::hardware_concurrency());
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Feature variation coefficients for steganalysis feature maps", "fvc"};
  app.set_version_flag("--version", std::string(FVC_VERSION));
  app.require_subcommand(1);

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Per-dimension statistics and average CV per class");
  eval_cmd->add_option("--cover", eval.cover, "Cover feature file")->required();
  eval_cmd->add_option("--stego", eval.stego, "Stego feature file")->required();
  eval_cmd->add_option("--epsilon", eval.epsilon, "Near-zero mean threshold")
      ->capture_default_str();
  eval_cmd->add_option("-o,--output", eval.output, "Report path")->required();

  MaskArgs mask;
  auto* mask_cmd = app.add_subcommand("mask", "Select the highest-CV stego columns to zero");
  auto* stats_opt = mask_cmd->add_option("--stego-stats", mask.stego_stats, "Report from eval");
  auto* stego_opt = mask_cmd->add_option("--stego", mask.stego, "Stego feature file");
  stats_opt->excludes(stego_opt);
  mask_cmd->add_option("--k", mask.k, "Columns to zero")->capture_default_str();
  mask_cmd->add_option("--epsilon", mask.epsilon)->capture_default_str();
  mask_cmd->add_option("-o,--output", mask.output, "Mask file")->required();

  ApplyArgs apply;
  auto* apply_cmd = app.add_subcommand("apply", "Zero masked columns of a feature file");
  apply_cmd->add_option("--in", apply.input, "Input feature file")->required();
  apply_cmd->add_option("--mask", apply.mask, "Mask file")->required();
  apply_cmd->add_option("-o,--output", apply.output, "Output feature file")->required();

  CiArgs ci;
  auto* ci_cmd = app.add_subcommand("ci", "Grouped accuracy confidence radii");
  ci_cmd->add_option("--groups", ci.groups, "Per-group correct counts")->required();
  ci_cmd->add_option("--group-size", ci.group_size, "Samples per group")->required();
  ci_cmd->add_option("--levels", ci.levels, "Confidence levels in percent")
      ->delimiter(',')
      ->capture_default_str();
  ci_cmd->add_option("--eq4-scale", ci.scale, "Multiplier applied to every radius")
      ->capture_default_str();
  ci_cmd->add_option("-o,--output", ci.output, "Report path")->required();

  EmbedArgs embed;
  auto* embed_cmd = app.add_subcommand("embed", "Joint 2-D t-SNE embedding of both classes");
  embed_cmd->add_option("--cover", embed.cover)->required();
  embed_cmd->add_option("--stego", embed.stego)->required();
  embed_cmd->add_option("--perplexity", embed.perplexity)->capture_default_str();
  embed_cmd->add_option("--iters", embed.iterations)->capture_default_str();
  embed_cmd->add_option("--lr", embed.rate)->capture_default_str();
  embed_cmd->add_option("--seed", embed.seed)->capture_default_str();
  embed_cmd->add_flag("--strict-paper", embed.strict,
                      "Global bandwidth and no early exaggeration");
  embed_cmd->add_flag("--per-class", embed.per_class, "Embed each class separately");
  embed_cmd->add_option("-o,--output", embed.output, "TSV path")->required();

  auto* synth_cmd = app.add_subcommand("synth", "Synthetic benchmark pipelines");
  synth_cmd->require_subcommand(1);

  SweepArgs sweep;
  auto* sweep_cmd = synth_cmd->add_subcommand("sweep", "Dispersion sweep: CV vs accuracy");
  add_scenario_flags(sweep_cmd, sweep.scenario);
  add_train_flags(sweep_cmd, sweep.train);
  sweep_cmd->add_option("--levels", sweep.levels, "Dispersion levels")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--seed", sweep.seed)->capture_default_str();
  sweep_cmd->add_option("-o,--output", sweep.output, "Report path")->required();
  sweep_cmd->add_option("--table", sweep.table, "TSV of level, avg_cv, accuracy");

  AblationArgs ablation;
  auto* ablation_cmd = synth_cmd->add_subcommand("ablation", "Accuracy before/after masking");
  add_scenario_flags(ablation_cmd, ablation.scenario);
  add_train_flags(ablation_cmd, ablation.train);
  ablation_cmd->add_option("--dispersion", ablation.scenario.dispersion)->capture_default_str();
  ablation_cmd->add_option("--k", ablation.k)->capture_default_str();
  ablation_cmd->add_option("--seed", ablation.seed)->capture_default_str();
  ablation_cmd->add_option("-o,--output", ablation.output, "Report path")->required();

  GenerateArgs generate;
  auto* generate_cmd =
      synth_cmd->add_subcommand("generate", "Write the scenario's train/test matrices");
  add_scenario_flags(generate_cmd, generate.scenario);
  generate_cmd->add_option("--dispersion", generate.scenario.dispersion)->capture_default_str();
  generate_cmd->add_option("--seed", generate.seed)->capture_default_str();
  generate_cmd->add_flag("--csv", generate.csv, "Write CSV instead of FVC1");
  generate_cmd->add_option("--out", generate.out_dir, "Output directory")->required();

  PipelineArgs pipeline;
  auto* pipeline_cmd =
      app.add_subcommand("pipeline", "Stats, mask, apply, retrain, before/after accuracy");
  pipeline_cmd->add_option("--cover", pipeline.cover)->required();
  pipeline_cmd->add_option("--stego", pipeline.stego)->required();
  pipeline_cmd->add_option("--test-cover", pipeline.test_cover);
  pipeline_cmd->add_option("--test-stego", pipeline.test_stego);
  pipeline_cmd->add_option("--test-fraction", pipeline.test_fraction)->capture_default_str();
  pipeline_cmd->add_option("--k", pipeline.k)->capture_default_str();
  pipeline_cmd->add_option("--seed", pipeline.seed)->capture_default_str();
  pipeline_cmd->add_option("--epsilon", pipeline.epsilon)->capture_default_str();
  add_train_flags(pipeline_cmd, pipeline.train);
  pipeline_cmd->add_option("-o,--output", pipeline.out_dir, "Output directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << FVC_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "fvc: error: " << one_line(e.what()) << '\n';
    return kExitInvalidInput;
  }

  try {
    if (eval_cmd->parsed()) return cmd_eval(eval, out, err);
    if (mask_cmd->parsed()) return cmd_mask(mask, out, err);
    if (apply_cmd->parsed()) return cmd_apply(apply, out);
    if (ci_cmd->parsed()) return cmd_ci(ci, out);
    if (embed_cmd->parsed()) return cmd_embed(embed, out, err);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep, out);
    if (ablation_cmd->parsed()) return cmd_ablation(ablation, out);
    if (generate_cmd->parsed()) return cmd_generate(generate, out);
    if (pipeline_cmd->parsed()) return cmd_pipeline(pipeline, out, err);
  } catch (const io::IoError& e) {
    err << "fvc: error: " << one_line(e.what()) << '\n';
    return kExitRuntimeFailure;
  } catch (const io::ParseError& e) {
    err << "fvc: error: " << one_line(e.what()) << '\n';
    return kExitInvalidInput;
  } catch (const std::invalid_argument& e) {
    err << "fvc: error: " << one_line(e.what()) << '\n';
    return kExitInvalidInput;
  } catch (const std::exception& e) {
    err << "fvc: error: " << one_line(e.what()) << '\n';
    return kExitRuntimeFailure;
  }
  err << "fvc: error: no subcommand\n";
  return kExitInvalidInput;
}

}  // namespace fvc::cli
