#include "pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <sstream>

#include "csv_format.hpp"
#include "error.hpp"
#include "json.hpp"
#include "rng.hpp"

namespace hifi {
namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::ordered_json;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::ofstream OpenOutput(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  return out;
}

void PrepareOutdir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) Fail(ErrorCode::kIo, "cannot create output directory '" + dir.string() + "': " + ec.message());
}

void Close(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) Fail(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

std::vector<std::string> Names(const FeatureSubset& s, const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (int j : s) out.push_back(names[static_cast<size_t>(j)]);
  return out;
}

ordered_json ConfigJson(const RunConfig& c) {
  ordered_json j;
  j["input"] = c.input.string();
  j["target"] = c.target;
  j["ignore"] = c.ignore;
  j["exclude"] = c.exclude;
  j["group"] = c.group;
  j["class"] = c.class_column;
  j["drop_missing"] = c.drop_missing;
  j["scheme"] = c.scheme.in_sample() ? "in-sample" : "cross-fit";
  j["kfold"] = c.scheme.folds;
  j["n_surrogates"] = c.surrogate.n_surrogates;
  j["alpha"] = c.surrogate.alpha;
  j["shapley_method"] = ShapleyChoiceName(c.shapley);
  j["n_permutations"] = c.n_permutations;
  j["seed"] = c.master_seed();
  j["workers"] = c.workers;
  j["outdir"] = c.outdir.string();
  j["hist_bins"] = c.hist_bins;
  j["uthresh_feature"] = c.uthresh_feature;
  j["uthresh_sweep"] = c.uthresh_sweep;
  return j;
}

ordered_json PathJson(const GreedyPath& path, const std::vector<std::string>& names) {
  ordered_json steps = ordered_json::array();
  for (const auto& s : path.steps) {
    steps.push_back({{"feature", names[static_cast<size_t>(s.feature)]},
                     {"loco", s.loco},
                     {"gain", s.gain},
                     {"p_value", s.p_value}});
  }
  return steps;
}

ordered_json ReportJson(Analysis& a, const std::string& command) {
  const auto& data = a.dataset();
  const auto& names = data.feature_names();
  const auto& scheme = a.config().scheme;
  ordered_json r;
  r["schema_version"] = kReportSchemaVersion;
  r["engine_version"] = kEngineVersion;
  r["command"] = command;
  r["config"] = ConfigJson(a.config());
  r["eval_scheme"] = scheme.ToString();
  r["averaging_identity"] = scheme.in_sample() ? "exact" : "approximate";
  r["loco_nonnegative"] = scheme.in_sample();
  r["regressor"] = DefaultRegressor()->Name();
  r["dataset"] = {{"n_patterns", data.n_patterns()},
                  {"n_features", data.n_features()},
                  {"features", names},
                  {"target", a.raw().target_name},
                  {"id_columns", a.raw().id_names}};
  ordered_json columns = ordered_json::array();
  for (const auto& c : a.standardization().columns) {
    ordered_json e = {{"name", c.name}, {"role", c.role}};
    if (c.role == "feature" || c.role == "target") {
      e["mean"] = c.mean;
      e["sd"] = c.sd;
    }
    if (!c.note.empty()) e["note"] = c.note;
    columns.push_back(std::move(e));
  }
  r["standardization"] = {{"columns", columns}, {"dropped_rows", a.standardization().dropped_rows}};
  return r;
}

void AddGlobalResults(ordered_json& r, Analysis& a) {
  const auto& names = a.dataset().feature_names();
  ordered_json decomps = ordered_json::array();
  for (const auto& d : a.Decompositions()) {
    decomps.push_back({{"feature", names[static_cast<size_t>(d.driver)]},
                       {"index", d.driver},
                       {"L_empty", d.l_empty},
                       {"L_min", d.l_min},
                       {"L_max", d.l_max},
                       {"U", d.unique},
                       {"R", d.redundant},
                       {"S", d.synergistic},
                       {"z_min", Names(d.min_path.final_subset, names)},
                       {"z_max", Names(d.max_path.final_subset, names)},
                       {"min_path", PathJson(d.min_path, names)},
                       {"max_path", PathJson(d.max_path, names)}});
  }
  r["decompositions"] = decomps;
  ordered_json shap = ordered_json::array();
  for (const auto& e : a.Shapley(false).global) {
    ordered_json j = {{"feature", names[static_cast<size_t>(e.driver)]},
                      {"value", e.value},
                      {"method", ShapleyMethodName(e.method)}};
    if (e.method == ShapleyMethod::kMonteCarlo) {
      j["n_permutations"] = e.n_permutations;
      j["standard_error"] = e.standard_error;
    }
    shap.push_back(std::move(j));
  }
  r["shapley"] = shap;
}

void WriteJson(const ordered_json& j, const std::filesystem::path& path) {
  auto out = OpenOutput(path);
  out << j.dump(2) << "\n";
  Close(out, path);
}

void WriteGlobalScores(Analysis& a, const std::filesystem::path& path) {
  auto out = OpenOutput(path);
  CsvWriter csv(out);
  for (const char* h : {"feature", "U", "R", "S", "L_empty", "L_max", "Shapley"}) csv.Field(h);
  csv.EndRow();
  const auto& names = a.dataset().feature_names();
  const auto& shap = a.Shapley(false).global;
  for (const auto& d : a.Decompositions()) {
    csv.Field(names[static_cast<size_t>(d.driver)]);
    for (double v : {d.unique, d.redundant, d.synergistic, d.l_empty, d.l_max}) csv.Number(v);
    csv.Number(shap[static_cast<size_t>(d.driver)].value);
    csv.EndRow();
  }
  Close(out, path);
}

// Row = driver, column = feature added to its multiplet, value = the LOCO
// change (decrement for min paths, increment for max paths) of that step.
void WritePathMatrix(Analysis& a, Direction direction, const std::filesystem::path& path) {
  const auto& names = a.dataset().feature_names();
  const size_t p = names.size();
  auto out = OpenOutput(path);
  CsvWriter csv(out);
  csv.Field("driver");
  for (const auto& n : names) csv.Field(n);
  csv.EndRow();
  for (const auto& d : a.Decompositions()) {
    std::vector<double> row(p, 0.0);
    const auto& gp = direction == Direction::kMin ? d.min_path : d.max_path;
    for (const auto& s : gp.steps) row[static_cast<size_t>(s.feature)] = s.gain;
    csv.Field(names[static_cast<size_t>(d.driver)]);
    for (double v : row) csv.Number(v);
    csv.EndRow();
  }
  Close(out, path);
}

void WriteLocalMatrix(const Analysis& a, const Eigen::MatrixXd& m, const std::filesystem::path& path) {
  const auto& raw = a.raw();
  auto out = OpenOutput(path);
  CsvWriter csv(out);
  csv.Field("pattern");
  for (const auto& n : raw.id_names) csv.Field(n);
  for (const auto& n : a.dataset().feature_names()) csv.Field(n);
  csv.EndRow();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    csv.Integer(i);
    for (const auto& col : raw.ids) csv.Field(col[static_cast<size_t>(i)]);
    for (Eigen::Index j = 0; j < m.cols(); ++j) csv.Number(m(i, j));
    csv.EndRow();
  }
  Close(out, path);
}

struct NamedMatrix {
  std::string_view kind;
  const Eigen::MatrixXd* values;
};

void WriteColumnOrder(const Analysis& a, const std::vector<NamedMatrix>& panels,
                      const std::filesystem::path& path) {
  const auto& names = a.dataset().feature_names();
  auto out = OpenOutput(path);
  CsvWriter csv(out);
  for (const char* h : {"kind", "rank", "feature", "mean"}) csv.Field(h);
  csv.EndRow();
  for (const auto& panel : panels) {
    const Eigen::VectorXd means = panel.values->colwise().mean().transpose();
    std::vector<size_t> order(names.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t x, size_t y) { return means[x] > means[y]; });
    for (size_t r = 0; r < order.size(); ++r) {
      csv.Field(panel.kind);
      csv.Integer(static_cast<long long>(r + 1));
      csv.Field(names[order[r]]);
      csv.Number(means[static_cast<Eigen::Index>(order[r])]);
      csv.EndRow();
    }
  }
  Close(out, path);
}

void WriteGroupMeans(const Analysis& a, const std::vector<std::string>& groups,
                     const Eigen::MatrixXd& m, const std::filesystem::path& path) {
  const ClassLabels labels = ClassesFromColumn(groups);
  const size_t g = labels.names.size();
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g), m.cols());
  std::vector<size_t> counts(g, 0);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const auto k = static_cast<size_t>(labels.label[static_cast<size_t>(i)]);
    sums.row(static_cast<Eigen::Index>(k)) += m.row(i);
    ++counts[k];
  }
  auto out = OpenOutput(path);
  CsvWriter csv(out);
  csv.Field("group");
  csv.Field("n");
  for (const auto& n : a.dataset().feature_names()) csv.Field(n);
  csv.EndRow();
  for (size_t k = 0; k < g; ++k) {
    csv.Field(labels.names[k]);
    csv.Integer(static_cast<long long>(counts[k]));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      csv.Number(sums(static_cast<Eigen::Index>(k), j) / static_cast<double>(counts[k]));
    }
    csv.EndRow();
  }
  Close(out, path);
}

const std::vector<std::string>& IdColumn(const RawTable& raw, const std::string& name) {
  const auto it = std::find(raw.id_names.begin(), raw.id_names.end(), name);
  if (it == raw.id_names.end()) Fail(ErrorCode::kConfig, "ID column '" + name + "' not found");
  return raw.ids[static_cast<size_t>(it - raw.id_names.begin())];
}

}  // namespace

std::string SanitizeName(const std::string& name) {
  std::string out = name;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '-' || c == '.';
    if (!ok) c = '_';
  }
  return out;
}

Analysis::Analysis(RunConfig config) : config_(std::move(config)) {
  config_.Finalize();
  CsvOptions options;
  options.target = config_.target;
  options.id_columns = config_.ignore;
  options.exclude_columns = config_.exclude;
  options.drop_missing_rows = config_.drop_missing;
  raw_ = LoadCsv(config_.input, options);
  auto [data, report] = Standardize(raw_);
  data_ = std::make_unique<Dataset>(std::move(data));
  report_ = std::move(report);
  eval_ = std::make_unique<LocoEvaluator>(*data_, config_.scheme);
}

int Analysis::DriverIndex(const std::string& feature) const {
  const int j = data_->FeatureIndex(feature);
  if (j < 0) Fail(ErrorCode::kConfig, "feature '" + feature + "' is not a modeled column");
  return j;
}

const std::vector<FeatureDecomposition>& Analysis::Decompositions() {
  if (!decompositions_) decompositions_ = DecomposeAll(*eval_, config_.surrogate, config_.workers);
  return *decompositions_;
}

ShapleyMethod Analysis::shapley_method() const {
  switch (config_.shapley) {
    case ShapleyChoice::kExact: return ShapleyMethod::kExact;
    case ShapleyChoice::kMonteCarlo: return ShapleyMethod::kMonteCarlo;
    case ShapleyChoice::kAuto: break;
  }
  return static_cast<int>(data_->n_features()) <= kAutoExactShapleyMaxFeatures ? ShapleyMethod::kExact
                                                                                : ShapleyMethod::kMonteCarlo;
}

uint64_t Analysis::shapley_seed() const { return DeriveSeed(config_.master_seed(), {2}); }

const ShapleyResult& Analysis::Shapley(bool with_local) {
  if (!shapley_ || (with_local && !shapley_has_local_)) {
    if (shapley_method() == ShapleyMethod::kExact) {
      shapley_ = ExactShapleyAll(*eval_, with_local, config_.workers);
    } else {
      shapley_ = MonteCarloShapleyAll(*eval_, config_.n_permutations, shapley_seed(), with_local, config_.workers);
    }
    shapley_has_local_ = with_local;
  }
  return *shapley_;
}

LocalHifiScores Analysis::LocalScores() {
  return ComputeLocalScores(*eval_, Decompositions(), config_.workers);
}

namespace {

ordered_json GlobalOutputs(Analysis& a, ordered_json& timings) {
  const auto& dir = a.config().outdir;
  auto t = Clock::now();
  a.Decompositions();
  timings["decomposition"] = Seconds(t);
  t = Clock::now();
  a.Shapley(false);
  timings["shapley"] = Seconds(t);
  WriteGlobalScores(a, dir / "global_scores.csv");
  WritePathMatrix(a, Direction::kMin, dir / "path_redundant.csv");
  WritePathMatrix(a, Direction::kMax, dir / "path_synergistic.csv");
  return {{"global_scores", "global_scores.csv"},
          {"path_redundant", "path_redundant.csv"},
          {"path_synergistic", "path_synergistic.csv"}};
}

void FinishReport(ordered_json& report, Analysis& a, ordered_json artifacts, ordered_json timings,
                  Clock::time_point start) {
  report["artifacts"] = std::move(artifacts);
  report["cache"] = {{"hits", a.evaluator().cache().hits()}, {"misses", a.evaluator().cache().misses()}};
  timings["total"] = Seconds(start);
  report["timings_seconds"] = std::move(timings);
  WriteJson(report, a.config().outdir / "report.json");
}

}  // namespace

void RunAnalyze(const RunConfig& config) {
  const auto start = Clock::now();
  Analysis a(config);
  PrepareOutdir(a.config().outdir);
  ordered_json timings;
  timings["load"] = Seconds(start);
  ordered_json report = ReportJson(a, "analyze");
  ordered_json artifacts = GlobalOutputs(a, timings);
  AddGlobalResults(report, a);
  FinishReport(report, a, std::move(artifacts), std::move(timings), start);
}

void RunLocal(const RunConfig& config) {
  const auto start = Clock::now();
  Analysis a(config);
  const auto& dir = a.config().outdir;
  PrepareOutdir(dir);
  ordered_json timings;
  timings["load"] = Seconds(start);
  ordered_json report = ReportJson(a, "local");
  ordered_json artifacts = GlobalOutputs(a, timings);
  AddGlobalResults(report, a);

  auto t = Clock::now();
  const LocalHifiScores local = a.LocalScores();
  const Eigen::MatrixXd& shap = a.Shapley(true).local;
  timings["local"] = Seconds(t);
  const std::vector<NamedMatrix> panels = {{"loco", &local.loco_max.values},
                                           {"u", &local.unique.values},
                                           {"r", &local.redundant.values},
                                           {"s", &local.synergistic.values},
                                           {"shapley", &shap}};
  ordered_json local_files;
  for (const auto& panel : panels) {
    const std::string file = "local_" + std::string(panel.kind) + ".csv";
    WriteLocalMatrix(a, *panel.values, dir / file);
    local_files[std::string(panel.kind)] = file;
  }
  WriteColumnOrder(a, panels, dir / "local_order.csv");
  artifacts["local"] = local_files;
  artifacts["local_order"] = "local_order.csv";
  if (!a.config().group.empty()) {
    const auto& groups = IdColumn(a.raw(), a.config().group);
    ordered_json group_files;
    for (const auto& panel : panels) {
      const std::string file = "group_means_" + std::string(panel.kind) + ".csv";
      WriteGroupMeans(a, groups, *panel.values, dir / file);
      group_files[std::string(panel.kind)] = file;
    }
    artifacts["group_means"] = group_files;
  }
  FinishReport(report, a, std::move(artifacts), std::move(timings), start);
}

void RunThreshold(const RunConfig& config, const std::string& feature_arg) {
  Analysis a(config);
  const auto& dir = a.config().outdir;
  PrepareOutdir(dir);
  const std::string feature = feature_arg.empty() ? a.config().uthresh_feature : feature_arg;
  if (feature.empty()) Fail(ErrorCode::kConfig, "uthresh needs a feature (flag or uthresh_feature key)");
  const int driver = a.DriverIndex(feature);

  const FeatureDecomposition d = DecomposeFeature(a.evaluator(), driver, a.config().surrogate);
  const Eigen::VectorXd u = LocalLocoColumn(a.evaluator(), driver, d.min_path.final_subset);
  const ClassLabels classes = a.config().class_column.empty()
                                  ? TertileClasses(a.raw().target)
                                  : ClassesFromColumn(IdColumn(a.raw(), a.config().class_column));
  const ThresholdAnalysis t = UThresholdAnalysis(a.dataset(), driver, {u.data(), static_cast<size_t>(u.size())},
                                                 a.config().uthresh_sweep, classes, a.config().hist_bins);

  const std::string stem = "uthresh_" + SanitizeName(feature);
  const auto summary_path = dir / (stem + ".csv");
  auto out = OpenOutput(summary_path);
  CsvWriter csv(out);
  for (const char* h : {"discard_percent", "retained_N", "pearson_correlation", "histogram_file"}) csv.Field(h);
  csv.EndRow();
  for (const auto& level : t.levels) {
    const std::string hist_file = stem + "_hist_" + FormatNumber(level.discard_percent) + ".csv";
    csv.Number(level.discard_percent);
    csv.Integer(static_cast<long long>(level.retained.size()));
    csv.Number(level.pearson);
    csv.Field(hist_file);
    csv.EndRow();

    const auto hist_path = dir / hist_file;
    auto hout = OpenOutput(hist_path);
    CsvWriter h(hout);
    h.Field("bin_lower");
    h.Field("bin_upper");
    for (const auto& c : level.classes) {
      h.Field(c.name + "_count");
      h.Field(c.name + "_density");
    }
    h.EndRow();
    const double width = t.bin_edges.size() > 1 ? t.bin_edges[1] - t.bin_edges[0] : 1.0;
    for (size_t b = 0; b + 1 < t.bin_edges.size(); ++b) {
      h.Number(t.bin_edges[b]);
      h.Number(t.bin_edges[b + 1]);
      for (const auto& c : level.classes) {
        h.Integer(static_cast<long long>(c.counts[b]));
        h.Number(c.n > 0 && width > 0 ? static_cast<double>(c.counts[b]) / (static_cast<double>(c.n) * width) : 0.0);
      }
      h.EndRow();
    }
    Close(hout, hist_path);
  }
  Close(out, summary_path);
}

OracleSummary RunOracle(const RunConfig& config) {
  Analysis a(config);
  const auto& dir = a.config().outdir;
  PrepareOutdir(dir);
  const auto& names = a.dataset().feature_names();
  const auto path = dir / "oracle.csv";
  auto out = OpenOutput(path);
  CsvWriter csv(out);
  for (const char* h : {"feature", "greedy_L_min", "exhaustive_L_min", "greedy_z_min", "exhaustive_z_min",
                        "greedy_L_max", "exhaustive_L_max", "greedy_z_max", "exhaustive_z_max", "match"}) {
    csv.Field(h);
  }
  csv.EndRow();
  OracleSummary summary;
  for (const auto& d : a.Decompositions()) {
    const ExhaustiveResult e = ExhaustiveMinMax(a.evaluator(), d.driver);
    const bool match = std::abs(d.l_min - e.l_min) <= 1e-9 && std::abs(d.l_max - e.l_max) <= 1e-9 &&
                       d.min_path.final_subset == e.z_min && d.max_path.final_subset == e.z_max;
    ++summary.drivers;
    if (match) ++summary.matches;
    csv.Field(names[static_cast<size_t>(d.driver)]);
    csv.Number(d.l_min);
    csv.Number(e.l_min);
    csv.Field(d.min_path.final_subset.ToString(names));
    csv.Field(e.z_min.ToString(names));
    csv.Number(d.l_max);
    csv.Number(e.l_max);
    csv.Field(d.max_path.final_subset.ToString(names));
    csv.Field(e.z_max.ToString(names));
    csv.Field(match ? "true" : "false");
    csv.EndRow();
  }
  Close(out, path);
  return summary;
}

}  // namespace hifi
