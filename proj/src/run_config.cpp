#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "csv_format.hpp"
#include "error.hpp"
#include "rng.hpp"

namespace hifi {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T ParseNumber(const std::string& key, const std::string& value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    Fail(ErrorCode::kConfig, "invalid value '" + value + "' for key '" + key + "'");
  }
  return out;
}

bool ParseBool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  Fail(ErrorCode::kConfig, "invalid boolean '" + value + "' for key '" + key + "'");
}

std::string JoinList(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ",") + s;
  return out;
}

}  // namespace

const char* ShapleyChoiceName(ShapleyChoice c) {
  switch (c) {
    case ShapleyChoice::kAuto: return "auto";
    case ShapleyChoice::kExact: return "exact";
    case ShapleyChoice::kMonteCarlo: return "mc";
  }
  return "?";
}

void RunConfig::Set(const std::string& key, const std::string& raw, const std::filesystem::path& base_dir) {
  const std::string value = Trim(raw);
  auto path = [&](const std::string& v) {
    std::filesystem::path p(v);
    if (p.is_relative() && !base_dir.empty()) p = std::filesystem::absolute(base_dir / p).lexically_normal();
    return p;
  };
  if (key == "input") {
    input = path(value);
  } else if (key == "target") {
    target = value;
  } else if (key == "ignore") {
    ignore = SplitList(value);
  } else if (key == "exclude") {
    exclude = SplitList(value);
  } else if (key == "group") {
    group = value;
  } else if (key == "class") {
    class_column = value;
  } else if (key == "drop_missing") {
    drop_missing = ParseBool(key, value);
  } else if (key == "scheme") {
    if (value == "in-sample") {
      scheme.kind = EvalScheme::Kind::kInSample;
    } else if (value == "cross-fit") {
      scheme.kind = EvalScheme::Kind::kCrossFit;
    } else {
      Fail(ErrorCode::kConfig, "scheme must be in-sample or cross-fit");
    }
  } else if (key == "kfold") {
    scheme.folds = ParseNumber<int>(key, value);
  } else if (key == "n_surrogates") {
    surrogate.n_surrogates = ParseNumber<int>(key, value);
  } else if (key == "alpha") {
    surrogate.alpha = ParseNumber<double>(key, value);
  } else if (key == "shapley_method") {
    if (value == "auto") {
      shapley = ShapleyChoice::kAuto;
    } else if (value == "exact") {
      shapley = ShapleyChoice::kExact;
    } else if (value == "mc" || value == "monte-carlo") {
      shapley = ShapleyChoice::kMonteCarlo;
    } else {
      Fail(ErrorCode::kConfig, "shapley_method must be auto, exact or mc");
    }
  } else if (key == "n_permutations") {
    n_permutations = ParseNumber<int>(key, value);
  } else if (key == "seed") {
    seed = ParseNumber<uint64_t>(key, value);
  } else if (key == "workers") {
    workers = ParseNumber<int>(key, value);
  } else if (key == "outdir") {
    outdir = path(value);
  } else if (key == "hist_bins") {
    hist_bins = ParseNumber<int>(key, value);
  } else if (key == "uthresh_feature") {
    uthresh_feature = value;
  } else if (key == "uthresh_sweep") {
    uthresh_sweep.clear();
    for (const auto& item : SplitList(value)) uthresh_sweep.push_back(ParseNumber<double>(key, item));
  } else {
    Fail(ErrorCode::kConfig, "unknown config key '" + key + "'");
  }
}

void RunConfig::Finalize() {
  if (input.empty()) Fail(ErrorCode::kConfig, "config key 'input' is required");
  if (target.empty()) Fail(ErrorCode::kConfig, "config key 'target' is required");
  if (!seed) Fail(ErrorCode::kConfig, "config key 'seed' is required");
  if (workers < 1) Fail(ErrorCode::kConfig, "workers must be at least 1");
  if (n_permutations < 100) Fail(ErrorCode::kConfig, "n_permutations must be at least 100");
  if (hist_bins < 1) Fail(ErrorCode::kConfig, "hist_bins must be at least 1");
  if (!group.empty() && std::find(ignore.begin(), ignore.end(), group) == ignore.end()) ignore.push_back(group);
  if (!class_column.empty() && std::find(ignore.begin(), ignore.end(), class_column) == ignore.end()) {
    ignore.push_back(class_column);
  }
  for (double d : uthresh_sweep) {
    if (!(d >= 0.0 && d < 100.0)) Fail(ErrorCode::kConfig, "uthresh_sweep values must lie in [0, 100)");
  }
  if (scheme.in_sample()) {
    scheme.folds = 0;
  } else if (scheme.folds == 0) {
    scheme.folds = kDefaultFolds;
  }
  scheme.seed = scheme.in_sample() ? 0 : DeriveSeed(*seed, {3});
  surrogate.seed = DeriveSeed(*seed, {1});
  scheme.Validate();
  surrogate.Validate();
}

uint64_t RunConfig::master_seed() const {
  if (!seed) Fail(ErrorCode::kConfig, "seed not set");
  return *seed;
}

std::string RunConfig::ToText() const {
  std::ostringstream out;
  out << "input = " << input.string() << "\n";
  out << "target = " << target << "\n";
  out << "ignore = " << JoinList(ignore) << "\n";
  out << "exclude = " << JoinList(exclude) << "\n";
  out << "group = " << group << "\n";
  out << "class = " << class_column << "\n";
  out << "drop_missing = " << (drop_missing ? "true" : "false") << "\n";
  out << "scheme = " << (scheme.in_sample() ? "in-sample" : "cross-fit") << "\n";
  out << "kfold = " << scheme.folds << "\n";
  out << "n_surrogates = " << surrogate.n_surrogates << "\n";
  out << "alpha = " << FormatNumber(surrogate.alpha) << "\n";
  out << "shapley_method = " << ShapleyChoiceName(shapley) << "\n";
  out << "n_permutations = " << n_permutations << "\n";
  if (seed) out << "seed = " << *seed << "\n";
  out << "workers = " << workers << "\n";
  out << "outdir = " << outdir.string() << "\n";
  out << "hist_bins = " << hist_bins << "\n";
  out << "uthresh_feature = " << uthresh_feature << "\n";
  std::string sweep;
  for (double d : uthresh_sweep) sweep += (sweep.empty() ? "" : ",") + FormatNumber(d);
  out << "uthresh_sweep = " << sweep << "\n";
  return out.str();
}

RunConfig ParseConfig(std::istream& in, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      Fail(ErrorCode::kConfig, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    cfg.Set(Trim(line.substr(0, eq)), line.substr(eq + 1), base_dir);
  }
  return cfg;
}

RunConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kConfig, "cannot open config file '" + path.string() + "'");
  return ParseConfig(in, std::filesystem::absolute(path).parent_path());
}

}  // namespace hifi
