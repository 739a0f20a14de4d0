#include "oracle_synth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "error.hpp"
#include "rng.hpp"

namespace hifi {
namespace {

std::vector<double> Betas(const SyntheticSpec& spec, size_t p) {
  std::vector<double> b = spec.betas;
  if (b.empty()) {
    if (p == 2) {
      b = {0.6, 0.8};
    } else {
      for (size_t j = 0; j < p; ++j) b.push_back(static_cast<double>(j + 1));
    }
  }
  if (b.size() != p) Fail(ErrorCode::kArgument, "beta count does not match feature count");
  double norm = 0.0;
  for (double v : b) norm += v * v;
  norm = std::sqrt(norm);
  if (norm == 0.0) Fail(ErrorCode::kArgument, "betas must not all be zero");
  for (double& v : b) v /= norm;
  return b;
}

std::vector<std::string> FeatureNames(const SyntheticSpec& spec, size_t p) {
  if (spec.family == SynthFamily::kSuppressor || spec.family == SynthFamily::kDuplicate) return {"x", "z"};
  std::vector<std::string> names;
  for (size_t j = 0; j < p; ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

// Orthonormalizes centered columns (modified Gram-Schmidt) and rescales each
// to unit sample variance, so the sample design is exactly orthogonal.
void OrthogonalizeColumns(std::vector<std::vector<double>>& cols) {
  const size_t n = cols.empty() ? 0 : cols[0].size();
  for (auto& c : cols) {
    double mean = 0.0;
    for (double v : c) mean += v;
    mean /= static_cast<double>(n);
    for (double& v : c) v -= mean;
  }
  for (size_t j = 0; j < cols.size(); ++j) {
    for (size_t k = 0; k < j; ++k) {
      double dot = 0.0;
      for (size_t i = 0; i < n; ++i) dot += cols[j][i] * cols[k][i];
      for (size_t i = 0; i < n; ++i) cols[j][i] -= dot * cols[k][i];
    }
    double norm = 0.0;
    for (double v : cols[j]) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : cols[j]) v /= norm;
  }
  const double scale = std::sqrt(static_cast<double>(n) - 1.0);
  for (auto& c : cols) {
    for (double& v : c) v *= scale;
  }
}

double PopulationError(const Eigen::MatrixXd& corr, const std::vector<int>& set) {
  const auto target = corr.rows() - 1;
  if (set.empty()) return 1.0;
  const auto k = static_cast<Eigen::Index>(set.size());
  Eigen::MatrixXd rss(k, k);
  Eigen::VectorXd rsy(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    rsy[a] = corr(set[a], target);
    for (Eigen::Index b = 0; b < k; ++b) rss(a, b) = corr(set[a], set[b]);
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(1e-10);
  cod.compute(rss);
  return 1.0 - rsy.dot(cod.solve(rsy));
}

// Shared tie-aware search over ordered subsets.
template <typename LocoFn>
ExhaustiveResult SearchExtremes(const std::vector<int>& others, LocoFn&& loco) {
  ExhaustiveResult r;
  bool first = true;
  for (const FeatureSubset& z : OrderedSubsets(others)) {
    const double l = loco(z);
    if (first || l < r.l_min - kOracleTieTolerance) {
      r.l_min = l;
      r.z_min = z;
    }
    if (first || l > r.l_max + kOracleTieTolerance) {
      r.l_max = l;
      r.z_max = z;
    }
    first = false;
  }
  return r;
}

}  // namespace

const char* SynthFamilyName(SynthFamily f) {
  switch (f) {
    case SynthFamily::kSuppressor: return "suppressor";
    case SynthFamily::kDuplicate: return "duplicate";
    case SynthFamily::kAdditiveIndependent: return "additive-independent";
    case SynthFamily::kCorrelatedBlock: return "correlated-block";
    case SynthFamily::kNoiseOnly: return "noise-only";
  }
  return "?";
}

SynthFamily ParseSynthFamily(const std::string& name) {
  for (SynthFamily f : {SynthFamily::kSuppressor, SynthFamily::kDuplicate, SynthFamily::kAdditiveIndependent,
                        SynthFamily::kCorrelatedBlock, SynthFamily::kNoiseOnly}) {
    if (name == SynthFamilyName(f)) return f;
  }
  if (name == "additive") return SynthFamily::kAdditiveIndependent;
  Fail(ErrorCode::kConfig, "unknown synthetic family '" + name + "'");
}

double SyntheticSpec::ResolvedNoise() const {
  if (noise) {
    if (!(*noise >= 0.0)) Fail(ErrorCode::kConfig, "noise level must be non-negative");
    return *noise;
  }
  switch (family) {
    case SynthFamily::kSuppressor: return 0.0;
    case SynthFamily::kDuplicate: return 1.0;
    case SynthFamily::kAdditiveIndependent: return 0.5;
    case SynthFamily::kCorrelatedBlock: return 0.5;
    case SynthFamily::kNoiseOnly: return 1.0;
  }
  return 1.0;
}

size_t SyntheticSpec::ResolvedFeatures() const {
  switch (family) {
    case SynthFamily::kSuppressor:
    case SynthFamily::kDuplicate:
      return 2;
    case SynthFamily::kAdditiveIndependent:
      return n_features > 0 ? n_features : (betas.empty() ? 2 : betas.size());
    case SynthFamily::kCorrelatedBlock:
      if (n_features % 2 != 0) Fail(ErrorCode::kConfig, "correlated-block needs an even feature count");
      return n_features > 0 ? n_features : 4;
    case SynthFamily::kNoiseOnly:
      return n_features > 0 ? n_features : 3;
  }
  return 2;
}

Eigen::MatrixXd PopulationCovariance(const SyntheticSpec& spec) {
  const size_t p = spec.ResolvedFeatures();
  const double s2 = spec.ResolvedNoise() * spec.ResolvedNoise();
  const auto dim = static_cast<Eigen::Index>(p + 1);
  const Eigen::Index y = dim - 1;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(dim, dim);
  switch (spec.family) {
    case SynthFamily::kSuppressor:
      // x, z = x + eta, y = eta + s e
      c << 1, 1, 0,
           1, 2, 1,
           0, 1, 1 + s2;
      break;
    case SynthFamily::kDuplicate:
      // x, z = x, y = x + s e
      c << 1, 1, 1,
           1, 1, 1,
           1, 1, 1 + s2;
      break;
    case SynthFamily::kAdditiveIndependent: {
      const std::vector<double> b = Betas(spec, p);
      double var_y = s2;
      for (size_t j = 0; j < p; ++j) {
        c(j, j) = 1.0;
        c(j, y) = c(y, j) = b[j];
        var_y += b[j] * b[j];
      }
      c(y, y) = var_y;
      break;
    }
    case SynthFamily::kCorrelatedBlock: {
      // Block b: x_{2b} = f_b + u/2, x_{2b+1} = f_b + v/2; y = g sum_b x_{2b} + s e.
      const size_t blocks = p / 2;
      const double g = 1.0 / std::sqrt(static_cast<double>(blocks));
      for (size_t b = 0; b < blocks; ++b) {
        const auto a = static_cast<Eigen::Index>(2 * b);
        c(a, a) = c(a + 1, a + 1) = 1.25;
        c(a, a + 1) = c(a + 1, a) = 1.0;
        c(a, y) = c(y, a) = 1.25 * g;
        c(a + 1, y) = c(y, a + 1) = g;
      }
      c(y, y) = blocks * g * g * 1.25 + s2;
      break;
    }
    case SynthFamily::kNoiseOnly:
      c.setIdentity();
      c(y, y) = s2 > 0 ? s2 : 1.0;
      break;
  }
  return c;
}

PopulationTargets PopulationDecomposition(const Eigen::MatrixXd& covariance) {
  const Eigen::VectorXd sd = covariance.diagonal().cwiseSqrt();
  const Eigen::MatrixXd corr = sd.cwiseInverse().asDiagonal() * covariance * sd.cwiseInverse().asDiagonal();
  const int p = static_cast<int>(corr.rows()) - 1;
  if (p > static_cast<int>(kMaxTargetFeatures)) {
    Fail(ErrorCode::kArgument, "population targets need p <= " + std::to_string(kMaxTargetFeatures));
  }
  PopulationTargets t;
  for (int driver = 0; driver < p; ++driver) {
    std::vector<int> others;
    for (int j = 0; j < p; ++j) {
      if (j != driver) others.push_back(j);
    }
    auto loco = [&](const FeatureSubset& z) {
      std::vector<int> with = z.indices();
      with.push_back(driver);
      return PopulationError(corr, z.indices()) - PopulationError(corr, with);
    };
    const double l_empty = loco(FeatureSubset{});
    const ExhaustiveResult r = SearchExtremes(others, loco);
    t.l_empty.push_back(l_empty);
    t.unique.push_back(r.l_min);
    t.redundant.push_back(l_empty - r.l_min);
    t.synergistic.push_back(r.l_max - l_empty);
  }
  return t;
}

SyntheticData Generate(const SyntheticSpec& spec) {
  const size_t n = spec.n_patterns;
  if (n < 2) Fail(ErrorCode::kConfig, "synthetic data needs at least 2 patterns");
  const size_t p = spec.ResolvedFeatures();
  const double noise = spec.ResolvedNoise();
  Rng rng(DeriveSeed(spec.seed, {static_cast<uint64_t>(spec.family)}));
  auto normals = [&] {
    std::vector<double> v(n);
    for (double& e : v) e = rng.Normal();
    return v;
  };

  std::vector<std::vector<double>> x(p);
  std::vector<double> y(n, 0.0);
  switch (spec.family) {
    case SynthFamily::kSuppressor: {
      x[0] = normals();
      const std::vector<double> eta = normals();
      const std::vector<double> e = normals();
      x[1].resize(n);
      for (size_t i = 0; i < n; ++i) {
        x[1][i] = x[0][i] + eta[i];
        y[i] = eta[i] + noise * e[i];
      }
      break;
    }
    case SynthFamily::kDuplicate: {
      x[0] = normals();
      x[1] = x[0];
      const std::vector<double> e = normals();
      for (size_t i = 0; i < n; ++i) y[i] = x[0][i] + noise * e[i];
      break;
    }
    case SynthFamily::kAdditiveIndependent: {
      for (auto& c : x) c = normals();
      OrthogonalizeColumns(x);
      const std::vector<double> b = Betas(spec, p);
      const std::vector<double> e = normals();
      for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < p; ++j) y[i] += b[j] * x[j][i];
        y[i] += noise * e[i];
      }
      break;
    }
    case SynthFamily::kCorrelatedBlock: {
      const size_t blocks = p / 2;
      const double g = 1.0 / std::sqrt(static_cast<double>(blocks));
      for (size_t b = 0; b < blocks; ++b) {
        const std::vector<double> f = normals();
        const std::vector<double> u = normals();
        const std::vector<double> v = normals();
        x[2 * b].resize(n);
        x[2 * b + 1].resize(n);
        for (size_t i = 0; i < n; ++i) {
          x[2 * b][i] = f[i] + 0.5 * u[i];
          x[2 * b + 1][i] = f[i] + 0.5 * v[i];
          y[i] += g * x[2 * b][i];
        }
      }
      const std::vector<double> e = normals();
      for (size_t i = 0; i < n; ++i) y[i] += noise * e[i];
      break;
    }
    case SynthFamily::kNoiseOnly: {
      for (auto& c : x) c = normals();
      const std::vector<double> e = normals();
      for (size_t i = 0; i < n; ++i) y[i] = (noise > 0 ? noise : 1.0) * e[i];
      break;
    }
  }

  SyntheticData out;
  out.table.feature_names = FeatureNames(spec, p);
  out.table.features = std::move(x);
  out.table.target_name = "y";
  out.table.target = std::move(y);
  if (spec.n_groups > 0) {
    out.table.id_names = {"group"};
    out.table.ids.resize(1);
    for (size_t i = 0; i < n; ++i) out.table.ids[0].push_back("g" + std::to_string(i % spec.n_groups));
  }
  out.table.column_order = out.table.id_names;
  out.table.column_order.insert(out.table.column_order.end(), out.table.feature_names.begin(),
                                out.table.feature_names.end());
  out.table.column_order.push_back("y");

  const Eigen::MatrixXd cov = PopulationCovariance(spec);
  const Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
  out.population_correlation = sd.cwiseInverse().asDiagonal() * cov * sd.cwiseInverse().asDiagonal();
  if (p <= kMaxTargetFeatures) out.targets = PopulationDecomposition(cov);
  return out;
}

std::vector<FeatureSubset> OrderedSubsets(const std::vector<int>& members) {
  const size_t n = members.size();
  if (n > 30) Fail(ErrorCode::kArgument, "too many members to enumerate");
  std::vector<FeatureSubset> out;
  out.reserve(size_t{1} << n);
  for (uint64_t mask = 0; mask < (uint64_t{1} << n); ++mask) {
    std::vector<int> s;
    for (size_t b = 0; b < n; ++b) {
      if (mask >> b & 1) s.push_back(members[b]);
    }
    out.emplace_back(std::move(s));
  }
  std::sort(out.begin(), out.end());
  return out;
}

ExhaustiveResult ExhaustiveMinMax(LocoEvaluator& eval, int driver, int max_features) {
  const int p = static_cast<int>(eval.dataset().n_features());
  if (driver < 0 || driver >= p) Fail(ErrorCode::kArgument, "driver index out of range");
  if (p > max_features) {
    Fail(ErrorCode::kArgument, "exhaustive search bound exceeded: p=" + std::to_string(p) + " > " +
                                   std::to_string(max_features));
  }
  std::vector<int> others;
  for (int j = 0; j < p; ++j) {
    if (j != driver) others.push_back(j);
  }
  return SearchExtremes(others, [&](const FeatureSubset& z) { return eval.Loco(driver, z); });
}

}  // namespace hifi
