#include "winelab/sampling.hpp"

#include "winelab/error.hpp"
#include "winelab/kernels.hpp"
#include "winelab/random.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <string>

namespace winelab {
namespace {

using ClassRows = std::array<std::vector<std::size_t>, kNumClasses>;

ClassRows rows_by_class(const Dataset& ds) {
  ClassRows out;
  for (std::size_t i = 0; i < ds.size(); ++i) out[class_index(ds.labels[i])].push_back(i);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (out[c].empty()) {
      throw DataError("class '" + std::string(class_name(class_from_index(c))) + "' has no rows to resample");
    }
  }
  return out;
}

std::size_t majority(const ClassRows& rows) {
  std::size_t m = 0;
  for (const auto& r : rows) m = std::max(m, r.size());
  return m;
}

}  // namespace

std::string_view sampling_method_name(SamplingMethod m) {
  switch (m) {
    case SamplingMethod::oversample: return "oversample";
    case SamplingMethod::undersample: return "undersample";
    case SamplingMethod::smote: return "smote";
  }
  return "?";
}

SamplingMethod parse_sampling_method(std::string_view name) {
  if (name == "oversample") return SamplingMethod::oversample;
  if (name == "undersample") return SamplingMethod::undersample;
  if (name == "smote") return SamplingMethod::smote;
  throw ConfigError("unknown sampling method '" + std::string(name) + "' (valid: oversample, undersample, smote)");
}

Dataset random_oversample(const Dataset& train, std::uint64_t seed) {
  const ClassRows rows = rows_by_class(train);
  const std::size_t target = majority(rows);
  std::vector<std::size_t> picks;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    Rng rng(seed, {stream::sampler, c});
    for (std::size_t k = rows[c].size(); k < target; ++k) picks.push_back(rows[c][rng.index(rows[c].size())]);
  }
  return concat(train, subset(train, picks));
}

Dataset random_undersample(const Dataset& train, std::uint64_t seed) {
  ClassRows rows = rows_by_class(train);
  std::size_t target = rows[0].size();
  for (const auto& r : rows) target = std::min(target, r.size());
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    Rng rng(seed, {stream::sampler, c});
    std::shuffle(rows[c].begin(), rows[c].end(), rng.engine());
    keep.insert(keep.end(), rows[c].begin(), rows[c].begin() + static_cast<std::ptrdiff_t>(target));
  }
  std::sort(keep.begin(), keep.end());
  return subset(train, keep);
}

std::vector<std::vector<std::size_t>> nearest_within(const Matrix& points, std::size_t k) {
  const std::size_t n = points.rows();
  if (k >= n) throw ConfigError("k_neighbors must be smaller than the class size");
  const Matrix dist = kernels::distance_matrix(points, points);
  std::vector<std::vector<std::size_t>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> order;
    order.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) order.push_back(j);
    }
    auto closer = [&](std::size_t a, std::size_t b) {
      return dist(i, a) != dist(i, b) ? dist(i, a) < dist(i, b) : a < b;
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), closer);
    order.resize(k);
    out[i] = std::move(order);
  }
  return out;
}

Dataset smote(const Dataset& train, const SamplerConfig& cfg, std::vector<SyntheticOrigin>* trace) {
  if (cfg.k_neighbors < 1) throw ConfigError("k_neighbors must be at least 1");
  const ClassRows rows = rows_by_class(train);
  const std::size_t target = majority(rows);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (rows[c].size() < target && rows[c].size() <= cfg.k_neighbors) {
      throw DataError("class '" + std::string(class_name(class_from_index(c))) + "' has " +
                      std::to_string(rows[c].size()) + " rows; SMOTE with k_neighbors = " +
                      std::to_string(cfg.k_neighbors) + " needs more than k");
    }
  }

  const std::size_t d = train.num_features();
  std::array<Dataset, kNumClasses> synthetic;
  std::array<std::vector<SyntheticOrigin>, kNumClasses> origins;

#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto& out = synthetic[c];
    out.feature_names = train.feature_names;
    out.features = Matrix(0, d);
    const auto& members = rows[c];
    if (members.size() == target) continue;
    const Matrix points = train.features.select_rows(members);
    const auto neighbours = nearest_within(points, cfg.k_neighbors);
    Rng rng(cfg.seed, {stream::sampler, c});
    std::vector<double> row(d);
    const std::size_t need = target - members.size();
    out.features.reserve_rows(need);
    for (std::size_t s = 0; s < need; ++s) {
      const std::size_t p = rng.index(members.size());
      const std::size_t q = neighbours[p][rng.index(cfg.k_neighbors)];
      const double t = rng.open_unit();
      for (std::size_t j = 0; j < d; ++j) {
        const double a = points(p, j);
        const double b = points(q, j);
        // Clamp away last-ulp rounding so the point stays on the closed segment.
        row[j] = std::clamp(a + t * (b - a), std::min(a, b), std::max(a, b));
      }
      out.features.append_row(row);
      out.labels.push_back(class_from_index(c));
      out.scores.push_back(-1);
      out.origin.push_back(-1);
      origins[c].push_back({members[p], members[q], t});
    }
  }

  Dataset result = train;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    result = concat(result, synthetic[c]);
    if (trace) trace->insert(trace->end(), origins[c].begin(), origins[c].end());
  }
  return result;
}

Dataset apply_sampler(const Dataset& train, const SamplerConfig& cfg) {
  switch (cfg.method) {
    case SamplingMethod::oversample: return random_oversample(train, cfg.seed);
    case SamplingMethod::undersample: return random_undersample(train, cfg.seed);
    case SamplingMethod::smote: return smote(train, cfg);
  }
  throw ConfigError("unknown sampling method");
}

}  // namespace winelab
