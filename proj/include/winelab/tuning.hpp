#pragma once

#include "winelab/dataset.hpp"
#include "winelab/json_types.hpp"
#include "winelab/model.hpp"
#include "winelab/sampling.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace winelab {

struct GridAxis {
  std::string name;
  std::vector<Json> values;
};

// One cartesian block of axes, expanded row-major (first axis slowest).
using ParamGrid = std::vector<GridAxis>;

/// Search space for one family: the union of its blocks, in block order.
/// Several blocks express conditional axes, e.g. gamma only for the rbf kernel.
struct GridSpec {
  ModelFamily family = ModelFamily::svm;
  std::vector<ParamGrid> blocks;
  std::uint64_t seed = 0;
};

// Throws ConfigError for an empty grid or an empty axis.
std::vector<Json> expand_grid(const GridSpec& grid);

GridSpec default_grid(ModelFamily family, std::uint64_t seed);

// {"family": ..., "grid": {axis: [values...]} or [{...}, {...}], "seed": ...}
GridSpec grid_from_json(const Json& j, std::uint64_t fallback_seed);
Json grid_to_json(const GridSpec& grid);

// k disjoint folds covering 0..n-1, each ascending. Per-class counts across
// folds differ by at most one. Requires 2 <= k_folds <= every present class count.
std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const QualityClass> labels, std::size_t k_folds,
                                                       std::uint64_t seed);

struct ConfigScore {
  Json config;
  double error = 0.0;  // mean validation error over folds
  std::vector<double> fold_errors;
};

struct TuneResult {
  ModelFamily family = ModelFamily::svm;
  std::size_t k_folds = 0;
  Json best_config;
  double best_error = 0.0;
  std::size_t best_index = 0;
  std::vector<ConfigScore> table;
};

// argmin over the table; ties keep the earliest row.
TuneResult select_best(ModelFamily family, std::size_t k_folds, std::vector<ConfigScore> table);

struct TuneOptions {
  std::size_t k_folds = 5;
  // Applied to each training fold only; validation folds stay untouched.
  std::optional<SamplerConfig> fold_sampler;
  // Called (serialized) with every dataset handed to fit.
  std::function<void(const Dataset&)> on_fit;
};

/// Exhaustive search minimizing mean k-fold validation error
/// (1 - accuracy). Config i fits with seed derive_seed(grid.seed, {grid, i}),
/// so the result does not depend on how many threads evaluate configs.
TuneResult grid_search(const GridSpec& grid, const Dataset& train, const TuneOptions& options = {});

Json tune_result_json(const TuneResult& r);

}  // namespace winelab
