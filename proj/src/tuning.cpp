#include "winelab/tuning.hpp"

#include "winelab/error.hpp"
#include "winelab/evaluation.hpp"
#include "winelab/random.hpp"

#include <algorithm>
#include <exception>
#include <numeric>

namespace winelab {
namespace {

void expand_block(const ParamGrid& block, std::size_t axis, Json& current, std::vector<Json>& out) {
  if (axis == block.size()) {
    out.push_back(current);
    return;
  }
  for (const auto& v : block[axis].values) {
    current[block[axis].name] = v;
    expand_block(block, axis + 1, current, out);
  }
  current.erase(block[axis].name);
}

ParamGrid block_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("grid block must be an object of axis -> value list");
  ParamGrid block;
  for (const auto& [name, values] : j.items()) {
    if (!values.is_array()) throw ConfigError("grid axis '" + name + "' must be a list");
    block.push_back({name, std::vector<Json>(values.begin(), values.end())});
  }
  return block;
}

}  // namespace

std::vector<Json> expand_grid(const GridSpec& grid) {
  if (grid.blocks.empty()) throw ConfigError("grid for " + std::string(family_name(grid.family)) + " is empty");
  std::vector<Json> out;
  for (const auto& block : grid.blocks) {
    for (const auto& axis : block) {
      if (axis.values.empty()) throw ConfigError("grid axis '" + axis.name + "' has no values");
    }
    Json current = Json::object();
    expand_block(block, 0, current, out);
  }
  return out;
}

GridSpec default_grid(ModelFamily family, std::uint64_t seed) {
  auto axis = [](std::string name, std::vector<Json> values) { return GridAxis{std::move(name), std::move(values)}; };
  GridSpec g{family, {}, seed};
  switch (family) {
    case ModelFamily::svm:
      g.blocks.push_back({axis("C", {0.1, 1, 10, 100}), axis("kernel", {"linear"})});
      g.blocks.push_back({axis("C", {0.1, 1, 10, 100}), axis("kernel", {"rbf"}), axis("gamma", {0.01, 0.1, 1})});
      break;
    case ModelFamily::dtree:
      g.blocks.push_back({axis("criterion", {"gini", "entropy"}), axis("max_depth", {3, 5, 10, "unbounded"})});
      break;
    case ModelFamily::rforest:
      g.blocks.push_back({axis("trees", {100, 300}), axis("features_per_split", {2, 3, 4})});
      break;
    case ModelFamily::gboost:
      g.blocks.push_back({axis("learning_rate", {0.05, 0.1, 0.3}), axis("iterations", {50, 100, 200}),
                          axis("tree_depth", {2, 3})});
      break;
    case ModelFamily::knn:
      g.blocks.push_back({axis("k", {3, 5, 7, 9, 11})});
      break;
  }
  return g;
}

GridSpec grid_from_json(const Json& j, std::uint64_t fallback_seed) {
  GridSpec g;
  g.family = parse_family(j.at("family").get<std::string>());
  g.seed = j.contains("seed") ? j.at("seed").get<std::uint64_t>() : fallback_seed;
  if (!j.contains("grid")) return default_grid(g.family, g.seed);
  const auto& grid = j.at("grid");
  if (grid.is_array()) {
    for (const auto& b : grid) g.blocks.push_back(block_from_json(b));
  } else {
    g.blocks.push_back(block_from_json(grid));
  }
  expand_grid(g);
  return g;
}

Json grid_to_json(const GridSpec& grid) {
  Json blocks = Json::array();
  for (const auto& block : grid.blocks) {
    Json b = Json::object();
    for (const auto& axis : block) b[axis.name] = axis.values;
    blocks.push_back(std::move(b));
  }
  return Json{{"family", family_name(grid.family)}, {"grid", std::move(blocks)}, {"seed", grid.seed}};
}

std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const QualityClass> labels, std::size_t k_folds,
                                                       std::uint64_t seed) {
  if (k_folds < 2) throw ConfigError("k_folds must be at least 2");
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[class_index(labels[i])].push_back(i);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (!by_class[c].empty() && by_class[c].size() < k_folds) {
      throw DataError("k_folds = " + std::to_string(k_folds) + " exceeds the " + std::to_string(by_class[c].size()) +
                      " rows of class '" + std::string(class_name(class_from_index(c))) + "'");
    }
  }
  std::vector<std::vector<std::size_t>> folds(k_folds);
  std::size_t offset = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto& rows = by_class[c];
    Rng rng(seed, {stream::folds, c});
    std::shuffle(rows.begin(), rows.end(), rng.engine());
    for (std::size_t p = 0; p < rows.size(); ++p) folds[(offset + p) % k_folds].push_back(rows[p]);
    offset = (offset + rows.size()) % k_folds;
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

TuneResult select_best(ModelFamily family, std::size_t k_folds, std::vector<ConfigScore> table) {
  if (table.empty()) throw ConfigError("no configurations to select from");
  TuneResult r;
  r.family = family;
  r.k_folds = k_folds;
  for (std::size_t i = 1; i < table.size(); ++i) {
    if (table[i].error < table[r.best_index].error) r.best_index = i;
  }
  r.best_config = table[r.best_index].config;
  r.best_error = table[r.best_index].error;
  r.table = std::move(table);
  return r;
}

TuneResult grid_search(const GridSpec& grid, const Dataset& train, const TuneOptions& options) {
  const auto configs = expand_grid(grid);
  // Validate every config up front so a typo fails fast with the config attached.
  for (const auto& cfg : configs) {
    try {
      resolve_hyperparameters(grid.family, cfg, train.num_features());
    } catch (const Error& e) {
      throw ConfigError("grid config " + cfg.dump() + ": " + e.what());
    }
  }
  const std::size_t k = options.k_folds;
  const auto folds = stratified_kfold(train.labels, k, grid.seed);
  std::vector<Dataset> fold_train(k);
  std::vector<Dataset> fold_valid(k);
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> rows;
    for (std::size_t g = 0; g < k; ++g) {
      if (g != f) rows.insert(rows.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(rows.begin(), rows.end());
    fold_train[f] = subset(train, rows);
    fold_valid[f] = subset(train, folds[f]);
    if (options.fold_sampler) {
      SamplerConfig s = *options.fold_sampler;
      s.seed = derive_seed(s.seed, {stream::folds, f});
      fold_train[f] = apply_sampler(fold_train[f], s);
    }
  }

  const std::size_t tasks = configs.size() * k;
  std::vector<double> errors(tasks, 0.0);
  std::vector<std::exception_ptr> failures(tasks);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t t = 0; t < tasks; ++t) {
    const std::size_t ci = t / k;
    const std::size_t f = t % k;
    try {
      if (options.on_fit) {
#pragma omp critical(winelab_tune_audit)
        options.on_fit(fold_train[f]);
      }
      const TrainConfig cfg{grid.family, configs[ci], derive_seed(grid.seed, {stream::grid, ci})};
      const TrainedModel m = fit(fold_train[f], cfg);
      errors[t] = 1.0 - accuracy(fold_valid[f].labels, m.predict_batch(fold_valid[f].features));
    } catch (...) {
      failures[t] = std::current_exception();
    }
  }
  for (std::size_t t = 0; t < tasks; ++t) {
    if (!failures[t]) continue;
    const std::string where = "grid config " + configs[t / k].dump() + ", fold " + std::to_string(t % k) + ": ";
    try {
      std::rethrow_exception(failures[t]);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    } catch (const std::exception& e) {
      throw DataError(where + e.what());
    }
  }

  std::vector<ConfigScore> table;
  for (std::size_t ci = 0; ci < configs.size(); ++ci) {
    ConfigScore s;
    s.config = configs[ci];
    s.fold_errors.assign(errors.begin() + static_cast<std::ptrdiff_t>(ci * k),
                         errors.begin() + static_cast<std::ptrdiff_t>((ci + 1) * k));
    s.error = std::accumulate(s.fold_errors.begin(), s.fold_errors.end(), 0.0) / static_cast<double>(k);
    table.push_back(std::move(s));
  }
  return select_best(grid.family, k, std::move(table));
}

Json tune_result_json(const TuneResult& r) {
  Json table = Json::array();
  for (const auto& s : r.table) {
    table.push_back(Json{{"config", s.config}, {"error", s.error}, {"fold_errors", s.fold_errors}});
  }
  return Json{{"family", family_name(r.family)},
              {"k_folds", r.k_folds},
              {"best_config", r.best_config},
              {"best_error", r.best_error},
              {"best_index", r.best_index},
              {"table", std::move(table)}};
}

}  // namespace winelab
