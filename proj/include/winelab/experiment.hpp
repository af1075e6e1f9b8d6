#pragma once

#include "winelab/dataset.hpp"
#include "winelab/json_types.hpp"
#include "winelab/model.hpp"
#include "winelab/preprocess.hpp"
#include "winelab/sampling.hpp"
#include "winelab/tuning.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace winelab {

enum class Protocol { unbalanced_default, balanced_tuned };
enum class SamplingOrder { before_split, train_only };

std::string_view protocol_name(Protocol p);
Protocol parse_protocol(std::string_view name);
std::string_view sampling_order_name(SamplingOrder o);
SamplingOrder parse_sampling_order(std::string_view name);

// One model slot: fixed hyperparameters, or a grid to tune.
struct ModelSpec {
  ModelFamily family = ModelFamily::svm;
  std::optional<Json> hyperparameters;
  std::optional<GridSpec> grid;
};

struct ExperimentConfig {
  std::string input;
  Protocol protocol = Protocol::unbalanced_default;
  SamplerConfig sampler;  // seed is derived from `seed` at run time
  SamplingOrder sampling_order = SamplingOrder::train_only;
  double test_fraction = 0.2;
  bool deduplicate = true;
  std::vector<std::string> features;
  std::vector<ModelSpec> models;
  std::string output;
  std::uint64_t seed = 0;
  std::size_t k_folds = 5;
  std::size_t importance_repeats = 10;
  std::string model_dir;
  bool include_timings = false;
};

// Every feature but residual sugar, the weakest correlate of quality.
std::vector<std::string> default_feature_set();

// Missing fields take defaults; models default to all five families with
// default hyperparameters (unbalanced-default) or default grids
// (balanced-tuned). `seed` is mandatory unless `seed_override` is given.
ExperimentConfig experiment_config_from_json(const Json& j, std::optional<std::uint64_t> seed_override = std::nullopt);
ExperimentConfig load_experiment_config(const std::string& path, std::optional<std::uint64_t> seed_override);

// Fully resolved echo; parsing it back yields an equivalent config.
Json experiment_config_json(const ExperimentConfig& cfg);

struct ExperimentHooks {
  // Sees every dataset handed to a sampler ("sample"), to a tuning fold fit
  // ("tune") or to a final fit ("fit").
  std::function<void(std::string_view stage, const Dataset& ds)> on_data;
};

struct ExperimentResult {
  Json report;
  std::vector<std::string> warnings;
};

/// parse -> dedup -> encode -> select features -> split / sample (per
/// sampling_order) -> standardize -> fit or tune each model -> evaluate on
/// the test rows -> importance for the most accurate model. Deterministic in
/// the config. Module errors are rethrown with the failing stage prefixed.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const ExperimentHooks& hooks = {});

struct TuningRun {
  std::vector<std::string> tags;
  std::vector<TuneResult> results;
};

// Same data preparation as run_experiment, then a grid search per model slot
// on the training rows (slots with fixed hyperparameters use the default grid).
TuningRun run_tuning(const ExperimentConfig& cfg, const ExperimentHooks& hooks = {});

}  // namespace winelab
