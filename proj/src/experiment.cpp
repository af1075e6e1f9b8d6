#include "winelab/experiment.hpp"

#include "winelab/analysis.hpp"
#include "winelab/dataio.hpp"
#include "winelab/error.hpp"
#include "winelab/evaluation.hpp"
#include "winelab/importance.hpp"
#include "winelab/random.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

namespace winelab {
namespace {

template <typename F>
auto at_stage(std::string_view stage, F&& f) -> decltype(f()) {
  const std::string prefix = std::string(stage) + ": ";
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const NumericError& e) {
    throw NumericError(prefix + e.what());
  } catch (const DataError& e) {
    throw DataError(prefix + e.what());
  } catch (const Json::exception& e) {
    throw ConfigError(prefix + e.what());
  }
}

class StageClock {
 public:
  void start() { t0_ = std::chrono::steady_clock::now(); }
  void stop(const std::string& stage) {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0_;
    seconds_[stage] = dt.count();
  }
  Json to_json() const {
    Json j = Json::object();
    for (const auto& [k, v] : seconds_) j[k] = v;
    return j;
  }

 private:
  std::chrono::steady_clock::time_point t0_;
  std::map<std::string, double> seconds_;
};

const std::set<std::string> kConfigKeys = {"input",         "protocol", "sampler",  "sampling_order",
                                           "split",         "deduplicate", "features", "models",
                                           "output",        "seed",     "k_folds",  "importance_repeats",
                                           "model_dir",     "include_timings"};

Json class_counts_json(const ClassCounts& counts) {
  Json j = Json::object();
  for (auto c : kAllClasses) j[std::string(class_name(c))] = counts[class_index(c)];
  return j;
}

Json spec_json(const ModelSpec& spec) {
  Json j{{"family", family_name(spec.family)}};
  if (spec.grid) {
    j["grid"] = grid_to_json(*spec.grid).at("grid");
  } else {
    j["hyperparameters"] = spec.hyperparameters.value_or(Json::object());
  }
  return j;
}

std::vector<std::string> model_tags(const std::vector<ModelSpec>& models) {
  std::map<ModelFamily, std::size_t> seen;
  std::vector<std::string> tags;
  for (const auto& m : models) {
    const std::size_t n = ++seen[m.family];
    tags.push_back(std::string(family_name(m.family)) + (n > 1 ? "-" + std::to_string(n) : ""));
  }
  return tags;
}

}  // namespace

std::string_view protocol_name(Protocol p) {
  return p == Protocol::unbalanced_default ? "unbalanced-default" : "balanced-tuned";
}

Protocol parse_protocol(std::string_view name) {
  if (name == "unbalanced-default") return Protocol::unbalanced_default;
  if (name == "balanced-tuned") return Protocol::balanced_tuned;
  throw ConfigError("unknown protocol '" + std::string(name) + "' (expected unbalanced-default or balanced-tuned)");
}

std::string_view sampling_order_name(SamplingOrder o) {
  return o == SamplingOrder::before_split ? "before-split" : "train-only";
}

SamplingOrder parse_sampling_order(std::string_view name) {
  if (name == "before-split") return SamplingOrder::before_split;
  if (name == "train-only") return SamplingOrder::train_only;
  throw ConfigError("unknown sampling_order '" + std::string(name) + "' (expected before-split or train-only)");
}

std::vector<std::string> default_feature_set() {
  return {"alcohol",   "volatile acidity",     "sulphates", "citric acid", "total sulfur dioxide",
          "density",   "chlorides",            "fixed acidity", "ph",      "free sulfur dioxide"};
}

ExperimentConfig experiment_config_from_json(const Json& j, std::optional<std::uint64_t> seed_override) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kConfigKeys.count(key)) throw ConfigError("unknown experiment config field '" + key + "'");
  }
  try {
    ExperimentConfig cfg;
    cfg.input = j.at("input").get<std::string>();
    if (seed_override) {
      cfg.seed = *seed_override;
    } else if (j.contains("seed")) {
      cfg.seed = j.at("seed").get<std::uint64_t>();
    } else {
      throw ConfigError("experiment config needs a seed (field 'seed' or --seed)");
    }
    if (j.contains("protocol")) cfg.protocol = parse_protocol(j.at("protocol").get<std::string>());
    if (j.contains("sampler")) {
      const auto& s = j.at("sampler");
      for (const auto& [key, value] : s.items()) {
        if (key != "method" && key != "k_neighbors") throw ConfigError("unknown sampler field '" + key + "'");
      }
      if (s.contains("method")) cfg.sampler.method = parse_sampling_method(s.at("method").get<std::string>());
      if (s.contains("k_neighbors")) cfg.sampler.k_neighbors = s.at("k_neighbors").get<std::size_t>();
    }
    if (j.contains("sampling_order")) {
      cfg.sampling_order = parse_sampling_order(j.at("sampling_order").get<std::string>());
    }
    if (j.contains("split")) {
      const auto& s = j.at("split");
      for (const auto& [key, value] : s.items()) {
        if (key != "test_fraction") throw ConfigError("unknown split field '" + key + "'");
      }
      if (s.contains("test_fraction")) cfg.test_fraction = s.at("test_fraction").get<double>();
    }
    if (j.contains("deduplicate")) cfg.deduplicate = j.at("deduplicate").get<bool>();
    cfg.features = j.contains("features") ? j.at("features").get<std::vector<std::string>>() : default_feature_set();
    if (cfg.features.empty()) throw ConfigError("feature list is empty");
    if (j.contains("output")) cfg.output = j.at("output").get<std::string>();
    if (j.contains("k_folds")) cfg.k_folds = j.at("k_folds").get<std::size_t>();
    if (j.contains("importance_repeats")) cfg.importance_repeats = j.at("importance_repeats").get<std::size_t>();
    if (j.contains("model_dir")) cfg.model_dir = j.at("model_dir").get<std::string>();
    if (j.contains("include_timings")) cfg.include_timings = j.at("include_timings").get<bool>();
    if (cfg.importance_repeats < 1) throw ConfigError("importance_repeats must be at least 1");

    const bool tuned = cfg.protocol == Protocol::balanced_tuned;
    const Json models = j.contains("models") ? j.at("models") : Json::array();
    if (!models.is_array()) throw ConfigError("'models' must be a list");
    std::vector<Json> entries(models.begin(), models.end());
    if (entries.empty()) {
      for (auto f : kAllFamilies) entries.emplace_back(std::string(family_name(f)));
    }
    for (const auto& entry : entries) {
      ModelSpec spec;
      Json obj = entry.is_string() ? Json{{"family", entry}} : entry;
      for (const auto& [key, value] : obj.items()) {
        if (key != "family" && key != "hyperparameters" && key != "grid") {
          throw ConfigError("unknown model field '" + key + "'");
        }
      }
      spec.family = parse_family(obj.at("family").get<std::string>());
      if (obj.contains("hyperparameters") && obj.contains("grid")) {
        throw ConfigError("model " + std::string(family_name(spec.family)) +
                          " gives both hyperparameters and a grid");
      }
      if (obj.contains("grid")) {
        spec.grid = grid_from_json(Json{{"family", obj.at("family")}, {"grid", obj.at("grid")}}, 0);
      } else if (obj.contains("hyperparameters") || !tuned) {
        const Json given = obj.contains("hyperparameters") ? obj.at("hyperparameters") : Json::object();
        spec.hyperparameters = resolve_hyperparameters(spec.family, given, cfg.features.size());
      } else {
        spec.grid = default_grid(spec.family, 0);
      }
      cfg.models.push_back(std::move(spec));
    }
    return cfg;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
}

ExperimentConfig load_experiment_config(const std::string& path, std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return experiment_config_from_json(j, seed_override);
}

Json experiment_config_json(const ExperimentConfig& cfg) {
  Json models = Json::array();
  for (const auto& m : cfg.models) models.push_back(spec_json(m));
  Json j{{"input", cfg.input},
         {"protocol", protocol_name(cfg.protocol)},
         {"sampler", {{"method", sampling_method_name(cfg.sampler.method)}, {"k_neighbors", cfg.sampler.k_neighbors}}},
         {"sampling_order", sampling_order_name(cfg.sampling_order)},
         {"split", {{"test_fraction", cfg.test_fraction}}},
         {"deduplicate", cfg.deduplicate},
         {"features", cfg.features},
         {"models", std::move(models)},
         {"output", cfg.output},
         {"seed", cfg.seed},
         {"k_folds", cfg.k_folds},
         {"importance_repeats", cfg.importance_repeats},
         {"model_dir", cfg.model_dir},
         {"include_timings", cfg.include_timings}};
  return j;
}

namespace {

struct Prepared {
  RawDataset raw;
  std::vector<RankedFeature> ranking;
  std::vector<StatsRow> stats;
  ClassDistribution distribution;
  std::size_t rows_used = 0;
  bool sampling = false;
  bool sample_first = false;
  SamplerConfig sampler;
  SplitSpec split_spec;
  Dataset train;      // standardized training rows, before any train-only sampling
  Dataset train_fit;  // rows handed to the final fits
  Dataset test;
  Standardizer standardizer;  // raw inputs -> training scale
  std::size_t sampled_rows = 0;
};

using Observer = std::function<void(std::string_view, const Dataset&)>;

Prepared prepare(const ExperimentConfig& cfg, const Observer& observe, StageClock& clock) {
  Prepared p;
  clock.start();
  p.raw = at_stage("parse", [&] { return parse_csv(std::filesystem::path(cfg.input)); });
  p.ranking = at_stage("correlate", [&] {
    return rank_features(correlation_matrix(p.raw), std::string(kQualityColumn));
  });
  const RawDataset unique = cfg.deduplicate ? deduplicate(p.raw) : p.raw;
  p.rows_used = unique.size();
  p.stats = at_stage("summarize", [&] { return summarize(unique); });
  const Dataset encoded = at_stage("encode", [&] { return encode_labels(unique); });
  p.distribution = class_distribution(encoded);
  const Dataset ds = at_stage("select features", [&] { return select_features(encoded, cfg.features); });
  clock.stop("load");

  p.sampling = cfg.protocol == Protocol::balanced_tuned;
  p.sample_first = p.sampling && cfg.sampling_order == SamplingOrder::before_split;
  p.sampler = cfg.sampler;
  p.sampler.seed = derive_seed(cfg.seed, {stream::sampler});
  p.split_spec = SplitSpec{cfg.test_fraction, derive_seed(cfg.seed, {stream::split})};

  clock.start();
  if (p.sample_first) {
    // Balance the whole table, then split: test rows may be synthetic points
    // interpolated from rows that ended up in train, and vice versa.
    const Standardizer st0 = fit_standardizer(ds);
    const Dataset z = apply_standardizer(st0, ds);
    observe("sample", z);
    const Dataset balanced = at_stage("sample", [&] { return apply_sampler(z, p.sampler); });
    p.sampled_rows = balanced.size();
    const Split split = at_stage("split", [&] { return stratified_split(balanced, p.split_spec); });
    const Standardizer st1 = fit_standardizer(split.train);
    p.train = apply_standardizer(st1, split.train);
    p.test = apply_standardizer(st1, split.test);
    p.standardizer = compose(st0, st1);
    p.train_fit = p.train;
  } else {
    const Split split = at_stage("split", [&] { return stratified_split(ds, p.split_spec); });
    p.standardizer = fit_standardizer(split.train);
    p.train = apply_standardizer(p.standardizer, split.train);
    p.test = apply_standardizer(p.standardizer, split.test);
    if (p.sampling) {
      observe("sample", p.train);
      p.train_fit = at_stage("sample", [&] { return apply_sampler(p.train, p.sampler); });
      p.sampled_rows = p.train_fit.size();
    } else {
      p.train_fit = p.train;
    }
  }
  clock.stop("prepare");
  return p;
}

TuneResult tune_model(const ExperimentConfig& cfg, const Prepared& p, const GridSpec& spec_grid, std::size_t i,
                      const std::string& tag, const Observer& observe) {
  GridSpec grid = spec_grid;
  grid.seed = derive_seed(cfg.seed, {stream::grid, i});
  TuneOptions opts;
  opts.k_folds = cfg.k_folds;
  if (p.sampling && !p.sample_first) {
    SamplerConfig fs = p.sampler;
    fs.seed = derive_seed(cfg.seed, {stream::sampler, i + 1});
    opts.fold_sampler = fs;
  }
  opts.on_fit = [&](const Dataset& d) { observe("tune", d); };
  return at_stage("tune " + tag, [&] { return grid_search(grid, p.train, opts); });
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const ExperimentHooks& hooks) {
  const Observer observe = [&](std::string_view stage, const Dataset& ds) {
    if (hooks.on_data) hooks.on_data(stage, ds);
  };
  StageClock clock;
  ExperimentResult result;
  Json& report = result.report;
  report["toolkit"] = {{"name", "winelab"}, {"version", WINELAB_VERSION}};
  report["config"] = experiment_config_json(cfg);

  const Prepared p = prepare(cfg, observe, clock);
  {
    Json data;
    data["rows_parsed"] = p.raw.size();
    data["rows_used"] = p.rows_used;
    data["duplicates_removed"] = p.raw.size() - p.rows_used;
    Json st = Json::array();
    for (const auto& s : p.stats) {
      st.push_back(Json{{"feature", s.name}, {"mean", s.mean}, {"sd", s.sd}, {"min", s.min}, {"max", s.max},
                        {"median", s.median}});
    }
    data["stats"] = std::move(st);
    Json rk = Json::array();
    for (const auto& r : p.ranking) rk.push_back(Json{{"feature", r.name}, {"rho", r.rho}});
    data["correlation_with_quality"] = {{"rows", p.raw.size()}, {"ranking", std::move(rk)}};
    Json per_score = Json::object();
    for (std::size_t s = 0; s < p.distribution.per_score.size(); ++s) {
      if (p.distribution.per_score[s] > 0) per_score[std::to_string(s)] = p.distribution.per_score[s];
    }
    data["class_distribution"] = {{"per_class", class_counts_json(p.distribution.per_class)},
                                  {"per_score", per_score}};
    report["data"] = std::move(data);
  }
  {
    Json pj{{"name", protocol_name(cfg.protocol)}};
    if (p.sampling) {
      pj["sampler"] = sampling_method_name(p.sampler.method);
      pj["sampling_order"] = sampling_order_name(cfg.sampling_order);
      pj["leakage"] = p.sample_first ? "test rows include synthetic or resampled rows built from training rows; "
                                       "test metrics are optimistic"
                                     : "none: sampling and tuning see training rows only";
      pj["rows_after_sampling"] = p.sampled_rows;
    } else {
      pj["sampler"] = "none";
      pj["leakage"] = "none";
    }
    report["protocol"] = std::move(pj);
    report["split"] = {{"seed", p.split_spec.seed},
                       {"test_fraction", p.split_spec.test_fraction},
                       {"train_rows", p.train.size()},
                       {"test_rows", p.test.size()},
                       {"train_classes", class_counts_json(count_classes(p.train.labels))},
                       {"test_classes", class_counts_json(count_classes(p.test.labels))},
                       {"fit_rows", p.train_fit.size()},
                       {"fit_classes", class_counts_json(count_classes(p.train_fit.labels))}};
  }

  const auto tags = model_tags(cfg.models);
  std::vector<TrainedModel> models;
  std::vector<double> accuracies;
  Json model_reports = Json::array();
  for (std::size_t i = 0; i < cfg.models.size(); ++i) {
    const ModelSpec& spec = cfg.models[i];
    Json entry{{"tag", tags[i]}, {"family", family_name(spec.family)}};
    clock.start();
    Json hyper;
    if (spec.grid) {
      const TuneResult tuned = tune_model(cfg, p, *spec.grid, i, tags[i], observe);
      hyper = tuned.best_config;
      entry["tuning"] = tune_result_json(tuned);
    } else {
      hyper = *spec.hyperparameters;
    }
    observe("fit", p.train_fit);
    const TrainConfig tc{spec.family, hyper, derive_seed(cfg.seed, {stream::model, i})};
    TrainedModel m = at_stage("fit " + tags[i], [&] { return fit(p.train_fit, tc); });
    clock.stop("model " + tags[i]);

    const auto cm = confusion_matrix(p.test.labels, m.predict(p.test));
    entry["hyperparameters"] = m.hyperparameters();
    entry["evaluation"] = evaluation_json(cm);
    Json warn = Json::array();
    for (const auto& w : m.warnings()) {
      warn.push_back(w);
      result.warnings.push_back(tags[i] + ": " + w);
    }
    entry["warnings"] = std::move(warn);
    if (!cfg.model_dir.empty()) {
      std::filesystem::create_directories(cfg.model_dir);
      const auto path = std::filesystem::path(cfg.model_dir) / (tags[i] + ".json");
      save_model(path, m, p.standardizer);
      entry["model_file"] = path.string();
    }
    model_reports.push_back(std::move(entry));
    accuracies.push_back(macro_summary(cm).accuracy);
    models.push_back(std::move(m));
  }
  report["models"] = std::move(model_reports);

  if (!models.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < models.size(); ++i) {
      if (accuracies[i] > accuracies[best]) best = i;
    }
    report["best_model"] = tags[best];
    clock.start();
    const auto imp = at_stage("importance", [&] {
      return permutation_importance(models[best], p.test, cfg.importance_repeats,
                                    derive_seed(cfg.seed, {stream::importance}));
    });
    clock.stop("importance");
    Json ij{{"model", tags[best]}};
    ij.update(importance_json(imp));
    report["importance"] = std::move(ij);
  }
  if (!result.warnings.empty()) report["warnings"] = result.warnings;
  if (cfg.include_timings) report["timings_seconds"] = clock.to_json();
  return result;
}

TuningRun run_tuning(const ExperimentConfig& cfg, const ExperimentHooks& hooks) {
  const Observer observe = [&](std::string_view stage, const Dataset& ds) {
    if (hooks.on_data) hooks.on_data(stage, ds);
  };
  StageClock clock;
  const Prepared p = prepare(cfg, observe, clock);
  const auto tags = model_tags(cfg.models);
  TuningRun run;
  for (std::size_t i = 0; i < cfg.models.size(); ++i) {
    const ModelSpec& spec = cfg.models[i];
    const GridSpec grid = spec.grid ? *spec.grid : default_grid(spec.family, 0);
    run.tags.push_back(tags[i]);
    run.results.push_back(tune_model(cfg, p, grid, i, tags[i], observe));
  }
  return run;
}

}  // namespace winelab
