#include "winelab/model.hpp"

#include "winelab/error.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace winelab {
namespace {

const std::vector<std::string>& valid_keys(ModelFamily f) {
  static const std::vector<std::string> svm{"C", "kernel", "gamma", "tol", "max_passes"};
  static const std::vector<std::string> dtree{"criterion", "max_depth", "min_samples_split"};
  static const std::vector<std::string> rforest{"trees",     "features_per_split", "bootstrap",
                                                "criterion", "max_depth",          "min_samples_split"};
  static const std::vector<std::string> gboost{"iterations", "learning_rate", "tree_depth"};
  static const std::vector<std::string> knn{"k", "distance"};
  switch (f) {
    case ModelFamily::svm: return svm;
    case ModelFamily::dtree: return dtree;
    case ModelFamily::rforest: return rforest;
    case ModelFamily::gboost: return gboost;
    case ModelFamily::knn: return knn;
  }
  return svm;
}

std::string bad_value(ModelFamily f, const std::string& key, const std::string& what) {
  return std::string(family_name(f)) + " hyperparameter '" + key + "' " + what;
}

// Reads given[key] (or the fallback) as a real, enforcing `lo` (strictly when `strict`).
double real_param(ModelFamily f, const Json& given, const std::string& key, double fallback, double lo,
                  bool strict) {
  if (!given.contains(key)) return fallback;
  const auto& v = given.at(key);
  if (!v.is_number()) throw ConfigError(bad_value(f, key, "must be a number"));
  const double x = v.get<double>();
  if (!std::isfinite(x) || (strict ? !(x > lo) : !(x >= lo))) {
    throw ConfigError(bad_value(f, key, std::string("must be ") + (strict ? "> " : ">= ") + std::to_string(lo)));
  }
  return x;
}

std::size_t int_param(ModelFamily f, const Json& given, const std::string& key, std::size_t fallback,
                      std::size_t lo) {
  if (!given.contains(key)) return fallback;
  const auto& v = given.at(key);
  if (!v.is_number() || v.get<double>() != std::floor(v.get<double>()) || v.get<double>() < static_cast<double>(lo)) {
    throw ConfigError(bad_value(f, key, "must be an integer >= " + std::to_string(lo)));
  }
  return static_cast<std::size_t>(v.get<double>());
}

std::string string_param(ModelFamily f, const Json& given, const std::string& key, const std::string& fallback) {
  if (!given.contains(key)) return fallback;
  if (!given.at(key).is_string()) throw ConfigError(bad_value(f, key, "must be a string"));
  return given.at(key).get<std::string>();
}

Json depth_param(ModelFamily f, const Json& given) {
  if (!given.contains("max_depth")) return "unbounded";
  const auto& v = given.at("max_depth");
  if (v.is_null() || (v.is_string() && v.get<std::string>() == "unbounded")) return "unbounded";
  return int_param(f, given, "max_depth", 0, 1);
}

std::optional<std::size_t> depth_value(const Json& v) {
  if (v.is_number()) return v.get<std::size_t>();
  return std::nullopt;
}

TreeParams tree_params(const Json& hp) {
  TreeParams p;
  p.criterion = parse_criterion(hp.at("criterion").get<std::string>());
  p.max_depth = depth_value(hp.at("max_depth"));
  p.min_samples_split = hp.at("min_samples_split").get<std::size_t>();
  return p;
}

Kernel svm_kernel(const Json& hp) {
  const auto kind = parse_kernel_kind(hp.at("kernel").get<std::string>());
  return kind == KernelKind::rbf ? Kernel::rbf(hp.at("gamma").get<double>()) : Kernel::linear();
}

SvmTrainOptions svm_options(const Json& hp) {
  SvmTrainOptions o;
  o.tolerance = hp.at("tol").get<double>();
  if (hp.contains("max_passes")) o.max_passes = hp.at("max_passes").get<std::size_t>();
  return o;
}

Json standardizer_json(const Standardizer& st) {
  return Json{{"feature_names", st.feature_names}, {"mean", st.mean}, {"sd", st.sd}};
}

Standardizer standardizer_from_json(const Json& j) {
  Standardizer st{j.at("feature_names").get<std::vector<std::string>>(), j.at("mean").get<std::vector<double>>(),
                  j.at("sd").get<std::vector<double>>()};
  if (st.mean.size() != st.feature_names.size() || st.sd.size() != st.feature_names.size()) {
    throw DataError("standardizer arrays disagree in length");
  }
  return st;
}

}  // namespace

std::string_view family_name(ModelFamily f) {
  switch (f) {
    case ModelFamily::svm: return "svm";
    case ModelFamily::dtree: return "dtree";
    case ModelFamily::rforest: return "rforest";
    case ModelFamily::gboost: return "gboost";
    case ModelFamily::knn: return "knn";
  }
  return "?";
}

ModelFamily parse_family(std::string_view name) {
  for (auto f : kAllFamilies) {
    if (family_name(f) == name) return f;
  }
  throw ConfigError("unknown model family '" + std::string(name) + "' (valid: svm, dtree, rforest, gboost, knn)");
}

Json resolve_hyperparameters(ModelFamily f, const Json& given, std::size_t num_features) {
  if (!given.is_null() && !given.is_object()) throw ConfigError("hyperparameters must be a JSON object");
  const auto& keys = valid_keys(f);
  if (given.is_object()) {
    for (const auto& [key, _] : given.items()) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        std::string list;
        for (const auto& k : keys) list += (list.empty() ? "" : ", ") + k;
        throw ConfigError("unknown hyperparameter '" + key + "' for " + std::string(family_name(f)) +
                          "; valid keys: " + list);
      }
    }
  }
  const Json g = given.is_object() ? given : Json::object();
  const double d = static_cast<double>(std::max<std::size_t>(num_features, 1));
  Json out = Json::object();
  switch (f) {
    case ModelFamily::svm: {
      out["C"] = real_param(f, g, "C", 1.0, 0.0, true);
      const std::string kernel = string_param(f, g, "kernel", "linear");
      out["kernel"] = std::string(kernel_name(parse_kernel_kind(kernel)));
      if (kernel == "rbf") out["gamma"] = real_param(f, g, "gamma", 1.0 / d, 0.0, true);
      out["tol"] = real_param(f, g, "tol", 1e-3, 0.0, true);
      if (g.contains("max_passes")) out["max_passes"] = int_param(f, g, "max_passes", 0, 1);
      break;
    }
    case ModelFamily::dtree:
      out["criterion"] = std::string(criterion_name(parse_criterion(string_param(f, g, "criterion", "gini"))));
      out["max_depth"] = depth_param(f, g);
      out["min_samples_split"] = int_param(f, g, "min_samples_split", 2, 2);
      break;
    case ModelFamily::rforest: {
      out["trees"] = int_param(f, g, "trees", 100, 1);
      const auto sqrt_d = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(d))));
      std::size_t per_split = sqrt_d;
      if (g.contains("features_per_split") &&
          !(g.at("features_per_split").is_string() && g.at("features_per_split").get<std::string>() == "sqrt")) {
        per_split = int_param(f, g, "features_per_split", sqrt_d, 1);
      }
      if (per_split > num_features) {
        throw ConfigError(bad_value(f, "features_per_split", "exceeds the " + std::to_string(num_features) +
                                                                  " available features"));
      }
      out["features_per_split"] = per_split;
      if (g.contains("bootstrap") && !g.at("bootstrap").is_boolean()) {
        throw ConfigError(bad_value(f, "bootstrap", "must be true or false"));
      }
      out["bootstrap"] = g.value("bootstrap", true);
      out["criterion"] = std::string(criterion_name(parse_criterion(string_param(f, g, "criterion", "gini"))));
      out["max_depth"] = depth_param(f, g);
      out["min_samples_split"] = int_param(f, g, "min_samples_split", 2, 2);
      break;
    }
    case ModelFamily::gboost:
      out["iterations"] = int_param(f, g, "iterations", 100, 0);
      out["learning_rate"] = real_param(f, g, "learning_rate", 0.1, 0.0, false);
      out["tree_depth"] = int_param(f, g, "tree_depth", 3, 1);
      break;
    case ModelFamily::knn: {
      out["k"] = int_param(f, g, "k", 5, 1);
      const std::string metric = string_param(f, g, "distance", "euclidean");
      if (metric != "euclidean") throw ConfigError(bad_value(f, "distance", "must be 'euclidean'"));
      out["distance"] = metric;
      break;
    }
  }
  return out;
}

TrainedModel::TrainedModel(ModelFamily family, std::vector<std::string> feature_names, Json hyperparameters,
                           ModelPayload payload)
    : family_(family),
      feature_names_(std::move(feature_names)),
      hyperparameters_(std::move(hyperparameters)),
      payload_(std::move(payload)) {}

void TrainedModel::check_arity(std::size_t got) const {
  if (got != feature_names_.size()) {
    throw DataError("input has " + std::to_string(got) + " features, model was trained on " +
                    std::to_string(feature_names_.size()));
  }
}

QualityClass TrainedModel::predict(std::span<const double> row) const {
  check_arity(row.size());
  return std::visit(
      [&](const auto& p) -> QualityClass {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, MulticlassSvm>) return predict_multiclass(p, row);
        if constexpr (std::is_same_v<T, TreeModel>) return predict_tree(p, row);
        if constexpr (std::is_same_v<T, ForestModel>) return predict_forest(p, row);
        if constexpr (std::is_same_v<T, GboostModel>) return predict_gboost(p, row);
        if constexpr (std::is_same_v<T, KnnModel>) return predict_knn(p, row);
      },
      payload_);
}

std::vector<QualityClass> TrainedModel::predict_batch(const Matrix& rows) const {
  if (rows.rows() == 0) return {};
  check_arity(rows.cols());
  if (const auto* knn = std::get_if<KnnModel>(&payload_)) return predict_knn_batch(*knn, rows);
  std::vector<QualityClass> out(rows.rows());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < rows.rows(); ++i) out[i] = predict(rows.row(i));
  return out;
}

std::vector<QualityClass> TrainedModel::predict(const Dataset& ds) const {
  if (ds.feature_names != feature_names_) throw DataError("dataset features do not match the model's training features");
  return predict_batch(ds.features);
}

std::vector<std::string> TrainedModel::warnings() const {
  std::vector<std::string> out;
  if (const auto* svm = std::get_if<MulticlassSvm>(&payload_)) {
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      const auto& m = svm->machines[c];
      if (m && !m->converged) {
        std::ostringstream msg;
        msg << "svm machine for class '" << class_name(class_from_index(c)) << "' stopped after " << m->iterations
            << " iterations with KKT gap " << m->achieved_tolerance;
        out.push_back(msg.str());
      }
    }
  }
  return out;
}

TrainedModel fit(const Dataset& train, const TrainConfig& cfg) {
  if (train.size() == 0) throw DataError("cannot fit on an empty training set");
  Json hp = resolve_hyperparameters(cfg.family, cfg.hyperparameters, train.num_features());
  const Matrix& x = train.features;
  const auto& y = train.labels;
  ModelPayload payload = [&]() -> ModelPayload {
    switch (cfg.family) {
      case ModelFamily::svm:
        return train_multiclass_svm(x, y, hp.at("C").get<double>(), svm_kernel(hp), svm_options(hp));
      case ModelFamily::dtree:
        return fit_tree(x, y, tree_params(hp), cfg.seed);
      case ModelFamily::rforest: {
        ForestParams p;
        p.trees = hp.at("trees").get<std::size_t>();
        p.features_per_split = hp.at("features_per_split").get<std::size_t>();
        p.bootstrap = hp.at("bootstrap").get<bool>();
        p.tree = tree_params(hp);
        return fit_forest(x, y, p, cfg.seed);
      }
      case ModelFamily::gboost: {
        GboostParams p;
        p.iterations = hp.at("iterations").get<std::size_t>();
        p.learning_rate = hp.at("learning_rate").get<double>();
        p.tree_depth = hp.at("tree_depth").get<std::size_t>();
        return fit_gboost(x, y, p);
      }
      case ModelFamily::knn:
        return fit_knn(x, y, hp.at("k").get<std::size_t>());
    }
    throw ConfigError("unknown model family");
  }();
  return TrainedModel(cfg.family, train.feature_names, std::move(hp), std::move(payload));
}

Json model_to_json(const TrainedModel& m, const std::optional<Standardizer>& standardizer) {
  Json payload;
  std::visit([&](const auto& p) { payload = Json(p); }, m.payload());
  Json j{{"format_version", kModelFormatVersion},
         {"family", family_name(m.family())},
         {"feature_names", m.feature_names()},
         {"hyperparameters", m.hyperparameters()},
         {"payload", std::move(payload)}};
  if (standardizer) j["standardizer"] = standardizer_json(*standardizer);
  return j;
}

LoadedModel model_from_json(const Json& j) {
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw DataError("unsupported model format_version " + std::to_string(version) + " (expected " +
                      std::to_string(kModelFormatVersion) + ")");
    }
    const ModelFamily family = parse_family(j.at("family").get<std::string>());
    auto names = j.at("feature_names").get<std::vector<std::string>>();
    const Json& p = j.at("payload");
    ModelPayload payload = [&]() -> ModelPayload {
      switch (family) {
        case ModelFamily::svm: return p.get<MulticlassSvm>();
        case ModelFamily::dtree: return p.get<TreeModel>();
        case ModelFamily::rforest: return p.get<ForestModel>();
        case ModelFamily::gboost: return p.get<GboostModel>();
        case ModelFamily::knn: return p.get<KnnModel>();
      }
      throw DataError("unknown family");
    }();
    std::optional<Standardizer> st;
    if (j.contains("standardizer")) st = standardizer_from_json(j.at("standardizer"));
    return {TrainedModel(family, std::move(names), j.at("hyperparameters"), std::move(payload)), std::move(st)};
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model document: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const TrainedModel& m,
                const std::optional<Standardizer>& standardizer) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file: " + path.string());
  out << model_to_json(m, standardizer).dump(1) << '\n';
}

LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("file not found: " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("model file " + path.string() + " is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

}  // namespace winelab
