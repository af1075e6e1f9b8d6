#pragma once

#include "winelab/dataset.hpp"
#include "winelab/json_types.hpp"
#include "winelab/knn.hpp"
#include "winelab/preprocess.hpp"
#include "winelab/svm.hpp"
#include "winelab/trees.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace winelab {

enum class ModelFamily { svm, dtree, rforest, gboost, knn };

inline constexpr std::array<ModelFamily, 5> kAllFamilies = {ModelFamily::svm, ModelFamily::dtree,
                                                            ModelFamily::rforest, ModelFamily::gboost,
                                                            ModelFamily::knn};

std::string_view family_name(ModelFamily f);
ModelFamily parse_family(std::string_view name);

struct TrainConfig {
  ModelFamily family = ModelFamily::svm;
  Json hyperparameters = Json::object();
  std::uint64_t seed = 0;
};

// Checks names and values against the family's schema and fills in the
// defaults. The result lists every effective hyperparameter in a fixed order.
Json resolve_hyperparameters(ModelFamily family, const Json& given, std::size_t num_features);

using ModelPayload = std::variant<MulticlassSvm, TreeModel, ForestModel, GboostModel, KnnModel>;

/// Immutable fitted classifier of any family.
class TrainedModel {
 public:
  TrainedModel(ModelFamily family, std::vector<std::string> feature_names, Json hyperparameters,
               ModelPayload payload);

  ModelFamily family() const { return family_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const Json& hyperparameters() const { return hyperparameters_; }
  const ModelPayload& payload() const { return payload_; }

  QualityClass predict(std::span<const double> row) const;
  // One label per row; rows are independent. Throws on arity mismatch.
  std::vector<QualityClass> predict_batch(const Matrix& rows) const;
  // Also checks the dataset's feature names against the training names.
  std::vector<QualityClass> predict(const Dataset& ds) const;

  // Numeric diagnostics from training, e.g. SVM machines that hit the iteration cap.
  std::vector<std::string> warnings() const;

 private:
  void check_arity(std::size_t got) const;

  ModelFamily family_;
  std::vector<std::string> feature_names_;
  Json hyperparameters_;
  ModelPayload payload_;
};

// Deterministic in (train, cfg). Throws ConfigError on invalid
// hyperparameters and DataError on degenerate training data.
TrainedModel fit(const Dataset& train, const TrainConfig& cfg);

inline constexpr int kModelFormatVersion = 1;

// {format_version, family, feature_names, hyperparameters, payload} plus an
// optional "standardizer" mapping raw inputs onto the training scale.
Json model_to_json(const TrainedModel& m, const std::optional<Standardizer>& standardizer = std::nullopt);

struct LoadedModel {
  TrainedModel model;
  std::optional<Standardizer> standardizer;
};

LoadedModel model_from_json(const Json& j);
void save_model(const std::filesystem::path& path, const TrainedModel& m,
                const std::optional<Standardizer>& standardizer = std::nullopt);
LoadedModel load_model(const std::filesystem::path& path);

}  // namespace winelab
