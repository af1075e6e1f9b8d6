#pragma once

#include "winelab/dataset.hpp"
#include "winelab/json_types.hpp"
#include "winelab/matrix.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace winelab {

enum class SplitCriterion { gini, entropy };

std::string_view criterion_name(SplitCriterion c);
SplitCriterion parse_criterion(std::string_view name);

// 1 - sum p_i^2. Throws DataError on an all-zero count vector.
double gini(std::span<const std::size_t> counts);
// -sum p_i log2 p_i with 0 log 0 = 0. Throws DataError on an all-zero count vector.
double entropy(std::span<const std::size_t> counts);
double impurity(SplitCriterion c, std::span<const std::size_t> counts);

struct SplitChoice {
  std::size_t feature = 0;
  double threshold = 0.0;  // rows with x[feature] <= threshold go left
  double impurity_decrease = 0.0;
};

/// Best axis-aligned split over the candidate features, with thresholds at
/// midpoints between consecutive distinct values. The decrease is
/// parent impurity minus the size-weighted child impurities. Empty when no
/// threshold lowers impurity. Ties go to the lowest feature, then the lowest
/// threshold.
std::optional<SplitChoice> best_split(const Matrix& rows, std::span<const QualityClass> labels,
                                      SplitCriterion criterion, std::span<const std::size_t> candidate_features);

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  ClassCounts counts{};  // classification leaves
  double value = 0.0;    // regression leaves

  bool is_leaf() const { return feature < 0; }
};

struct TreeParams {
  SplitCriterion criterion = SplitCriterion::gini;
  std::optional<std::size_t> max_depth;  // empty = unbounded
  std::size_t min_samples_split = 2;
  // Features drawn per node; 0 means every feature. When none of the drawn
  // features yields a split the remaining ones are tried in drawn order.
  std::size_t features_per_split = 0;
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  TreeParams params;
  std::size_t num_features = 0;

  const TreeNode& leaf_for(std::span<const double> x) const;
  std::size_t depth() const;
};

TreeModel fit_tree(const Matrix& x, std::span<const QualityClass> labels, const TreeParams& params,
                   std::uint64_t seed = 0);
// Majority of the leaf counts, ties to the lowest class.
QualityClass predict_tree(const TreeModel& tree, std::span<const double> x);

struct ForestParams {
  std::size_t trees = 100;
  std::size_t features_per_split = 0;  // 0 = floor(sqrt(d))
  bool bootstrap = true;
  TreeParams tree;  // features_per_split here is overridden
};

struct ForestModel {
  std::vector<TreeModel> trees;
  std::vector<std::uint64_t> tree_seeds;
  std::size_t features_per_split = 0;
  bool bootstrap = true;
  std::size_t num_features = 0;
};

ForestModel fit_forest(const Matrix& x, std::span<const QualityClass> labels, const ForestParams& params,
                       std::uint64_t seed);
std::array<std::size_t, kNumClasses> forest_votes(const ForestModel& forest, std::span<const double> x);
QualityClass predict_forest(const ForestModel& forest, std::span<const double> x);

struct RegressionTree {
  std::vector<TreeNode> nodes;
  std::size_t num_features = 0;
  double predict(std::span<const double> x) const;
};

// Least-squares regression tree with mean-valued leaves.
RegressionTree fit_regression_tree(const Matrix& x, std::span<const double> targets, std::size_t max_depth);

struct GboostParams {
  std::size_t iterations = 100;
  double learning_rate = 0.1;
  std::size_t tree_depth = 3;
};

using ClassScores = std::array<double, kNumClasses>;

struct GboostModel {
  ClassScores initial_scores{};
  double learning_rate = 0.1;
  std::vector<std::array<RegressionTree, kNumClasses>> stages;
  std::vector<double> training_loss;  // mean cross-entropy: [0] at the priors, then after each stage
  std::size_t num_features = 0;
};

/// Softmax cross-entropy boosting: scores start at the log class priors and
/// every stage adds learning_rate * tree_c(x) to class c, where tree_c is fit
/// to the negative gradient (one-hot minus softmax probability).
GboostModel fit_gboost(const Matrix& x, std::span<const QualityClass> labels, const GboostParams& params);
ClassScores gboost_scores(const GboostModel& model, std::span<const double> x);
QualityClass predict_gboost(const GboostModel& model, std::span<const double> x);

// Summed (not averaged) softmax cross-entropy of the labels under `scores`.
double softmax_cross_entropy(std::span<const ClassScores> scores, std::span<const QualityClass> labels);
// Negative gradient of softmax_cross_entropy with respect to every score.
std::vector<ClassScores> softmax_residuals(std::span<const ClassScores> scores, std::span<const QualityClass> labels);

void to_json(Json& j, const TreeModel& t);
void from_json(const Json& j, TreeModel& t);
void to_json(Json& j, const ForestModel& f);
void from_json(const Json& j, ForestModel& f);
void to_json(Json& j, const RegressionTree& t);
void from_json(const Json& j, RegressionTree& t);
void to_json(Json& j, const GboostModel& g);
void from_json(const Json& j, GboostModel& g);

}  // namespace winelab
