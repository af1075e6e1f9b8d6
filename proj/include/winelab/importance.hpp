#pragma once

#include "winelab/dataset.hpp"
#include "winelab/json_types.hpp"
#include "winelab/model.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace winelab {

struct FeatureImportance {
  std::string name;
  double mean_drop = 0.0;
  double sd_drop = 0.0;  // sample sd over repeats, 0 for a single repeat
  std::size_t rank = 0;  // 1 = largest mean drop
  std::vector<double> drops;
  std::vector<std::size_t> shuffled_correct;
};

struct ImportanceReport {
  double baseline_accuracy = 0.0;
  std::size_t baseline_correct = 0;
  std::size_t test_size = 0;
  std::size_t repeats = 0;
  std::uint64_t seed = 0;
  std::vector<FeatureImportance> features;  // in the test set's column order
};

// Column `feature` of x shuffled for trial (feature, repeat).
std::vector<double> permuted_column(const Matrix& x, std::size_t feature, std::size_t repeat, std::uint64_t seed);

/// Accuracy drop when one test column is shuffled, repeated `repeats` times
/// per feature. Trial (f, r) shuffles with Rng(seed, {importance, f, r}).
/// Ranks order by descending mean drop; ties keep column order.
ImportanceReport permutation_importance(const TrainedModel& m, const Dataset& test, std::size_t repeats,
                                        std::uint64_t seed);

Json importance_json(const ImportanceReport& r);
// feature,mean_drop rows in rank order.
std::string importance_csv(const ImportanceReport& r);

}  // namespace winelab
