#pragma once

#include "winelab/dataset.hpp"
#include "winelab/json_types.hpp"
#include "winelab/matrix.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace winelab {

struct KnnModel {
  Matrix points;
  std::vector<QualityClass> labels;
  std::size_t k = 5;
};

// Requires 1 <= k <= number of training rows.
KnnModel fit_knn(const Matrix& x, std::span<const QualityClass> labels, std::size_t k);

double euclidean_distance(std::span<const double> a, std::span<const double> b);

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;
};

// The k nearest training rows, nearest first; equal distances go to the lower index.
std::vector<Neighbor> nearest_neighbors(const KnnModel& m, std::span<const double> query);

/// Majority vote over the k nearest rows. Tied vote counts are settled by the
/// smallest mean distance among the tied classes, then the lowest class.
QualityClass vote(std::span<const Neighbor> neighbors, std::span<const QualityClass> labels);

QualityClass predict_knn(const KnnModel& m, std::span<const double> query);
std::vector<QualityClass> predict_knn_batch(const KnnModel& m, const Matrix& queries);

void to_json(Json& j, const KnnModel& m);
void from_json(const Json& j, KnnModel& m);

}  // namespace winelab
