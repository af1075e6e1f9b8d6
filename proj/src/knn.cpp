#include "winelab/knn.hpp"

#include "winelab/error.hpp"
#include "winelab/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace winelab {
namespace {

void check_arity(const KnnModel& m, std::size_t got) {
  if (got != m.points.cols()) {
    throw DataError("knn arity mismatch: model has " + std::to_string(m.points.cols()) + " features, input has " +
                    std::to_string(got));
  }
}

std::vector<Neighbor> select_nearest(std::span<const double> distances, std::size_t k) {
  std::vector<Neighbor> all(distances.size());
  for (std::size_t i = 0; i < distances.size(); ++i) all[i] = {i, distances[i]};
  auto closer = [](const Neighbor& a, const Neighbor& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.index < b.index;
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), closer);
  all.resize(k);
  return all;
}

}  // namespace

KnnModel fit_knn(const Matrix& x, std::span<const QualityClass> labels, std::size_t k) {
  if (x.rows() != labels.size()) throw DataError("fit_knn: rows and labels differ in length");
  if (k < 1) throw ConfigError("knn k must be at least 1");
  if (k > x.rows()) {
    throw ConfigError("knn k = " + std::to_string(k) + " exceeds the " + std::to_string(x.rows()) + " training rows");
  }
  return KnnModel{x, std::vector<QualityClass>(labels.begin(), labels.end()), k};
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

std::vector<Neighbor> nearest_neighbors(const KnnModel& m, std::span<const double> query) {
  check_arity(m, query.size());
  std::vector<double> d(m.points.rows());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = euclidean_distance(m.points.row(i), query);
  return select_nearest(d, m.k);
}

QualityClass vote(std::span<const Neighbor> neighbors, std::span<const QualityClass> labels) {
  std::array<std::size_t, kNumClasses> votes{};
  std::array<double, kNumClasses> dist_sum{};
  for (const auto& nb : neighbors) {
    const auto c = class_index(labels[nb.index]);
    ++votes[c];
    dist_sum[c] += nb.distance;
  }
  const std::size_t top = *std::max_element(votes.begin(), votes.end());
  std::size_t best = kNumClasses;
  double best_mean = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (votes[c] != top) continue;
    const double mean = dist_sum[c] / static_cast<double>(votes[c]);
    if (best == kNumClasses || mean < best_mean) {
      best = c;
      best_mean = mean;
    }
  }
  return class_from_index(best);
}

QualityClass predict_knn(const KnnModel& m, std::span<const double> query) {
  return vote(nearest_neighbors(m, query), m.labels);
}

std::vector<QualityClass> predict_knn_batch(const KnnModel& m, const Matrix& queries) {
  if (queries.rows() == 0) return {};
  check_arity(m, queries.cols());
  const Matrix dist = kernels::distance_matrix(queries, m.points);
  std::vector<QualityClass> out(queries.rows());
#pragma omp parallel for schedule(static)
  for (std::size_t q = 0; q < queries.rows(); ++q) out[q] = vote(select_nearest(dist.row(q), m.k), m.labels);
  return out;
}

void to_json(Json& j, const KnnModel& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.points.rows(); ++i) {
    auto r = m.points.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  std::vector<std::size_t> labels;
  for (auto c : m.labels) labels.push_back(class_index(c));
  j = Json{{"k", m.k}, {"points", std::move(rows)}, {"labels", labels}};
}

void from_json(const Json& j, KnnModel& m) {
  m.k = j.at("k").get<std::size_t>();
  const auto& rows = j.at("points");
  m.points = Matrix(0, rows.empty() ? 0 : rows.front().size());
  for (const auto& r : rows) m.points.append_row(r.get<std::vector<double>>());
  m.labels.clear();
  for (auto c : j.at("labels").get<std::vector<std::size_t>>()) m.labels.push_back(class_from_index(c));
  if (m.labels.size() != m.points.rows() || m.k < 1 || m.k > m.points.rows()) {
    throw DataError("knn payload is inconsistent");
  }
}

}  // namespace winelab
