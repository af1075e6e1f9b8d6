#pragma once

#include "winelab/matrix.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace winelab {

enum class QualityClass : std::uint8_t { bad = 0, normal = 1, good = 2 };

inline constexpr std::size_t kNumClasses = 3;
inline constexpr std::array<QualityClass, kNumClasses> kAllClasses = {
    QualityClass::bad, QualityClass::normal, QualityClass::good};

constexpr std::size_t class_index(QualityClass c) { return static_cast<std::size_t>(c); }
QualityClass class_from_index(std::size_t i);
std::string_view class_name(QualityClass c);

using ClassCounts = std::array<std::size_t, kNumClasses>;

// Lowest class index among the maxima.
template <typename T>
QualityClass argmax_class(const std::array<T, kNumClasses>& values) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < kNumClasses; ++c) {
    if (values[c] > values[best]) best = c;
  }
  return static_cast<QualityClass>(best);
}

/// Labeled feature table.
///
/// `scores` carries the raw integer quality score and `origin` the row id in
/// the encoded source table; both are -1 for synthetic (SMOTE) rows. They let
/// the pipeline report score histograms and audit which source rows reached
/// a fit.
struct Dataset {
  std::vector<std::string> feature_names;
  Matrix features;
  std::vector<QualityClass> labels;
  std::vector<int> scores;
  std::vector<std::int64_t> origin;

  std::size_t size() const { return labels.size(); }
  std::size_t num_features() const { return feature_names.size(); }

  // Throws DataError when the parallel arrays disagree in length or a value is non-finite.
  void validate() const;
};

ClassCounts count_classes(std::span<const QualityClass> labels);

Dataset subset(const Dataset& ds, std::span<const std::size_t> rows);

// Rows of `b` appended to `a`; feature names must match.
Dataset concat(const Dataset& a, const Dataset& b);

}  // namespace winelab
