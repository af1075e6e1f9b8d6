#include "winelab/dataset.hpp"

#include "winelab/error.hpp"

#include <cmath>

namespace winelab {

QualityClass class_from_index(std::size_t i) {
  if (i >= kNumClasses) throw DataError("class index out of range: " + std::to_string(i));
  return static_cast<QualityClass>(i);
}

std::string_view class_name(QualityClass c) {
  switch (c) {
    case QualityClass::bad: return "bad";
    case QualityClass::normal: return "normal";
    case QualityClass::good: return "good";
  }
  return "?";
}

void Dataset::validate() const {
  const std::size_t n = labels.size();
  if (features.rows() != n) throw DataError("feature rows do not match label count");
  if (!(n == 0 && features.cols() == 0) && features.cols() != feature_names.size()) {
    throw DataError("feature names do not match column count");
  }
  if (scores.size() != n || origin.size() != n) throw DataError("row bookkeeping arrays have wrong length");
  for (double v : features.values()) {
    if (!std::isfinite(v)) throw DataError("non-finite feature value");
  }
}

ClassCounts count_classes(std::span<const QualityClass> labels) {
  ClassCounts counts{};
  for (auto c : labels) ++counts[class_index(c)];
  return counts;
}

Dataset subset(const Dataset& ds, std::span<const std::size_t> rows) {
  Dataset out;
  out.feature_names = ds.feature_names;
  out.features = ds.features.select_rows(rows);
  out.labels.reserve(rows.size());
  out.scores.reserve(rows.size());
  out.origin.reserve(rows.size());
  for (auto r : rows) {
    out.labels.push_back(ds.labels[r]);
    out.scores.push_back(ds.scores[r]);
    out.origin.push_back(ds.origin[r]);
  }
  return out;
}

Dataset concat(const Dataset& a, const Dataset& b) {
  if (a.feature_names != b.feature_names) throw DataError("cannot concatenate datasets with different features");
  Dataset out = a;
  out.features.reserve_rows(a.size() + b.size());
  for (std::size_t i = 0; i < b.size(); ++i) out.features.append_row(b.features.row(i));
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  out.scores.insert(out.scores.end(), b.scores.begin(), b.scores.end());
  out.origin.insert(out.origin.end(), b.origin.begin(), b.origin.end());
  return out;
}

}  // namespace winelab
