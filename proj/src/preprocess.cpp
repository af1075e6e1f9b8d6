#include "winelab/preprocess.hpp"

#include "winelab/error.hpp"
#include "winelab/random.hpp"

#include <algorithm>
#include <cmath>

namespace winelab {

Standardizer fit_standardizer(const Dataset& ds) {
  if (ds.size() == 0) throw DataError("cannot fit a standardizer on an empty dataset");
  const std::size_t n = ds.size();
  const std::size_t d = ds.num_features();
  Standardizer st{ds.feature_names, std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += ds.features(i, j);
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dv = ds.features(i, j) - mean;
      ss += dv * dv;
    }
    st.mean[j] = mean;
    st.sd[j] = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  }
  return st;
}

Matrix apply_standardizer(const Standardizer& st, const Matrix& x) {
  if (x.cols() != st.mean.size()) {
    throw DataError("standardizer expects " + std::to_string(st.mean.size()) + " columns, got " +
                    std::to_string(x.cols()));
  }
  Matrix out = x;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto row = out.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] = st.sd[j] > 0.0 ? (row[j] - st.mean[j]) / st.sd[j] : 0.0;
    }
  }
  return out;
}

Dataset apply_standardizer(const Standardizer& st, const Dataset& ds) {
  if (st.feature_names != ds.feature_names) {
    throw DataError("standardizer was fitted on different features than the dataset provides");
  }
  Dataset out = ds;
  out.features = apply_standardizer(st, ds.features);
  return out;
}

Standardizer compose(const Standardizer& first, const Standardizer& second) {
  if (first.feature_names != second.feature_names) throw DataError("cannot compose standardizers over different features");
  Standardizer out = first;
  for (std::size_t j = 0; j < out.mean.size(); ++j) {
    // ((x - m0)/s0 - m1)/s1 == (x - (m0 + m1*s0)) / (s0*s1)
    out.mean[j] = first.mean[j] + second.mean[j] * first.sd[j];
    out.sd[j] = first.sd[j] * second.sd[j];
  }
  return out;
}

Split stratified_split(const Dataset& ds, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie strictly between 0 and 1");
  }
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[class_index(ds.labels[i])].push_back(i);

  Split split;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto& rows = by_class[c];
    if (rows.empty()) continue;
    const auto n_test = static_cast<std::size_t>(std::lround(static_cast<double>(rows.size()) * spec.test_fraction));
    if (n_test == 0 || n_test >= rows.size()) {
      throw DataError("class '" + std::string(class_name(class_from_index(c))) + "' has " +
                      std::to_string(rows.size()) + " rows, too few to place at least one on each side of the split");
    }
    Rng rng(spec.seed, {stream::split, c});
    std::shuffle(rows.begin(), rows.end(), rng.engine());
    split.test_rows.insert(split.test_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train_rows.insert(split.train_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
  }
  std::sort(split.train_rows.begin(), split.train_rows.end());
  std::sort(split.test_rows.begin(), split.test_rows.end());
  split.train = subset(ds, split.train_rows);
  split.test = subset(ds, split.test_rows);
  return split;
}

Dataset select_features(const Dataset& ds, const std::vector<std::string>& keep) {
  std::vector<std::size_t> cols;
  for (const auto& name : keep) {
    auto it = std::find(ds.feature_names.begin(), ds.feature_names.end(), name);
    if (it == ds.feature_names.end()) throw DataError("unknown feature '" + name + "'");
    cols.push_back(static_cast<std::size_t>(it - ds.feature_names.begin()));
  }
  Dataset out = ds;
  out.feature_names = keep;
  out.features = ds.features.select_cols(cols);
  return out;
}

}  // namespace winelab
