#pragma once

#include "winelab/dataset.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace winelab {

/// Per-feature z-score parameters (sample sd, n-1). Features with sd == 0
/// standardize to 0.
struct Standardizer {
  std::vector<std::string> feature_names;
  std::vector<double> mean;
  std::vector<double> sd;
};

Standardizer fit_standardizer(const Dataset& ds);
Dataset apply_standardizer(const Standardizer& st, const Dataset& ds);
Matrix apply_standardizer(const Standardizer& st, const Matrix& x);

// The single affine map equal to applying `first` and then `second`.
Standardizer compose(const Standardizer& first, const Standardizer& second);

struct SplitSpec {
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct Split {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_rows;  // indices into the input, ascending
  std::vector<std::size_t> test_rows;
};

// Per-class test count = round(class count * test_fraction); each present
// class must keep at least one row on both sides.
Split stratified_split(const Dataset& ds, const SplitSpec& spec);

Dataset select_features(const Dataset& ds, const std::vector<std::string>& keep);

}  // namespace winelab
