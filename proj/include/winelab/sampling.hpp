#pragma once

#include "winelab/dataset.hpp"
#include "winelab/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace winelab {

enum class SamplingMethod { oversample, undersample, smote };

std::string_view sampling_method_name(SamplingMethod m);
SamplingMethod parse_sampling_method(std::string_view name);

struct SamplerConfig {
  SamplingMethod method = SamplingMethod::smote;
  std::size_t k_neighbors = 5;
  std::uint64_t seed = 0;
};

// Where a synthetic SMOTE row came from: rows are indices into the input.
struct SyntheticOrigin {
  std::size_t source = 0;
  std::size_t neighbor = 0;
  double t = 0.0;
};

// Raises every class to the majority count with copies drawn with
// replacement. Copies are appended after the original rows, class by class.
Dataset random_oversample(const Dataset& train, std::uint64_t seed);

// Lowers every class to the minority count by drawing without replacement.
// Surviving rows keep their original relative order.
Dataset random_undersample(const Dataset& train, std::uint64_t seed);

/// SMOTE: for each missing row of a non-majority class, pick a class member
/// p uniformly, one of its k nearest same-class neighbours q uniformly, and
/// emit p + t (q - p) with t ~ U(0, 1). Synthetic rows are appended after the
/// originals, class by class, with score and origin set to -1. When `trace`
/// is given it receives one entry per synthetic row, in output order.
Dataset smote(const Dataset& train, const SamplerConfig& cfg, std::vector<SyntheticOrigin>* trace = nullptr);

// k nearest neighbours of every point among the other points (Euclidean,
// distance ties to the lower index). Row i lists neighbours nearest first.
std::vector<std::vector<std::size_t>> nearest_within(const Matrix& points, std::size_t k);

Dataset apply_sampler(const Dataset& train, const SamplerConfig& cfg);

}  // namespace winelab
