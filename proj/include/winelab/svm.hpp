#pragma once

#include "winelab/dataset.hpp"
#include "winelab/json_types.hpp"
#include "winelab/kernels.hpp"
#include "winelab/matrix.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace winelab {

inline constexpr double kSupportVectorFloor = 1e-8;

struct SvmTrainOptions {
  double tolerance = 1e-3;
  // Sweeps of n working-pair updates before giving up; 0 means 10 * n sweeps.
  std::size_t max_passes = 0;
};

/// Binary soft-margin machine, f(x) = sum_i alpha_i y_i K(x_i, x) + b over
/// the support set {i : alpha_i > kSupportVectorFloor}.
struct BinarySvm {
  Kernel kernel;
  double C = 1.0;
  Matrix support_vectors;
  std::vector<int> support_labels;  // -1 or +1
  std::vector<double> alphas;
  double bias = 0.0;
  double achieved_tolerance = 0.0;  // final maximal KKT gap
  bool converged = true;
  std::size_t iterations = 0;
};

struct BinarySvmFit {
  BinarySvm model;
  std::vector<double> alphas;  // one per training row, zeros included
};

// Labels must be -1/+1 with both present; C > 0.
BinarySvmFit train_binary_svm(const Matrix& x, std::span<const int> y, double C, const Kernel& kernel,
                              const SvmTrainOptions& options = {});

// Same solver on a precomputed Gram matrix of x. The multiclass trainer
// shares one Gram matrix across its one-vs-rest machines.
BinarySvmFit train_binary_svm_gram(const Matrix& gram, const Matrix& x, std::span<const int> y, double C,
                                   const Kernel& kernel, const SvmTrainOptions& options = {});

double decision_value(const BinarySvm& m, std::span<const double> x);

// sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij
double dual_objective(std::span<const double> alphas, std::span<const int> y, const Matrix& gram);

// Largest per-point violation of the soft-margin KKT conditions in units of
// y f(x): alpha = 0 needs y f >= 1, alpha = C needs y f <= 1, otherwise y f == 1.
double kkt_violation(const BinarySvm& m, std::span<const double> alphas, const Matrix& x, std::span<const int> y);

// xi_i = max(0, 1 - y_i f(x_i))
std::vector<double> slacks(const BinarySvm& m, const Matrix& x, std::span<const int> y);

/// One-vs-rest machines; machine c separates class c (+1) from the rest.
/// A class absent from training has no machine and is never predicted.
struct MulticlassSvm {
  std::array<std::optional<BinarySvm>, kNumClasses> machines;
  std::size_t num_features = 0;
};

MulticlassSvm train_multiclass_svm(const Matrix& x, std::span<const QualityClass> labels, double C,
                                   const Kernel& kernel, const SvmTrainOptions& options = {});

// Absent machines report -infinity.
std::array<double, kNumClasses> decision_values(const MulticlassSvm& m, std::span<const double> x);

// Argmax of the one-vs-rest decision values; ties go to the lowest class.
QualityClass predict_multiclass(const MulticlassSvm& m, std::span<const double> x);

void to_json(Json& j, const BinarySvm& m);
void from_json(const Json& j, BinarySvm& m);
void to_json(Json& j, const MulticlassSvm& m);
void from_json(const Json& j, MulticlassSvm& m);

}  // namespace winelab
