#pragma once

#include "winelab/matrix.hpp"

#include <span>
#include <string_view>

// Data-parallel numeric kernels shared by the learners. Each OpenMP kernel in
// winelab::kernels has a plain loop twin in winelab::kernels::serial that
// evaluates every element with the same expression, so the two agree
// bit-for-bit and the serial one serves as the test reference.
namespace winelab {

enum class KernelKind { linear, rbf };

struct Kernel {
  KernelKind kind = KernelKind::linear;
  double gamma = 0.0;  // rbf only, > 0

  static Kernel linear() { return {KernelKind::linear, 0.0}; }
  static Kernel rbf(double gamma) { return {KernelKind::rbf, gamma}; }
  bool operator==(const Kernel&) const = default;
};

std::string_view kernel_name(KernelKind kind);
KernelKind parse_kernel_kind(std::string_view name);

// linear: <x, z>; rbf: exp(-gamma * |x - z|^2). Throws on arity mismatch.
double eval_kernel(const Kernel& k, std::span<const double> x, std::span<const double> z);

double squared_distance(std::span<const double> a, std::span<const double> b);

namespace kernels {

// K(i, j) = k(x_i, x_j); symmetric.
Matrix gram_matrix(const Matrix& x, const Kernel& k);
// K(q, r) = k(queries_q, refs_r).
Matrix cross_kernel(const Matrix& queries, const Matrix& refs, const Kernel& k);
// D(q, r) = Euclidean distance between queries_q and refs_r.
Matrix distance_matrix(const Matrix& queries, const Matrix& refs);
// Pearson correlation between columns of `data` (two-pass covariance).
// Throws DataError when a column is constant.
Matrix correlation_matrix(const Matrix& data);

namespace serial {
Matrix gram_matrix(const Matrix& x, const Kernel& k);
Matrix cross_kernel(const Matrix& queries, const Matrix& refs, const Kernel& k);
Matrix distance_matrix(const Matrix& queries, const Matrix& refs);
Matrix correlation_matrix(const Matrix& data);
}  // namespace serial

}  // namespace kernels
}  // namespace winelab
