#include "winelab/kernels.hpp"

#include "winelab/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace winelab {
namespace {

inline double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

inline double sq_dist(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double kernel_value(const Kernel& k, const double* a, const double* b, std::size_t n) {
  return k.kind == KernelKind::linear ? dot(a, b, n) : std::exp(-k.gamma * sq_dist(a, b, n));
}

void check_arity(std::size_t a, std::size_t b) {
  if (a != b) throw DataError("arity mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
}

struct Centered {
  Matrix columns;  // one centered column per row, contiguous
  std::vector<double> sumsq;
};

Centered center_columns(const Matrix& data) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  if (n < 2) throw DataError("correlation needs at least two observations");
  Centered c{Matrix(d, n), std::vector<double>(d, 0.0)};
  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += data(i, j);
    const double mean = sum / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) c.columns(j, i) = data(i, j) - mean;
    c.sumsq[j] = dot(c.columns.row(j).data(), c.columns.row(j).data(), n);
    if (!(c.sumsq[j] > 0.0)) throw DataError("correlation undefined for constant column " + std::to_string(j));
  }
  return c;
}

inline double correlation_entry(const Centered& c, std::size_t a, std::size_t b) {
  if (a == b) return 1.0;
  const std::size_t n = c.columns.cols();
  const double r = dot(c.columns.row(a).data(), c.columns.row(b).data(), n) / std::sqrt(c.sumsq[a] * c.sumsq[b]);
  return std::clamp(r, -1.0, 1.0);
}

}  // namespace

std::string_view kernel_name(KernelKind kind) { return kind == KernelKind::linear ? "linear" : "rbf"; }

KernelKind parse_kernel_kind(std::string_view name) {
  if (name == "linear") return KernelKind::linear;
  if (name == "rbf") return KernelKind::rbf;
  throw ConfigError("unknown kernel '" + std::string(name) + "' (valid: linear, rbf)");
}

double eval_kernel(const Kernel& k, std::span<const double> x, std::span<const double> z) {
  check_arity(x.size(), z.size());
  return kernel_value(k, x.data(), z.data(), x.size());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  check_arity(a.size(), b.size());
  return sq_dist(a.data(), b.data(), a.size());
}

namespace kernels {

Matrix gram_matrix(const Matrix& x, const Kernel& k) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  Matrix g(n, n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = kernel_value(k, &x.values()[i * d], &x.values()[j * d], d);
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

Matrix cross_kernel(const Matrix& queries, const Matrix& refs, const Kernel& k) {
  check_arity(queries.cols(), refs.cols());
  const std::size_t d = refs.cols();
  Matrix out(queries.rows(), refs.rows());
#pragma omp parallel for schedule(static)
  for (std::size_t q = 0; q < queries.rows(); ++q) {
    for (std::size_t r = 0; r < refs.rows(); ++r) {
      out(q, r) = kernel_value(k, &queries.values()[q * d], &refs.values()[r * d], d);
    }
  }
  return out;
}

Matrix distance_matrix(const Matrix& queries, const Matrix& refs) {
  check_arity(queries.cols(), refs.cols());
  const std::size_t d = refs.cols();
  Matrix out(queries.rows(), refs.rows());
#pragma omp parallel for schedule(static)
  for (std::size_t q = 0; q < queries.rows(); ++q) {
    for (std::size_t r = 0; r < refs.rows(); ++r) {
      out(q, r) = std::sqrt(sq_dist(&queries.values()[q * d], &refs.values()[r * d], d));
    }
  }
  return out;
}

Matrix correlation_matrix(const Matrix& data) {
  const Centered c = center_columns(data);
  const std::size_t d = data.cols();
  Matrix out(d, d);
  // Flattened upper triangle so short rows do not starve threads.
  const std::size_t pairs = d * (d + 1) / 2;
#pragma omp parallel for schedule(static)
  for (std::size_t p = 0; p < pairs; ++p) {
    std::size_t a = 0;
    std::size_t rem = p;
    while (rem >= d - a) {
      rem -= d - a;
      ++a;
    }
    const std::size_t b = a + rem;
    const double r = correlation_entry(c, a, b);
    out(a, b) = r;
    out(b, a) = r;
  }
  return out;
}

namespace serial {

Matrix gram_matrix(const Matrix& x, const Kernel& k) {
  const std::size_t n = x.rows();
  Matrix g(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) g(i, j) = kernel_value(k, x.row(i).data(), x.row(j).data(), x.cols());
  }
  return g;
}

Matrix cross_kernel(const Matrix& queries, const Matrix& refs, const Kernel& k) {
  check_arity(queries.cols(), refs.cols());
  Matrix out(queries.rows(), refs.rows());
  for (std::size_t q = 0; q < queries.rows(); ++q) {
    for (std::size_t r = 0; r < refs.rows(); ++r) {
      out(q, r) = kernel_value(k, queries.row(q).data(), refs.row(r).data(), refs.cols());
    }
  }
  return out;
}

Matrix distance_matrix(const Matrix& queries, const Matrix& refs) {
  check_arity(queries.cols(), refs.cols());
  Matrix out(queries.rows(), refs.rows());
  for (std::size_t q = 0; q < queries.rows(); ++q) {
    for (std::size_t r = 0; r < refs.rows(); ++r) {
      out(q, r) = std::sqrt(sq_dist(queries.row(q).data(), refs.row(r).data(), refs.cols()));
    }
  }
  return out;
}

Matrix correlation_matrix(const Matrix& data) {
  const Centered c = center_columns(data);
  const std::size_t d = data.cols();
  Matrix out(d, d);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) out(a, b) = correlation_entry(c, std::min(a, b), std::max(a, b));
  }
  return out;
}

}  // namespace serial
}  // namespace kernels
}  // namespace winelab
