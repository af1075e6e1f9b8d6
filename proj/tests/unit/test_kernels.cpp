#include "oracles.hpp"

#include "winelab/error.hpp"
#include "winelab/kernels.hpp"

#include <doctest.h>
#include <omp.h>

#include <cmath>

using namespace winelab;

namespace {

Matrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
  return oracle::random_dataset(n, d, 1000, seed).features;
}

// Runs `f` under several OpenMP team sizes and checks every result is
// bit-identical to the serial reference.
template <typename F>
void check_parity(const Matrix& reference, F&& f) {
  const int saved = omp_get_max_threads();
  for (int threads : {1, 2, 3, 8}) {
    omp_set_num_threads(threads);
    CHECK(f() == reference);
  }
  omp_set_num_threads(saved);
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("OpenMP kernels match the serial reference bit for bit") {
    const Matrix x = random_matrix(67, 5, 1);
    const Matrix q = random_matrix(23, 5, 2);
    for (const Kernel k : {Kernel::linear(), Kernel::rbf(0.003)}) {
      check_parity(kernels::serial::gram_matrix(x, k), [&] { return kernels::gram_matrix(x, k); });
      check_parity(kernels::serial::cross_kernel(q, x, k), [&] { return kernels::cross_kernel(q, x, k); });
    }
    check_parity(kernels::serial::distance_matrix(q, x), [&] { return kernels::distance_matrix(q, x); });
    check_parity(kernels::serial::correlation_matrix(x), [&] { return kernels::correlation_matrix(x); });
  }

  TEST_CASE("kernel values") {
    const std::vector<double> a{1, 2, 3};
    const std::vector<double> b{0, 2, 5};
    CHECK(eval_kernel(Kernel::linear(), a, b) == doctest::Approx(19.0));
    CHECK(eval_kernel(Kernel::rbf(0.5), a, b) == doctest::Approx(std::exp(-0.5 * 5.0)));
    CHECK(squared_distance(a, b) == doctest::Approx(5.0));
    CHECK_THROWS_AS(eval_kernel(Kernel::linear(), a, std::vector<double>{1}), DataError);
  }

  TEST_CASE("gram matrix is symmetric") {
    const Matrix x = random_matrix(30, 4, 3);
    const Matrix g = kernels::gram_matrix(x, Kernel::rbf(0.01));
    for (std::size_t i = 0; i < 30; ++i) {
      CHECK(g(i, i) == doctest::Approx(1.0));
      for (std::size_t j = 0; j < 30; ++j) CHECK(g(i, j) == g(j, i));
    }
  }

  TEST_CASE("correlation of a constant column is an error") {
    Matrix x = random_matrix(10, 2, 4);
    for (std::size_t i = 0; i < 10; ++i) x(i, 0) = 1.0;
    CHECK_THROWS_AS(kernels::correlation_matrix(x), DataError);
    CHECK_THROWS_AS(kernels::serial::correlation_matrix(x), DataError);
  }
}
