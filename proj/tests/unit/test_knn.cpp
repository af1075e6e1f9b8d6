#include "oracles.hpp"

#include "winelab/error.hpp"
#include "winelab/knn.hpp"

#include <doctest.h>

using namespace winelab;

TEST_SUITE("props-knn") {
  TEST_CASE("batch predictions match a full-sort oracle on every query") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const auto train = oracle::random_dataset(150, 3, 4, seed);  // coarse grid: many distance ties
      const auto test = oracle::random_dataset(60, 3, 4, seed + 50);
      for (std::size_t k : {1, 3, 4, 7, 11}) {
        const auto model = fit_knn(train.features, train.labels, k);
        const auto batch = predict_knn_batch(model, test.features);
        for (std::size_t i = 0; i < test.size(); ++i) {
          const auto want = oracle::knn_full_sort(train.features, train.labels, test.features.row(i), k);
          CHECK(batch[i] == want);
          CHECK(predict_knn(model, test.features.row(i)) == want);
        }
      }
    }
  }

  TEST_CASE("seven neighbours split 2 bad, 3 normal, 2 good vote normal") {
    Matrix pts(7, 1);
    std::vector<QualityClass> labels{QualityClass::bad,    QualityClass::normal, QualityClass::good, QualityClass::normal,
                                     QualityClass::bad,    QualityClass::good,   QualityClass::normal};
    for (std::size_t i = 0; i < 7; ++i) pts(i, 0) = static_cast<double>(i);
    const auto m = fit_knn(pts, labels, 7);
    CHECK(predict_knn(m, std::vector<double>{3.0}) == QualityClass::normal);
  }
}

TEST_SUITE("knn") {
  TEST_CASE("vote ties go to the smaller mean distance, then the lower class") {
    const std::vector<QualityClass> labels{QualityClass::good, QualityClass::bad, QualityClass::good, QualityClass::bad};
    const std::vector<Neighbor> near_good{{0, 1.0}, {1, 1.5}, {2, 1.0}, {3, 1.5}};
    CHECK(vote(near_good, labels) == QualityClass::good);
    const std::vector<Neighbor> even{{0, 1.0}, {1, 1.0}, {2, 2.0}, {3, 2.0}};
    CHECK(vote(even, labels) == QualityClass::bad);
  }

  TEST_CASE("neighbours are sorted by distance then index") {
    const Matrix pts = Matrix::from_rows({{0.0}, {2.0}, {-2.0}, {1.0}});
    const auto m = fit_knn(pts, std::vector<QualityClass>(4, QualityClass::normal), 3);
    const auto nn = nearest_neighbors(m, std::vector<double>{0.0});
    REQUIRE(nn.size() == 3);
    CHECK(nn[0].index == 0);
    CHECK(nn[1].index == 3);
    CHECK(nn[2].index == 1);
  }

  TEST_CASE("k must lie in 1..n") {
    const auto ds = oracle::random_dataset(5, 2, 10, 1);
    CHECK_THROWS_AS(fit_knn(ds.features, ds.labels, 0), ConfigError);
    CHECK_THROWS_AS(fit_knn(ds.features, ds.labels, 6), ConfigError);
    CHECK(euclidean_distance(std::vector<double>{0, 0}, std::vector<double>{3, 4}) == doctest::Approx(5.0));
  }
}
