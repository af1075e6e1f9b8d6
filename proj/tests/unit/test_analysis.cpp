#include "oracles.hpp"

#include "winelab/analysis.hpp"
#include "winelab/dataio.hpp"
#include "winelab/error.hpp"

#include <doctest.h>

#include <random>

using namespace winelab;

TEST_SUITE("analysis") {
  TEST_CASE("pearson matches the two-pass formula") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    std::vector<double> x(300), y(300);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = g(rng);
      y[i] = 0.3 * x[i] + g(rng);
    }
    CHECK(pearson(x, y) == doctest::Approx(oracle::pearson(x, y)).epsilon(1e-12));
  }

  TEST_CASE("pearson extremes and errors") {
    const std::vector<double> x{1, 2, 3, 4};
    const std::vector<double> up{2, 4, 6, 8};
    const std::vector<double> down{8, 6, 4, 2};
    CHECK(pearson(x, up) == doctest::Approx(1.0));
    CHECK(pearson(x, down) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(pearson(x, std::vector<double>{1, 1, 1, 1}), DataError);
    CHECK_THROWS_AS(pearson(x, std::vector<double>{1, 2}), DataError);
  }

  TEST_CASE("ranking is by descending absolute correlation") {
    std::istringstream in("a;b;c;t\n1;4;1;1\n2;3;1;2\n3;2;2;3\n4;1;1;4.5\n");
    const auto cm = correlation_matrix(parse_table(in));
    const auto r = rank_features(cm, "t");
    REQUIRE(r.size() == 3);
    CHECK(r[0].name == "a");
    CHECK(r[1].name == "b");
    CHECK(r[1].rho < 0);
    CHECK(r[2].name == "c");
    CHECK_THROWS_AS(rank_features(cm, "zz"), DataError);
  }

  TEST_CASE("correlation matrix is symmetric with a unit diagonal") {
    const auto raw = parse_csv(std::filesystem::path(std::string(WINELAB_DATA_DIR) + "/winequality-red.csv"));
    const auto cm = correlation_matrix(raw);
    for (std::size_t i = 0; i < 12; ++i) {
      CHECK(cm.values(i, i) == 1.0);
      for (std::size_t j = 0; j < 12; ++j) CHECK(cm.values(i, j) == cm.values(j, i));
    }
    CHECK(correlation_csv(cm).rfind("feature,", 0) == 0);
  }
}
