#include "oracles.hpp"

#include "winelab/error.hpp"
#include "winelab/tuning.hpp"

#include <doctest.h>
#include <omp.h>

#include <algorithm>
#include <set>

using namespace winelab;

namespace {

Dataset separable(std::size_t n, std::uint64_t seed) {
  auto ds = oracle::random_dataset(n, 3, 100, seed);
  for (std::size_t i = 0; i < ds.size(); ++i) ds.features(i, 0) += 60.0 * static_cast<double>(class_index(ds.labels[i]));
  return ds;
}

}  // namespace

TEST_SUITE("tuning") {
  TEST_CASE("ten samples with five per class give one of each per fold") {
    std::vector<QualityClass> labels;
    for (int i = 0; i < 5; ++i) labels.push_back(QualityClass::bad);
    for (int i = 0; i < 5; ++i) labels.push_back(QualityClass::good);
    const auto folds = stratified_kfold(labels, 5, 1);
    REQUIRE(folds.size() == 5);
    for (const auto& f : folds) {
      REQUIRE(f.size() == 2);
      CHECK(labels[f[0]] == QualityClass::bad);
      CHECK(labels[f[1]] == QualityClass::good);
    }
    CHECK_THROWS_AS(stratified_kfold(labels, 6, 1), DataError);
    CHECK_THROWS_AS(stratified_kfold(labels, 1, 1), ConfigError);
  }

  TEST_CASE("folds partition the rows and balance every class") {
    const auto ds = oracle::random_dataset(113, 1, 2, 4);
    const auto folds = stratified_kfold(ds.labels, 4, 8);
    std::vector<std::size_t> all;
    for (const auto& f : folds) all.insert(all.end(), f.begin(), f.end());
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);
    CHECK(all.size() == ds.size());
    for (auto c : kAllClasses) {
      std::size_t lo = SIZE_MAX, hi = 0;
      for (const auto& f : folds) {
        std::size_t n = 0;
        for (auto r : f) n += ds.labels[r] == c ? 1 : 0;
        lo = std::min(lo, n);
        hi = std::max(hi, n);
      }
      CHECK(hi - lo <= 1);
    }
    CHECK(stratified_kfold(ds.labels, 4, 8) == folds);
  }

  TEST_CASE("grid expansion is row-major over the declared axes") {
    GridSpec g{ModelFamily::dtree, {{{"criterion", {"gini", "entropy"}}, {"max_depth", {1, 2, 3}}}}, 0};
    const auto configs = expand_grid(g);
    REQUIRE(configs.size() == 6);
    CHECK(configs[0] == Json{{"criterion", "gini"}, {"max_depth", 1}});
    CHECK(configs[1] == Json{{"criterion", "gini"}, {"max_depth", 2}});
    CHECK(configs[3] == Json{{"criterion", "entropy"}, {"max_depth", 1}});
    GridSpec empty{ModelFamily::knn, {{{"k", {}}}}, 0};
    CHECK_THROWS_AS(expand_grid(empty), ConfigError);
    CHECK(expand_grid(default_grid(ModelFamily::svm, 0)).size() == 16);
    CHECK(expand_grid(default_grid(ModelFamily::gboost, 0)).size() == 18);
  }

  TEST_CASE("select_best takes the argmin and keeps the earliest tie") {
    std::vector<ConfigScore> t{{Json{{"C", 0.1}}, 0.3, {}}, {Json{{"C", 1}}, 0.1, {}}, {Json{{"C", 10}}, 0.1, {}}};
    const auto r = select_best(ModelFamily::svm, 5, t);
    CHECK(r.best_index == 1);
    CHECK(r.best_config == Json{{"C", 1}});
    CHECK(r.best_error == 0.1);
  }

  TEST_CASE("grid search table, minimum and tie rule") {
    const auto ds = separable(90, 2);
    GridSpec g{ModelFamily::knn, {{{"k", {1, 3, 3, 5}}}}, 7};
    const auto r = grid_search(g, ds, {3, std::nullopt, {}});
    REQUIRE(r.table.size() == 4);
    double lo = 1.0;
    for (const auto& s : r.table) lo = std::min(lo, s.error);
    CHECK(r.best_error == lo);
    CHECK(r.table[1].error == r.table[2].error);
    CHECK(r.best_index != 2);
    for (const auto& s : r.table) CHECK(s.fold_errors.size() == 3);
  }

  TEST_CASE("grid search does not depend on the number of threads") {
    const auto ds = separable(120, 3);
    GridSpec g{ModelFamily::rforest, {{{"trees", {5, 9}}, {"features_per_split", {1, 2}}}}, 11};
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto a = grid_search(g, ds, {4, std::nullopt, {}});
    omp_set_num_threads(4);
    const auto b = grid_search(g, ds, {4, std::nullopt, {}});
    omp_set_num_threads(saved);
    CHECK(tune_result_json(a) == tune_result_json(b));
  }

  TEST_CASE("fold sampling touches training folds only") {
    auto ds = separable(150, 4);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds.labels[i] == QualityClass::bad && i % 3 != 0) ds.labels[i] = QualityClass::normal;
    }
    const auto folds = stratified_kfold(ds.labels, 3, 5);
    std::vector<std::set<std::int64_t>> fits;
    TuneOptions opts{3, SamplerConfig{SamplingMethod::smote, 3, 9}, [&](const Dataset& d) {
                       std::set<std::int64_t> o;
                       for (auto v : d.origin) {
                         if (v >= 0) o.insert(v);
                       }
                       fits.push_back(o);
                     }};
    GridSpec g{ModelFamily::knn, {{{"k", {3}}}}, 5};
    grid_search(g, ds, opts);
    REQUIRE(fits.size() == 3);
    for (const auto& seen : fits) {
      // Exactly one fold is missing from every fit, and it is missing entirely.
      std::size_t missing = 0;
      for (const auto& f : folds) {
        std::size_t present = 0;
        for (auto r : f) present += seen.count(static_cast<std::int64_t>(r));
        CHECK((present == 0 || present == f.size()));
        missing += present == 0 ? 1 : 0;
      }
      CHECK(missing == 1);
    }
  }

  TEST_CASE("a failing config is reported with the config attached") {
    const auto ds = separable(30, 5);
    GridSpec g{ModelFamily::knn, {{{"k", {3, 500}}}}, 1};
    CHECK_THROWS_WITH(grid_search(g, ds, {3, std::nullopt, {}}), doctest::Contains("{\"k\":500}"));
    GridSpec typo{ModelFamily::knn, {{{"kk", {3}}}}, 1};
    CHECK_THROWS_AS(grid_search(typo, ds, {3, std::nullopt, {}}), ConfigError);
  }

  TEST_CASE("grid JSON round trip") {
    const auto g = default_grid(ModelFamily::svm, 3);
    const auto back = grid_from_json(grid_to_json(g), 0);
    CHECK(expand_grid(back) == expand_grid(g));
    CHECK(back.seed == 3);
  }
}
