#include "oracles.hpp"

#include "winelab/error.hpp"
#include "winelab/evaluation.hpp"
#include "winelab/importance.hpp"
#include "winelab/preprocess.hpp"

#include <doctest.h>

#include <algorithm>

using namespace winelab;

namespace {

// f0 encodes the label exactly; f1 and f2 are noise.
Dataset label_coded(std::size_t n, std::uint64_t seed) {
  auto ds = oracle::random_dataset(n, 3, 50, seed);
  for (std::size_t i = 0; i < ds.size(); ++i) ds.features(i, 0) = 10.0 * static_cast<double>(class_index(ds.labels[i]));
  return ds;
}

}  // namespace

TEST_SUITE("importance") {
  TEST_CASE("a label-determining feature ranks first for a tree, confirmed by retraining without it") {
    const auto train = label_coded(200, 1);
    const auto test = label_coded(100, 2);
    const auto model = fit(train, {ModelFamily::dtree, Json{{"max_depth", 4}}, 3});
    const auto r = permutation_importance(model, test, 5, 9);
    CHECK(r.features[0].rank == 1);
    CHECK(r.baseline_accuracy == 1.0);
    // Brute force: drop f0, retrain, and the accuracy loss is real.
    const auto reduced = fit(select_features(train, {"f1", "f2"}), {ModelFamily::dtree, Json{{"max_depth", 4}}, 3});
    const double without = accuracy(test.labels, reduced.predict(select_features(test, {"f1", "f2"})));
    CHECK(without < r.baseline_accuracy - 0.2);
  }

  TEST_CASE("a feature the model never splits on has zero drop") {
    const auto train = label_coded(150, 3);
    const auto test = label_coded(80, 4);
    const auto model = fit(train, {ModelFamily::dtree, Json{{"max_depth", 2}}, 1});
    const auto& tree = std::get<TreeModel>(model.payload());
    std::vector<bool> used(3, false);
    for (const auto& node : tree.nodes) {
      if (!node.is_leaf()) used[static_cast<std::size_t>(node.feature)] = true;
    }
    const auto r = permutation_importance(model, test, 6, 2);
    for (std::size_t f = 0; f < 3; ++f) {
      if (used[f]) continue;
      CHECK(r.features[f].mean_drop == 0.0);
      CHECK(std::abs(r.features[f].mean_drop) <= 2.0 * r.features[f].sd_drop + 1e-15);
    }
  }

  TEST_CASE("bookkeeping identity, value multisets and reproducibility") {
    const auto train = oracle::random_dataset(120, 3, 40, 5);
    const auto test = oracle::random_dataset(60, 3, 40, 6);
    const auto model = fit(train, {ModelFamily::knn, Json{{"k", 3}}, 1});
    const auto r = permutation_importance(model, test, 4, 77);
    const double n = static_cast<double>(test.size());
    for (std::size_t f = 0; f < 3; ++f) {
      for (std::size_t rep = 0; rep < 4; ++rep) {
        const double shuffled = static_cast<double>(r.features[f].shuffled_correct[rep]) / n;
        CHECK(r.baseline_accuracy - r.features[f].drops[rep] == doctest::Approx(shuffled).epsilon(1e-12));
        auto a = permuted_column(test.features, f, rep, 77);
        auto b = test.features.column(f);
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        CHECK(a == b);
      }
    }
    std::vector<std::size_t> ranks;
    for (const auto& fi : r.features) ranks.push_back(fi.rank);
    std::sort(ranks.begin(), ranks.end());
    CHECK(ranks == std::vector<std::size_t>{1, 2, 3});
    CHECK(importance_json(permutation_importance(model, test, 4, 77)) == importance_json(r));
  }

  TEST_CASE("preconditions") {
    const auto ds = label_coded(30, 7);
    const auto model = fit(ds, {ModelFamily::knn, Json::object(), 1});
    CHECK_THROWS_AS(permutation_importance(model, ds, 0, 1), ConfigError);
    CHECK_THROWS_AS(permutation_importance(model, subset(ds, std::vector<std::size_t>{}), 1, 1), DataError);
    const auto csv = importance_csv(permutation_importance(model, ds, 2, 1));
    CHECK(csv.rfind("feature,mean_drop\n", 0) == 0);
  }
}
