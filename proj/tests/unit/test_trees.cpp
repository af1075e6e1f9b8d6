#include "oracles.hpp"

#include "winelab/error.hpp"
#include "winelab/trees.hpp"

#include <doctest.h>

#include <numeric>
#include <random>

using namespace winelab;

namespace {

std::vector<std::size_t> all_features(std::size_t d) {
  std::vector<std::size_t> f(d);
  std::iota(f.begin(), f.end(), std::size_t{0});
  return f;
}

}  // namespace

TEST_SUITE("props-trees") {
  TEST_CASE("closed-form impurities") {
    const std::vector<std::size_t> counts{2, 1, 1};
    CHECK(gini(counts) == doctest::Approx(0.625));
    CHECK(entropy(counts) == doctest::Approx(1.5));
    CHECK(oracle::gini({2, 1, 1}) == doctest::Approx(0.625));
    CHECK(oracle::entropy({2, 1, 1}) == doctest::Approx(1.5));
    const std::vector<std::size_t> pure{5, 0, 0};
    CHECK(gini(pure) == 0.0);
    CHECK(entropy(pure) == 0.0);
    const std::vector<std::size_t> empty{0, 0, 0};
    CHECK_THROWS(gini(empty));
  }

  TEST_CASE("best_split agrees with an exhaustive scan") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      const std::size_t n = 5 + (seed * 37) % 96;  // 5..100 rows
      const auto ds = oracle::random_dataset(n, 4, 2 + seed % 7, seed);
      for (auto criterion : {SplitCriterion::gini, SplitCriterion::entropy}) {
        const auto got = best_split(ds.features, ds.labels, criterion, all_features(4));
        const auto want = oracle::best_split_scan(ds.features, ds.labels, criterion);
        REQUIRE(got.has_value() == want.has_value());
        if (!got) continue;
        CHECK(got->impurity_decrease == doctest::Approx(want->impurity_decrease).epsilon(1e-9));
        // The library's choice must itself be optimal when recounted from scratch.
        const double recount = oracle::split_decrease(ds.features, ds.labels, criterion, got->feature, got->threshold);
        CHECK(recount == doctest::Approx(want->impurity_decrease).epsilon(1e-9));
        // Equal-gain candidates resolve to the lowest feature, then the lowest threshold.
        if (got->feature != want->feature || got->threshold != want->threshold) {
          CHECK(std::abs(got->impurity_decrease - want->impurity_decrease) <= 1e-12);
        }
      }
    }
  }

  TEST_CASE("a one-tree forest without bootstrap over all features is the single tree") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto ds = oracle::random_dataset(120, 4, 6, seed);
      TreeParams tp;
      tp.max_depth = 6;
      const TreeModel tree = fit_tree(ds.features, ds.labels, tp, seed);
      ForestParams fp;
      fp.trees = 1;
      fp.bootstrap = false;
      fp.features_per_split = 4;
      fp.tree = tp;
      const ForestModel forest = fit_forest(ds.features, ds.labels, fp, seed + 100);
      REQUIRE(forest.trees.size() == 1);
      const auto& other = forest.trees[0];
      REQUIRE(other.nodes.size() == tree.nodes.size());
      for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
        CHECK(other.nodes[k].feature == tree.nodes[k].feature);
        CHECK(other.nodes[k].threshold == tree.nodes[k].threshold);
        CHECK(other.nodes[k].left == tree.nodes[k].left);
        CHECK(other.nodes[k].counts == tree.nodes[k].counts);
      }
      for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(predict_forest(forest, ds.features.row(i)) == predict_tree(tree, ds.features.row(i)));
      }
    }
  }
}

TEST_SUITE("props-boosting") {
  TEST_CASE("training cross-entropy never increases") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const auto ds = oracle::random_dataset(150, 3, 20, seed);
      for (double lr : {0.05, 0.3, 1.0}) {
        const auto model = fit_gboost(ds.features, ds.labels, {40, lr, 2});
        REQUIRE(model.training_loss.size() == 41);
        for (std::size_t t = 1; t < model.training_loss.size(); ++t) {
          CHECK(model.training_loss[t] <= model.training_loss[t - 1] + 1e-12);
        }
      }
    }
  }

  TEST_CASE("residuals are the negative loss gradient") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 2.0);
    const std::size_t n = 7;
    std::vector<ClassScores> scores(n);
    std::vector<QualityClass> labels;
    for (std::size_t i = 0; i < n; ++i) {
      for (auto& s : scores[i]) s = g(rng);
      labels.push_back(class_from_index(i % 3));
    }
    const auto res = softmax_residuals(scores, labels);
    std::vector<double> flat;
    for (const auto& s : scores) flat.insert(flat.end(), s.begin(), s.end());
    const auto loss = [&](const std::vector<double>& v) {
      std::vector<ClassScores> sc(n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < 3; ++c) sc[i][c] = v[i * 3 + c];
      }
      return softmax_cross_entropy(sc, labels);
    };
    const auto grad = oracle::gradient(loss, flat, 1e-5);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(res[i][c] + grad[i * 3 + c]) <= 1e-5);
    }
  }

  TEST_CASE("boosted model separates an easy problem and round-trips through JSON") {
    auto ds = oracle::random_dataset(90, 2, 30, 9);
    for (std::size_t i = 0; i < ds.size(); ++i) ds.features(i, 1) = static_cast<double>(class_index(ds.labels[i]));
    const auto model = fit_gboost(ds.features, ds.labels, {30, 0.3, 2});
    for (std::size_t i = 0; i < ds.size(); ++i) CHECK(predict_gboost(model, ds.features.row(i)) == ds.labels[i]);
    Json j = model;
    const auto back = j.get<GboostModel>();
    for (std::size_t i = 0; i < ds.size(); ++i) {
      CHECK(gboost_scores(back, ds.features.row(i)) == gboost_scores(model, ds.features.row(i)));
    }
  }
}

TEST_SUITE("trees") {
  TEST_CASE("depth and split-size limits") {
    const auto ds = oracle::random_dataset(200, 3, 50, 11);
    TreeParams tp;
    tp.max_depth = 3;
    CHECK(fit_tree(ds.features, ds.labels, tp, 1).depth() <= 3);
    tp.max_depth = 1;
    CHECK(fit_tree(ds.features, ds.labels, tp, 1).depth() <= 1);
    tp.max_depth = 0;
    CHECK_THROWS_AS(fit_tree(ds.features, ds.labels, tp, 1), ConfigError);
    TreeParams big;
    big.min_samples_split = 1000;
    CHECK(fit_tree(ds.features, ds.labels, big, 1).nodes.size() == 1);
  }

  TEST_CASE("an unbounded tree fits distinct points exactly") {
    const auto ds = oracle::random_dataset(60, 3, 1000000, 12);
    const auto tree = fit_tree(ds.features, ds.labels, {}, 1);
    for (std::size_t i = 0; i < ds.size(); ++i) CHECK(predict_tree(tree, ds.features.row(i)) == ds.labels[i]);
  }

  TEST_CASE("tree and forest JSON round trip") {
    const auto ds = oracle::random_dataset(80, 3, 10, 13);
    const auto tree = fit_tree(ds.features, ds.labels, {}, 1);
    Json jt = tree;
    const auto tree2 = jt.get<TreeModel>();
    ForestParams fp;
    fp.trees = 7;
    const auto forest = fit_forest(ds.features, ds.labels, fp, 3);
    Json jf = forest;
    const auto forest2 = jf.get<ForestModel>();
    for (std::size_t i = 0; i < ds.size(); ++i) {
      CHECK(predict_tree(tree2, ds.features.row(i)) == predict_tree(tree, ds.features.row(i)));
      CHECK(forest_votes(forest2, ds.features.row(i)) == forest_votes(forest, ds.features.row(i)));
    }
    Json broken = jt;
    broken["nodes"][0]["left"] = 9999;
    CHECK_THROWS(broken.get<TreeModel>());
  }

  TEST_CASE("forest fitting is deterministic per seed") {
    const auto ds = oracle::random_dataset(100, 4, 10, 14);
    ForestParams fp;
    fp.trees = 9;
    const auto a = fit_forest(ds.features, ds.labels, fp, 5);
    const auto b = fit_forest(ds.features, ds.labels, fp, 5);
    CHECK(a.tree_seeds == b.tree_seeds);
    for (std::size_t i = 0; i < ds.size(); ++i) CHECK(forest_votes(a, ds.features.row(i)) == forest_votes(b, ds.features.row(i)));
  }

  TEST_CASE("regression tree reproduces a step function") {
    Matrix x(20, 1);
    std::vector<double> t(20);
    for (std::size_t i = 0; i < 20; ++i) {
      x(i, 0) = static_cast<double>(i);
      t[i] = i < 8 ? -1.5 : 2.0;
    }
    const auto tree = fit_regression_tree(x, t, 1);
    CHECK(tree.nodes[0].threshold == doctest::Approx(7.5));
    for (std::size_t i = 0; i < 20; ++i) CHECK(tree.predict(x.row(i)) == doctest::Approx(t[i]));
  }
}
