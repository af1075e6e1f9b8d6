#include "winelab/error.hpp"
#include "winelab/evaluation.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace winelab;

TEST_SUITE("props-metrics") {
  TEST_CASE("F1 lies between precision and recall; accuracy is trace over total") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::size_t> cell(0, 30);
    for (int trial = 0; trial < 500; ++trial) {
      ConfusionMatrix cm;
      for (auto& row : cm.counts) {
        for (auto& v : row) v = trial % 5 == 0 && cell(rng) < 10 ? 0 : cell(rng);
      }
      if (cm.total() == 0) continue;
      for (auto c : kAllClasses) {
        const auto m = class_metrics(cm, c);
        CHECK(m.f1 >= std::min(m.precision, m.recall) - 1e-15);
        CHECK(m.f1 <= std::max(m.precision, m.recall) + 1e-15);
        CHECK(m.tp + m.fp + m.fn + m.tn == cm.total());
      }
      const auto s = macro_summary(cm);
      CHECK(s.accuracy == static_cast<double>(cm.trace()) / static_cast<double>(cm.total()));
    }
  }

  TEST_CASE("0/0 ratios are reported as 0") {
    ConfusionMatrix cm;
    cm.counts[1][1] = 10;
    const auto bad = class_metrics(cm, QualityClass::bad);
    CHECK(bad.precision == 0.0);
    CHECK(bad.recall == 0.0);
    CHECK(bad.f1 == 0.0);
    const auto normal = class_metrics(cm, QualityClass::normal);
    CHECK(normal.precision == 1.0);
    CHECK(normal.f1 == 1.0);
    CHECK(macro_summary(cm).f1 == doctest::Approx(1.0 / 3.0));
  }
}

TEST_SUITE("evaluation") {
  TEST_CASE("hand-counted example") {
    const std::vector<QualityClass> truth{QualityClass::bad, QualityClass::normal, QualityClass::normal,
                                          QualityClass::good, QualityClass::good};
    const std::vector<QualityClass> pred{QualityClass::normal, QualityClass::normal, QualityClass::good,
                                         QualityClass::good, QualityClass::good};
    const auto cm = confusion_matrix(truth, pred);
    CHECK(cm.counts[0][1] == 1);
    CHECK(cm.trace() == 3);
    const auto good = class_metrics(cm, QualityClass::good);
    CHECK(good.tp == 2);
    CHECK(good.fp == 1);
    CHECK(good.fn == 0);
    CHECK(good.tn == 2);
    CHECK(good.precision == doctest::Approx(2.0 / 3.0));
    CHECK(good.recall == 1.0);
    CHECK(good.f1 == doctest::Approx(0.8));
    CHECK(accuracy(truth, pred) == doctest::Approx(0.6));
    const Json j = evaluation_json(cm);
    CHECK(j.at("accuracy").get<double>() == doctest::Approx(0.6));
  }

  TEST_CASE("errors") {
    const std::vector<QualityClass> a{QualityClass::bad};
    CHECK_THROWS_AS(confusion_matrix(a, {}), DataError);
    CHECK_THROWS_AS(macro_summary(ConfusionMatrix{}), DataError);
  }
}
