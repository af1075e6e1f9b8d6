#include "winelab/importance.hpp"

#include "winelab/error.hpp"
#include "winelab/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace winelab {
namespace {

std::size_t count_correct(std::span<const QualityClass> truth, std::span<const QualityClass> pred) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) n += truth[i] == pred[i] ? 1 : 0;
  return n;
}

}  // namespace

std::vector<double> permuted_column(const Matrix& x, std::size_t feature, std::size_t repeat, std::uint64_t seed) {
  auto column = x.column(feature);
  Rng rng(seed, {stream::importance, feature, repeat});
  std::shuffle(column.begin(), column.end(), rng.engine());
  return column;
}

ImportanceReport permutation_importance(const TrainedModel& m, const Dataset& test, std::size_t repeats,
                                        std::uint64_t seed) {
  if (repeats < 1) throw ConfigError("importance repeats must be at least 1");
  if (test.size() == 0) throw DataError("importance needs a nonempty test set");
  const auto baseline_pred = m.predict(test);
  const std::size_t n = test.size();
  const std::size_t d = test.num_features();
  const double total = static_cast<double>(n);

  ImportanceReport r;
  r.baseline_correct = count_correct(test.labels, baseline_pred);
  r.baseline_accuracy = static_cast<double>(r.baseline_correct) / total;
  r.test_size = n;
  r.repeats = repeats;
  r.seed = seed;

  std::vector<std::size_t> correct(d * repeats, 0);
  const std::size_t trials = d * repeats;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t f = t / repeats;
    const std::size_t rep = t % repeats;
    Matrix shuffled = test.features;
    const auto column = permuted_column(test.features, f, rep, seed);
    for (std::size_t i = 0; i < n; ++i) shuffled(i, f) = column[i];
    correct[t] = count_correct(test.labels, m.predict_batch(shuffled));
  }

  for (std::size_t f = 0; f < d; ++f) {
    FeatureImportance fi;
    fi.name = test.feature_names[f];
    for (std::size_t rep = 0; rep < repeats; ++rep) {
      const std::size_t c = correct[f * repeats + rep];
      fi.shuffled_correct.push_back(c);
      // Difference of integer counts, so baseline - drop recovers the shuffled accuracy exactly.
      fi.drops.push_back((static_cast<double>(r.baseline_correct) - static_cast<double>(c)) / total);
    }
    fi.mean_drop = std::accumulate(fi.drops.begin(), fi.drops.end(), 0.0) / static_cast<double>(repeats);
    if (repeats > 1) {
      double ss = 0.0;
      for (double v : fi.drops) ss += (v - fi.mean_drop) * (v - fi.mean_drop);
      fi.sd_drop = std::sqrt(ss / static_cast<double>(repeats - 1));
    }
    r.features.push_back(std::move(fi));
  }

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return r.features[a].mean_drop > r.features[b].mean_drop; });
  for (std::size_t k = 0; k < d; ++k) r.features[order[k]].rank = k + 1;
  return r;
}

Json importance_json(const ImportanceReport& r) {
  Json features = Json::array();
  for (const auto& f : r.features) {
    features.push_back(Json{{"feature", f.name},
                            {"rank", f.rank},
                            {"mean_drop", f.mean_drop},
                            {"sd_drop", f.sd_drop},
                            {"drops", f.drops}});
  }
  return Json{{"baseline_accuracy", r.baseline_accuracy},
              {"test_size", r.test_size},
              {"repeats", r.repeats},
              {"seed", r.seed},
              {"features", std::move(features)}};
}

std::string importance_csv(const ImportanceReport& r) {
  std::vector<const FeatureImportance*> ranked;
  for (const auto& f : r.features) ranked.push_back(&f);
  std::sort(ranked.begin(), ranked.end(), [](const auto* a, const auto* b) { return a->rank < b->rank; });
  std::ostringstream out;
  out.precision(17);
  out << "feature,mean_drop\n";
  for (const auto* f : ranked) out << f->name << ',' << f->mean_drop << '\n';
  return out.str();
}

}  // namespace winelab
