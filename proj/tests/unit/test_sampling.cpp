#include "oracles.hpp"

#include "winelab/error.hpp"
#include "winelab/sampling.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>

using namespace winelab;

namespace {

// Imbalanced, continuous-valued dataset: 60 / 25 / 12 rows.
Dataset imbalanced(std::uint64_t seed) {
  Dataset ds = oracle::random_dataset(97, 3, 1000, seed);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    ds.labels[i] = i < 60 ? QualityClass::normal : (i < 85 ? QualityClass::good : QualityClass::bad);
    ds.scores[i] = i < 60 ? 5 : (i < 85 ? 7 : 4);
  }
  return ds;
}

}  // namespace

TEST_SUITE("props-smote") {
  TEST_CASE("every synthetic point lies on a segment to one of its k nearest same-class neighbours") {
    const Dataset ds = imbalanced(1);
    const SamplerConfig cfg{SamplingMethod::smote, 5, 17};
    std::vector<SyntheticOrigin> trace;
    const Dataset out = smote(ds, cfg, &trace);
    REQUIRE(out.size() == ds.size() + trace.size());
    std::map<QualityClass, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < ds.size(); ++i) members[ds.labels[i]].push_back(i);
    for (std::size_t s = 0; s < trace.size(); ++s) {
      const auto& o = trace[s];
      const std::size_t row = ds.size() + s;
      CHECK(ds.labels[o.source] == out.labels[row]);
      CHECK(ds.labels[o.neighbor] == out.labels[row]);
      CHECK(o.t > 0.0);
      CHECK(o.t < 1.0);
      // Brute-force neighbour set of the source within its class.
      std::vector<std::pair<double, std::size_t>> d;
      for (auto j : members[ds.labels[o.source]]) {
        if (j == o.source) continue;
        double s2 = 0;
        for (std::size_t f = 0; f < 3; ++f) {
          s2 += (ds.features(j, f) - ds.features(o.source, f)) * (ds.features(j, f) - ds.features(o.source, f));
        }
        d.emplace_back(s2, j);
      }
      std::sort(d.begin(), d.end());
      bool within = false;
      for (std::size_t r = 0; r < 5; ++r) within = within || d[r].second == o.neighbor;
      CHECK(within);
      for (std::size_t f = 0; f < 3; ++f) {
        const double p = ds.features(o.source, f);
        const double q = ds.features(o.neighbor, f);
        CHECK(out.features(row, f) == doctest::Approx(p + o.t * (q - p)).epsilon(1e-12));
        CHECK(out.features(row, f) >= std::min(p, q));
        CHECK(out.features(row, f) <= std::max(p, q));
      }
      CHECK(out.origin[row] == -1);
      CHECK(out.scores[row] == -1);
    }
  }

  TEST_CASE("SMOTE equalizes class counts exactly") {
    const Dataset out = apply_sampler(imbalanced(2), {SamplingMethod::smote, 5, 3});
    const auto c = count_classes(out.labels);
    CHECK(c[0] == 60);
    CHECK(c[1] == 60);
    CHECK(c[2] == 60);
  }

  TEST_CASE("SMOTE is deterministic per seed") {
    const Dataset ds = imbalanced(3);
    const Dataset a = apply_sampler(ds, {SamplingMethod::smote, 5, 99});
    const Dataset b = apply_sampler(ds, {SamplingMethod::smote, 5, 99});
    const Dataset c = apply_sampler(ds, {SamplingMethod::smote, 5, 100});
    CHECK(a.features == b.features);
    CHECK(a.labels == b.labels);
    CHECK_FALSE(a.features == c.features);
  }

  TEST_CASE("SMOTE keeps the original rows first and untouched") {
    const Dataset ds = imbalanced(4);
    const Dataset out = apply_sampler(ds, {SamplingMethod::smote, 3, 5});
    for (std::size_t i = 0; i < ds.size(); ++i) {
      CHECK(out.origin[i] == ds.origin[i]);
      for (std::size_t f = 0; f < 3; ++f) CHECK(out.features(i, f) == ds.features(i, f));
    }
  }

  TEST_CASE("SMOTE rejects a class too small for k") {
    Dataset ds = imbalanced(5);
    CHECK_THROWS_AS(apply_sampler(ds, {SamplingMethod::smote, 12, 1}), DataError);
    CHECK_THROWS_AS(apply_sampler(ds, {SamplingMethod::smote, 0, 1}), ConfigError);
  }
}

TEST_SUITE("sampling") {
  TEST_CASE("random oversampling copies existing rows up to the majority count") {
    const Dataset ds = imbalanced(6);
    const Dataset out = random_oversample(ds, 7);
    const auto c = count_classes(out.labels);
    CHECK(c == ClassCounts{60, 60, 60});
    for (std::size_t i = ds.size(); i < out.size(); ++i) {
      const auto src = static_cast<std::size_t>(out.origin[i]);
      CHECK(ds.labels[src] == out.labels[i]);
      for (std::size_t f = 0; f < 3; ++f) CHECK(out.features(i, f) == ds.features(src, f));
    }
  }

  TEST_CASE("random undersampling keeps minority-sized subsets in original order") {
    const Dataset ds = imbalanced(8);
    const Dataset out = random_undersample(ds, 9);
    CHECK(count_classes(out.labels) == ClassCounts{12, 12, 12});
    CHECK(std::is_sorted(out.origin.begin(), out.origin.end()));
  }

  TEST_CASE("nearest_within breaks distance ties by index") {
    Matrix p = Matrix::from_rows({{0.0}, {1.0}, {-1.0}, {2.0}});
    const auto nn = nearest_within(p, 2);
    CHECK(nn[0] == std::vector<std::size_t>{1, 2});
    CHECK(nn[3] == std::vector<std::size_t>{1, 0});
    CHECK_THROWS(nearest_within(p, 4));
  }

  TEST_CASE("method names round-trip") {
    for (auto m : {SamplingMethod::oversample, SamplingMethod::undersample, SamplingMethod::smote}) {
      CHECK(parse_sampling_method(sampling_method_name(m)) == m);
    }
    CHECK_THROWS_AS(parse_sampling_method("adasyn"), ConfigError);
  }
}
