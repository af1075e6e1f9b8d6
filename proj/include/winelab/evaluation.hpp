#pragma once

#include "winelab/dataset.hpp"
#include "winelab/json_types.hpp"

#include <array>
#include <cstddef>
#include <span>

namespace winelab {

// counts[true][predicted]
struct ConfusionMatrix {
  std::array<std::array<std::size_t, kNumClasses>, kNumClasses> counts{};

  std::size_t total() const;
  std::size_t trace() const;
};

struct ClassMetrics {
  QualityClass cls = QualityClass::bad;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MacroSummary {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

ConfusionMatrix confusion_matrix(std::span<const QualityClass> y_true, std::span<const QualityClass> y_pred);

// One-vs-rest counts for `c`; every 0/0 ratio is reported as 0.
ClassMetrics class_metrics(const ConfusionMatrix& cm, QualityClass c);

// accuracy = trace / total; precision, recall and F1 are unweighted means over the three classes.
MacroSummary macro_summary(const ConfusionMatrix& cm);

double accuracy(std::span<const QualityClass> y_true, std::span<const QualityClass> y_pred);

Json evaluation_json(const ConfusionMatrix& cm);

}  // namespace winelab
