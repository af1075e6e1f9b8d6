#include "winelab/evaluation.hpp"

#include "winelab/error.hpp"

namespace winelab {
namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (const auto& row : counts) {
    for (auto v : row) t += v;
  }
  return t;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t t = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) t += counts[c][c];
  return t;
}

ConfusionMatrix confusion_matrix(std::span<const QualityClass> y_true, std::span<const QualityClass> y_pred) {
  if (y_true.size() != y_pred.size()) throw DataError("confusion_matrix: label vectors differ in length");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) ++cm.counts[class_index(y_true[i])][class_index(y_pred[i])];
  return cm;
}

ClassMetrics class_metrics(const ConfusionMatrix& cm, QualityClass c) {
  const std::size_t k = class_index(c);
  ClassMetrics m;
  m.cls = c;
  m.tp = cm.counts[k][k];
  for (std::size_t j = 0; j < kNumClasses; ++j) {
    if (j == k) continue;
    m.fn += cm.counts[k][j];
    m.fp += cm.counts[j][k];
  }
  m.tn = cm.total() - m.tp - m.fp - m.fn;
  m.precision = ratio(m.tp, m.tp + m.fp);
  m.recall = ratio(m.tp, m.tp + m.fn);
  m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

MacroSummary macro_summary(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw DataError("macro_summary of an empty confusion matrix");
  MacroSummary s;
  s.accuracy = ratio(cm.trace(), cm.total());
  for (auto c : kAllClasses) {
    const auto m = class_metrics(cm, c);
    s.precision += m.precision;
    s.recall += m.recall;
    s.f1 += m.f1;
  }
  s.precision /= kNumClasses;
  s.recall /= kNumClasses;
  s.f1 /= kNumClasses;
  return s;
}

double accuracy(std::span<const QualityClass> y_true, std::span<const QualityClass> y_pred) {
  const auto cm = confusion_matrix(y_true, y_pred);
  return ratio(cm.trace(), cm.total());
}

Json evaluation_json(const ConfusionMatrix& cm) {
  Json per_class = Json::array();
  for (auto c : kAllClasses) {
    const auto m = class_metrics(cm, c);
    per_class.push_back(Json{{"class", class_name(c)},
                             {"tp", m.tp},
                             {"fp", m.fp},
                             {"fn", m.fn},
                             {"tn", m.tn},
                             {"precision", m.precision},
                             {"recall", m.recall},
                             {"f1", m.f1}});
  }
  const auto s = macro_summary(cm);
  return Json{{"confusion_matrix", cm.counts},
              {"per_class", std::move(per_class)},
              {"accuracy", s.accuracy},
              {"macro_precision", s.precision},
              {"macro_recall", s.recall},
              {"macro_f1", s.f1}};
}

}  // namespace winelab
