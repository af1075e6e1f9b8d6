#include "winelab/analysis.hpp"

#include "winelab/error.hpp"
#include "winelab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace winelab {

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("pearson: series lengths differ");
  if (x.size() < 2) throw DataError("pearson: need at least two points");
  Matrix data(x.size(), 2);
  for (std::size_t i = 0; i < x.size(); ++i) {
    data(i, 0) = x[i];
    data(i, 1) = y[i];
  }
  return kernels::serial::correlation_matrix(data)(0, 1);
}

CorrelationMatrix correlation_matrix(const RawDataset& raw) {
  return {raw.column_names, kernels::correlation_matrix(Matrix::from_rows(raw.rows))};
}

std::vector<RankedFeature> rank_features(const CorrelationMatrix& cm, const std::string& target) {
  auto it = std::find(cm.names.begin(), cm.names.end(), target);
  if (it == cm.names.end()) throw DataError("unknown target '" + target + "'");
  const auto t = static_cast<std::size_t>(it - cm.names.begin());
  std::vector<RankedFeature> out;
  for (std::size_t j = 0; j < cm.names.size(); ++j) {
    if (j != t) out.push_back({cm.names[j], cm.values(j, t)});
  }
  std::stable_sort(out.begin(), out.end(), [](const RankedFeature& a, const RankedFeature& b) {
    const double ma = std::abs(a.rho);
    const double mb = std::abs(b.rho);
    if (ma != mb) return ma > mb;
    return a.name < b.name;
  });
  return out;
}

std::string correlation_csv(const CorrelationMatrix& cm) {
  std::ostringstream out;
  out.precision(17);
  out << "feature";
  for (const auto& n : cm.names) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < cm.names.size(); ++i) {
    out << cm.names[i];
    for (std::size_t j = 0; j < cm.names.size(); ++j) out << ',' << cm.values(i, j);
    out << '\n';
  }
  return out.str();
}

Json correlation_json(const CorrelationMatrix& cm) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < cm.names.size(); ++i) {
    Json r = Json::array();
    for (std::size_t j = 0; j < cm.names.size(); ++j) r.push_back(cm.values(i, j));
    rows.push_back(std::move(r));
  }
  return Json{{"names", cm.names}, {"values", std::move(rows)}};
}

}  // namespace winelab
