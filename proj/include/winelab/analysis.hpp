#pragma once

#include "winelab/dataio.hpp"
#include "winelab/json_types.hpp"
#include "winelab/matrix.hpp"

#include <span>
#include <string>
#include <vector>

namespace winelab {

struct CorrelationMatrix {
  std::vector<std::string> names;
  Matrix values;
};

struct RankedFeature {
  std::string name;
  double rho = 0.0;
};

// cov(x, y) / (sd_x * sd_y). Throws on length mismatch, fewer than two
// points, or a constant series.
double pearson(std::span<const double> x, std::span<const double> y);

// Over every column of the raw table, target column included.
CorrelationMatrix correlation_matrix(const RawDataset& raw);

// Descending |rho| with `target`; ties alphabetical; target excluded.
std::vector<RankedFeature> rank_features(const CorrelationMatrix& cm, const std::string& target);

std::string correlation_csv(const CorrelationMatrix& cm);
Json correlation_json(const CorrelationMatrix& cm);

}  // namespace winelab
