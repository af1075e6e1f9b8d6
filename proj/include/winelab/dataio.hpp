#pragma once

#include "winelab/dataset.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

namespace winelab {

inline constexpr std::size_t kWineColumns = 12;
inline constexpr std::string_view kQualityColumn = "quality";

struct RawDataset {
  std::vector<std::string> column_names;
  std::vector<std::vector<double>> rows;

  std::size_t size() const { return rows.size(); }
  // Index of `name` among the columns; throws DataError when absent.
  std::size_t column_index(std::string_view name) const;
};

struct StatsRow {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double min = 0.0;
  double max = 0.0;
  double median = 0.0;
};

struct ClassDistribution {
  ClassCounts per_class{};
  std::array<std::size_t, 11> per_score{};  // raw quality 0..10
  std::size_t unscored = 0;                 // synthetic rows
};

// Delimited table with one header row. The delimiter is ';' (UCI format),
// falling back to ',' when the header contains no ';'. Header names are
// unquoted and lowercased. Every data cell must parse as a finite real.
RawDataset parse_table(std::istream& in, const std::string& source = "<stream>");
RawDataset parse_table(const std::filesystem::path& path);

// parse_table plus the wine-format arity check (11 features + quality).
RawDataset parse_csv(std::istream& in, const std::string& source = "<stream>");
RawDataset parse_csv(const std::filesystem::path& path);

// Drops exact duplicate rows, keeping the first occurrence in file order.
RawDataset deduplicate(const RawDataset& raw);

std::vector<StatsRow> summarize(const RawDataset& raw);

// quality < 5 -> bad, 5..6 -> normal, 7..10 -> good. The quality column is removed.
QualityClass quality_class(int score);
Dataset encode_labels(const RawDataset& raw);

ClassDistribution class_distribution(const Dataset& ds);

}  // namespace winelab
