#include "winelab/dataio.hpp"

#include "winelab/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace winelab {
namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, delim)) out.push_back(cell);
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

std::string normalize_header(std::string_view raw) {
  std::string s = trim(raw);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool parse_real(const std::string& cell, double& out) {
  std::string s = trim(cell);
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int integral_score(double q, std::size_t row) {
  if (q != std::floor(q) || q < 0.0 || q > 10.0) {
    std::ostringstream msg;
    msg << "row " << row << ": quality " << q << " is not an integer in [0, 10]";
    throw DataError(msg.str());
  }
  return static_cast<int>(q);
}

}  // namespace

std::size_t RawDataset::column_index(std::string_view name) const {
  auto it = std::find(column_names.begin(), column_names.end(), name);
  if (it == column_names.end()) throw DataError("missing column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - column_names.begin());
}

RawDataset parse_table(std::istream& in, const std::string& source) {
  RawDataset raw;
  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": empty file");
  const char delim = line.find(';') != std::string::npos ? ';' : ',';
  for (const auto& h : split(line, delim)) raw.column_names.push_back(normalize_header(h));
  const std::size_t arity = raw.column_names.size();

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split(line, delim);
    if (cells.size() != arity) {
      throw DataError(source + ": line " + std::to_string(line_no) + ": expected " + std::to_string(arity) +
                      " fields, found " + std::to_string(cells.size()));
    }
    std::vector<double> row(arity);
    for (std::size_t j = 0; j < arity; ++j) {
      if (!parse_real(cells[j], row[j])) {
        throw DataError(source + ": line " + std::to_string(line_no) + ": column '" + raw.column_names[j] +
                        "': non-numeric value '" + trim(cells[j]) + "'");
      }
    }
    raw.rows.push_back(std::move(row));
  }
  return raw;
}

RawDataset parse_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!std::filesystem::is_regular_file(path) || !in) throw DataError("file not found: " + path.string());
  return parse_table(in, path.string());
}

RawDataset parse_csv(std::istream& in, const std::string& source) {
  RawDataset raw = parse_table(in, source);
  if (raw.column_names.size() != kWineColumns) {
    throw DataError(source + ": expected " + std::to_string(kWineColumns) + " columns, header has " +
                    std::to_string(raw.column_names.size()));
  }
  raw.column_index(kQualityColumn);
  return raw;
}

RawDataset parse_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!std::filesystem::is_regular_file(path) || !in) throw DataError("file not found: " + path.string());
  return parse_csv(in, path.string());
}

RawDataset deduplicate(const RawDataset& raw) {
  RawDataset out;
  out.column_names = raw.column_names;
  std::set<std::vector<double>> seen;
  for (const auto& row : raw.rows) {
    if (seen.insert(row).second) out.rows.push_back(row);
  }
  return out;
}

std::vector<StatsRow> summarize(const RawDataset& raw) {
  if (raw.rows.empty()) throw DataError("cannot summarize an empty dataset");
  const std::size_t n = raw.rows.size();
  std::vector<StatsRow> out;
  for (std::size_t j = 0; j < raw.column_names.size(); ++j) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = raw.rows[i][j];
    StatsRow s;
    s.name = raw.column_names[j];
    double sum = 0.0;
    for (double v : col) sum += v;
    s.mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : col) ss += (v - s.mean) * (v - s.mean);
    s.sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    s.min = *lo;
    s.max = *hi;
    s.median = median_of(std::move(col));
    out.push_back(std::move(s));
  }
  return out;
}

QualityClass quality_class(int score) {
  if (score < 0 || score > 10) throw DataError("quality " + std::to_string(score) + " outside [0, 10]");
  if (score < 5) return QualityClass::bad;
  if (score <= 6) return QualityClass::normal;
  return QualityClass::good;
}

Dataset encode_labels(const RawDataset& raw) {
  const std::size_t q = raw.column_index(kQualityColumn);
  Dataset ds;
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < raw.column_names.size(); ++j) {
    if (j == q) continue;
    keep.push_back(j);
    ds.feature_names.push_back(raw.column_names[j]);
  }
  ds.features = Matrix(raw.rows.size(), keep.size());
  for (std::size_t i = 0; i < raw.rows.size(); ++i) {
    const auto& row = raw.rows[i];
    const int score = integral_score(row[q], i + 1);
    for (std::size_t j = 0; j < keep.size(); ++j) ds.features(i, j) = row[keep[j]];
    ds.labels.push_back(quality_class(score));
    ds.scores.push_back(score);
    ds.origin.push_back(static_cast<std::int64_t>(i));
  }
  return ds;
}

ClassDistribution class_distribution(const Dataset& ds) {
  ClassDistribution d;
  d.per_class = count_classes(ds.labels);
  for (int s : ds.scores) {
    if (s < 0) {
      ++d.unscored;
    } else {
      ++d.per_score.at(static_cast<std::size_t>(s));
    }
  }
  return d;
}

}  // namespace winelab
