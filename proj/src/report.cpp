#include "winelab/report.hpp"

#include "winelab/error.hpp"

#include <algorithm>
#include <cstdlib>
#include <iomanip>
#include <sstream>

namespace winelab {
namespace {

std::string fixed(double v, int digits) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v;
  return out.str();
}

std::string full(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

// Left-aligned first column, right-aligned others.
class TextTable {
 public:
  explicit TextTable(std::vector<std::string> header) { rows_.push_back(std::move(header)); }
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  std::string str() const {
    std::vector<std::size_t> width(rows_.front().size(), 0);
    for (const auto& r : rows_) {
      for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
    }
    // Numbers align right, text (names, hyperparameters) aligns left.
    std::vector<bool> left(width.size(), false);
    for (std::size_t c = 0; c < width.size(); ++c) {
      for (std::size_t i = 1; i < rows_.size() && !left[c]; ++i) left[c] = c < rows_[i].size() && !numeric(rows_[i][c]);
    }
    std::ostringstream out;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const auto& r = rows_[i];
      std::string line;
      for (std::size_t c = 0; c < r.size(); ++c) {
        if (c > 0) line += "  ";
        const std::string pad(width[c] - r[c].size(), ' ');
        line += left[c] ? r[c] + pad : pad + r[c];
      }
      while (!line.empty() && line.back() == ' ') line.pop_back();
      out << line << '\n';
      if (i == 0) {
        std::size_t total = 0;
        for (auto w : width) total += w;
        out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
      }
    }
    return out.str();
  }

 private:
  static bool numeric(const std::string& cell) {
    if (cell.empty()) return false;
    char* end = nullptr;
    std::strtod(cell.c_str(), &end);
    return *end == '\0';
  }

  std::vector<std::vector<std::string>> rows_;
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + '"';
}

std::string config_string(const Json& cfg) {
  std::string s;
  for (const auto& [k, v] : cfg.items()) {
    if (!s.empty()) s += ", ";
    s += k + "=" + (v.is_string() ? v.get<std::string>() : v.dump());
  }
  return s.empty() ? "(defaults)" : s;
}

}  // namespace

OutputFormat parse_output_format(std::string_view name) {
  if (name == "json") return OutputFormat::json;
  if (name == "text") return OutputFormat::text;
  if (name == "csv") return OutputFormat::csv;
  throw ConfigError("unknown format '" + std::string(name) + "' (expected json, text or csv)");
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

std::string render_stats(const std::vector<StatsRow>& stats, OutputFormat fmt) {
  if (fmt == OutputFormat::json) {
    Json j = Json::array();
    for (const auto& s : stats) {
      j.push_back(Json{{"feature", s.name}, {"mean", s.mean}, {"sd", s.sd}, {"min", s.min}, {"max", s.max},
                       {"median", s.median}});
    }
    return dump_json(j);
  }
  if (fmt == OutputFormat::csv) {
    std::string out = "feature,mean,sd,min,max,median\n";
    for (const auto& s : stats) {
      out += csv_field(s.name) + ',' + full(s.mean) + ',' + full(s.sd) + ',' + full(s.min) + ',' + full(s.max) +
             ',' + full(s.median) + '\n';
    }
    return out;
  }
  TextTable t({"feature", "mean", "sd", "min", "max", "median"});
  for (const auto& s : stats) {
    t.add({s.name, fixed(s.mean, 3), fixed(s.sd, 3), fixed(s.min, 3), fixed(s.max, 3), fixed(s.median, 3)});
  }
  return t.str();
}

std::string render_ranking(const std::vector<RankedFeature>& ranking, const std::string& target, OutputFormat fmt) {
  if (fmt == OutputFormat::json) {
    Json j = Json::array();
    for (const auto& r : ranking) j.push_back(Json{{"feature", r.name}, {"rho", r.rho}});
    return dump_json(Json{{"target", target}, {"ranking", std::move(j)}});
  }
  if (fmt == OutputFormat::csv) {
    std::string out = "feature,rho\n";
    for (const auto& r : ranking) out += csv_field(r.name) + ',' + full(r.rho) + '\n';
    return out;
  }
  TextTable t({"feature", "correlation with " + target});
  for (const auto& r : ranking) t.add({r.name, fixed(r.rho, 4)});
  return t.str();
}

std::string render_distribution(const ClassDistribution& dist, OutputFormat fmt) {
  if (fmt == OutputFormat::json) {
    Json per_class = Json::object();
    for (auto c : kAllClasses) per_class[std::string(class_name(c))] = dist.per_class[class_index(c)];
    Json per_score = Json::object();
    for (std::size_t s = 0; s < dist.per_score.size(); ++s) {
      if (dist.per_score[s] > 0) per_score[std::to_string(s)] = dist.per_score[s];
    }
    return dump_json(Json{{"per_class", per_class}, {"per_score", per_score}, {"unscored", dist.unscored}});
  }
  std::size_t total = 0;
  for (auto v : dist.per_class) total += v;
  if (fmt == OutputFormat::csv) {
    std::string out = "class,count\n";
    for (auto c : kAllClasses) out += std::string(class_name(c)) + ',' + std::to_string(dist.per_class[class_index(c)]) + '\n';
    return out;
  }
  TextTable t({"class", "count", "share"});
  for (auto c : kAllClasses) {
    const auto n = dist.per_class[class_index(c)];
    t.add({std::string(class_name(c)), std::to_string(n),
           fixed(total ? static_cast<double>(n) / static_cast<double>(total) : 0.0, 3)});
  }
  TextTable s({"quality score", "count"});
  for (std::size_t k = 0; k < dist.per_score.size(); ++k) {
    if (dist.per_score[k] > 0) s.add({std::to_string(k), std::to_string(dist.per_score[k])});
  }
  return t.str() + "\n" + s.str();
}

std::string render_importance(const ImportanceReport& r, OutputFormat fmt) {
  if (fmt == OutputFormat::json) return dump_json(importance_json(r));
  if (fmt == OutputFormat::csv) return importance_csv(r);
  std::vector<const FeatureImportance*> ranked;
  for (const auto& f : r.features) ranked.push_back(&f);
  std::sort(ranked.begin(), ranked.end(), [](const auto* a, const auto* b) { return a->rank < b->rank; });
  TextTable t({"rank", "feature", "mean drop", "sd"});
  for (const auto* f : ranked) t.add({std::to_string(f->rank), f->name, fixed(f->mean_drop, 4), fixed(f->sd_drop, 4)});
  return "baseline accuracy " + fixed(r.baseline_accuracy, 4) + " on " + std::to_string(r.test_size) + " rows, " +
         std::to_string(r.repeats) + " repeats\n\n" + t.str();
}

std::string render_tuning(const TuneResult& r, OutputFormat fmt) {
  if (fmt == OutputFormat::json) return dump_json(tune_result_json(r));
  if (fmt == OutputFormat::csv) {
    std::string out = "index,config,error\n";
    for (std::size_t i = 0; i < r.table.size(); ++i) {
      out += std::to_string(i) + ',' + csv_field(r.table[i].config.dump()) + ',' + full(r.table[i].error) + '\n';
    }
    return out;
  }
  TextTable t({"config", "cv error"});
  for (std::size_t i = 0; i < r.table.size(); ++i) {
    t.add({(i == r.best_index ? "* " : "  ") + config_string(r.table[i].config), fixed(r.table[i].error, 4)});
  }
  return std::string(family_name(r.family)) + ": " + std::to_string(r.k_folds) + "-fold CV, best " +
         config_string(r.best_config) + " (error " + fixed(r.best_error, 4) + ")\n\n" + t.str();
}

std::string render_experiment(const Json& report, OutputFormat fmt) {
  if (fmt == OutputFormat::json) return dump_json(report);
  const auto& models = report.at("models");
  if (fmt == OutputFormat::csv) {
    std::string out = "model,accuracy,macro_precision,macro_recall,macro_f1\n";
    for (const auto& m : models) {
      const auto& e = m.at("evaluation");
      out += m.at("tag").get<std::string>() + ',' + full(e.at("accuracy").get<double>()) + ',' +
             full(e.at("macro_precision").get<double>()) + ',' + full(e.at("macro_recall").get<double>()) + ',' +
             full(e.at("macro_f1").get<double>()) + '\n';
    }
    return out;
  }

  std::ostringstream out;
  const auto& cfg = report.at("config");
  const auto& protocol = report.at("protocol");
  const auto& split = report.at("split");
  out << "winelab " << report.at("toolkit").at("version").get<std::string>() << "\n";
  out << "protocol " << protocol.at("name").get<std::string>() << ", seed " << cfg.at("seed").get<std::uint64_t>()
      << ", input " << cfg.at("input").get<std::string>() << "\n";
  out << "rows " << report.at("data").at("rows_parsed").get<std::size_t>() << " parsed, "
      << report.at("data").at("rows_used").get<std::size_t>() << " used\n";
  if (protocol.contains("sampling_order")) {
    out << "sampler " << protocol.at("sampler").get<std::string>() << " ("
        << protocol.at("sampling_order").get<std::string>() << ")\n";
  }
  out << "leakage: " << protocol.at("leakage").get<std::string>() << "\n";
  out << "split: " << split.at("train_rows").get<std::size_t>() << " train / "
      << split.at("test_rows").get<std::size_t>() << " test, " << split.at("fit_rows").get<std::size_t>()
      << " rows fitted\n\n";

  TextTable summary({"model", "accuracy", "precision", "recall", "f1", "hyperparameters"});
  for (const auto& m : models) {
    const auto& e = m.at("evaluation");
    summary.add({m.at("tag").get<std::string>(), fixed(e.at("accuracy").get<double>(), 4),
                 fixed(e.at("macro_precision").get<double>(), 4), fixed(e.at("macro_recall").get<double>(), 4),
                 fixed(e.at("macro_f1").get<double>(), 4), config_string(m.at("hyperparameters"))});
  }
  out << summary.str();

  for (const auto& m : models) {
    out << "\n" << m.at("tag").get<std::string>() << "\n";
    TextTable per({"class", "precision", "recall", "f1", "bad", "normal", "good"});
    const auto& e = m.at("evaluation");
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      const auto& pc = e.at("per_class").at(c);
      const auto& row = e.at("confusion_matrix").at(c);
      per.add({pc.at("class").get<std::string>(), fixed(pc.at("precision").get<double>(), 4),
               fixed(pc.at("recall").get<double>(), 4), fixed(pc.at("f1").get<double>(), 4),
               std::to_string(row.at(0).get<std::size_t>()), std::to_string(row.at(1).get<std::size_t>()),
               std::to_string(row.at(2).get<std::size_t>())});
    }
    out << per.str();
    for (const auto& w : m.at("warnings")) out << "warning: " << w.get<std::string>() << "\n";
  }

  if (report.contains("importance")) {
    const auto& imp = report.at("importance");
    out << "\npermutation importance for " << imp.at("model").get<std::string>() << " (baseline accuracy "
        << fixed(imp.at("baseline_accuracy").get<double>(), 4) << ", " << imp.at("repeats").get<std::size_t>()
        << " repeats)\n";
    std::vector<Json> rows(imp.at("features").begin(), imp.at("features").end());
    std::sort(rows.begin(), rows.end(), [](const Json& a, const Json& b) {
      return a.at("rank").get<std::size_t>() < b.at("rank").get<std::size_t>();
    });
    TextTable t({"rank", "feature", "mean drop", "sd"});
    for (const auto& f : rows) {
      t.add({std::to_string(f.at("rank").get<std::size_t>()), f.at("feature").get<std::string>(),
             fixed(f.at("mean_drop").get<double>(), 4), fixed(f.at("sd_drop").get<double>(), 4)});
    }
    out << t.str();
  }
  if (report.contains("timings_seconds")) {
    out << "\n";
    TextTable t({"stage", "seconds"});
    for (const auto& [k, v] : report.at("timings_seconds").items()) t.add({k, fixed(v.get<double>(), 3)});
    out << t.str();
  }
  return out.str();
}

}  // namespace winelab
