// winelab command line: dataset inspection, experiments, tuning, importance
// and prediction with saved models.

#include "winelab/analysis.hpp"
#include "winelab/dataio.hpp"
#include "winelab/error.hpp"
#include "winelab/experiment.hpp"
#include "winelab/importance.hpp"
#include "winelab/model.hpp"
#include "winelab/preprocess.hpp"
#include "winelab/report.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace {

using namespace winelab;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "text";
  bool strict = false;
};

void emit(const GlobalOptions& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw DataError("cannot write " + g.out);
  f << text;
}

void check_warnings(const GlobalOptions& g, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  if (g.strict && !warnings.empty()) throw NumericError(std::to_string(warnings.size()) + " numeric warning(s) under --strict");
}

std::uint64_t require_seed(const GlobalOptions& g, const char* command) {
  if (!g.seed) throw ConfigError(std::string(command) + " needs --seed");
  return *g.seed;
}

RawDataset load_table(const std::string& path, bool dedup) {
  RawDataset raw = parse_csv(std::filesystem::path(path));
  return dedup ? deduplicate(raw) : raw;
}

// Model input columns, mapped onto the training scale when the model carries a standardizer.
Matrix model_inputs(const LoadedModel& lm, const RawDataset& raw) {
  const auto& names = lm.model.feature_names();
  std::vector<std::size_t> cols;
  for (const auto& n : names) cols.push_back(raw.column_index(n));
  Matrix x(raw.size(), names.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) x(i, j) = raw.rows[i][cols[j]];
  }
  return lm.standardizer ? apply_standardizer(*lm.standardizer, x) : x;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"winelab: wine quality classification toolkit"};
  app.set_version_flag("--version", std::string(WINELAB_VERSION));
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Base seed for every random stream");
  app.add_option("--out", g.out, "Write output to this file instead of stdout");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "text", "csv"}));
  app.add_flag("--strict", g.strict, "Treat numeric warnings (e.g. SVM non-convergence) as errors");

  std::string csv;
  bool dedup = false;
  std::string target = std::string(kQualityColumn);

  auto* stats = app.add_subcommand("stats", "Per-column mean, sd, min, max and median");
  stats->add_option("csv", csv, "Wine quality CSV")->required();
  stats->add_flag("--dedup", dedup, "Drop exact duplicate rows first");

  auto* correlate = app.add_subcommand("correlate", "Rank columns by Pearson correlation with a target");
  correlate->add_option("csv", csv, "Wine quality CSV")->required();
  correlate->add_option("--target", target, "Target column");
  correlate->add_flag("--dedup", dedup, "Drop exact duplicate rows first");

  auto* distribution = app.add_subcommand("distribution", "Quality class and score counts");
  distribution->add_option("csv", csv, "Wine quality CSV")->required();
  distribution->add_flag("--dedup", dedup, "Drop exact duplicate rows first");

  std::string config;
  auto* compare = app.add_subcommand("compare", "Run a full experiment from a JSON config");
  compare->add_option("--config", config, "Experiment config")->required();

  auto* tune = app.add_subcommand("tune", "Grid search every model slot of an experiment config");
  tune->add_option("--config", config, "Experiment config")->required();

  std::string model_path;
  std::string test_path;
  std::size_t repeats = 10;
  auto* importance = app.add_subcommand("importance", "Permutation importance of a saved model");
  importance->add_option("--model", model_path, "Saved model JSON")->required();
  importance->add_option("--test", test_path, "Labelled CSV to evaluate on")->required();
  importance->add_option("--repeats", repeats, "Shuffles per feature");

  std::string input_path;
  auto* predict = app.add_subcommand("predict", "Predict quality classes with a saved model");
  predict->add_option("--model", model_path, "Saved model JSON")->required();
  predict->add_option("--input", input_path, "CSV with the model's feature columns")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    const OutputFormat fmt = parse_output_format(g.format);
    if (stats->parsed()) {
      emit(g, render_stats(summarize(load_table(csv, dedup)), fmt));
    } else if (correlate->parsed()) {
      const auto ranking = rank_features(correlation_matrix(load_table(csv, dedup)), target);
      emit(g, render_ranking(ranking, target, fmt));
    } else if (distribution->parsed()) {
      emit(g, render_distribution(class_distribution(encode_labels(load_table(csv, dedup))), fmt));
    } else if (compare->parsed()) {
      ExperimentConfig cfg = load_experiment_config(config, g.seed);
      if (!g.out.empty()) cfg.output = g.out;
      const auto result = run_experiment(cfg);
      check_warnings(g, result.warnings);
      GlobalOptions target_out = g;
      target_out.out = cfg.output;
      emit(target_out, render_experiment(result.report, fmt));
    } else if (tune->parsed()) {
      const ExperimentConfig cfg = load_experiment_config(config, g.seed);
      const auto run = run_tuning(cfg);
      std::string text;
      if (fmt == OutputFormat::json) {
        Json j = Json::array();
        for (std::size_t i = 0; i < run.results.size(); ++i) {
          Json entry{{"tag", run.tags[i]}};
          entry.update(tune_result_json(run.results[i]));
          j.push_back(std::move(entry));
        }
        text = dump_json(j);
      } else {
        for (std::size_t i = 0; i < run.results.size(); ++i) {
          if (i > 0 && fmt == OutputFormat::text) text += "\n";
          text += render_tuning(run.results[i], fmt);
        }
      }
      emit(g, text);
    } else if (importance->parsed()) {
      const std::uint64_t seed = require_seed(g, "importance");
      const LoadedModel lm = load_model(model_path);
      const RawDataset raw = parse_csv(std::filesystem::path(test_path));
      Dataset test = encode_labels(raw);
      test = select_features(test, lm.model.feature_names());
      if (lm.standardizer) test = apply_standardizer(*lm.standardizer, test);
      check_warnings(g, lm.model.warnings());
      emit(g, render_importance(permutation_importance(lm.model, test, repeats, seed), fmt));
    } else if (predict->parsed()) {
      const LoadedModel lm = load_model(model_path);
      const RawDataset raw = parse_table(std::filesystem::path(input_path));
      check_warnings(g, lm.model.warnings());
      const auto labels = lm.model.predict_batch(model_inputs(lm, raw));
      std::string text;
      if (fmt == OutputFormat::json) {
        Json j = Json::array();
        for (auto c : labels) j.push_back(class_name(c));
        text = dump_json(Json{{"predictions", j}});
      } else {
        text = "row,class\n";
        for (std::size_t i = 0; i < labels.size(); ++i) {
          text += std::to_string(i) + ',' + std::string(class_name(labels[i])) + '\n';
        }
      }
      emit(g, text);
    }
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
