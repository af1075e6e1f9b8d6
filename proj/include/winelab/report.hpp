#pragma once

#include "winelab/analysis.hpp"
#include "winelab/dataio.hpp"
#include "winelab/importance.hpp"
#include "winelab/json_types.hpp"
#include "winelab/tuning.hpp"

#include <string>
#include <vector>

namespace winelab {

enum class OutputFormat { json, text, csv };

OutputFormat parse_output_format(std::string_view name);

// JSON output ends with a newline and uses two-space indentation.
std::string dump_json(const Json& j);

std::string render_stats(const std::vector<StatsRow>& stats, OutputFormat fmt);
std::string render_ranking(const std::vector<RankedFeature>& ranking, const std::string& target, OutputFormat fmt);
std::string render_distribution(const ClassDistribution& dist, OutputFormat fmt);
std::string render_importance(const ImportanceReport& r, OutputFormat fmt);
std::string render_tuning(const TuneResult& r, OutputFormat fmt);

// Experiment report produced by run_experiment. CSV gives one row per model.
std::string render_experiment(const Json& report, OutputFormat fmt);

}  // namespace winelab
