#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fse/types.hpp"

namespace fse::io {

/// Everything one evaluation run consumes, loaded from the CSV schemas below.
struct DatasetBundle {
    DemandSeries demand;
    EventCalendar calendar;
    std::optional<std::vector<double>> baseline_forecasts;
    std::optional<std::vector<double>> adjusted_forecasts;
    std::vector<EventFactor> factor_declarations;
};

/// Load and validate a bundle from:
///   demand.csv:    week,demand
///   calendar.csv:  week,<factor_1>,...,<factor_F>  (all-or-nothing event rows)
///   forecasts.csv: week,baseline[,adjusted]        (optional file)
///   factors.csv:   factor,level
/// Week columns may be integer indexes or ISO-8601 dates on a strict weekly
/// grid; all files must cover the same contiguous week range.
DatasetBundle load_bundle(const std::filesystem::path& demand_path,
                          const std::filesystem::path& calendar_path,
                          const std::optional<std::filesystem::path>& forecasts_path,
                          const std::filesystem::path& factors_path);

/// Standalone loaders for the individual schemas (the forecast subcommand
/// reads a future calendar that extends past the demand series).
std::vector<EventFactor> load_factors(const std::filesystem::path& path);
DemandSeries load_demand(const std::filesystem::path& path);
EventCalendar load_calendar(const std::filesystem::path& path,
                            const std::vector<EventFactor>& factors,
                            std::vector<int>* weeks_out = nullptr);

/// Write a bundle back out in normalized form (integer weeks, full
/// precision). Atomic per file: write to a temp path, then rename.
void save_bundle(const DatasetBundle& bundle, const std::filesystem::path& out_dir);

/// Plain-text `key = value` configuration with documented keys:
/// train_length, p_max, alpha, msae_variant, forecast_mode, seed,
/// fallback_rel_tol. Unknown keys are rejected.
struct RunConfig {
    std::optional<int> train_length;
    int p_max = 8;
    double alpha = 0.05;
    std::string msae_variant = "ratio_of_sums";  // or "mean_of_shares"
    std::string forecast_mode = "recursive";     // or "rolling"
    std::uint64_t seed = 1;
    double fallback_rel_tol = 0.15;
};

RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text, const std::string& source_name = "<config>");

/// Atomic text-file write (temp file + rename).
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// StateMap JSON round-trip, used by the dus/fit subcommands.
std::string state_map_to_json(const StateMap& map);
StateMap state_map_from_json(const std::string& json_text);

/// Number formatting used by the human-readable report tables.
std::string format_sig6(double v);

/// CLI entry point; returns the process exit code (0 success, 1 statistical
/// failure, 2 input/usage failure).
int run_command(int argc, const char* const* argv);

}  // namespace fse::io
