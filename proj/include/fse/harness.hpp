#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fse/dus.hpp"
#include "fse/io.hpp"
#include "fse/metrics.hpp"
#include "fse/model.hpp"
#include "fse/synth.hpp"
#include "fse/types.hpp"

namespace fse::harness {

struct CaseConfig {
    std::optional<int> train_length;  // default: all but the last 20 weeks
    double dus_alpha = 0.05;
    dus::MergePolicy merge;
    int p_max = 8;
    std::optional<int> fixed_p;  // skip order selection when set
    model::ForecastMode forecast_mode = model::ForecastMode::Recursive;
    metrics::MsaeVariant msae_variant = metrics::MsaeVariant::RatioOfSums;
};

struct CaseReport {
    int train_length = 0;
    int holdout_length = 0;
    dus::DusResult dus;
    std::vector<TestResult> kpss_trail;
    model::OrderSelection order;
    model::FseFit fit;
    std::vector<int> holdout_weeks;
    std::vector<double> actuals;              // holdout actual demand
    std::vector<double> fse_forecasts;        // holdout FSE forecasts
    std::vector<double> benchmark_forecasts;  // SES or provided baseline
    std::optional<std::vector<double>> adjusted_forecasts;
    std::string benchmark_name;
    metrics::AccuracyReport accuracy;
};

/// Train/test split, DUS and FSE on the training window only, holdout
/// forecast, and scoring against the benchmark. Fully deterministic; stage
/// errors are rethrown tagged with the stage name.
CaseReport run_case(const io::DatasetBundle& bundle, const CaseConfig& config);

/// Human-readable report: state table, fit summary, accuracy table.
std::string render_report(const CaseReport& report);

/// Machine-readable holdout series: week,actual,fse_forecast,
/// benchmark_forecast,ae,re.
std::string render_series_csv(const CaseReport& report);

/// Accuracy table as CSV (forecaster,mae,mape,msae plus improvement row).
std::string render_accuracy_csv(const CaseReport& report);

io::DatasetBundle bundle_from_synth(const synth::SyntheticBundle& synth_bundle);

struct ReplicateRow {
    std::uint64_t seed = 0;
    int p_selected = 0;
    int state_count = 0;
    double fse_mae = 0.0;
    double benchmark_mae = 0.0;
    double fse_mape = 0.0;
    double benchmark_mape = 0.0;
    double fse_msae = 0.0;
    double benchmark_msae = 0.0;
};

struct ReplicateSummary {
    std::vector<ReplicateRow> rows;
    std::map<std::string, double> means;
    std::map<std::string, double> q10;
    std::map<std::string, double> median;
    std::map<std::string, double> q90;
};

/// Independent case-shaped bundles for seeds base_seed..base_seed+n_seeds-1,
/// each run through run_case, with per-metric aggregates.
ReplicateSummary replicate(char shape, const CaseConfig& config, int n_seeds,
                           std::uint64_t base_seed);

std::string render_replicate_csv(const ReplicateSummary& summary);

}  // namespace fse::harness
