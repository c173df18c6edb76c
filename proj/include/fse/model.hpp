#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fse/types.hpp"

namespace fse::model {

/// One-hot state indicator matrix: row per week, column per state, all-zero
/// rows on non-event weeks.
struct StateDesign {
    Eigen::MatrixXd indicators;  // n x m, entries in {0,1}
    int start_week = 0;

    int weeks() const { return static_cast<int>(indicators.rows()); }
    int state_count() const { return static_cast<int>(indicators.cols()); }

    static StateDesign zero(int start_week, int n_weeks, int m);
};

struct FseFit {
    int p = 0;
    int m = 0;
    double alpha0 = 0.0;
    std::vector<double> alphas;  // AR coefficients, lag 1..p
    std::vector<double> betas;   // state uplift coefficients, state 1..m
    double residual_sigma = 0.0;
    RegressionFit regression;
    double aicc = 0.0;
    int differencing_applied = 0;
    TestResult kpss;
    TestResult normality;
    TestResult ljung_box;
    bool ar_root_warning = false;  // fitted AR polynomial root on/inside the unit circle
    std::vector<std::string> warnings;
};

struct StationarityResult {
    DemandSeries series;
    std::vector<TestResult> kpss_trail;
};

struct OrderSelection {
    int p = 0;
    std::vector<std::pair<int, double>> aicc_table;  // (p, AICc)
};

enum class ForecastMode { Recursive, Rolling };

/// Build the n x m indicator matrix for [start_week, start_week + n_weeks).
/// Every event week's combination must already be indexed in the state map.
StateDesign build_state_design(const EventCalendar& calendar, const StateMap& state_map,
                               int start_week, int n_weeks);

/// KPSS at 5%; difference at lag 1 (up to max_diff times) until stationary,
/// recording every test. Throws StatError if still non-stationary.
StationarityResult check_stationarity_and_difference(const DemandSeries& series, int max_diff = 1);

/// AICc order selection over p = 0..p_max, all candidates fitted on the
/// common effective sample (rows p_max+1..n). Ties go to the smallest p.
OrderSelection select_order(const DemandSeries& series, const StateDesign& design, int p_max = 8);

/// OLS fit of demand on intercept, p lags and the m state indicators, with
/// residual diagnostics.
FseFit fit(const DemandSeries& series, const StateDesign& design, int p);

/// Multi-step forecast over the horizon given by future_design. Recursive
/// mode feeds forecasts back into the lags; rolling mode substitutes the
/// supplied actuals. If the fit was estimated on differenced data the output
/// is integrated back to the original scale starting from last_level.
std::vector<double> forecast(const FseFit& fit, std::span<const double> last_observations,
                             const StateDesign& future_design,
                             ForecastMode mode = ForecastMode::Recursive,
                             std::span<const double> actuals = {},
                             std::optional<double> last_level = std::nullopt);

/// JSON round-trip of a fitted model.
std::string serialize(const FseFit& fit);
FseFit deserialize(const std::string& json_text);

}  // namespace fse::model
