#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fse/types.hpp"

namespace fse::metrics {

enum class ZeroPolicy { Exclude, Error };
enum class MsaeVariant { RatioOfSums, MeanOfShares };

/// Mean absolute error.
double mae(std::span<const double> forecasts, std::span<const double> actuals);

/// Mean absolute percentage error, in percent. Zero actuals are excluded
/// (default) or rejected depending on policy.
double mape(std::span<const double> forecasts, std::span<const double> actuals,
            ZeroPolicy zero_policy = ZeroPolicy::Exclude);

/// Scaled absolute error. RatioOfSums is the WAPE-style reading
/// sum|f-x| / sum x; MeanOfShares divides each absolute error by the window
/// total and averages.
double msae(std::span<const double> forecasts, std::span<const double> actuals,
            MsaeVariant variant = MsaeVariant::RatioOfSums);

/// AE_t = |f_t - x_t| and RE_t = (f_t - x_t)/x_t; RE is missing where the
/// actual is zero.
std::pair<std::vector<double>, std::vector<std::optional<double>>> ae_re_series(
    std::span<const double> forecasts, std::span<const double> actuals);

/// Accuracy-improvement percentage, rounded half away from zero.
int improvement(double benchmark_error, double candidate_error);

struct ForecasterScore {
    double mae = 0.0;
    double mape = 0.0;
    double msae = 0.0;
    std::vector<double> ae_series;
    std::vector<std::optional<double>> re_series;
};

struct AccuracyReport {
    // Insertion-ordered: benchmark first, then candidates.
    std::vector<std::pair<std::string, ForecasterScore>> scores;
    std::string benchmark;
    std::string candidate;
    std::map<std::string, int> improvements;  // metric name -> percent
};

ForecasterScore score(std::span<const double> forecasts, std::span<const double> actuals,
                      MsaeVariant variant = MsaeVariant::RatioOfSums,
                      ZeroPolicy zero_policy = ZeroPolicy::Exclude);

/// Score benchmark and candidate against the same actuals and fill the
/// per-metric improvement column.
AccuracyReport compare(const std::string& benchmark_name, std::span<const double> benchmark,
                       const std::string& candidate_name, std::span<const double> candidate,
                       std::span<const double> actuals,
                       MsaeVariant variant = MsaeVariant::RatioOfSums,
                       ZeroPolicy zero_policy = ZeroPolicy::Exclude);

}  // namespace fse::metrics
