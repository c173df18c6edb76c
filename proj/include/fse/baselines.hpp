#pragma once

#include <span>
#include <vector>

#include "fse/types.hpp"

namespace fse::baselines {

struct SesFit {
    double alpha = 0.0;   // smoothing weight in (0, 1]
    double level = 0.0;   // final smoothed level
    double sse = 0.0;     // in-sample one-step squared error
};

/// Simple exponential smoothing with the level initialized to the first
/// observation. Alpha minimizes the in-sample one-step SSE: coarse grid over
/// {0.01..1.00 step 0.01} refined by golden-section search.
SesFit ses_fit(std::span<const double> series);

/// One-step SSE for a fixed alpha (the objective ses_fit minimizes).
double ses_sse(std::span<const double> series, double alpha);

/// In-sample one-step forecasts: f_0 = x_0, f_t = level after x_{t-1}.
std::vector<double> ses_one_step_forecasts(std::span<const double> series, double alpha);

/// Flat forecast profile: h copies of the final level.
std::vector<double> ses_forecast(const SesFit& fit, int h);

/// Repeats the last observation h times.
std::vector<double> naive_forecast(std::span<const double> series, int h);

}  // namespace fse::baselines
