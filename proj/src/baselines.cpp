#include "fse/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace fse::baselines {

double ses_sse(std::span<const double> series, double alpha) {
    double level = series[0];
    double sse = 0.0;
    for (std::size_t t = 1; t < series.size(); ++t) {
        const double err = series[t] - level;
        sse += err * err;
        level += alpha * err;
    }
    return sse;
}

SesFit ses_fit(std::span<const double> series) {
    if (series.size() < 3) throw ValidationError("ses_fit: need at least 3 observations");

    double best_alpha = 0.01;
    double best_sse = ses_sse(series, best_alpha);
    for (int i = 2; i <= 100; ++i) {
        const double alpha = i / 100.0;
        const double sse = ses_sse(series, alpha);
        if (sse < best_sse) {
            best_sse = sse;
            best_alpha = alpha;
        }
    }

    // Golden-section refinement inside the winning grid cell's neighborhood.
    double lo = std::max(0.01, best_alpha - 0.01);
    double hi = std::min(1.0, best_alpha + 0.01);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = hi - gr * (hi - lo);
    double b = lo + gr * (hi - lo);
    double fa = ses_sse(series, a);
    double fb = ses_sse(series, b);
    for (int iter = 0; iter < 60 && hi - lo > 1e-10; ++iter) {
        if (fa < fb) {
            hi = b;
            b = a;
            fb = fa;
            a = hi - gr * (hi - lo);
            fa = ses_sse(series, a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + gr * (hi - lo);
            fb = ses_sse(series, b);
        }
    }
    const double refined = (lo + hi) / 2.0;
    const double refined_sse = ses_sse(series, refined);
    if (refined_sse < best_sse) {
        best_alpha = refined;
        best_sse = refined_sse;
    }

    SesFit fit;
    fit.alpha = best_alpha;
    fit.sse = best_sse;
    double level = series[0];
    for (std::size_t t = 1; t < series.size(); ++t) {
        level += best_alpha * (series[t] - level);
    }
    fit.level = level;
    return fit;
}

std::vector<double> ses_one_step_forecasts(std::span<const double> series, double alpha) {
    if (series.empty()) throw ValidationError("ses_one_step_forecasts: empty series");
    std::vector<double> forecasts(series.size());
    double level = series[0];
    forecasts[0] = series[0];
    for (std::size_t t = 1; t < series.size(); ++t) {
        forecasts[t] = level;
        level += alpha * (series[t] - level);
    }
    return forecasts;
}

std::vector<double> ses_forecast(const SesFit& fit, int h) {
    if (h < 1) throw ValidationError("ses_forecast: horizon must be >= 1");
    return std::vector<double>(h, fit.level);
}

std::vector<double> naive_forecast(std::span<const double> series, int h) {
    if (series.empty()) throw ValidationError("naive_forecast: empty series");
    if (h < 1) throw ValidationError("naive_forecast: horizon must be >= 1");
    return std::vector<double>(h, series.back());
}

}  // namespace fse::baselines
