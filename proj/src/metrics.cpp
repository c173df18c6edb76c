#include "fse/metrics.hpp"

#include <cmath>

namespace fse::metrics {

namespace {

void check_lengths(std::span<const double> forecasts, std::span<const double> actuals) {
    if (forecasts.size() != actuals.size()) {
        throw ValidationError("metrics: forecast/actual length mismatch");
    }
    if (forecasts.empty()) throw ValidationError("metrics: empty series");
}

}  // namespace

double mae(std::span<const double> forecasts, std::span<const double> actuals) {
    check_lengths(forecasts, actuals);
    double sum = 0.0;
    for (std::size_t t = 0; t < forecasts.size(); ++t) {
        sum += std::fabs(forecasts[t] - actuals[t]);
    }
    return sum / static_cast<double>(forecasts.size());
}

double mape(std::span<const double> forecasts, std::span<const double> actuals,
            ZeroPolicy zero_policy) {
    check_lengths(forecasts, actuals);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < forecasts.size(); ++t) {
        if (actuals[t] == 0.0) {
            if (zero_policy == ZeroPolicy::Error) {
                throw ValidationError("mape: zero actual at position " + std::to_string(t));
            }
            continue;
        }
        sum += std::fabs(forecasts[t] - actuals[t]) / std::fabs(actuals[t]);
        ++count;
    }
    if (count == 0) throw ValidationError("mape: all actuals are zero");
    return 100.0 * sum / static_cast<double>(count);
}

double msae(std::span<const double> forecasts, std::span<const double> actuals,
            MsaeVariant variant) {
    check_lengths(forecasts, actuals);
    double total = 0.0;
    double abs_err = 0.0;
    for (std::size_t t = 0; t < forecasts.size(); ++t) {
        total += actuals[t];
        abs_err += std::fabs(forecasts[t] - actuals[t]);
    }
    if (total <= 0.0) throw ValidationError("msae: zero total demand");
    if (variant == MsaeVariant::RatioOfSums) return abs_err / total;
    return abs_err / total / static_cast<double>(forecasts.size());
}

std::pair<std::vector<double>, std::vector<std::optional<double>>> ae_re_series(
    std::span<const double> forecasts, std::span<const double> actuals) {
    check_lengths(forecasts, actuals);
    std::vector<double> ae(forecasts.size());
    std::vector<std::optional<double>> re(forecasts.size());
    for (std::size_t t = 0; t < forecasts.size(); ++t) {
        ae[t] = std::fabs(forecasts[t] - actuals[t]);
        if (actuals[t] != 0.0) re[t] = (forecasts[t] - actuals[t]) / actuals[t];
    }
    return {std::move(ae), std::move(re)};
}

int improvement(double benchmark_error, double candidate_error) {
    if (benchmark_error <= 0.0) {
        throw ValidationError("improvement: benchmark error must be positive");
    }
    const double pct = 100.0 * (benchmark_error - candidate_error) / benchmark_error;
    // Round half away from zero.
    return static_cast<int>(pct >= 0.0 ? std::floor(pct + 0.5) : std::ceil(pct - 0.5));
}

ForecasterScore score(std::span<const double> forecasts, std::span<const double> actuals,
                      MsaeVariant variant, ZeroPolicy zero_policy) {
    ForecasterScore s;
    s.mae = mae(forecasts, actuals);
    s.mape = mape(forecasts, actuals, zero_policy);
    s.msae = msae(forecasts, actuals, variant);
    auto [ae, re] = ae_re_series(forecasts, actuals);
    s.ae_series = std::move(ae);
    s.re_series = std::move(re);
    return s;
}

AccuracyReport compare(const std::string& benchmark_name, std::span<const double> benchmark,
                       const std::string& candidate_name, std::span<const double> candidate,
                       std::span<const double> actuals, MsaeVariant variant,
                       ZeroPolicy zero_policy) {
    AccuracyReport report;
    report.benchmark = benchmark_name;
    report.candidate = candidate_name;
    ForecasterScore bench = score(benchmark, actuals, variant, zero_policy);
    ForecasterScore cand = score(candidate, actuals, variant, zero_policy);
    report.improvements["mae"] = improvement(bench.mae, cand.mae);
    report.improvements["mape"] = improvement(bench.mape, cand.mape);
    report.improvements["msae"] = improvement(bench.msae, cand.msae);
    report.scores.emplace_back(benchmark_name, std::move(bench));
    report.scores.emplace_back(candidate_name, std::move(cand));
    return report;
}

}  // namespace fse::metrics
