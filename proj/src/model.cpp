#include "fse/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fse/stats.hpp"

namespace fse::model {

namespace {

// AICc on n_eff rows with q = p + m + 2 estimated quantities (intercept,
// lags, state coefficients, residual variance).
double aicc_value(double sse, int n_eff, int p, int m) {
    const int q = p + m + 2;
    if (n_eff - q - 1 <= 0) {
        throw ValidationError("aicc: effective sample too small for q=" + std::to_string(q));
    }
    return n_eff * std::log(sse / n_eff) + 2.0 * q +
           2.0 * q * (q + 1.0) / (n_eff - q - 1.0);
}

// Design rows first_row..n-1: [1, x_{t-1}..x_{t-p}, S_t].
void build_regression(const DemandSeries& series, const StateDesign& design, int p,
                      int first_row, Eigen::MatrixXd& x, Eigen::VectorXd& y,
                      std::vector<std::string>& names) {
    const int n = static_cast<int>(series.values.size());
    const int m = design.state_count();
    if (design.weeks() != n) {
        throw ValidationError("fse: state design rows (" + std::to_string(design.weeks()) +
                              ") do not match series length (" + std::to_string(n) + ")");
    }
    if (first_row < p) throw ValidationError("fse: first row precedes available lags");
    const int rows = n - first_row;
    if (rows <= 0) throw ValidationError("fse: no usable rows after lag trimming");

    x.resize(rows, 1 + p + m);
    y.resize(rows);
    names.clear();
    names.push_back("intercept");
    for (int i = 1; i <= p; ++i) names.push_back("lag" + std::to_string(i));
    for (int j = 1; j <= m; ++j) names.push_back("state" + std::to_string(j));

    for (int r = 0; r < rows; ++r) {
        const int t = first_row + r;
        y(r) = series.values[t];
        x(r, 0) = 1.0;
        for (int i = 1; i <= p; ++i) x(r, i) = series.values[t - i];
        for (int j = 0; j < m; ++j) x(r, 1 + p + j) = design.indicators(t, j);
    }
}

std::vector<int> dead_state_columns(const StateDesign& design, int first_row) {
    std::vector<int> dead;
    for (int j = 0; j < design.state_count(); ++j) {
        double sum = 0.0;
        for (int t = first_row; t < design.weeks(); ++t) sum += design.indicators(t, j);
        if (sum == 0.0) dead.push_back(j + 1);
    }
    return dead;
}

// Max modulus of the companion-matrix eigenvalues (inverse AR roots);
// stationary fits have all of them strictly inside the unit circle.
double max_inverse_root_modulus(const std::vector<double>& alphas) {
    const int p = static_cast<int>(alphas.size());
    if (p == 0) return 0.0;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < p; ++i) companion(0, i) = alphas[i];
    for (int i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
    const auto eigs = companion.eigenvalues();
    double max_mod = 0.0;
    for (int i = 0; i < p; ++i) max_mod = std::max(max_mod, std::abs(eigs(i)));
    return max_mod;
}

}  // namespace

StateDesign StateDesign::zero(int start_week, int n_weeks, int m) {
    StateDesign d;
    d.start_week = start_week;
    d.indicators = Eigen::MatrixXd::Zero(n_weeks, m);
    return d;
}

StateDesign build_state_design(const EventCalendar& calendar, const StateMap& state_map,
                               int start_week, int n_weeks) {
    StateDesign design = StateDesign::zero(start_week, n_weeks, state_map.state_count());
    for (const auto& [week, combination] : calendar.events) {
        if (week < start_week || week >= start_week + n_weeks) continue;
        auto it = state_map.combination_index.find(combination);
        if (it == state_map.combination_index.end()) {
            throw ValidationError("build_state_design: week " + std::to_string(week) +
                                  " has unindexed combination " +
                                  combination_to_string(combination));
        }
        design.indicators(week - start_week, it->second - 1) = 1.0;
    }
    return design;
}

StationarityResult check_stationarity_and_difference(const DemandSeries& series, int max_diff) {
    StationarityResult result;
    result.series = series;
    auto test = stats::kpss_test(result.series.values);
    result.kpss_trail.push_back(test);
    int diffs = 0;
    while (test.reject_at_5pct) {
        if (diffs >= max_diff) {
            throw StatError("check_stationarity: series remains non-stationary after " +
                            std::to_string(max_diff) + " differencing pass(es); treat manually");
        }
        std::vector<double> diffed(result.series.values.size() - 1);
        for (std::size_t t = 1; t < result.series.values.size(); ++t) {
            diffed[t - 1] = result.series.values[t] - result.series.values[t - 1];
        }
        result.series.values = std::move(diffed);
        result.series.start_week += 1;
        result.series.differencing_applied += 1;
        ++diffs;
        test = stats::kpss_test(result.series.values);
        result.kpss_trail.push_back(test);
    }
    return result;
}

OrderSelection select_order(const DemandSeries& series, const StateDesign& design, int p_max) {
    const int n = static_cast<int>(series.values.size());
    const int m = design.state_count();
    if (n <= p_max + m + 3) {
        throw ValidationError("select_order: series too short for p_max=" +
                              std::to_string(p_max));
    }
    const int n_eff = n - p_max;

    OrderSelection sel;
    double best = std::numeric_limits<double>::infinity();
    for (int p = 0; p <= p_max; ++p) {
        Eigen::MatrixXd x;
        Eigen::VectorXd y;
        std::vector<std::string> names;
        build_regression(series, design, p, p_max, x, y, names);
        const auto fit = stats::ols_fit(x, y, names);
        const double aicc = aicc_value(fit.sse, n_eff, p, m);
        sel.aicc_table.emplace_back(p, aicc);
        if (aicc < best) {
            best = aicc;
            sel.p = p;
        }
    }
    return sel;
}

FseFit fit(const DemandSeries& series, const StateDesign& design, int p) {
    const int n = static_cast<int>(series.values.size());
    const int m = design.state_count();
    if (p < 0) throw ValidationError("fit: negative AR order");

    const auto dead = dead_state_columns(design, p);
    if (!dead.empty()) {
        std::ostringstream os;
        os << "fit: state column(s) never active in the training window:";
        for (int j : dead) os << " state" << j;
        throw StatError(os.str());
    }

    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    std::vector<std::string> names;
    build_regression(series, design, p, p, x, y, names);
    const auto regression = stats::ols_fit(x, y, names);

    FseFit result;
    result.p = p;
    result.m = m;
    result.regression = regression;
    result.alpha0 = regression.coefficients[0];
    result.alphas.assign(regression.coefficients.begin() + 1,
                         regression.coefficients.begin() + 1 + p);
    result.betas.assign(regression.coefficients.begin() + 1 + p,
                        regression.coefficients.end());
    result.residual_sigma =
        std::sqrt(regression.sse / (regression.n_obs - regression.n_params));
    result.aicc = aicc_value(regression.sse, n - p, p, m);
    result.differencing_applied = series.differencing_applied;

    result.kpss = stats::kpss_test(series.values);
    result.normality = stats::normality_test(regression.residuals);
    const int nr = static_cast<int>(regression.residuals.size());
    int max_lag = std::min(10, nr / 5);
    max_lag = std::max(max_lag, p + 1);
    max_lag = std::min(max_lag, nr - 1);
    if (max_lag > p) {
        result.ljung_box = stats::ljung_box(regression.residuals, max_lag, p);
    } else {
        result.warnings.push_back("residual sample too short for the Ljung-Box test");
    }

    const double max_mod = max_inverse_root_modulus(result.alphas);
    if (max_mod >= 1.0) {
        result.ar_root_warning = true;
        result.warnings.push_back("fitted AR polynomial has a root on or inside the unit circle "
                                  "(max inverse-root modulus " +
                                  std::to_string(max_mod) + ")");
    }
    return result;
}

std::vector<double> forecast(const FseFit& fit, std::span<const double> last_observations,
                             const StateDesign& future_design, ForecastMode mode,
                             std::span<const double> actuals, std::optional<double> last_level) {
    const int h = future_design.weeks();
    if (h <= 0) throw ValidationError("forecast: horizon must be positive");
    if (static_cast<int>(last_observations.size()) < fit.p) {
        throw ValidationError("forecast: need at least p last observations");
    }
    if (future_design.state_count() != fit.m) {
        throw ValidationError("forecast: future design state count mismatch");
    }
    if (mode == ForecastMode::Rolling && static_cast<int>(actuals.size()) < h - 1) {
        throw ValidationError("forecast: rolling mode needs actuals over the horizon");
    }

    std::vector<double> out;
    out.reserve(h);
    for (int s = 0; s < h; ++s) {
        double v = fit.alpha0;
        for (int i = 1; i <= fit.p; ++i) {
            const int idx = s - i;
            double lag;
            if (idx >= 0) {
                lag = mode == ForecastMode::Rolling ? actuals[idx] : out[idx];
            } else {
                lag = last_observations[last_observations.size() + idx];
            }
            v += fit.alphas[i - 1] * lag;
        }
        for (int j = 0; j < fit.m; ++j) {
            v += fit.betas[j] * future_design.indicators(s, j);
        }
        out.push_back(v);
    }

    if (fit.differencing_applied > 0) {
        if (!last_level) {
            throw ValidationError("forecast: differenced fit needs last_level to integrate back");
        }
        double level = *last_level;
        for (double& v : out) {
            level += v;
            v = level;
        }
    }
    return out;
}

namespace {

nlohmann::json test_to_json(const TestResult& t) {
    nlohmann::json j;
    j["statistic"] = t.statistic;
    if (t.p_value) j["p_value"] = *t.p_value;
    j["reject_at_5pct"] = t.reject_at_5pct;
    j["degenerate"] = t.degenerate;
    j["meta"] = t.meta;
    return j;
}

TestResult test_from_json(const nlohmann::json& j) {
    TestResult t;
    t.statistic = j.at("statistic").get<double>();
    if (j.contains("p_value")) t.p_value = j.at("p_value").get<double>();
    t.reject_at_5pct = j.at("reject_at_5pct").get<bool>();
    t.degenerate = j.at("degenerate").get<bool>();
    t.meta = j.at("meta").get<std::map<std::string, double>>();
    return t;
}

}  // namespace

std::string serialize(const FseFit& fit) {
    nlohmann::json j;
    j["p"] = fit.p;
    j["m"] = fit.m;
    j["alpha0"] = fit.alpha0;
    j["alphas"] = fit.alphas;
    j["betas"] = fit.betas;
    j["residual_sigma"] = fit.residual_sigma;
    j["aicc"] = fit.aicc;
    j["differencing_applied"] = fit.differencing_applied;
    j["regression"] = {{"coefficients", fit.regression.coefficients},
                       {"standard_errors", fit.regression.standard_errors},
                       {"t_statistics", fit.regression.t_statistics},
                       {"p_values", fit.regression.p_values},
                       {"residuals", fit.regression.residuals},
                       {"sse", fit.regression.sse},
                       {"n_obs", fit.regression.n_obs},
                       {"n_params", fit.regression.n_params}};
    j["diagnostics"] = {{"kpss", test_to_json(fit.kpss)},
                        {"normality", test_to_json(fit.normality)},
                        {"ljung_box", test_to_json(fit.ljung_box)}};
    j["ar_root_warning"] = fit.ar_root_warning;
    j["warnings"] = fit.warnings;
    return j.dump(2);
}

FseFit deserialize(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("deserialize: invalid fit JSON: ") + e.what());
    }
    try {
        FseFit fit;
        fit.p = j.at("p").get<int>();
        fit.m = j.at("m").get<int>();
        fit.alpha0 = j.at("alpha0").get<double>();
        fit.alphas = j.at("alphas").get<std::vector<double>>();
        fit.betas = j.at("betas").get<std::vector<double>>();
        fit.residual_sigma = j.at("residual_sigma").get<double>();
        fit.aicc = j.at("aicc").get<double>();
        fit.differencing_applied = j.at("differencing_applied").get<int>();
        const auto& r = j.at("regression");
        fit.regression.coefficients = r.at("coefficients").get<std::vector<double>>();
        fit.regression.standard_errors = r.at("standard_errors").get<std::vector<double>>();
        fit.regression.t_statistics = r.at("t_statistics").get<std::vector<double>>();
        fit.regression.p_values = r.at("p_values").get<std::vector<double>>();
        fit.regression.residuals = r.at("residuals").get<std::vector<double>>();
        fit.regression.sse = r.at("sse").get<double>();
        fit.regression.n_obs = r.at("n_obs").get<int>();
        fit.regression.n_params = r.at("n_params").get<int>();
        const auto& d = j.at("diagnostics");
        fit.kpss = test_from_json(d.at("kpss"));
        fit.normality = test_from_json(d.at("normality"));
        fit.ljung_box = test_from_json(d.at("ljung_box"));
        fit.ar_root_warning = j.at("ar_root_warning").get<bool>();
        fit.warnings = j.at("warnings").get<std::vector<std::string>>();
        return fit;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("deserialize: missing or malformed field: ") + e.what());
    }
}

}  // namespace fse::model
