#include "fse/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fse/baselines.hpp"

namespace fse::harness {

namespace {

template <typename Fn>
auto staged(const char* stage, Fn&& fn) {
    try {
        return fn();
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("[stage ") + stage + "] " + e.what());
    } catch (const StatError& e) {
        throw StatError(std::string("[stage ") + stage + "] " + e.what());
    }
}

EventCalendar restrict_calendar(const EventCalendar& calendar, int first_week, int last_week) {
    EventCalendar out;
    for (const auto& [week, combo] : calendar.events) {
        if (week >= first_week && week < last_week) out.events[week] = combo;
    }
    return out;
}

}  // namespace

CaseReport run_case(const io::DatasetBundle& bundle, const CaseConfig& config) {
    const int n = static_cast<int>(bundle.demand.values.size());
    const int start = bundle.demand.start_week;
    const int train_length = config.train_length.value_or(n - 20);
    if (train_length <= 0 || train_length >= n) {
        throw ValidationError("run_case: train_length must be in 1.." + std::to_string(n - 1));
    }
    const int holdout = n - train_length;

    CaseReport report;
    report.train_length = train_length;
    report.holdout_length = holdout;

    DemandSeries train;
    train.start_week = start;
    train.values.assign(bundle.demand.values.begin(), bundle.demand.values.begin() + train_length);

    // Training-window baseline for uplift computation: the provided baseline
    // column when present, otherwise in-sample SES fitted on the training
    // window only.
    std::vector<double> train_baseline;
    if (bundle.baseline_forecasts) {
        if (static_cast<int>(bundle.baseline_forecasts->size()) < train_length) {
            throw ValidationError("run_case: baseline forecasts shorter than training window");
        }
        train_baseline.assign(bundle.baseline_forecasts->begin(),
                              bundle.baseline_forecasts->begin() + train_length);
    } else {
        const auto ses = baselines::ses_fit(train.values);
        train_baseline = baselines::ses_one_step_forecasts(train.values, ses.alpha);
    }

    const auto stationary =
        staged("stationarity", [&] { return model::check_stationarity_and_difference(train); });
    report.kpss_trail = stationary.kpss_trail;

    const auto train_calendar = restrict_calendar(bundle.calendar, start, start + train_length);
    report.dus = staged("dus", [&] {
        dus::DusConfig dus_config;
        dus_config.anova_alpha = config.dus_alpha;
        dus_config.merge = config.merge;
        return dus::run_dus(train, train_baseline, train_calendar, bundle.factor_declarations,
                            dus_config);
    });

    const auto& model_series = stationary.series;
    const auto train_design = staged("design", [&] {
        return model::build_state_design(train_calendar, report.dus.state_map,
                                         model_series.start_week,
                                         static_cast<int>(model_series.values.size()));
    });

    int p;
    if (config.fixed_p) {
        p = *config.fixed_p;
        report.order.p = p;
    } else {
        report.order = staged("order_selection",
                              [&] { return model::select_order(model_series, train_design,
                                                               config.p_max); });
        p = report.order.p;
    }

    report.fit = staged("fit", [&] { return model::fit(model_series, train_design, p); });

    const auto holdout_calendar =
        restrict_calendar(bundle.calendar, start + train_length, start + n);
    const auto future_design = staged("forecast", [&] {
        return model::build_state_design(holdout_calendar, report.dus.state_map,
                                         start + train_length, holdout);
    });

    report.actuals.assign(bundle.demand.values.begin() + train_length,
                          bundle.demand.values.end());
    for (int i = 0; i < holdout; ++i) report.holdout_weeks.push_back(start + train_length + i);

    std::vector<double> last_obs(model_series.values.end() -
                                     std::min<std::size_t>(model_series.values.size(), p),
                                 model_series.values.end());
    std::optional<double> last_level;
    std::vector<double> rolling_actuals = report.actuals;
    if (model_series.differencing_applied > 0) {
        last_level = train.values.back();
        // Rolling lags live on the differenced scale.
        rolling_actuals.clear();
        double prev = train.values.back();
        for (double v : report.actuals) {
            rolling_actuals.push_back(v - prev);
            prev = v;
        }
    }
    report.fse_forecasts = staged("forecast", [&] {
        return model::forecast(report.fit, last_obs, future_design, config.forecast_mode,
                               rolling_actuals, last_level);
    });

    // Benchmark over the holdout: the provided baseline column when present,
    // otherwise a flat SES forecast fitted on the training window.
    if (bundle.baseline_forecasts &&
        static_cast<int>(bundle.baseline_forecasts->size()) >= n) {
        report.benchmark_forecasts.assign(bundle.baseline_forecasts->begin() + train_length,
                                          bundle.baseline_forecasts->end());
        report.benchmark_name = "baseline";
    } else {
        const auto ses = baselines::ses_fit(train.values);
        report.benchmark_forecasts = baselines::ses_forecast(ses, holdout);
        report.benchmark_name = "ses";
    }

    std::string improvement_benchmark = report.benchmark_name;
    std::vector<double> improvement_forecasts = report.benchmark_forecasts;
    if (bundle.adjusted_forecasts) {
        if (static_cast<int>(bundle.adjusted_forecasts->size()) < n) {
            throw ValidationError("run_case: adjusted forecasts shorter than the series");
        }
        report.adjusted_forecasts = std::vector<double>(
            bundle.adjusted_forecasts->begin() + train_length, bundle.adjusted_forecasts->end());
        improvement_benchmark = "adjusted";
        improvement_forecasts = *report.adjusted_forecasts;
    }

    report.accuracy = staged("score", [&] {
        return metrics::compare(improvement_benchmark, improvement_forecasts, "fse",
                                report.fse_forecasts, report.actuals, config.msae_variant);
    });
    if (improvement_benchmark != report.benchmark_name) {
        auto bench_score = metrics::score(report.benchmark_forecasts, report.actuals,
                                          config.msae_variant);
        report.accuracy.scores.emplace_back(report.benchmark_name, std::move(bench_score));
    }
    return report;
}

std::string render_report(const CaseReport& report) {
    std::ostringstream os;
    os << "=== Demand uplift states ===\n";
    const auto& map = report.dus.state_map;
    for (int j = 1; j <= map.state_count(); ++j) {
        const auto& st = map.states[j - 1];
        os << "State " << j << " (mean uplift " << io::format_sig6(st.mean_uplift) << ", n="
           << st.sample_count << "):";
        for (const auto& combo : st.members) os << " " << combination_to_string(combo);
        os << "\n";
    }

    os << "\n=== Fit summary ===\n";
    os << "AR order p = " << report.fit.p << ", states m = " << report.fit.m
       << ", differencing = " << report.fit.differencing_applied << "\n";
    if (!report.order.aicc_table.empty()) {
        os << "AICc by order:";
        for (const auto& [p, aicc] : report.order.aicc_table) {
            os << " p=" << p << ":" << io::format_sig6(aicc);
        }
        os << "\n";
    }
    os << "coefficient  estimate  std_error  t_stat  p_value\n";
    const auto& reg = report.fit.regression;
    std::vector<std::string> names = {"alpha0"};
    for (int i = 1; i <= report.fit.p; ++i) names.push_back("alpha" + std::to_string(i));
    for (int j = 1; j <= report.fit.m; ++j) names.push_back("beta" + std::to_string(j));
    for (std::size_t i = 0; i < reg.coefficients.size(); ++i) {
        os << names[i] << "  " << io::format_sig6(reg.coefficients[i]) << "  "
           << io::format_sig6(reg.standard_errors[i]) << "  "
           << io::format_sig6(reg.t_statistics[i]) << "  " << io::format_sig6(reg.p_values[i])
           << "\n";
    }
    os << "diagnostics: kpss=" << io::format_sig6(report.fit.kpss.statistic)
       << (report.fit.kpss.reject_at_5pct ? " (reject)" : " (stationary)")
       << ", jarque_bera_p=" << io::format_sig6(report.fit.normality.p_value.value_or(0.0))
       << ", ljung_box_p=" << io::format_sig6(report.fit.ljung_box.p_value.value_or(0.0)) << "\n";
    for (const auto& w : report.fit.warnings) os << "warning: " << w << "\n";

    os << "\n=== Accuracy (holdout, " << report.holdout_length << " weeks) ===\n";
    os << "forecaster  mae  mape  msae\n";
    for (const auto& [name, score] : report.accuracy.scores) {
        os << name << "  " << io::format_sig6(score.mae) << "  " << io::format_sig6(score.mape)
           << "  " << io::format_sig6(score.msae) << "\n";
    }
    os << "improvement (" << report.accuracy.benchmark << " -> " << report.accuracy.candidate
       << "): mae " << report.accuracy.improvements.at("mae") << "%, mape "
       << report.accuracy.improvements.at("mape") << "%, msae "
       << report.accuracy.improvements.at("msae") << "%\n";

    os << "\n=== DUS audit log ===\n";
    for (const auto& line : report.dus.audit_log) os << line << "\n";
    return os.str();
}

std::string render_series_csv(const CaseReport& report) {
    std::ostringstream os;
    os.precision(17);
    os << "week,actual,fse_forecast,benchmark_forecast,ae,re\n";
    const auto& fse_score = report.accuracy.scores.back().second;
    // scores: benchmark first, fse second (extra forecasters appended after).
    const metrics::ForecasterScore* fse = nullptr;
    for (const auto& [name, score] : report.accuracy.scores) {
        if (name == "fse") fse = &score;
    }
    if (!fse) fse = &fse_score;
    for (std::size_t i = 0; i < report.actuals.size(); ++i) {
        os << report.holdout_weeks[i] << "," << report.actuals[i] << ","
           << report.fse_forecasts[i] << "," << report.benchmark_forecasts[i] << ","
           << fse->ae_series[i] << ",";
        if (fse->re_series[i]) os << *fse->re_series[i];
        os << "\n";
    }
    return os.str();
}

std::string render_accuracy_csv(const CaseReport& report) {
    std::ostringstream os;
    os.precision(17);
    os << "forecaster,mae,mape,msae\n";
    for (const auto& [name, score] : report.accuracy.scores) {
        os << name << "," << score.mae << "," << score.mape << "," << score.msae << "\n";
    }
    os << "improvement_pct," << report.accuracy.improvements.at("mae") << ","
       << report.accuracy.improvements.at("mape") << ","
       << report.accuracy.improvements.at("msae") << "\n";
    return os.str();
}

io::DatasetBundle bundle_from_synth(const synth::SyntheticBundle& synth_bundle) {
    io::DatasetBundle bundle;
    bundle.demand = synth_bundle.demand;
    bundle.calendar = synth_bundle.calendar;
    bundle.baseline_forecasts = synth_bundle.baseline;
    bundle.factor_declarations = synth_bundle.truth.factors;
    return bundle;
}

ReplicateSummary replicate(char shape, const CaseConfig& config, int n_seeds,
                           std::uint64_t base_seed) {
    if (n_seeds < 1) throw ValidationError("replicate: n_seeds must be >= 1");

    ReplicateSummary summary;
    for (int i = 0; i < n_seeds; ++i) {
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
        const auto bundle = bundle_from_synth(
            synth::generate(synth::make_company_shaped_spec(shape, seed)));
        const auto report = run_case(bundle, config);

        ReplicateRow row;
        row.seed = seed;
        row.p_selected = report.fit.p;
        row.state_count = report.dus.state_map.state_count();
        for (const auto& [name, score] : report.accuracy.scores) {
            if (name == "fse") {
                row.fse_mae = score.mae;
                row.fse_mape = score.mape;
                row.fse_msae = score.msae;
            } else if (name == report.accuracy.benchmark) {
                row.benchmark_mae = score.mae;
                row.benchmark_mape = score.mape;
                row.benchmark_msae = score.msae;
            }
        }
        summary.rows.push_back(row);
    }

    const auto aggregate = [&](const std::string& key, auto getter) {
        std::vector<double> values;
        values.reserve(summary.rows.size());
        for (const auto& row : summary.rows) values.push_back(getter(row));
        const double mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
        std::sort(values.begin(), values.end());
        const auto quantile = [&](double q) {
            const double pos = q * (values.size() - 1);
            const std::size_t lo = static_cast<std::size_t>(pos);
            const std::size_t hi = std::min(lo + 1, values.size() - 1);
            return values[lo] + (pos - lo) * (values[hi] - values[lo]);
        };
        summary.means[key] = mean;
        summary.q10[key] = quantile(0.10);
        summary.median[key] = quantile(0.50);
        summary.q90[key] = quantile(0.90);
    };
    aggregate("fse_mae", [](const ReplicateRow& r) { return r.fse_mae; });
    aggregate("benchmark_mae", [](const ReplicateRow& r) { return r.benchmark_mae; });
    aggregate("fse_mape", [](const ReplicateRow& r) { return r.fse_mape; });
    aggregate("benchmark_mape", [](const ReplicateRow& r) { return r.benchmark_mape; });
    aggregate("fse_msae", [](const ReplicateRow& r) { return r.fse_msae; });
    aggregate("benchmark_msae", [](const ReplicateRow& r) { return r.benchmark_msae; });
    aggregate("p_selected", [](const ReplicateRow& r) { return double(r.p_selected); });
    aggregate("state_count", [](const ReplicateRow& r) { return double(r.state_count); });
    return summary;
}

std::string render_replicate_csv(const ReplicateSummary& summary) {
    std::ostringstream os;
    os.precision(17);
    os << "seed,p_selected,state_count,fse_mae,benchmark_mae,fse_mape,benchmark_mape,"
          "fse_msae,benchmark_msae\n";
    for (const auto& r : summary.rows) {
        os << r.seed << "," << r.p_selected << "," << r.state_count << "," << r.fse_mae << ","
           << r.benchmark_mae << "," << r.fse_mape << "," << r.benchmark_mape << ","
           << r.fse_msae << "," << r.benchmark_msae << "\n";
    }
    os << "\nmetric,mean,q10,median,q90\n";
    for (const auto& [key, mean] : summary.means) {
        os << key << "," << mean << "," << summary.q10.at(key) << "," << summary.median.at(key)
           << "," << summary.q90.at(key) << "\n";
    }
    return os.str();
}

}  // namespace fse::harness
