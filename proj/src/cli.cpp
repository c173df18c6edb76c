#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "fse/baselines.hpp"
#include "fse/harness.hpp"
#include "fse/io.hpp"
#include "fse/model.hpp"
#include "fse/synth.hpp"

namespace fse::io {

namespace {

namespace fs = std::filesystem;

struct BundlePaths {
    std::string demand;
    std::string calendar;
    std::string forecasts;  // optional; empty means absent
    std::string factors;
};

void add_bundle_options(CLI::App* cmd, BundlePaths& paths) {
    cmd->add_option("--demand", paths.demand, "demand.csv path")->required();
    cmd->add_option("--calendar", paths.calendar, "calendar.csv path")->required();
    cmd->add_option("--forecasts", paths.forecasts, "forecasts.csv path (optional)");
    cmd->add_option("--factors", paths.factors, "factors.csv path")->required();
}

DatasetBundle load_from(const BundlePaths& paths) {
    std::optional<fs::path> forecasts;
    if (!paths.forecasts.empty()) forecasts = paths.forecasts;
    return load_bundle(paths.demand, paths.calendar, forecasts, paths.factors);
}

harness::CaseConfig to_case_config(const RunConfig& cfg) {
    harness::CaseConfig out;
    out.train_length = cfg.train_length;
    out.dus_alpha = cfg.alpha;
    out.merge.test_alpha = cfg.alpha;
    out.merge.fallback_rel_tol = cfg.fallback_rel_tol;
    out.p_max = cfg.p_max;
    out.forecast_mode = cfg.forecast_mode == "rolling" ? model::ForecastMode::Rolling
                                                       : model::ForecastMode::Recursive;
    out.msae_variant = cfg.msae_variant == "mean_of_shares" ? metrics::MsaeVariant::MeanOfShares
                                                           : metrics::MsaeVariant::RatioOfSums;
    return out;
}

RunConfig load_config(const std::string& path) {
    if (path.empty()) return RunConfig{};
    return parse_config(path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string audit_text(const std::vector<std::string>& lines) {
    std::ostringstream os;
    for (const auto& line : lines) os << line << "\n";
    return os.str();
}

}  // namespace

int run_command(int argc, const char* const* argv) {
    CLI::App app{"DUS/FSE demand forecasting toolkit"};
    app.require_subcommand(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic bundle");
    std::string sim_shape = "A";
    std::uint64_t sim_seed = 1;
    std::string sim_out;
    simulate->add_option("--shape", sim_shape, "case shape: A or B")
        ->check(CLI::IsMember({"A", "B"}));
    simulate->add_option("--seed", sim_seed, "generator seed");
    simulate->add_option("--out-dir", sim_out, "output directory")->required();

    // dus
    auto* dus_cmd = app.add_subcommand("dus", "run the uplift-state construction");
    BundlePaths dus_paths;
    std::string dus_config_path, dus_out;
    add_bundle_options(dus_cmd, dus_paths);
    dus_cmd->add_option("--config", dus_config_path, "config file");
    dus_cmd->add_option("--out-dir", dus_out, "output directory")->required();

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "fit the state-regression model");
    BundlePaths fit_paths;
    std::string fit_state_map, fit_config_path, fit_out;
    add_bundle_options(fit_cmd, fit_paths);
    fit_cmd->add_option("--state-map", fit_state_map, "statemap.json path")->required();
    fit_cmd->add_option("--config", fit_config_path, "config file");
    fit_cmd->add_option("--out-dir", fit_out, "output directory")->required();

    // forecast
    auto* fc_cmd = app.add_subcommand("forecast", "forecast from a serialized fit");
    std::string fc_fit, fc_calendar, fc_factors, fc_state_map, fc_demand, fc_out;
    int fc_horizon = 0;
    fc_cmd->add_option("--fit", fc_fit, "fit.json path")->required();
    fc_cmd->add_option("--calendar", fc_calendar, "future calendar.csv")->required();
    fc_cmd->add_option("--factors", fc_factors, "factors.csv path")->required();
    fc_cmd->add_option("--state-map", fc_state_map, "statemap.json path")->required();
    fc_cmd->add_option("--demand", fc_demand, "historical demand.csv (lag values)")->required();
    fc_cmd->add_option("--horizon", fc_horizon, "forecast horizon")->required();
    fc_cmd->add_option("--out-dir", fc_out, "output directory")->required();

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "train/test evaluation run");
    BundlePaths eval_paths;
    std::string eval_config_path, eval_out;
    add_bundle_options(eval_cmd, eval_paths);
    eval_cmd->add_option("--config", eval_config_path, "config file");
    eval_cmd->add_option("--out-dir", eval_out, "output directory")->required();

    // replicate
    auto* rep_cmd = app.add_subcommand("replicate", "multi-seed synthetic evaluation");
    std::string rep_shape = "A", rep_config_path, rep_out;
    int rep_seeds = 1;
    std::uint64_t rep_base_seed = 1;
    rep_cmd->add_option("--shape", rep_shape, "case shape: A or B")
        ->check(CLI::IsMember({"A", "B"}));
    rep_cmd->add_option("--seeds", rep_seeds, "number of seeds")->required();
    rep_cmd->add_option("--base-seed", rep_base_seed, "first seed");
    rep_cmd->add_option("--config", rep_config_path, "config file");
    rep_cmd->add_option("--out-dir", rep_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed()) {
            const auto spec = synth::make_company_shaped_spec(sim_shape[0], sim_seed);
            const auto bundle = harness::bundle_from_synth(synth::generate(spec));
            save_bundle(bundle, sim_out);
            write_file_atomic(fs::path(sim_out) / "truth_statemap.json",
                              state_map_to_json(spec.state_map));
            std::cout << "wrote bundle to " << sim_out << "\n";
            return 0;
        }

        if (dus_cmd->parsed()) {
            const auto bundle = load_from(dus_paths);
            const auto cfg = load_config(dus_config_path);
            std::vector<double> baseline;
            if (bundle.baseline_forecasts) {
                baseline = *bundle.baseline_forecasts;
            } else {
                const auto ses = baselines::ses_fit(bundle.demand.values);
                baseline = baselines::ses_one_step_forecasts(bundle.demand.values, ses.alpha);
            }
            dus::DusConfig dus_config;
            dus_config.anova_alpha = cfg.alpha;
            dus_config.merge.test_alpha = cfg.alpha;
            dus_config.merge.fallback_rel_tol = cfg.fallback_rel_tol;
            const auto result = dus::run_dus(bundle.demand, baseline, bundle.calendar,
                                             bundle.factor_declarations, dus_config);
            fs::create_directories(dus_out);
            write_file_atomic(fs::path(dus_out) / "statemap.json",
                              state_map_to_json(result.state_map));
            write_file_atomic(fs::path(dus_out) / "dus_audit.txt", audit_text(result.audit_log));
            std::cout << result.state_map.state_count() << " states from "
                      << result.state_map.combination_count() << " combinations\n";
            return 0;
        }

        if (fit_cmd->parsed()) {
            const auto bundle = load_from(fit_paths);
            const auto cfg = load_config(fit_config_path);
            const auto state_map = state_map_from_json(read_text_file(fit_state_map));
            const auto stationary = model::check_stationarity_and_difference(bundle.demand);
            const auto design = model::build_state_design(
                bundle.calendar, state_map, stationary.series.start_week,
                static_cast<int>(stationary.series.values.size()));
            const auto order = model::select_order(stationary.series, design, cfg.p_max);
            const auto fit = model::fit(stationary.series, design, order.p);
            fs::create_directories(fit_out);
            write_file_atomic(fs::path(fit_out) / "fit.json", model::serialize(fit));
            std::cout << "fitted p=" << fit.p << " m=" << fit.m
                      << " aicc=" << format_sig6(fit.aicc) << "\n";
            return 0;
        }

        if (fc_cmd->parsed()) {
            const auto fit = model::deserialize(read_text_file(fc_fit));
            const auto state_map = state_map_from_json(read_text_file(fc_state_map));
            const auto factors = load_factors(fc_factors);
            const auto demand = load_demand(fc_demand);
            const auto future_calendar = load_calendar(fc_calendar, factors);
            if (fc_horizon <= 0) throw ValidationError("forecast: horizon must be positive");

            const int first_future = demand.start_week +
                                     static_cast<int>(demand.values.size());
            const auto design = model::build_state_design(future_calendar, state_map,
                                                          first_future, fc_horizon);

            std::vector<double> model_values = demand.values;
            std::optional<double> last_level;
            for (int d = 0; d < fit.differencing_applied; ++d) {
                last_level = model_values.back();
                std::vector<double> diffed(model_values.size() - 1);
                for (std::size_t t = 1; t < model_values.size(); ++t) {
                    diffed[t - 1] = model_values[t] - model_values[t - 1];
                }
                model_values = std::move(diffed);
            }
            if (static_cast<int>(model_values.size()) < fit.p) {
                throw ValidationError("forecast: demand history shorter than the AR order");
            }
            std::vector<double> last_obs(model_values.end() - fit.p, model_values.end());
            const auto forecasts = model::forecast(fit, last_obs, design,
                                                   model::ForecastMode::Recursive, {},
                                                   last_level);

            std::ostringstream os;
            os.precision(17);
            os << "week,forecast\n";
            for (int i = 0; i < fc_horizon; ++i) {
                os << first_future + i << "," << forecasts[i] << "\n";
            }
            fs::create_directories(fc_out);
            write_file_atomic(fs::path(fc_out) / "forecast.csv", os.str());
            std::cout << "wrote " << fc_horizon << " forecasts\n";
            return 0;
        }

        if (eval_cmd->parsed()) {
            const auto bundle = load_from(eval_paths);
            const auto cfg = load_config(eval_config_path);
            const auto report = harness::run_case(bundle, to_case_config(cfg));
            fs::create_directories(eval_out);
            write_file_atomic(fs::path(eval_out) / "report.txt", harness::render_report(report));
            write_file_atomic(fs::path(eval_out) / "series.csv",
                              harness::render_series_csv(report));
            write_file_atomic(fs::path(eval_out) / "accuracy.csv",
                              harness::render_accuracy_csv(report));
            write_file_atomic(fs::path(eval_out) / "statemap.json",
                              state_map_to_json(report.dus.state_map));
            write_file_atomic(fs::path(eval_out) / "fit.json", model::serialize(report.fit));
            write_file_atomic(fs::path(eval_out) / "dus_audit.txt",
                              audit_text(report.dus.audit_log));
            std::cout << harness::render_report(report);
            return 0;
        }

        if (rep_cmd->parsed()) {
            const auto cfg = load_config(rep_config_path);
            const auto summary = harness::replicate(rep_shape[0], to_case_config(cfg), rep_seeds,
                                                    rep_base_seed);
            fs::create_directories(rep_out);
            write_file_atomic(fs::path(rep_out) / "replicate.csv",
                              harness::render_replicate_csv(summary));
            std::cout << "mean fse_mae=" << format_sig6(summary.means.at("fse_mae"))
                      << " benchmark_mae=" << format_sig6(summary.means.at("benchmark_mae"))
                      << "\n";
            return 0;
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const StatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace fse::io
