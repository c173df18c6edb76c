#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "fse/harness.hpp"
#include "fse/metrics.hpp"
#include "fse/synth.hpp"

using namespace fse;

namespace {

io::DatasetBundle shape_a_bundle(std::uint64_t seed) {
    return harness::bundle_from_synth(synth::generate(synth::make_company_shaped_spec('A', seed)));
}

}  // namespace

TEST_CASE("run_case on a promotion-heavy series") {
    const auto bundle = shape_a_bundle(2);
    const auto report = harness::run_case(bundle, harness::CaseConfig{});

    CHECK(report.train_length == 80);
    CHECK(report.holdout_length == 20);
    CHECK(report.dus.state_map.state_count() == 5);
    CHECK(report.fit.m == 5);
    CHECK(report.fse_forecasts.size() == 20);
    CHECK(report.benchmark_forecasts.size() == 20);
    CHECK(report.benchmark_name == "baseline");  // the bundle provides one

    // The candidate sees the promotion calendar; the benchmark does not.
    const auto& scores = report.accuracy.scores;
    REQUIRE(scores.size() == 2);
    CHECK(scores[0].first == "baseline");
    CHECK(scores[1].first == "fse");
    CHECK(scores[1].second.mae < scores[0].second.mae);

    // The improvement column is recomputable from its own error columns.
    CHECK(report.accuracy.improvements.at("mae") ==
          metrics::improvement(scores[0].second.mae, scores[1].second.mae));
    CHECK(report.accuracy.improvements.at("mape") ==
          metrics::improvement(scores[0].second.mape, scores[1].second.mape));
    CHECK(report.accuracy.improvements.at("msae") ==
          metrics::improvement(scores[0].second.msae, scores[1].second.msae));
}

TEST_CASE("run_case falls back to an internal SES benchmark") {
    auto bundle = shape_a_bundle(6);
    bundle.baseline_forecasts.reset();
    const auto report = harness::run_case(bundle, harness::CaseConfig{});
    CHECK(report.benchmark_name == "ses");
    CHECK_FALSE(report.adjusted_forecasts.has_value());
    // Flat forecast: every benchmark entry is the same level.
    for (double f : report.benchmark_forecasts) {
        CHECK(f == report.benchmark_forecasts.front());
    }
}

TEST_CASE("run_case scores against adjusted forecasts when provided") {
    auto bundle = shape_a_bundle(12);
    // A crude judgmental overlay: baseline plus a constant.
    std::vector<double> adjusted = *bundle.baseline_forecasts;
    for (auto& v : adjusted) v += 100.0;
    bundle.adjusted_forecasts = adjusted;

    const auto report = harness::run_case(bundle, harness::CaseConfig{});
    CHECK(report.accuracy.benchmark == "adjusted");
    REQUIRE(report.adjusted_forecasts.has_value());
    // Scores list the improvement benchmark, the candidate, then the
    // provided baseline for reference.
    REQUIRE(report.accuracy.scores.size() == 3);
    CHECK(report.accuracy.scores[0].first == "adjusted");
    CHECK(report.accuracy.scores[1].first == "fse");
    CHECK(report.accuracy.scores[2].first == "baseline");
}

TEST_CASE("run_case validates the split") {
    const auto bundle = shape_a_bundle(3);
    harness::CaseConfig config;
    config.train_length = 100;
    CHECK_THROWS_AS(harness::run_case(bundle, config), ValidationError);
    config.train_length = 0;
    CHECK_THROWS_AS(harness::run_case(bundle, config), ValidationError);
}

TEST_CASE("stage errors carry the stage name") {
    auto bundle = shape_a_bundle(4);
    // Flatten the uplifts so no factor is significant in the training window.
    for (const auto& [week, combo] : bundle.calendar.events) {
        if (week < 80) {
            bundle.demand.values[week] = (*bundle.baseline_forecasts)[week] + 50.0;
        }
    }
    try {
        harness::run_case(bundle, harness::CaseConfig{});
        FAIL("expected StatError");
    } catch (const StatError& e) {
        CHECK(std::string(e.what()).find("[stage dus]") != std::string::npos);
    }
}

TEST_CASE("reports are byte-identical across reruns") {
    const auto bundle = shape_a_bundle(5);
    const auto r1 = harness::run_case(bundle, harness::CaseConfig{});
    const auto r2 = harness::run_case(bundle, harness::CaseConfig{});
    CHECK(harness::render_report(r1) == harness::render_report(r2));
    CHECK(harness::render_series_csv(r1) == harness::render_series_csv(r2));
    CHECK(harness::render_accuracy_csv(r1) == harness::render_accuracy_csv(r2));
}

TEST_CASE("holdout data never leaks into the training stages") {
    const auto clean = shape_a_bundle(7);
    auto perturbed = clean;
    for (int t = 80; t < 100; ++t) perturbed.demand.values[t] += 500.0;

    const auto r1 = harness::run_case(clean, harness::CaseConfig{});
    const auto r2 = harness::run_case(perturbed, harness::CaseConfig{});

    CHECK(r1.dus.state_map.combination_index == r2.dus.state_map.combination_index);
    for (int j = 0; j < r1.dus.state_map.state_count(); ++j) {
        CHECK(r1.dus.state_map.states[j].mean_uplift ==
              r2.dus.state_map.states[j].mean_uplift);
    }
    CHECK(r1.fit.regression.coefficients == r2.fit.regression.coefficients);
    CHECK(r1.order.aicc_table == r2.order.aicc_table);
    // Recursive forecasts depend only on the training window, so they agree
    // too; only actuals and scores change.
    CHECK(r1.fse_forecasts == r2.fse_forecasts);
    CHECK(r1.accuracy.scores[1].second.mae != r2.accuracy.scores[1].second.mae);
}

TEST_CASE("series CSV carries the holdout rows") {
    const auto report = harness::run_case(shape_a_bundle(9), harness::CaseConfig{});
    const auto csv = harness::render_series_csv(report);
    CHECK(csv.rfind("week,actual,fse_forecast,benchmark_forecast,ae,re\n", 0) == 0);
    int lines = 0;
    for (char c : csv) {
        if (c == '\n') ++lines;
    }
    CHECK(lines == 21);  // header + 20 holdout weeks
}

TEST_CASE("replicate with one seed equals the single run") {
    harness::CaseConfig config;
    const auto summary = harness::replicate('A', config, 1, 2);
    REQUIRE(summary.rows.size() == 1);

    const auto report = harness::run_case(shape_a_bundle(2), config);
    const auto& fse = report.accuracy.scores[1].second;
    const auto& bench = report.accuracy.scores[0].second;
    CHECK(summary.rows[0].fse_mae == fse.mae);
    CHECK(summary.rows[0].benchmark_mae == bench.mae);
    CHECK(summary.rows[0].p_selected == report.fit.p);
    CHECK(summary.rows[0].state_count == report.dus.state_map.state_count());
    CHECK(summary.means.at("fse_mae") == fse.mae);
    CHECK(summary.q10.at("fse_mae") == fse.mae);
    CHECK(summary.q90.at("fse_mae") == fse.mae);
}

TEST_CASE("replicate aggregates match a direct recomputation") {
    harness::CaseConfig config;
    const auto summary = harness::replicate('A', config, 5, 30);
    REQUIRE(summary.rows.size() == 5);
    double mean = 0.0;
    for (const auto& row : summary.rows) mean += row.fse_mae;
    mean /= 5.0;
    CHECK(summary.means.at("fse_mae") == doctest::Approx(mean).epsilon(1e-12));

    std::vector<double> maes;
    for (const auto& row : summary.rows) maes.push_back(row.fse_mae);
    std::sort(maes.begin(), maes.end());
    CHECK(summary.median.at("fse_mae") == doctest::Approx(maes[2]).epsilon(1e-12));

    CHECK_THROWS_AS(harness::replicate('A', config, 0, 1), ValidationError);
}
