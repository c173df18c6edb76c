#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fse/metrics.hpp"
#include "fse/rng.hpp"

using namespace fse;

TEST_CASE("mae basics") {
    CHECK(metrics::mae(std::vector<double>{10, 12}, std::vector<double>{10, 10}) == 1.0);
    const std::vector<double> same = {3.0, -1.0, 7.5};
    CHECK(metrics::mae(same, same) == 0.0);
    CHECK_THROWS_AS(metrics::mae(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}),
                    ValidationError);
    CHECK_THROWS_AS(metrics::mae(std::vector<double>{}, std::vector<double>{}), ValidationError);
}

TEST_CASE("mape basics and zero-actual policy") {
    CHECK(metrics::mape(std::vector<double>{110}, std::vector<double>{100}) == 10.0);
    // Zero actual excluded by default: only the second period counts.
    CHECK(metrics::mape(std::vector<double>{5, 110}, std::vector<double>{0, 100}) == 10.0);
    CHECK_THROWS_AS(metrics::mape(std::vector<double>{5, 110}, std::vector<double>{0, 100},
                                  metrics::ZeroPolicy::Error),
                    ValidationError);
    CHECK_THROWS_AS(metrics::mape(std::vector<double>{5}, std::vector<double>{0}),
                    ValidationError);
}

TEST_CASE("msae variants") {
    const std::vector<double> same = {4.0, 5.0};
    CHECK(metrics::msae(same, same, metrics::MsaeVariant::RatioOfSums) == 0.0);
    CHECK(metrics::msae(same, same, metrics::MsaeVariant::MeanOfShares) == 0.0);
    const std::vector<double> f = {2.0, 2.0};
    const std::vector<double> x = {1.0, 1.0};
    CHECK(metrics::msae(f, x, metrics::MsaeVariant::RatioOfSums) == 1.0);
    CHECK(metrics::msae(f, x, metrics::MsaeVariant::MeanOfShares) == 0.5);
    CHECK_THROWS_AS(metrics::msae(f, std::vector<double>{0.0, 0.0}), ValidationError);
}

TEST_CASE("ae/re series") {
    const auto [ae, re] = metrics::ae_re_series(std::vector<double>{90}, std::vector<double>{100});
    CHECK(ae[0] == 10.0);
    CHECK(*re[0] == doctest::Approx(-0.10));
    const auto [ae2, re2] =
        metrics::ae_re_series(std::vector<double>{7, 3}, std::vector<double>{7, 0});
    CHECK(ae2[0] == 0.0);
    CHECK(*re2[0] == 0.0);
    CHECK(ae2[1] == 3.0);
    CHECK_FALSE(re2[1].has_value());  // undefined at a zero actual
}

TEST_CASE("improvement percentages") {
    CHECK(metrics::improvement(622.25, 328.54) == 47);
    CHECK(metrics::improvement(0.18, 0.11) == 39);
    CHECK(metrics::improvement(47.11, 41.70) == 11);
    CHECK(metrics::improvement(0.32, 0.13) == 59);
    CHECK(metrics::improvement(30.88, 13.62) == 56);
    CHECK(metrics::improvement(48.60, 41.65) == 14);
    CHECK(metrics::improvement(5.0, 5.0) == 0);
    // Round half away from zero, both directions.
    CHECK(metrics::improvement(200.0, 199.0) == 1);
    CHECK(metrics::improvement(200.0, 201.0) == -1);
    CHECK(metrics::improvement(200.0, 100.0 + 1e-9) == 50);
    CHECK_THROWS_AS(metrics::improvement(0.0, 1.0), ValidationError);
}

TEST_CASE("metric identities on random pairs") {
    Rng rng(99);
    for (int rep = 0; rep < 200; ++rep) {
        const int n = 5 + static_cast<int>(rng.uniform() * 30);
        std::vector<double> f(n), x(n);
        for (int i = 0; i < n; ++i) {
            x[i] = 10.0 + 5.0 * rng.uniform();
            f[i] = x[i] + 3.0 * rng.normal();
        }
        double total = 0.0;
        for (double v : x) total += v;

        // msae(ratio_of_sums) = mae * n / sum(x).
        CHECK(std::fabs(metrics::msae(f, x) - metrics::mae(f, x) * n / total) < 1e-12);

        // Joint positive scaling: MAE scales, MSAE/MAPE invariant.
        const double c = 0.5 + 4.0 * rng.uniform();
        std::vector<double> fc = f, xc = x;
        for (auto& v : fc) v *= c;
        for (auto& v : xc) v *= c;
        CHECK(metrics::mae(fc, xc) == doctest::Approx(c * metrics::mae(f, x)).epsilon(1e-12));
        CHECK(metrics::msae(fc, xc) == doctest::Approx(metrics::msae(f, x)).epsilon(1e-12));
        CHECK(metrics::mape(fc, xc) == doctest::Approx(metrics::mape(f, x)).epsilon(1e-12));

        // AE/RE match the elementwise definition, and mae >= |mean error|.
        const auto [ae, re] = metrics::ae_re_series(f, x);
        double signed_sum = 0.0;
        for (int i = 0; i < n; ++i) {
            CHECK(ae[i] == std::fabs(f[i] - x[i]));
            CHECK(*re[i] == (f[i] - x[i]) / x[i]);
            signed_sum += f[i] - x[i];
        }
        CHECK(metrics::mae(f, x) >= std::fabs(signed_sum / n) - 1e-12);

        // Joint permutation invariance.
        std::vector<double> fp(f.rbegin(), f.rend());
        std::vector<double> xp(x.rbegin(), x.rend());
        CHECK(metrics::mae(fp, xp) == doctest::Approx(metrics::mae(f, x)).epsilon(1e-12));
        CHECK(metrics::mape(fp, xp) == doctest::Approx(metrics::mape(f, x)).epsilon(1e-12));
    }
}

TEST_CASE("compare builds a self-consistent accuracy report") {
    const std::vector<double> actuals = {100, 120, 90, 150};
    const std::vector<double> bench = {80, 100, 120, 100};
    const std::vector<double> cand = {95, 118, 95, 140};
    const auto report = metrics::compare("bench", bench, "cand", cand, actuals);
    REQUIRE(report.scores.size() == 2);
    CHECK(report.scores[0].first == "bench");
    CHECK(report.scores[1].first == "cand");
    const auto& b = report.scores[0].second;
    const auto& c = report.scores[1].second;
    CHECK(report.improvements.at("mae") == metrics::improvement(b.mae, c.mae));
    CHECK(report.improvements.at("mape") == metrics::improvement(b.mape, c.mape));
    CHECK(report.improvements.at("msae") == metrics::improvement(b.msae, c.msae));
}
