#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fse/rng.hpp"
#include "fse/stats.hpp"
#include "oracles.hpp"

using namespace fse;

namespace {

Eigen::MatrixXd to_eigen(const std::vector<std::vector<double>>& rows) {
    Eigen::MatrixXd m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
    }
    return m;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    Eigen::VectorXd out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out(i) = v[i];
    return out;
}

}  // namespace

TEST_CASE("regularized incomplete gamma: complementarity and known values") {
    for (double a : {0.5, 1.0, 2.5, 7.0, 30.0}) {
        for (double x : {0.1, 0.5, 1.0, 3.0, 10.0, 40.0}) {
            CHECK(stats::gamma_p(a, x) + stats::gamma_q(a, x) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    // P(1/2, x) = erf(sqrt(x)).
    for (double x : {0.04, 0.25, 1.0, 4.0}) {
        CHECK(stats::gamma_p(0.5, x) == doctest::Approx(std::erf(std::sqrt(x))).epsilon(1e-12));
    }
    // P(1, x) = 1 - exp(-x).
    CHECK(stats::gamma_p(1.0, 2.0) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-12));
    CHECK(stats::gamma_p(2.0, 0.0) == 0.0);
    CHECK(stats::gamma_q(2.0, 0.0) == 1.0);
    CHECK_THROWS_AS(stats::gamma_p(-1.0, 1.0), ValidationError);
}

TEST_CASE("regularized incomplete beta: boundary and symmetry") {
    CHECK(stats::incomplete_beta(2.0, 3.0, 0.0) == 0.0);
    CHECK(stats::incomplete_beta(2.0, 3.0, 1.0) == 1.0);
    for (double a : {0.5, 2.0, 6.0}) {
        for (double b : {1.0, 3.5, 9.0}) {
            for (double x : {0.1, 0.37, 0.5, 0.82}) {
                CHECK(stats::incomplete_beta(a, b, x) ==
                      doctest::Approx(1.0 - stats::incomplete_beta(b, a, 1.0 - x)).epsilon(1e-12));
            }
        }
    }
    // I_x(1, b) = 1 - (1-x)^b.
    CHECK(stats::incomplete_beta(1.0, 4.0, 0.3) ==
          doctest::Approx(1.0 - std::pow(0.7, 4.0)).epsilon(1e-12));
}

TEST_CASE("tail probabilities against independent oracles") {
    for (double z : {-2.0, -0.5, 0.0, 1.0, 1.959963984540054, 3.0}) {
        CHECK(stats::tail_probability(stats::Dist::Normal, z) ==
              doctest::Approx(oracle::normal_upper_tail(z)).epsilon(1e-12));
    }
    // Student t upper tails via quadrature of the density.
    for (double df : {5.0, 12.0, 30.0}) {
        for (double t : {0.0, 0.7, 1.5, 2.8, 4.0}) {
            CHECK(stats::tail_probability(stats::Dist::StudentT, t, df) ==
                  doctest::Approx(oracle::t_upper_tail(t, df)).epsilon(1e-6));
        }
    }
    // Chi-squared: the 5% critical value for 1 df is 3.8415 (= z_{0.975}^2).
    CHECK(stats::tail_probability(stats::Dist::ChiSquared, 3.841458820694124, 1.0) ==
          doctest::Approx(0.05).epsilon(1e-8));
    // F(1, df) tail at t^2 equals the two-sided t tail.
    for (double df : {6.0, 20.0}) {
        for (double t : {0.9, 2.1}) {
            CHECK(stats::tail_probability(stats::Dist::F, t * t, 1.0, df) ==
                  doctest::Approx(2.0 * stats::tail_probability(stats::Dist::StudentT, t, df))
                      .epsilon(1e-10));
        }
    }
}

TEST_CASE("tail probabilities are monotone nonincreasing in the statistic") {
    const std::vector<double> grid = {-3.0, -1.0, 0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 20.0};
    for (std::size_t i = 1; i < grid.size(); ++i) {
        CHECK(stats::tail_probability(stats::Dist::Normal, grid[i]) <=
              stats::tail_probability(stats::Dist::Normal, grid[i - 1]));
        CHECK(stats::tail_probability(stats::Dist::StudentT, grid[i], 7.0) <=
              stats::tail_probability(stats::Dist::StudentT, grid[i - 1], 7.0));
        CHECK(stats::tail_probability(stats::Dist::ChiSquared, grid[i], 3.0) <=
              stats::tail_probability(stats::Dist::ChiSquared, grid[i - 1], 3.0));
        CHECK(stats::tail_probability(stats::Dist::F, grid[i], 2.0, 9.0) <=
              stats::tail_probability(stats::Dist::F, grid[i - 1], 2.0, 9.0));
    }
}

TEST_CASE("ols_fit matches a normal-equations oracle") {
    Rng rng(42);
    const int n = 60;
    const int k = 4;
    std::vector<std::vector<double>> x(n, std::vector<double>(k));
    std::vector<double> y(n);
    for (int r = 0; r < n; ++r) {
        x[r][0] = 1.0;
        for (int c = 1; c < k; ++c) x[r][c] = 3.0 * rng.normal() + (c == 2 ? 10.0 : 0.0);
        y[r] = 2.0 + 0.5 * x[r][1] - 1.25 * x[r][2] + 0.1 * x[r][3] + rng.normal();
    }
    const auto fit = stats::ols_fit(to_eigen(x), to_eigen(y));
    const auto ref = oracle::ols_normal_equations(x, y);
    REQUIRE(fit.coefficients.size() == static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
        CHECK(fit.coefficients[c] == doctest::Approx(ref.coefficients[c]).epsilon(1e-8));
        CHECK(fit.standard_errors[c] == doctest::Approx(ref.standard_errors[c]).epsilon(1e-8));
    }
    CHECK(fit.sse == doctest::Approx(ref.sse).epsilon(1e-9));

    // Fitted + residuals reconstruct the response; residuals orthogonal to
    // every design column.
    double resid_norm = 0.0;
    for (double r : fit.residuals) resid_norm += r * r;
    resid_norm = std::sqrt(resid_norm);
    for (int c = 0; c < k; ++c) {
        double dot = 0.0;
        double col_norm = 0.0;
        for (int r = 0; r < n; ++r) {
            dot += x[r][c] * fit.residuals[r];
            col_norm += x[r][c] * x[r][c];
        }
        CHECK(std::fabs(dot) < 1e-6 * std::sqrt(col_norm) * std::max(resid_norm, 1.0));
    }
    for (int r = 0; r < n; ++r) {
        double fitted = 0.0;
        for (int c = 0; c < k; ++c) fitted += x[r][c] * fit.coefficients[c];
        CHECK(fitted + fit.residuals[r] == doctest::Approx(y[r]).epsilon(1e-9));
    }
}

TEST_CASE("ols_fit rejects degenerate problems") {
    // n <= k.
    Eigen::MatrixXd tall(3, 3);
    tall.setIdentity();
    CHECK_THROWS_AS(stats::ols_fit(tall, Eigen::VectorXd::Zero(3)), ValidationError);

    // Duplicate column -> rank deficiency naming the collinear column.
    Eigen::MatrixXd x(10, 3);
    Rng rng(7);
    for (int r = 0; r < 10; ++r) {
        x(r, 0) = 1.0;
        x(r, 1) = rng.normal();
        x(r, 2) = 2.0 * x(r, 1);
    }
    try {
        stats::ols_fit(x, Eigen::VectorXd::Ones(10), {"intercept", "slope", "slope_copy"});
        FAIL("expected StatError");
    } catch (const StatError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("rank-deficient") != std::string::npos);
        const bool names_one = msg.find("slope") != std::string::npos;
        CHECK(names_one);
    }
}

TEST_CASE("kpss: degenerate, shift invariance, and typical decisions") {
    const std::vector<double> constant(50, 7.0);
    const auto degen = stats::kpss_test(constant);
    CHECK(degen.statistic == 0.0);
    CHECK_FALSE(degen.reject_at_5pct);
    CHECK(degen.degenerate);

    Rng rng(11);
    std::vector<double> noise(200);
    for (auto& v : noise) v = rng.normal();
    const auto base = stats::kpss_test(noise);
    CHECK_FALSE(base.reject_at_5pct);  // white noise is level-stationary

    std::vector<double> shifted = noise;
    for (auto& v : shifted) v += 1234.5;
    const auto shift = stats::kpss_test(shifted);
    CHECK(shift.statistic == doctest::Approx(base.statistic).epsilon(1e-12));

    std::vector<double> walk(200);
    double acc = 0.0;
    for (auto& v : walk) {
        acc += rng.normal();
        v = acc;
    }
    CHECK(stats::kpss_test(walk).reject_at_5pct);

    CHECK_THROWS_AS(stats::kpss_test(std::vector<double>(5, 1.0)), ValidationError);
}

TEST_CASE("ljung_box: zero autocorrelation, scale invariance, AR residuals") {
    // A zero-mean series where every adjacent product is zero: Q = 0 at lag 1.
    std::vector<double> spaced;
    for (int i = 0; i < 20; ++i) {
        spaced.push_back(i % 4 == 0 ? 1.0 : (i % 4 == 2 ? -1.0 : 0.0));
    }
    const auto zero = stats::ljung_box(spaced, 1, 0);
    CHECK(zero.statistic == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(*zero.p_value == doctest::Approx(1.0).epsilon(1e-12));

    Rng rng(3);
    std::vector<double> ar(200);
    double prev = 0.0;
    for (auto& v : ar) {
        prev = 0.8 * prev + rng.normal();
        v = prev;
    }
    const auto strong = stats::ljung_box(ar, 10, 0);
    CHECK(*strong.p_value < 0.01);

    std::vector<double> scaled = ar;
    for (auto& v : scaled) v *= 37.5;
    const auto rescaled = stats::ljung_box(scaled, 10, 0);
    CHECK(rescaled.statistic == doctest::Approx(strong.statistic).epsilon(1e-9));
    CHECK(rescaled.meta.at("df") == 10.0);

    CHECK_THROWS_AS(stats::ljung_box(std::vector<double>(30, 2.0), 5, 0), StatError);
    CHECK_THROWS_AS(stats::ljung_box(ar, 5, 5), ValidationError);
}

TEST_CASE("normality test: constructed zero statistic and clear rejection") {
    // Symmetric sample whose fourth standardized moment is exactly 3:
    // values {±a, ±1, ±1, ±1} with a^4 - 18 a^2 - 15 = 0.
    const double a2 = (18.0 + std::sqrt(324.0 + 60.0)) / 2.0;
    const double a = std::sqrt(a2);
    const std::vector<double> tuned = {-a, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, a};
    const auto flat = stats::normality_test(tuned);
    CHECK(flat.statistic == doctest::Approx(0.0).epsilon(1e-9));

    Rng rng(5);
    std::vector<double> expo(500);
    for (auto& v : expo) v = -std::log(1.0 - rng.uniform());
    CHECK(stats::normality_test(expo).reject_at_5pct);

    std::vector<double> gauss(500);
    for (auto& v : gauss) v = rng.normal();
    CHECK_FALSE(stats::normality_test(gauss).reject_at_5pct);

    CHECK_THROWS_AS(stats::normality_test(std::vector<double>(20, 1.0)), StatError);
    CHECK_THROWS_AS(stats::normality_test(std::vector<double>{1, 2, 3}), ValidationError);
}

TEST_CASE("anova screen: flat response, perfect separation, textbook oracle") {
    std::map<std::string, std::vector<std::string>> two_factors = {
        {"f1", {"a", "a", "b", "b", "a", "b"}},
        {"f2", {"x", "y", "x", "y", "y", "x"}},
    };
    const std::vector<double> flat(6, 4.0);
    for (const auto& screen : stats::anova_factor_screen(flat, two_factors)) {
        CHECK(screen.f_stat == 0.0);
        CHECK(screen.p_value == 1.0);
    }

    std::map<std::string, std::vector<std::string>> one_factor = {
        {"g", {"a", "a", "a", "b", "b", "b"}}};
    const std::vector<double> separated = {0, 0, 0, 10, 10, 10};
    const auto sep = stats::anova_factor_screen(separated, one_factor);
    REQUIRE(sep.size() == 1);
    CHECK(sep[0].p_value <= 1e-12);

    // One-way layout: F equals the between/within mean-square ratio.
    Rng rng(19);
    std::vector<std::vector<double>> groups(3);
    std::vector<double> responses;
    std::vector<std::string> labels;
    const double means[3] = {1.0, 2.5, 2.0};
    const char* names[3] = {"g1", "g2", "g3"};
    for (int g = 0; g < 3; ++g) {
        for (int i = 0; i < 7; ++i) {
            const double v = means[g] + rng.normal();
            groups[g].push_back(v);
            responses.push_back(v);
            labels.push_back(names[g]);
        }
    }
    const auto screens =
        stats::anova_factor_screen(responses, {{"group", labels}});
    const auto ref = oracle::one_way_anova(groups);
    REQUIRE(screens.size() == 1);
    CHECK(screens[0].f_stat == doctest::Approx(ref.f).epsilon(1e-9));
    CHECK(screens[0].df_num == ref.df_num);
    CHECK(screens[0].df_den == ref.df_den);

    // Single observed level is excluded, not tested.
    std::vector<std::string> excluded;
    const auto with_dead = stats::anova_factor_screen(
        responses, {{"group", labels}, {"dead", std::vector<std::string>(responses.size(), "only")}},
        &excluded);
    CHECK(with_dead.size() == 1);
    REQUIRE(excluded.size() == 1);
    CHECK(excluded[0] == "dead");

    CHECK_THROWS_AS(stats::anova_factor_screen({}, {}), ValidationError);
}

TEST_CASE("anova screen: single two-level factor satisfies F = t^2") {
    Rng rng(23);
    std::vector<double> responses;
    std::vector<std::string> labels;
    std::vector<double> ga, gb;
    for (int i = 0; i < 9; ++i) {
        const double v = 1.0 + rng.normal();
        ga.push_back(v);
        responses.push_back(v);
        labels.push_back("a");
    }
    for (int i = 0; i < 11; ++i) {
        const double v = 1.8 + rng.normal();
        gb.push_back(v);
        responses.push_back(v);
        labels.push_back("b");
    }
    const auto screens = stats::anova_factor_screen(responses, {{"g", labels}});
    REQUIRE(screens.size() == 1);

    // Pooled two-sample t computed directly.
    auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / v.size();
    };
    const double ma = mean(ga), mb = mean(gb);
    double ss = 0.0;
    for (double x : ga) ss += (x - ma) * (x - ma);
    for (double x : gb) ss += (x - mb) * (x - mb);
    const double pooled = ss / (ga.size() + gb.size() - 2);
    const double t = (ma - mb) / std::sqrt(pooled * (1.0 / ga.size() + 1.0 / gb.size()));
    CHECK(screens[0].f_stat == doctest::Approx(t * t).epsilon(1e-9));
}

TEST_CASE("welch test: identity, separation, quadrature oracle, degenerate") {
    const std::vector<double> same = {1.0, 2.0, 3.0};
    const auto id = stats::welch_t_test(same, same);
    CHECK(id.statistic == 0.0);
    CHECK(*id.p_value == 1.0);

    const std::vector<double> low = {0.0, 0.1, -0.1};
    const std::vector<double> high = {100.0, 100.1, 99.9};
    CHECK(*stats::welch_t_test(low, high).p_value < 0.001);

    Rng rng(31);
    std::vector<double> a(12), b(15);
    for (auto& v : a) v = rng.normal();
    for (auto& v : b) v = 0.7 + 1.5 * rng.normal();
    const auto w = stats::welch_t_test(a, b);
    const double df = w.meta.at("df");
    const double ref = 2.0 * oracle::t_upper_tail(std::fabs(w.statistic), df);
    CHECK(*w.p_value == doctest::Approx(ref).epsilon(1e-4));

    const std::vector<double> c1 = {5.0, 5.0, 5.0};
    const std::vector<double> c2 = {6.0, 6.0};
    const auto differ = stats::welch_t_test(c1, c2);
    CHECK(differ.degenerate);
    CHECK(*differ.p_value == 0.0);
    const auto equal = stats::welch_t_test(c1, std::vector<double>{5.0, 5.0});
    CHECK(equal.degenerate);
    CHECK(*equal.p_value == 1.0);
}
