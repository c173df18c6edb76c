#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fse/types.hpp"

namespace fse::stats {

// p-values are reported no smaller than this, so log-domain consumers never
// see an exact zero.
inline constexpr double kMinPValue = 1e-300;

enum class Dist { Normal, StudentT, ChiSquared, F };

/// Upper-tail probability P(X >= statistic) for the given distribution.
/// df1 is the (only) degrees-of-freedom parameter except for F, which uses
/// (df1, df2).
double tail_probability(Dist dist, double statistic, double df1 = 0.0, double df2 = 0.0);

/// Regularized incomplete gamma P(a, x) (lower) and Q(a, x) (upper).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// Ordinary least squares with t-based inference. Solved via column-pivoted
/// Householder QR; standard errors use the unbiased variance estimate with
/// n-k degrees of freedom.
///
/// Throws StatError naming the collinear columns on rank deficiency, and
/// ValidationError when n <= k.
RegressionFit ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                      const std::vector<std::string>& column_names = {});

/// KPSS level-stationarity test. Bartlett-kernel long-run variance with
/// truncation lag floor(4*(n/100)^(1/4)) unless overridden. The 5% decision
/// is made against the tabulated critical value 0.463; p_value is an
/// interpolated display approximation.
TestResult kpss_test(std::span<const double> series,
                     std::optional<int> lag_truncation = std::nullopt);

/// Ljung-Box portmanteau test: Q = n(n+2) sum_k rho_k^2/(n-k), chi-squared
/// with max_lag - fitted_params degrees of freedom.
TestResult ljung_box(std::span<const double> residuals, int max_lag, int fitted_params);

/// Jarque-Bera normality test (chi-squared, 2 df).
TestResult normality_test(std::span<const double> residuals);

struct FactorScreen {
    std::string factor;
    double f_stat = 0.0;
    double p_value = 1.0;
    int df_num = 0;
    int df_den = 0;
};

/// Per-factor main-effect F tests: each factor is tested against the model
/// containing every other factor's main effects (Type-II style nested OLS).
/// Factors with a single observed level are skipped (reported via `excluded`
/// when non-null).
std::vector<FactorScreen> anova_factor_screen(
    const std::vector<double>& responses,
    const std::map<std::string, std::vector<std::string>>& factor_assignments,
    std::vector<std::string>* excluded = nullptr);

/// Welch two-sample t test with Welch-Satterthwaite degrees of freedom.
TestResult welch_t_test(std::span<const double> group_a, std::span<const double> group_b);

}  // namespace fse::stats
