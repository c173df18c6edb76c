#include "fse/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace fse::stats {

namespace {

double clamp_p(double p) {
    if (p < kMinPValue) return kMinPValue;
    if (p > 1.0) return 1.0;
    return p;
}

// Lower incomplete gamma by series expansion, valid for x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper incomplete gamma by modified Lentz continued fraction, x >= a + 1.
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double beta_cf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return h;
}

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance_of(std::span<const double> v, double mean) {
    if (v.size() < 2) return 0.0;
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s / static_cast<double>(v.size() - 1);
}

}  // namespace

double gamma_p(double a, double x) {
    if (a <= 0.0) throw ValidationError("gamma_p: shape parameter must be positive");
    if (x < 0.0) throw ValidationError("gamma_p: x must be nonnegative");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
    if (a <= 0.0) throw ValidationError("gamma_q: shape parameter must be positive");
    if (x < 0.0) throw ValidationError("gamma_q: x must be nonnegative");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double incomplete_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) throw ValidationError("incomplete_beta: parameters must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cf(a, b, x) / a;
    }
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double tail_probability(Dist dist, double statistic, double df1, double df2) {
    switch (dist) {
        case Dist::Normal:
            return clamp_p(0.5 * std::erfc(statistic / std::sqrt(2.0)));
        case Dist::StudentT: {
            if (df1 <= 0.0) throw ValidationError("tail_probability: t df must be positive");
            const double t = statistic;
            const double x = df1 / (df1 + t * t);
            const double half_tail = 0.5 * incomplete_beta(df1 / 2.0, 0.5, x);
            return clamp_p(t >= 0.0 ? half_tail : 1.0 - half_tail);
        }
        case Dist::ChiSquared: {
            if (df1 <= 0.0) throw ValidationError("tail_probability: chi-squared df must be positive");
            if (statistic <= 0.0) return 1.0;
            return clamp_p(gamma_q(df1 / 2.0, statistic / 2.0));
        }
        case Dist::F: {
            if (df1 <= 0.0 || df2 <= 0.0) throw ValidationError("tail_probability: F df must be positive");
            if (statistic <= 0.0) return 1.0;
            return clamp_p(incomplete_beta(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * statistic)));
        }
    }
    throw ValidationError("tail_probability: unknown distribution");
}

RegressionFit ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                      const std::vector<std::string>& column_names) {
    const int n = static_cast<int>(design.rows());
    const int k = static_cast<int>(design.cols());
    if (response.size() != n) throw ValidationError("ols_fit: design/response length mismatch");
    if (k < 1) throw ValidationError("ols_fit: design needs at least one column");
    if (n <= k) {
        std::ostringstream os;
        os << "ols_fit: insufficient data, n=" << n << " <= k=" << k;
        throw ValidationError(os.str());
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    const int rank = static_cast<int>(qr.rank());
    if (rank < k) {
        // The pivot permutation puts the dependent columns last.
        std::ostringstream os;
        os << "ols_fit: rank-deficient design (rank " << rank << " of " << k
           << "); collinear columns:";
        const auto& perm = qr.colsPermutation().indices();
        for (int i = rank; i < k; ++i) {
            const int col = perm(i);
            if (!column_names.empty() && col < static_cast<int>(column_names.size())) {
                os << " " << column_names[col];
            } else {
                os << " #" << col;
            }
        }
        throw StatError(os.str());
    }

    const Eigen::VectorXd beta = qr.solve(response);
    const Eigen::VectorXd resid = response - design * beta;
    const double sse = resid.squaredNorm();
    const double sigma2 = sse / static_cast<double>(n - k);

    // (X'X)^{-1} = P R^{-1} R^{-T} P' from the pivoted factorization.
    const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv =
        r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    const Eigen::MatrixXd cov_unpermuted = r_inv * r_inv.transpose();
    const Eigen::MatrixXd perm = qr.colsPermutation();
    const Eigen::MatrixXd cov = perm * cov_unpermuted * perm.transpose();

    RegressionFit fit;
    fit.n_obs = n;
    fit.n_params = k;
    fit.sse = sse;
    fit.coefficients.resize(k);
    fit.standard_errors.resize(k);
    fit.t_statistics.resize(k);
    fit.p_values.resize(k);
    fit.residuals.assign(resid.data(), resid.data() + n);
    for (int i = 0; i < k; ++i) {
        fit.coefficients[i] = beta(i);
        const double se = std::sqrt(std::max(0.0, sigma2 * cov(i, i)));
        fit.standard_errors[i] = se;
        if (se > 0.0) {
            fit.t_statistics[i] = beta(i) / se;
            fit.p_values[i] =
                2.0 * tail_probability(Dist::StudentT, std::fabs(fit.t_statistics[i]),
                                       static_cast<double>(n - k));
            fit.p_values[i] = clamp_p(fit.p_values[i]);
        } else {
            fit.t_statistics[i] = 0.0;
            fit.p_values[i] = beta(i) == 0.0 ? 1.0 : kMinPValue;
        }
    }
    return fit;
}

TestResult kpss_test(std::span<const double> series, std::optional<int> lag_truncation) {
    const int n = static_cast<int>(series.size());
    if (n < 20) throw ValidationError("kpss_test: need at least 20 observations");

    const double mean = mean_of(series);
    std::vector<double> e(n);
    for (int t = 0; t < n; ++t) e[t] = series[t] - mean;

    double gamma0 = 0.0;
    for (double v : e) gamma0 += v * v;
    gamma0 /= n;

    TestResult result;
    if (gamma0 <= 0.0) {
        result.statistic = 0.0;
        result.reject_at_5pct = false;
        result.degenerate = true;
        result.meta["lag"] = 0;
        return result;
    }

    const int lag = lag_truncation.value_or(
        static_cast<int>(std::floor(4.0 * std::pow(n / 100.0, 0.25))));

    // Bartlett-kernel long-run variance.
    double lrv = gamma0;
    for (int s = 1; s <= lag; ++s) {
        double gamma_s = 0.0;
        for (int t = s; t < n; ++t) gamma_s += e[t] * e[t - s];
        gamma_s /= n;
        lrv += 2.0 * (1.0 - static_cast<double>(s) / (lag + 1)) * gamma_s;
    }
    if (lrv <= 0.0) lrv = gamma0;

    double partial = 0.0;
    double sum_sq_partial = 0.0;
    for (int t = 0; t < n; ++t) {
        partial += e[t];
        sum_sq_partial += partial * partial;
    }
    const double stat = sum_sq_partial / (static_cast<double>(n) * n * lrv);

    // Asymptotic null quantiles (Cramer-von Mises type distribution); the 5%
    // decision uses the tabulated 0.463 value, the p-value is linear
    // interpolation for display only.
    static const double stat_table[] = {0.0, 0.119, 0.209, 0.347, 0.463, 0.574, 0.739};
    static const double p_table[] = {1.0, 0.50, 0.25, 0.10, 0.05, 0.025, 0.01};
    double p = 0.01;
    for (int i = 1; i < 7; ++i) {
        if (stat <= stat_table[i]) {
            const double w = (stat - stat_table[i - 1]) / (stat_table[i] - stat_table[i - 1]);
            p = p_table[i - 1] + w * (p_table[i] - p_table[i - 1]);
            break;
        }
    }

    result.statistic = stat;
    result.p_value = p;
    result.reject_at_5pct = stat > 0.463;
    result.meta["lag"] = lag;
    result.meta["critical_5pct"] = 0.463;
    return result;
}

TestResult ljung_box(std::span<const double> residuals, int max_lag, int fitted_params) {
    const int n = static_cast<int>(residuals.size());
    if (max_lag >= n) throw ValidationError("ljung_box: max_lag must be < series length");
    if (fitted_params >= max_lag) {
        throw ValidationError("ljung_box: fitted_params must be < max_lag");
    }
    const double mean = mean_of(residuals);
    double denom = 0.0;
    for (double r : residuals) denom += (r - mean) * (r - mean);
    if (denom <= 0.0) throw StatError("ljung_box: zero-variance residuals");

    double q = 0.0;
    for (int k = 1; k <= max_lag; ++k) {
        double acov = 0.0;
        for (int t = k; t < n; ++t) acov += (residuals[t] - mean) * (residuals[t - k] - mean);
        const double rho = acov / denom;
        q += rho * rho / static_cast<double>(n - k);
    }
    q *= static_cast<double>(n) * (n + 2);

    const int df = max_lag - fitted_params;
    TestResult result;
    result.statistic = q;
    result.p_value = tail_probability(Dist::ChiSquared, q, df);
    result.reject_at_5pct = *result.p_value < 0.05;
    result.meta["lags"] = max_lag;
    result.meta["df"] = df;
    return result;
}

TestResult normality_test(std::span<const double> residuals) {
    const int n = static_cast<int>(residuals.size());
    if (n < 8) throw ValidationError("normality_test: need at least 8 observations");
    const double mean = mean_of(residuals);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double r : residuals) {
        const double d = r - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (m2 <= 0.0) throw StatError("normality_test: zero-variance input");

    const double skew = m3 / std::pow(m2, 1.5);
    const double excess_kurt = m4 / (m2 * m2) - 3.0;
    const double jb = n / 6.0 * (skew * skew + excess_kurt * excess_kurt / 4.0);

    TestResult result;
    result.statistic = jb;
    result.p_value = tail_probability(Dist::ChiSquared, jb, 2.0);
    result.reject_at_5pct = *result.p_value < 0.05;
    result.meta["skewness"] = skew;
    result.meta["excess_kurtosis"] = excess_kurt;
    return result;
}

namespace {

// Dummy-coded main-effects design: intercept plus, per factor, indicators for
// all observed levels but the first (sorted).
struct DummyBlock {
    std::string factor;
    std::vector<std::string> levels;  // levels coded as columns (first level dropped)
};

Eigen::MatrixXd build_main_effects_design(
    const std::vector<double>& responses,
    const std::map<std::string, std::vector<std::string>>& assignments,
    const std::set<std::string>& included_factors, std::vector<DummyBlock>* blocks_out) {
    const int n = static_cast<int>(responses.size());
    std::vector<DummyBlock> blocks;
    int cols = 1;
    for (const auto& [name, labels] : assignments) {
        if (!included_factors.count(name)) continue;
        std::set<std::string> level_set(labels.begin(), labels.end());
        std::vector<std::string> levels(level_set.begin(), level_set.end());
        DummyBlock block{name, {levels.begin() + 1, levels.end()}};
        cols += static_cast<int>(block.levels.size());
        blocks.push_back(std::move(block));
    }
    Eigen::MatrixXd design = Eigen::MatrixXd::Zero(n, cols);
    design.col(0).setOnes();
    int col = 1;
    for (const auto& block : blocks) {
        const auto& labels = assignments.at(block.factor);
        for (std::size_t j = 0; j < block.levels.size(); ++j) {
            for (int t = 0; t < n; ++t) {
                if (labels[t] == block.levels[j]) design(t, col) = 1.0;
            }
            ++col;
        }
    }
    if (blocks_out) *blocks_out = blocks;
    return design;
}

double sse_of(const Eigen::MatrixXd& design, const Eigen::VectorXd& y) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    const Eigen::VectorXd beta = qr.solve(y);
    return (y - design * beta).squaredNorm();
}

int design_rank(const Eigen::MatrixXd& design) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    return static_cast<int>(qr.rank());
}

}  // namespace

std::vector<FactorScreen> anova_factor_screen(
    const std::vector<double>& responses,
    const std::map<std::string, std::vector<std::string>>& factor_assignments,
    std::vector<std::string>* excluded) {
    const int n = static_cast<int>(responses.size());
    if (n == 0) throw ValidationError("anova_factor_screen: empty input");
    for (const auto& [name, labels] : factor_assignments) {
        if (static_cast<int>(labels.size()) != n) {
            throw ValidationError("anova_factor_screen: assignment length mismatch for factor " +
                                  name);
        }
    }

    std::set<std::string> testable;
    for (const auto& [name, labels] : factor_assignments) {
        std::set<std::string> level_set(labels.begin(), labels.end());
        if (level_set.size() >= 2) {
            testable.insert(name);
        } else if (excluded) {
            excluded->push_back(name);
        }
    }
    if (testable.empty()) {
        throw ValidationError("anova_factor_screen: no factor with >= 2 observed levels");
    }

    Eigen::VectorXd y(n);
    for (int t = 0; t < n; ++t) y(t) = responses[t];
    const double y_scale = std::max(1.0, y.squaredNorm());

    const Eigen::MatrixXd full = build_main_effects_design(responses, factor_assignments,
                                                           testable, nullptr);
    const int full_rank = design_rank(full);
    if (n <= full_rank) {
        throw ValidationError("anova_factor_screen: more fitted cells than observations");
    }
    const double sse_full = sse_of(full, y);
    const int df_den = n - full_rank;

    std::vector<FactorScreen> screens;
    for (const auto& factor : testable) {
        std::set<std::string> reduced_set = testable;
        reduced_set.erase(factor);
        Eigen::MatrixXd reduced;
        if (reduced_set.empty()) {
            reduced = Eigen::MatrixXd::Ones(n, 1);
        } else {
            reduced = build_main_effects_design(responses, factor_assignments, reduced_set,
                                                nullptr);
        }
        const int df_num = full_rank - design_rank(reduced);
        const double sse_reduced = sse_of(reduced, y);

        FactorScreen screen;
        screen.factor = factor;
        screen.df_num = df_num;
        screen.df_den = df_den;
        const double ss_effect = std::max(0.0, sse_reduced - sse_full);
        if (df_num <= 0 || ss_effect <= 1e-12 * y_scale) {
            screen.f_stat = 0.0;
            screen.p_value = 1.0;
        } else if (sse_full <= 1e-12 * y_scale) {
            // Perfect separation: within-group SS is zero.
            screen.f_stat = std::numeric_limits<double>::infinity();
            screen.p_value = kMinPValue;
        } else {
            screen.f_stat = (ss_effect / df_num) / (sse_full / df_den);
            screen.p_value = clamp_p(
                tail_probability(Dist::F, screen.f_stat, df_num, df_den));
        }
        screens.push_back(screen);
    }
    return screens;
}

TestResult welch_t_test(std::span<const double> group_a, std::span<const double> group_b) {
    const int na = static_cast<int>(group_a.size());
    const int nb = static_cast<int>(group_b.size());
    if (na < 2 || nb < 2) throw ValidationError("welch_t_test: each group needs >= 2 observations");
    const double ma = mean_of(group_a);
    const double mb = mean_of(group_b);
    const double va = variance_of(group_a, ma);
    const double vb = variance_of(group_b, mb);

    TestResult result;
    if (va == 0.0 && vb == 0.0) {
        result.statistic = ma == mb ? 0.0 : std::numeric_limits<double>::infinity();
        result.p_value = ma == mb ? 1.0 : 0.0;
        result.reject_at_5pct = ma != mb;
        result.degenerate = true;
        return result;
    }

    const double sa = va / na;
    const double sb = vb / nb;
    const double t = (ma - mb) / std::sqrt(sa + sb);
    const double df = (sa + sb) * (sa + sb) /
                      (sa * sa / (na - 1) + sb * sb / (nb - 1));
    result.statistic = t;
    result.p_value = clamp_p(2.0 * tail_probability(Dist::StudentT, std::fabs(t), df));
    result.reject_at_5pct = *result.p_value < 0.05;
    result.meta["df"] = df;
    return result;
}

}  // namespace fse::stats
