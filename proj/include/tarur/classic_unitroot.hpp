#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "tarur/error.hpp"
#include "tarur/linreg.hpp"
#include "tarur/series.hpp"

namespace tarur {

enum class UnitRootTest { ADF, PP, KPSS };
enum class Variable { Levels, FirstDifference };
enum class Deterministic { None, Constant, Trend };
enum class LagRule { AIC, BIC, Fixed };
/// Bartlett-kernel truncation lag as a function of the sample size n.
///   NeweyWest floor(4 (n/100)^(2/9))
///   Short     floor(4 (n/100)^(1/4))
///   Long      floor(12 (n/100)^(1/4))
enum class BandwidthRule { NeweyWest, Short, Long, Fixed };

[[nodiscard]] inline std::string_view to_string(UnitRootTest t) noexcept {
    switch (t) {
        case UnitRootTest::ADF: return "ADF";
        case UnitRootTest::PP: return "PP";
        case UnitRootTest::KPSS: return "KPSS";
    }
    return "?";
}
[[nodiscard]] inline std::string_view to_string(Variable v) noexcept {
    return v == Variable::Levels ? "levels" : "first-difference";
}
[[nodiscard]] inline std::string_view to_string(Deterministic d) noexcept {
    switch (d) {
        case Deterministic::None: return "none";
        case Deterministic::Constant: return "const";
        case Deterministic::Trend: return "trend";
    }
    return "?";
}
[[nodiscard]] inline std::string_view to_string(LagRule r) noexcept {
    switch (r) {
        case LagRule::AIC: return "aic";
        case LagRule::BIC: return "bic";
        case LagRule::Fixed: return "fixed";
    }
    return "?";
}
[[nodiscard]] inline std::string_view to_string(BandwidthRule r) noexcept {
    switch (r) {
        case BandwidthRule::NeweyWest: return "newey-west";
        case BandwidthRule::Short: return "short";
        case BandwidthRule::Long: return "long";
        case BandwidthRule::Fixed: return "fixed";
    }
    return "?";
}

struct ClassicResult {
    UnitRootTest test = UnitRootTest::ADF;
    Variable variable = Variable::Levels;
    Deterministic deterministic = Deterministic::None;
    double statistic = 0.0;
    double crit10 = 0.0;
    double crit5 = 0.0;
    double crit1 = 0.0;
    double p_value = 0.0;
    int lags = 0;       // ADF augmentation lags
    int bandwidth = 0;  // PP / KPSS Bartlett truncation lag
    std::size_t n_obs = 0;
    std::string notes;

    friend bool operator==(const ClassicResult&, const ClassicResult&) = default;
};

namespace tables {

/// Percentiles of the Dickey-Fuller t distribution (Fuller 1976, Table 8.5.2).
inline constexpr std::array<double, 8> kDfProbabilities{0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99};
inline constexpr std::array<double, 6> kDfSampleSizes{25, 50, 100, 250, 500, std::numeric_limits<double>::infinity()};

// [deterministic][sample size][probability]
inline constexpr double kDfQuantiles[3][6][8] = {
    {// no constant
     {-2.66, -2.26, -1.95, -1.60, 0.92, 1.33, 1.70, 2.16},
     {-2.62, -2.25, -1.95, -1.61, 0.91, 1.31, 1.66, 2.08},
     {-2.60, -2.24, -1.95, -1.61, 0.90, 1.29, 1.64, 2.03},
     {-2.58, -2.23, -1.95, -1.62, 0.89, 1.29, 1.63, 2.01},
     {-2.58, -2.23, -1.95, -1.62, 0.89, 1.28, 1.62, 2.00},
     {-2.58, -2.23, -1.95, -1.62, 0.89, 1.28, 1.62, 2.00}},
    {// constant
     {-3.75, -3.33, -3.00, -2.63, -0.37, 0.00, 0.34, 0.72},
     {-3.58, -3.22, -2.93, -2.60, -0.40, -0.03, 0.29, 0.66},
     {-3.51, -3.17, -2.89, -2.58, -0.42, -0.05, 0.26, 0.63},
     {-3.46, -3.14, -2.88, -2.57, -0.42, -0.06, 0.24, 0.62},
     {-3.44, -3.13, -2.87, -2.57, -0.43, -0.07, 0.24, 0.61},
     {-3.43, -3.12, -2.86, -2.57, -0.44, -0.07, 0.23, 0.60}},
    {// constant and trend
     {-4.38, -3.95, -3.60, -3.24, -1.14, -0.80, -0.50, -0.15},
     {-4.15, -3.80, -3.50, -3.18, -1.19, -0.87, -0.58, -0.24},
     {-4.04, -3.73, -3.45, -3.15, -1.22, -0.90, -0.62, -0.28},
     {-3.99, -3.69, -3.43, -3.13, -1.23, -0.92, -0.64, -0.31},
     {-3.98, -3.68, -3.42, -3.13, -1.24, -0.93, -0.65, -0.32},
     {-3.96, -3.66, -3.41, -3.12, -1.25, -0.94, -0.66, -0.33}},
};

/// Upper-tail probabilities of the asymptotic KPSS statistic. The 10/5/2.5/1% points are
/// the published ones; the remaining points are simulated (400k draws, 1000-step bridges).
inline constexpr std::array<double, 10> kKpssUpperTail{0.99, 0.95, 0.90, 0.75, 0.50, 0.25, 0.10, 0.05, 0.025, 0.01};
inline constexpr std::array<double, 10> kKpssLevel{0.0248, 0.0365, 0.0459, 0.0701, 0.1188,
                                                   0.2095, 0.347,  0.463,  0.574,  0.739};
inline constexpr std::array<double, 10> kKpssTrend{0.0172, 0.0234, 0.0279, 0.0381, 0.0555,
                                                   0.0827, 0.119,  0.146,  0.176,  0.216};

}  // namespace tables

namespace detail {

/// Lower-tail CDF at `x` from ascending (value, cdf) knots, interpolating the log-odds
/// linearly and extrapolating with the end segments. Result lies in [0, 1].
inline double interpolate_cdf(std::span<const double> values, std::span<const double> cdf, double x) {
    const auto logit = [](double p) { return std::log(p / (1.0 - p)); };
    const std::size_t n = values.size();
    std::size_t i = 0;
    if (x <= values[0]) {
        i = 0;
    } else if (x >= values[n - 1]) {
        i = n - 2;
    } else {
        while (!(x >= values[i] && x <= values[i + 1])) ++i;
    }
    const double x0 = values[i], x1 = values[i + 1];
    double l = logit(cdf[i]);
    if (x1 > x0) l += (x - x0) / (x1 - x0) * (logit(cdf[i + 1]) - logit(cdf[i]));
    if (l > 700.0) return 1.0;
    if (l < -700.0) return 0.0;
    return 1.0 / (1.0 + std::exp(-l));
}

inline std::array<double, 8> df_quantiles(Deterministic det, std::size_t n) {
    const auto& rows = tables::kDfQuantiles[static_cast<int>(det)];
    const double inv = 1.0 / static_cast<double>(std::max<std::size_t>(n, 1));
    std::array<double, 8> out{};
    // Sample-size rows are interpolated linearly in 1/T.
    std::size_t r = 0;
    if (inv >= 1.0 / tables::kDfSampleSizes[0]) {
        for (std::size_t j = 0; j < 8; ++j) out[j] = rows[0][j];
        return out;
    }
    while (r + 1 < tables::kDfSampleSizes.size() && inv < 1.0 / tables::kDfSampleSizes[r + 1]) ++r;
    const double a = 1.0 / tables::kDfSampleSizes[r];
    const double b = r + 1 < tables::kDfSampleSizes.size() ? 1.0 / tables::kDfSampleSizes[r + 1] : 0.0;
    const double w = a > b ? (a - inv) / (a - b) : 0.0;
    const std::size_t r1 = std::min(r + 1, tables::kDfSampleSizes.size() - 1);
    for (std::size_t j = 0; j < 8; ++j) out[j] = (1.0 - w) * rows[r][j] + w * rows[r1][j];
    return out;
}

inline void fill_df_distribution(ClassicResult& r) {
    const auto q = df_quantiles(r.deterministic, r.n_obs);
    r.crit1 = q[0];
    r.crit5 = q[2];
    r.crit10 = q[3];
    r.p_value = interpolate_cdf(q, tables::kDfProbabilities, r.statistic);
}

inline void fill_kpss_distribution(ClassicResult& r) {
    const auto& values = r.deterministic == Deterministic::Trend ? tables::kKpssTrend : tables::kKpssLevel;
    std::array<double, 10> cdf{};
    for (std::size_t i = 0; i < cdf.size(); ++i) cdf[i] = 1.0 - tables::kKpssUpperTail[i];
    r.crit10 = values[6];
    r.crit5 = values[7];
    r.crit1 = values[9];
    r.p_value = 1.0 - interpolate_cdf(values, cdf, r.statistic);
}

/// Columns for the deterministic terms over rows 1..n.
inline void put_deterministic(Eigen::MatrixXd& X, Eigen::Index first_col, Deterministic det) {
    if (det == Deterministic::None) return;
    X.col(first_col).setOnes();
    if (det == Deterministic::Trend)
        X.col(first_col + 1) = Eigen::VectorXd::LinSpaced(X.rows(), 1.0, static_cast<double>(X.rows()));
}

inline Eigen::Index deterministic_columns(Deterministic det) noexcept {
    return det == Deterministic::None ? 0 : (det == Deterministic::Constant ? 1 : 2);
}

/// Regression of Δx_t on x_{t-1}, deterministic terms and `lags` lagged differences over
/// t = first .. T-1 (0-based).
inline RegressionFit adf_regression(std::span<const double> x, Deterministic det, int lags, std::size_t first) {
    const std::size_t T = x.size();
    const auto n = static_cast<Eigen::Index>(T - first);
    const Eigen::Index dcols = deterministic_columns(det);
    Eigen::MatrixXd X(n, 1 + dcols + lags);
    Eigen::VectorXd y(n);
    put_deterministic(X, 1, det);
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::size_t t = first + static_cast<std::size_t>(i);
        y(i) = x[t] - x[t - 1];
        X(i, 0) = x[t - 1];
        for (int j = 1; j <= lags; ++j)
            X(i, dcols + j) = x[t - static_cast<std::size_t>(j)] - x[t - static_cast<std::size_t>(j) - 1];
    }
    return ols_fit(X, y, CovarianceType::Classical);
}

inline int bandwidth_for(BandwidthRule rule, int fixed, std::size_t n) {
    const double s = static_cast<double>(n) / 100.0;
    switch (rule) {
        case BandwidthRule::NeweyWest: return static_cast<int>(std::floor(4.0 * std::pow(s, 2.0 / 9.0)));
        case BandwidthRule::Short: return static_cast<int>(std::floor(4.0 * std::pow(s, 0.25)));
        case BandwidthRule::Long: return static_cast<int>(std::floor(12.0 * std::pow(s, 0.25)));
        case BandwidthRule::Fixed: return fixed;
    }
    return 0;
}

/// Bartlett-kernel long-run variance γ0 + 2 Σ_{j<=l} (1 - j/(l+1)) γ_j with γ_j = Σ u_t u_{t-j} / n.
inline double long_run_variance(const Eigen::VectorXd& u, int lags) {
    const Eigen::Index n = u.size();
    double lrv = u.squaredNorm() / static_cast<double>(n);
    for (int j = 1; j <= lags && j < n; ++j) {
        const double gamma = u.tail(n - j).dot(u.head(n - j)) / static_cast<double>(n);
        lrv += 2.0 * (1.0 - static_cast<double>(j) / (lags + 1.0)) * gamma;
    }
    return lrv;
}

inline void require_variation(std::span<const double> x, std::string_view test) {
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    if (*lo == *hi) throw DegenerateError(std::string(test) + ": series is constant, long-run variance is zero");
}

}  // namespace detail

/// Augmented Dickey-Fuller t-test on the level coefficient. With an information-criterion
/// rule the lag is chosen over 0..max_lag on the common sample, then the regression is refit
/// on the largest sample the chosen lag allows.
inline ClassicResult adf_test(std::span<const double> x, Deterministic det = Deterministic::None, int max_lag = 12,
                              LagRule rule = LagRule::AIC) {
    if (max_lag < 0) throw SizingError("ADF max_lag must be non-negative");
    if (x.size() <= static_cast<std::size_t>(max_lag) + 2)
        throw SizingError("ADF needs more than max_lag + 2 = " + std::to_string(max_lag + 2) + " observations, got " +
                          std::to_string(x.size()));
    int lags = max_lag;
    if (rule != LagRule::Fixed) {
        const auto first = static_cast<std::size_t>(max_lag) + 1;
        double best = std::numeric_limits<double>::infinity();
        for (int L = 0; L <= max_lag; ++L) {
            const RegressionFit f = detail::adf_regression(x, det, L, first);
            const auto n = static_cast<double>(f.n_obs);
            const auto p = static_cast<double>(f.n_params);
            const double penalty = rule == LagRule::AIC ? 2.0 * p : p * std::log(n);
            const double ic = n * std::log(f.ssr / n) + penalty;
            if (ic < best) {
                best = ic;
                lags = L;
            }
        }
    }
    const RegressionFit fit = detail::adf_regression(x, det, lags, static_cast<std::size_t>(lags) + 1);

    ClassicResult r;
    r.test = UnitRootTest::ADF;
    r.deterministic = det;
    r.statistic = fit.t_ratios(0);
    r.lags = lags;
    r.n_obs = fit.n_obs;
    r.notes = "det=" + std::string(to_string(det)) + " lag_rule=" + std::string(to_string(rule)) +
              " max_lag=" + std::to_string(max_lag) + " lags=" + std::to_string(lags);
    detail::fill_df_distribution(r);
    return r;
}

/// Phillips-Perron Z_t: the Dickey-Fuller t-ratio corrected with a Bartlett long-run variance.
inline ClassicResult pp_test(std::span<const double> x, Deterministic det = Deterministic::None,
                             BandwidthRule rule = BandwidthRule::NeweyWest, int fixed_bandwidth = 0) {
    if (x.size() < 4) throw SizingError("PP needs at least 4 observations");
    detail::require_variation(x, "PP");
    const RegressionFit fit = detail::adf_regression(x, det, 0, 1);
    const auto n = static_cast<double>(fit.n_obs);
    const int l = detail::bandwidth_for(rule, fixed_bandwidth, fit.n_obs);
    const double gamma0 = fit.residuals.squaredNorm() / n;
    const double lrv = detail::long_run_variance(fit.residuals, l);
    if (!(gamma0 > 0.0) || !(lrv > 0.0) || !(fit.sigma2 > 0.0))
        throw DegenerateError("PP: residual long-run variance is not positive");
    const double se = fit.std_errors(0);
    const double lam = std::sqrt(lrv);
    const double stat =
        std::sqrt(gamma0 / lrv) * fit.t_ratios(0) - 0.5 * (lrv - gamma0) / lam * (n * se / std::sqrt(fit.sigma2));

    ClassicResult r;
    r.test = UnitRootTest::PP;
    r.deterministic = det;
    r.statistic = stat;
    r.bandwidth = l;
    r.n_obs = fit.n_obs;
    r.notes = "det=" + std::string(to_string(det)) + " kernel=bartlett bandwidth_rule=" +
              std::string(to_string(rule)) + " bandwidth=" + std::to_string(l);
    detail::fill_df_distribution(r);
    return r;
}

/// KPSS LM statistic Σ S_t² / (n² λ²) on residuals from the deterministic terms.
inline ClassicResult kpss_test(std::span<const double> x, Deterministic det = Deterministic::Constant,
                               BandwidthRule rule = BandwidthRule::NeweyWest, int fixed_bandwidth = 0) {
    if (det == Deterministic::None) throw SizingError("KPSS requires a constant or a trend");
    if (x.size() < 4) throw SizingError("KPSS needs at least 4 observations");
    detail::require_variation(x, "KPSS");
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd X(n, detail::deterministic_columns(det));
    detail::put_deterministic(X, 0, det);
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(x.data(), n);
    RegressionFit fit;
    detail::ols_core(X, y, false, fit);
    const int l = detail::bandwidth_for(rule, fixed_bandwidth, x.size());
    const double lrv = detail::long_run_variance(fit.residuals, l);
    if (!(lrv > 0.0)) throw DegenerateError("KPSS: long-run variance is not positive");
    double partial = 0.0, sum_sq = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        partial += fit.residuals(i);
        sum_sq += partial * partial;
    }
    const auto nd = static_cast<double>(n);

    ClassicResult r;
    r.test = UnitRootTest::KPSS;
    r.deterministic = det;
    r.statistic = sum_sq / (nd * nd * lrv);
    r.bandwidth = l;
    r.n_obs = static_cast<std::size_t>(n);
    r.notes = "det=" + std::string(to_string(det)) + " kernel=bartlett bandwidth_rule=" +
              std::string(to_string(rule)) + " bandwidth=" + std::to_string(l);
    detail::fill_kpss_distribution(r);
    return r;
}

struct ClassicOptions {
    Deterministic adf_deterministic = Deterministic::None;
    Deterministic pp_deterministic = Deterministic::None;
    Deterministic kpss_deterministic = Deterministic::Constant;
    int adf_max_lag = 12;
    LagRule adf_lag_rule = LagRule::AIC;
    BandwidthRule bandwidth_rule = BandwidthRule::NeweyWest;
    int fixed_bandwidth = 0;
};

/// ADF, PP and KPSS on the levels and on the first differences, in that order.
inline std::vector<ClassicResult> classic_battery(const LogPriceSeries& series, const ClassicOptions& o = {}) {
    const std::vector<double> levels = series.values();
    const std::vector<double> diffs = series.differences();
    std::vector<ClassicResult> out;
    const auto tag = [&](ClassicResult r, Variable v) {
        r.variable = v;
        out.push_back(std::move(r));
    };
    for (const auto v : {Variable::Levels, Variable::FirstDifference})
        tag(adf_test(v == Variable::Levels ? levels : diffs, o.adf_deterministic, o.adf_max_lag, o.adf_lag_rule), v);
    for (const auto v : {Variable::Levels, Variable::FirstDifference})
        tag(pp_test(v == Variable::Levels ? levels : diffs, o.pp_deterministic, o.bandwidth_rule, o.fixed_bandwidth), v);
    for (const auto v : {Variable::Levels, Variable::FirstDifference})
        tag(kpss_test(v == Variable::Levels ? levels : diffs, o.kpss_deterministic, o.bandwidth_rule,
                      o.fixed_bandwidth),
            v);
    return out;
}

}  // namespace tarur
