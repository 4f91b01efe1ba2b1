#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tarur/error.hpp"
#include "tarur/linreg.hpp"
#include "tarur/series.hpp"

namespace tarur {

/// Trimming quantile used throughout unless configured otherwise.
inline constexpr double kDefaultTrim = 0.15;

/// Candidate thresholds: the distinct z values whose empirical CDF lies in [pi1, pi2].
struct ThresholdGrid {
    std::vector<double> candidates;
    double pi1 = kDefaultTrim;
    double pi2 = 1.0 - kDefaultTrim;
};

/// Builds the candidate set for `data.z`. A distinct value v is kept when
/// pi1 <= #{z <= v} / n <= 1 - pi1; for distinct z this is exactly the order
/// statistics ceil(pi1 n) .. floor((1 - pi1) n).
inline ThresholdGrid build_grid(const TarDataset& data, double pi1 = kDefaultTrim) {
    if (!(pi1 > 0.0 && pi1 < 0.5))
        throw SizingError("trimming quantile pi1 must lie in (0, 0.5), got " + std::to_string(pi1));
    const std::size_t n = data.n();
    if (n == 0) throw SizingError("dataset is empty");

    std::vector<double> sorted(data.z.data(), data.z.data() + n);
    std::sort(sorted.begin(), sorted.end());
    const double pi2 = 1.0 - pi1;
    const double slack = 1e-12;

    ThresholdGrid grid;
    grid.pi1 = pi1;
    grid.pi2 = pi2;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && sorted[j] == sorted[i]) ++j;
        const double ecdf = static_cast<double>(j) / static_cast<double>(n);
        if (ecdf >= pi1 - slack && ecdf <= pi2 + slack) grid.candidates.push_back(sorted[i]);
        i = j;
    }
    if (grid.candidates.empty())
        throw EstimationError("degenerate threshold grid: no distinct z value has empirical CDF in [" +
                              std::to_string(pi1) + ", " + std::to_string(pi2) + "]");
    return grid;
}

/// Two-regime TAR fit at one threshold. Coefficient vectors are ordered like the
/// regressor row: (rho, beta, alpha_1, ..., alpha_k).
struct TarFit {
    int k = 1;
    int m = 1;
    double lambda_hat = 0.0;
    Eigen::VectorXd theta1;
    Eigen::VectorXd theta2;
    Eigen::VectorXd se1;
    Eigen::VectorXd se2;
    double rho1_hat = 0.0;
    double rho2_hat = 0.0;
    double t1 = 0.0;
    double t2 = 0.0;
    double q_min = 0.0;
    std::vector<bool> regime_mask;  // true where Z_{t-1} < lambda_hat
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    RegressionFit stacked;          // interacted regression on [x I(z < lambda), x I(z >= lambda)]

    [[nodiscard]] std::size_t n() const noexcept { return n1 + n2; }

    /// Heteroskedasticity-consistent Wald statistic for theta1 == theta2.
    [[nodiscard]] double wald() const {
        const auto pairs = regime_pairs(static_cast<std::size_t>(theta1.size()));
        return wald_equality(stacked, pairs);
    }
};

/// Smallest admissible regime size: k + 2 parameters plus one.
[[nodiscard]] inline std::size_t min_regime_size(int k) noexcept { return static_cast<std::size_t>(k) + 3; }

namespace detail {

/// Partitions dataset rows by Z_{t-1} < lambda into reusable buffers, preserving row order
/// so every caller sees identical floating-point inputs for the same lambda.
class RegimeSplitter {
public:
    explicit RegimeSplitter(const TarDataset& data)
        : data_(data),
          x1_(data.regressors.rows(), data.regressors.cols()),
          x2_(data.regressors.rows(), data.regressors.cols()),
          y1_(data.targets.size()),
          y2_(data.targets.size()) {}

    void split(double lambda) {
        n1_ = n2_ = 0;
        const Eigen::Index n = data_.targets.size();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (data_.z(i) < lambda) {
                x1_.row(n1_) = data_.regressors.row(i);
                y1_(n1_++) = data_.targets(i);
            } else {
                x2_.row(n2_) = data_.regressors.row(i);
                y2_(n2_++) = data_.targets(i);
            }
        }
    }

    [[nodiscard]] std::size_t n1() const noexcept { return static_cast<std::size_t>(n1_); }
    [[nodiscard]] std::size_t n2() const noexcept { return static_cast<std::size_t>(n2_); }

    void check_counts(int k) const {
        const std::size_t floor = min_regime_size(k);
        if (n1() < floor)
            throw IdentifiabilityError("regime 1 has " + std::to_string(n1()) + " observations; need at least " +
                                           std::to_string(floor),
                                       1, n1());
        if (n2() < floor)
            throw IdentifiabilityError("regime 2 has " + std::to_string(n2()) + " observations; need at least " +
                                           std::to_string(floor),
                                       2, n2());
    }

    void fit(bool with_covariance, RegressionFit& f1, RegressionFit& f2) const {
        detail::ols_core(x1_.topRows(n1_), y1_.head(n1_), with_covariance, f1);
        detail::ols_core(x2_.topRows(n2_), y2_.head(n2_), with_covariance, f2);
    }

private:
    const TarDataset& data_;
    Eigen::MatrixXd x1_, x2_;
    Eigen::VectorXd y1_, y2_;
    Eigen::Index n1_ = 0, n2_ = 0;
};

inline TarFit assemble_fit(const TarDataset& data, double lambda, const RegressionFit& f1, const RegressionFit& f2,
                           CovarianceType cov) {
    const Eigen::Index p = static_cast<Eigen::Index>(data.params());
    const Eigen::Index n = static_cast<Eigen::Index>(data.n());

    TarFit fit;
    fit.k = data.k;
    fit.m = data.m;
    fit.lambda_hat = lambda;
    fit.n1 = f1.n_obs;
    fit.n2 = f2.n_obs;

    RegressionFit& s = fit.stacked;
    s.n_obs = static_cast<std::size_t>(n);
    s.n_params = static_cast<std::size_t>(2 * p);
    s.coefficients.resize(2 * p);
    s.coefficients << f1.coefficients, f2.coefficients;
    s.ssr = f1.ssr + f2.ssr;
    s.sigma2 = n > 2 * p ? s.ssr / static_cast<double>(n - 2 * p) : 0.0;
    s.cov_hc0 = Eigen::MatrixXd::Zero(2 * p, 2 * p);
    s.cov_hc0.topLeftCorner(p, p) = f1.cov_hc0;
    s.cov_hc0.bottomRightCorner(p, p) = f2.cov_hc0;
    s.xtx_inverse = Eigen::MatrixXd::Zero(2 * p, 2 * p);
    s.xtx_inverse.topLeftCorner(p, p) = f1.xtx_inverse;
    s.xtx_inverse.bottomRightCorner(p, p) = f2.xtx_inverse;
    apply_covariance(s, cov);

    s.residuals.resize(n);
    fit.regime_mask.resize(static_cast<std::size_t>(n));
    Eigen::Index i1 = 0, i2 = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const bool low = data.z(i) < lambda;
        fit.regime_mask[static_cast<std::size_t>(i)] = low;
        s.residuals(i) = low ? f1.residuals(i1++) : f2.residuals(i2++);
    }

    fit.theta1 = f1.coefficients;
    fit.theta2 = f2.coefficients;
    fit.se1 = s.std_errors.head(p);
    fit.se2 = s.std_errors.tail(p);
    fit.rho1_hat = fit.theta1(0);
    fit.rho2_hat = fit.theta2(0);
    fit.t1 = s.t_ratios(0);
    fit.t2 = s.t_ratios(p);
    fit.q_min = s.ssr;
    return fit;
}

}  // namespace detail

/// Fits the stacked two-regime regression at a fixed threshold. Regime 1 takes
/// Z_{t-1} < lambda, regime 2 takes Z_{t-1} >= lambda. The stacked design is block
/// diagonal, so it is solved as two QR factorizations and reassembled.
inline TarFit fit_at(const TarDataset& data, double lambda, CovarianceType cov = CovarianceType::HC0) {
    detail::RegimeSplitter splitter(data);
    splitter.split(lambda);
    splitter.check_counts(data.k);
    RegressionFit f1, f2;
    splitter.fit(true, f1, f2);
    return detail::assemble_fit(data, lambda, f1, f2, cov);
}

/// Concentrated least-squares profile Q(lambda) over the grid. Entries are empty where
/// the candidate is not identifiable.
inline std::vector<std::optional<double>> ssr_profile(const TarDataset& data, const ThresholdGrid& grid) {
    detail::RegimeSplitter splitter(data);
    RegressionFit f1, f2;
    std::vector<std::optional<double>> out(grid.candidates.size());
    for (std::size_t c = 0; c < grid.candidates.size(); ++c) {
        splitter.split(grid.candidates[c]);
        try {
            splitter.check_counts(data.k);
            splitter.fit(false, f1, f2);
            out[c] = f1.ssr + f2.ssr;
        } catch (const IdentifiabilityError&) {
        } catch (const SingularityError&) {
        }
    }
    return out;
}

/// Least-squares threshold: the grid candidate with minimal SSR, smallest lambda on ties.
inline TarFit estimate(const TarDataset& data, const ThresholdGrid& grid, CovarianceType cov = CovarianceType::HC0) {
    if (grid.candidates.empty()) throw EstimationError("threshold grid is empty");
    const auto profile = ssr_profile(data, grid);
    std::optional<std::size_t> best;
    for (std::size_t c = 0; c < profile.size(); ++c) {
        if (profile[c] && (!best || *profile[c] < *profile[*best])) best = c;
    }
    if (!best)
        throw EstimationError("no threshold candidate is identifiable (k=" + std::to_string(data.k) +
                              ", m=" + std::to_string(data.m) + ", " + std::to_string(grid.candidates.size()) +
                              " candidates)");
    return fit_at(data, grid.candidates[*best], cov);
}

/// Label used for months before the first usable regression target.
inline constexpr int kRegimeUndefined = 0;

struct RegimeSeries {
    std::vector<YearMonth> dates;
    std::vector<int> labels;                // 1, 2 or kRegimeUndefined
    std::vector<std::optional<double>> z;   // Z_{t-1} for labelled months
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    double share1 = 0.0;
    double share2 = 0.0;
    bool regime1_empty = false;
    bool regime2_empty = false;
};

/// Regime label per month of `series` using the threshold and delay of `fit`.
inline RegimeSeries classify(const LogPriceSeries& series, const TarFit& fit) {
    const std::size_t start = first_target_index(fit.k, fit.m);
    const auto& y = series.values();
    if (y.size() <= start || y.size() - start != fit.regime_mask.size())
        throw SizingError("fit covers " + std::to_string(fit.regime_mask.size()) + " observations but series of length " +
                          std::to_string(y.size()) + " yields " +
                          std::to_string(y.size() > start ? y.size() - start : 0));
    RegimeSeries out;
    out.dates = series.dates();
    out.labels.assign(y.size(), kRegimeUndefined);
    out.z.assign(y.size(), std::nullopt);
    const auto m = static_cast<std::size_t>(fit.m);
    for (std::size_t t = start; t < y.size(); ++t) {
        const double z = y[t - 1] - y[t - 1 - m];
        out.z[t] = z;
        const bool low = z < fit.lambda_hat;
        out.labels[t] = low ? 1 : 2;
        ++(low ? out.n1 : out.n2);
    }
    const auto n = static_cast<double>(out.n1 + out.n2);
    out.share1 = static_cast<double>(out.n1) / n;
    out.share2 = static_cast<double>(out.n2) / n;
    out.regime1_empty = out.n1 == 0;
    out.regime2_empty = out.n2 == 0;
    return out;
}

}  // namespace tarur
