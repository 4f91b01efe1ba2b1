#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tarur/error.hpp"

namespace tarur {

/// Coefficient covariance flavour.
///   HC0       (X'X)^-1 X' diag(e^2) X (X'X)^-1
///   HC1       HC0 * n / (n - p)
///   Classical sigma2 * (X'X)^-1
enum class CovarianceType { HC0, HC1, Classical };

[[nodiscard]] inline std::string_view to_string(CovarianceType c) noexcept {
    switch (c) {
        case CovarianceType::HC0: return "hc0";
        case CovarianceType::HC1: return "hc1";
        case CovarianceType::Classical: return "classical";
    }
    return "?";
}

/// A column is collinear when its R pivot falls below this fraction of the largest pivot.
inline constexpr double kRankTolerance = 1e-10;

struct RegressionFit {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd residuals;
    double ssr = 0.0;
    double sigma2 = 0.0;               // ssr / (n - p); 0 when n == p
    Eigen::MatrixXd cov_robust;        // flavour given by cov_type
    Eigen::MatrixXd cov_hc0;           // kept so stacked fits can be re-flavoured
    Eigen::MatrixXd xtx_inverse;       // (X'X)^-1
    Eigen::VectorXd std_errors;
    Eigen::VectorXd t_ratios;
    std::size_t n_obs = 0;
    std::size_t n_params = 0;
    CovarianceType cov_type = CovarianceType::HC0;
};

namespace detail {

/// Householder QR solve shared by every least-squares path. Fills coefficients,
/// residuals and ssr always; the covariance pieces only when `with_covariance`.
inline void ols_core(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                     bool with_covariance, RegressionFit& fit) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (y.size() != n)
        throw SizingError("design has " + std::to_string(n) + " rows but target has " + std::to_string(y.size()));
    if (p == 0) throw SizingError("design has no columns");
    if (n < p)
        throw SizingError("design has " + std::to_string(n) + " rows for " + std::to_string(p) +
                          " columns; need rows >= cols");

    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    const auto& packed = qr.matrixQR();
    double max_pivot = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) max_pivot = std::max(max_pivot, std::abs(packed(j, j)));
    for (Eigen::Index j = 0; j < p; ++j) {
        if (!(std::abs(packed(j, j)) > kRankTolerance * max_pivot))
            throw SingularityError("design is rank deficient: column " + std::to_string(j) +
                                       " is collinear with the preceding columns",
                                   static_cast<std::size_t>(j));
    }

    Eigen::VectorXd qty = y;
    qty.applyOnTheLeft(qr.householderQ().adjoint());
    const auto R = packed.topLeftCorner(p, p).triangularView<Eigen::Upper>();
    fit.coefficients = R.solve(qty.head(p));
    fit.residuals = y - X * fit.coefficients;
    fit.ssr = fit.residuals.squaredNorm();
    fit.n_obs = static_cast<std::size_t>(n);
    fit.n_params = static_cast<std::size_t>(p);
    fit.sigma2 = n > p ? fit.ssr / static_cast<double>(n - p) : 0.0;
    if (!with_covariance) return;

    const Eigen::MatrixXd r_inv = R.solve(Eigen::MatrixXd::Identity(p, p));
    // Q1 = X R^-1 has orthonormal columns, so (X'X)^-1 X' diag(e^2) X (X'X)^-1 = R^-1 (Q1' diag(e^2) Q1) R^-T.
    const Eigen::MatrixXd scaled = (X * r_inv).array().colwise() * fit.residuals.array();
    const Eigen::MatrixXd meat = scaled.transpose() * scaled;
    fit.xtx_inverse = r_inv * r_inv.transpose();
    fit.cov_hc0 = r_inv * meat * r_inv.transpose();
    fit.cov_hc0 = 0.5 * (fit.cov_hc0 + fit.cov_hc0.transpose()).eval();
}

}  // namespace detail

/// Sets cov_robust, std_errors and t_ratios from cov_hc0 / xtx_inverse for the given flavour.
inline void apply_covariance(RegressionFit& fit, CovarianceType type) {
    const auto n = static_cast<double>(fit.n_obs);
    const auto p = static_cast<double>(fit.n_params);
    fit.cov_type = type;
    switch (type) {
        case CovarianceType::HC0: fit.cov_robust = fit.cov_hc0; break;
        case CovarianceType::HC1: fit.cov_robust = fit.cov_hc0 * (n > p ? n / (n - p) : 1.0); break;
        case CovarianceType::Classical: fit.cov_robust = fit.sigma2 * fit.xtx_inverse; break;
    }
    fit.std_errors = fit.cov_robust.diagonal().cwiseMax(0.0).cwiseSqrt();
    fit.t_ratios = fit.coefficients.cwiseQuotient(fit.std_errors);
}

/// Ordinary least squares via Householder QR with a heteroskedasticity-consistent covariance.
inline RegressionFit ols_fit(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                             CovarianceType type = CovarianceType::HC0) {
    RegressionFit fit;
    detail::ols_core(X, y, true, fit);
    apply_covariance(fit, type);
    return fit;
}

/// Index pairs (i, i + p) matching regime-1 and regime-2 copies of each of p regressors
/// in the stacked design [X * I1, X * I2].
[[nodiscard]] inline std::vector<std::pair<std::size_t, std::size_t>> regime_pairs(std::size_t p) {
    std::vector<std::pair<std::size_t, std::size_t>> out(p);
    for (std::size_t i = 0; i < p; ++i) out[i] = {i, i + p};
    return out;
}

/// Wald statistic d' (R V R')^-1 d for the restriction b_first = b_second on every pair,
/// with d = R b and V the fit's covariance.
inline double wald_equality(const RegressionFit& fit, std::span<const std::pair<std::size_t, std::size_t>> pairs) {
    const auto q = static_cast<Eigen::Index>(pairs.size());
    const auto P = static_cast<Eigen::Index>(fit.coefficients.size());
    if (q == 0) throw SizingError("restriction selects no coefficient pairs");
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(q, P);
    for (Eigen::Index r = 0; r < q; ++r) {
        const auto [a, b] = pairs[static_cast<std::size_t>(r)];
        if (static_cast<Eigen::Index>(a) >= P || static_cast<Eigen::Index>(b) >= P || a == b)
            throw SizingError("restriction pair (" + std::to_string(a) + ", " + std::to_string(b) +
                              ") is invalid for " + std::to_string(P) + " coefficients");
        R(r, static_cast<Eigen::Index>(a)) = 1.0;
        R(r, static_cast<Eigen::Index>(b)) = -1.0;
    }
    const Eigen::VectorXd d = R * fit.coefficients;
    const Eigen::MatrixXd middle = R * fit.cov_robust * R.transpose();
    const Eigen::LLT<Eigen::MatrixXd> llt(middle);
    if (llt.info() != Eigen::Success)
        throw SingularityError("restricted covariance R V R' is not positive definite", 0);
    const Eigen::VectorXd diag = llt.matrixLLT().diagonal();
    const double min_diag = diag.minCoeff();
    const double max_diag = diag.maxCoeff();
    if (!(min_diag > kRankTolerance * max_diag))
        throw SingularityError("restricted covariance R V R' is numerically singular", 0);
    const Eigen::VectorXd w = llt.matrixL().solve(d);
    return w.squaredNorm();
}

}  // namespace tarur
