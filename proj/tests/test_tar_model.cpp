#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "synthetic.hpp"
#include "tarur/tar_model.hpp"

using namespace tarur;

namespace {

sim::TarProcess break_process() {
    sim::TarProcess p;
    p.rho1 = -0.05;
    p.rho2 = -0.2;
    p.beta1 = 0.3;
    p.beta2 = -0.1;
    p.alpha1 = {0.4, -0.2};
    p.alpha2 = {-0.3, 0.1};
    p.m = 2;
    p.lambda = 0.0;
    return p;
}

TarDataset synthetic_dataset(std::uint64_t seed, std::size_t T = 240, int k = 2, int m = 2) {
    auto p = break_process();
    p.m = m;
    const auto y = sim::simulate_tar(p, T, seed);
    return build_dataset(std::span<const double>(y), k, m);
}

}  // namespace

TEST(Grid, KeepsDistinctValuesInsideTheTrimmedEcdf) {
    const TarDataset d = synthetic_dataset(1);
    const ThresholdGrid g = build_grid(d, 0.15);
    ASSERT_FALSE(g.candidates.empty());
    EXPECT_TRUE(std::is_sorted(g.candidates.begin(), g.candidates.end()));
    EXPECT_EQ(std::adjacent_find(g.candidates.begin(), g.candidates.end()), g.candidates.end());
    const auto n = static_cast<double>(d.n());
    std::size_t inside = 0;
    std::vector<double> z(d.z.data(), d.z.data() + d.z.size());
    std::sort(z.begin(), z.end());
    z.erase(std::unique(z.begin(), z.end()), z.end());
    for (const double v : z) {
        const double ecdf = static_cast<double>(std::count_if(d.z.data(), d.z.data() + d.z.size(),
                                                              [&](double x) { return x <= v; })) /
                            n;
        const bool keep = ecdf >= 0.15 - 1e-12 && ecdf <= 0.85 + 1e-12;
        inside += keep;
        EXPECT_EQ(keep, std::binary_search(g.candidates.begin(), g.candidates.end(), v)) << v;
    }
    EXPECT_EQ(inside, g.candidates.size());
}

TEST(Grid, DegenerateThresholdVariableIsAnEstimationError) {
    std::vector<double> y(100);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = 0.25 * static_cast<double>(i);
    const TarDataset d = build_dataset(std::span<const double>(y), 2, 3);
    EXPECT_THROW((void)build_grid(d), EstimationError);
    EXPECT_THROW((void)build_grid(d, 0.6), SizingError);
}

TEST(Estimate, QMinEqualsExhaustiveMinimumExactly) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const TarDataset d = synthetic_dataset(seed);
        const ThresholdGrid g = build_grid(d);
        const TarFit best = estimate(d, g);
        double exhaustive = std::numeric_limits<double>::infinity();
        double at = 0.0;
        for (const double c : g.candidates) {
            const double q = fit_at(d, c).q_min;
            if (q < exhaustive) {
                exhaustive = q;
                at = c;
            }
        }
        EXPECT_EQ(best.q_min, exhaustive) << "seed " << seed;
        EXPECT_EQ(best.lambda_hat, at) << "seed " << seed;
    }
}

TEST(Estimate, SsrMatchesIndependentOracle) {
    const TarDataset d = synthetic_dataset(3);
    const ThresholdGrid g = build_grid(d);
    const auto profile = ssr_profile(d, g);
    for (std::size_t c = 0; c < g.candidates.size(); c += 7) {
        ASSERT_TRUE(profile[c].has_value());
        const auto ref = static_cast<double>(sim::split_ssr(d, g.candidates[c]));
        EXPECT_NEAR(*profile[c], ref, 1e-10 * ref);
    }
}

TEST(Estimate, ProfileIsPiecewiseConstantBetweenOrderStatistics) {
    const TarDataset d = synthetic_dataset(4);
    const ThresholdGrid g = build_grid(d);
    for (std::size_t c = 1; c < g.candidates.size(); c += 5) {
        const double mid = 0.5 * (g.candidates[c - 1] + g.candidates[c]);
        EXPECT_EQ(fit_at(d, mid).q_min, fit_at(d, g.candidates[c]).q_min);
    }
}

TEST(Estimate, TiesResolveToSmallestThreshold) {
    // An exactly linear target makes the profile flat up to rounding.
    TarDataset d = synthetic_dataset(5);
    d.targets = d.regressors * Eigen::VectorXd::LinSpaced(d.regressors.cols(), 0.1, 0.4);
    const ThresholdGrid g = build_grid(d);
    const TarFit fit = estimate(d, g);
    const auto profile = ssr_profile(d, g);
    double smallest = std::numeric_limits<double>::infinity();
    for (const auto& q : profile)
        if (q) smallest = std::min(smallest, *q);
    std::size_t first = 0;
    while (!profile[first] || *profile[first] != smallest) ++first;
    EXPECT_EQ(fit.lambda_hat, g.candidates[first]);
}

TEST(Estimate, RecoversAStrongThreshold) {
    sim::TarProcess p;
    p.rho1 = -0.1;
    p.rho2 = -0.1;
    p.beta1 = 1.5;
    p.beta2 = -1.5;
    p.m = 1;
    p.lambda = 0.5;
    p.sigma = 0.5;
    const auto y = sim::simulate_tar(p, 600, 11);
    const TarDataset d = build_dataset(std::span<const double>(y), 1, 1);
    const TarFit fit = estimate(d, build_grid(d));
    EXPECT_NEAR(fit.lambda_hat, 0.5, 0.25);
    EXPECT_NEAR(fit.theta1(1), 1.5, 0.3);
    EXPECT_NEAR(fit.theta2(1), -1.5, 0.3);
}

TEST(FitAt, StackedQuantitiesAreConsistent) {
    const TarDataset d = synthetic_dataset(6, 200, 3, 2);
    const ThresholdGrid g = build_grid(d);
    const double lambda = g.candidates[g.candidates.size() / 2];
    const TarFit fit = fit_at(d, lambda, CovarianceType::HC0);
    const auto p = static_cast<Eigen::Index>(d.params());
    EXPECT_EQ(fit.n1 + fit.n2, d.n());
    std::size_t low = 0;
    for (Eigen::Index i = 0; i < d.z.size(); ++i) {
        const bool is_low = d.z(i) < lambda;
        low += is_low;
        EXPECT_EQ(fit.regime_mask[static_cast<std::size_t>(i)], is_low);
        const Eigen::VectorXd& theta = is_low ? fit.theta1 : fit.theta2;
        EXPECT_NEAR(fit.stacked.residuals(i), d.targets(i) - d.regressors.row(i).dot(theta), 1e-12);
    }
    EXPECT_EQ(fit.n1, low);
    EXPECT_NEAR(fit.q_min, fit.stacked.residuals.squaredNorm(), 1e-12 * fit.q_min);
    EXPECT_DOUBLE_EQ(fit.rho1_hat, fit.theta1(0));
    EXPECT_DOUBLE_EQ(fit.t1, fit.theta1(0) / fit.se1(0));
    EXPECT_DOUBLE_EQ(fit.t2, fit.theta2(0) / fit.se2(0));
    EXPECT_TRUE(fit.stacked.cov_robust.topRightCorner(p, p).isZero(0.0));

    // Stacked design [x I1, x I2] solved directly gives the same coefficients.
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(d.regressors.rows(), 2 * p);
    for (Eigen::Index i = 0; i < S.rows(); ++i)
        (d.z(i) < lambda ? S.row(i).head(p) : S.row(i).tail(p)) = d.regressors.row(i);
    const RegressionFit direct = ols_fit(S, d.targets, CovarianceType::HC1);
    const TarFit hc1 = fit_at(d, lambda, CovarianceType::HC1);
    EXPECT_TRUE(direct.coefficients.isApprox(hc1.stacked.coefficients, 1e-10));
    EXPECT_TRUE(direct.cov_robust.isApprox(hc1.stacked.cov_robust, 1e-8));
}

TEST(FitAt, UnderpopulatedRegimeIsAnIdentifiabilityError) {
    const TarDataset d = synthetic_dataset(7);
    std::vector<double> z(d.z.data(), d.z.data() + d.z.size());
    std::sort(z.begin(), z.end());
    try {
        (void)fit_at(d, z[2]);
        FAIL() << "expected IdentifiabilityError";
    } catch (const IdentifiabilityError& e) {
        EXPECT_EQ(e.regime(), 1);
        EXPECT_EQ(e.count(), 2u);
    }
    EXPECT_THROW((void)fit_at(d, z.back() + 1.0), IdentifiabilityError);
}

TEST(Classify, LabelsEveryMonthWithSentinelForUndefined) {
    auto p = break_process();
    p.m = 4;
    const auto series = sim::as_series(sim::simulate_tar(p, 200, 8));
    const int k = 3;
    const TarDataset d = build_dataset(series, k, 4);
    const TarFit fit = estimate(d, build_grid(d));
    const RegimeSeries r = classify(series, fit);
    ASSERT_EQ(r.labels.size(), series.size());
    ASSERT_EQ(r.dates.size(), series.size());
    const std::size_t start = first_target_index(k, 4);
    for (std::size_t t = 0; t < start; ++t) {
        EXPECT_EQ(r.labels[t], kRegimeUndefined);
        EXPECT_FALSE(r.z[t].has_value());
    }
    for (std::size_t t = start; t < series.size(); ++t) {
        const int want = fit.regime_mask[t - start] ? 1 : 2;
        EXPECT_EQ(r.labels[t], want);
        ASSERT_TRUE(r.z[t].has_value());
        EXPECT_EQ(*r.z[t], d.z(static_cast<Eigen::Index>(t - start)));
    }
    EXPECT_EQ(r.n1, fit.n1);
    EXPECT_EQ(r.n2, fit.n2);
    EXPECT_NEAR(r.share1 + r.share2, 1.0, 1e-15);
    EXPECT_FALSE(r.regime1_empty);
    EXPECT_FALSE(r.regime2_empty);
}
