#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "tarur/error.hpp"
#include "tarur/linreg.hpp"
#include "tarur/parallel.hpp"
#include "tarur/series.hpp"
#include "tarur/tar_model.hpp"

namespace tarur {

/// Data-generating process imposed under the null.
///   LinearUnitRoot     Δy_t = β + α'ΔY_{t-1} + e_t (no level term; threshold-effect test default)
///   LinearUnrestricted Δy_t = ρ y_{t-1} + β + α'ΔY_{t-1} + e_t
///   ThresholdUnitRoot  two regimes at a fixed λ with ρ1 = ρ2 = 0 (threshold unit-root tests)
enum class NullModel { LinearUnitRoot, LinearUnrestricted, ThresholdUnitRoot };

[[nodiscard]] inline std::string_view to_string(NullModel m) noexcept {
    switch (m) {
        case NullModel::LinearUnitRoot: return "linear-unit-root";
        case NullModel::LinearUnrestricted: return "linear-unrestricted";
        case NullModel::ThresholdUnitRoot: return "threshold-unit-root";
    }
    return "?";
}

inline constexpr std::uint64_t kDefaultSeed = 199012;

struct BootstrapSpec {
    std::size_t replications = 2000;
    std::uint64_t seed = kDefaultSeed;
    NullModel null_model = NullModel::LinearUnitRoot;
    std::size_t parallel_chunk = 8;
    unsigned threads = 0;  // 0 = hardware concurrency; never affects results
};

struct TestResult {
    double statistic = 0.0;
    double crit10 = 0.0;
    double crit5 = 0.0;
    double crit1 = 0.0;
    double p_value = 1.0;
    std::size_t replications = 0;
    std::uint64_t seed = 0;
    std::size_t redraws = 0;

    friend bool operator==(const TestResult&, const TestResult&) = default;
};

/// Order statistic at rank ceil(percent / 100 * B) (1-based) of an ascending sample.
[[nodiscard]] inline double empirical_percentile(std::span<const double> sorted, int percent) {
    if (sorted.empty()) throw SizingError("empirical percentile of an empty sample");
    const std::size_t B = sorted.size();
    const std::size_t rank = std::max<std::size_t>(1, (static_cast<std::size_t>(percent) * B + 99) / 100);
    return sorted[std::min(rank, B) - 1];
}

/// Upper-tail bootstrap summary: critical values at 90/95/99 percentiles and
/// p = #{draw >= observed} / B.
[[nodiscard]] inline TestResult summarize(double observed, std::vector<double> draws, std::uint64_t seed,
                                          std::size_t redraws = 0) {
    if (draws.empty()) throw SizingError("bootstrap produced no draws");
    std::sort(draws.begin(), draws.end());
    TestResult r;
    r.statistic = observed;
    r.crit10 = empirical_percentile(draws, 90);
    r.crit5 = empirical_percentile(draws, 95);
    r.crit1 = empirical_percentile(draws, 99);
    const auto first_ge = std::lower_bound(draws.begin(), draws.end(), observed);
    r.p_value = static_cast<double>(draws.end() - first_ge) / static_cast<double>(draws.size());
    r.replications = draws.size();
    r.seed = seed;
    r.redraws = redraws;
    return r;
}

template <std::size_t N>
struct BootstrapDraws {
    std::array<std::vector<double>, N> draws;
    std::size_t redraws = 0;
};

/// Runs spec.replications calls of `replicate(Rng&) -> std::array<double, N>`. Replication b,
/// attempt a draws from the stream derive_stream(spec.seed, {b, a}); a replication that throws
/// tarur::Error or returns a non-finite value is redrawn. More than 10 * B redraws in total aborts.
template <std::size_t N, class Replicate>
BootstrapDraws<N> draw_replications(Replicate&& replicate, const BootstrapSpec& spec) {
    const std::size_t B = spec.replications;
    if (B == 0) throw SizingError("bootstrap needs at least one replication");
    const std::size_t cap = 10 * B;

    BootstrapDraws<N> out;
    for (auto& d : out.draws) d.assign(B, 0.0);
    std::vector<std::size_t> failures(B, 0);
    std::atomic<std::size_t> total_failures{0};

    parallel_for(B, spec.threads, spec.parallel_chunk, [&](std::size_t b) {
        for (std::uint64_t attempt = 0;; ++attempt) {
            Rng rng(derive_stream(spec.seed, {static_cast<std::uint64_t>(b), attempt}));
            bool ok = false;
            std::array<double, N> stats{};
            try {
                stats = replicate(rng);
                ok = std::all_of(stats.begin(), stats.end(), [](double v) { return std::isfinite(v); });
            } catch (const Error&) {
                ok = false;
            }
            if (ok) {
                for (std::size_t j = 0; j < N; ++j) out.draws[j][b] = stats[j];
                failures[b] = static_cast<std::size_t>(attempt);
                return;
            }
            if (total_failures.fetch_add(1) + 1 > cap)
                throw EstimationError("bootstrap aborted: more than " + std::to_string(cap) +
                                      " failed replications were redrawn");
        }
    });
    out.redraws = std::accumulate(failures.begin(), failures.end(), std::size_t{0});
    return out;
}

/// Fitted null process used to generate bootstrap samples. Coefficient vectors follow the
/// regressor layout (ρ, β, α_1..α_k); ρ is zero for the unit-root nulls.
struct NullProcess {
    NullModel kind = NullModel::LinearUnitRoot;
    int k = 1;
    int m = 1;
    double lambda = 0.0;
    Eigen::VectorXd coef1;
    Eigen::VectorXd coef2;              // threshold model only
    std::vector<double> residuals;      // centred pool
    std::vector<double> initial_levels; // first max(k+1, m+1) observed levels
    YearMonth start{};
    std::size_t length = 0;
};

/// Spectral radius of the companion matrix of Δy_t = Σ a_j Δy_{t-j}.
[[nodiscard]] inline double companion_radius(const Eigen::VectorXd& lag_coefs) {
    const Eigen::Index k = lag_coefs.size();
    if (k == 0) return 0.0;
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(k, k);
    C.row(0) = lag_coefs.transpose();
    if (k > 1) C.bottomLeftCorner(k - 1, k - 1).setIdentity();
    const Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

namespace detail {

/// Autoregressive coefficients in levels implied by Δy_t = ρ y_{t-1} + Σ α_j Δy_{t-j}.
inline Eigen::VectorXd level_ar_coefficients(double rho, const Eigen::VectorXd& alpha) {
    const Eigen::Index k = alpha.size();
    Eigen::VectorXd a = Eigen::VectorXd::Zero(k + 1);
    a(0) = 1.0 + rho + (k > 0 ? alpha(0) : 0.0);
    for (Eigen::Index j = 1; j < k; ++j) a(j) = alpha(j) - alpha(j - 1);
    if (k > 0) a(k) = -alpha(k - 1);
    return a;
}

inline double process_radius(NullModel kind, const Eigen::VectorXd& coef) {
    const Eigen::VectorXd alpha = coef.tail(coef.size() - 2);
    if (kind == NullModel::LinearUnrestricted) return companion_radius(level_ar_coefficients(coef(0), alpha));
    return companion_radius(alpha);
}

inline std::vector<double> centred(const Eigen::VectorXd& r) {
    std::vector<double> out(r.data(), r.data() + r.size());
    const double mean = std::accumulate(out.begin(), out.end(), 0.0) / static_cast<double>(out.size());
    for (double& v : out) v -= mean;
    return out;
}

}  // namespace detail

/// Estimates the null process on the (k, m) sample of `series`. `lambda` is used only by
/// the threshold model. Throws SimulationError for explosive null dynamics: for the linear
/// models when the companion radius is >= 1; for the threshold model when both regimes are.
inline NullProcess fit_null(const LogPriceSeries& series, int k, int m, NullModel kind, double lambda = 0.0) {
    const TarDataset data = build_dataset(series, k, m);
    const Eigen::Index p = static_cast<Eigen::Index>(data.params());
    const std::size_t start = first_target_index(k, m);

    NullProcess null;
    null.kind = kind;
    null.k = k;
    null.m = m;
    null.lambda = lambda;
    null.initial_levels.assign(series.values().begin(), series.values().begin() + static_cast<long>(start));
    null.start = series.dates().front();
    null.length = series.size();

    const auto restricted = [&](const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
        RegressionFit f;
        detail::ols_core(X.rightCols(p - 1), y, false, f);
        Eigen::VectorXd coef(p);
        coef << 0.0, f.coefficients;
        return std::pair{coef, Eigen::VectorXd(f.residuals)};
    };

    switch (kind) {
        case NullModel::LinearUnitRoot: {
            auto [coef, resid] = restricted(data.regressors, data.targets);
            null.coef1 = coef;
            null.residuals = detail::centred(resid);
            break;
        }
        case NullModel::LinearUnrestricted: {
            RegressionFit f;
            detail::ols_core(data.regressors, data.targets, false, f);
            null.coef1 = f.coefficients;
            null.residuals = detail::centred(f.residuals);
            break;
        }
        case NullModel::ThresholdUnitRoot: {
            detail::RegimeSplitter splitter(data);
            splitter.split(lambda);
            splitter.check_counts(k);
            const std::size_t n = data.n();
            Eigen::MatrixXd X1(static_cast<Eigen::Index>(splitter.n1()), p), X2(static_cast<Eigen::Index>(splitter.n2()), p);
            Eigen::VectorXd y1(X1.rows()), y2(X2.rows());
            Eigen::Index i1 = 0, i2 = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const auto r = static_cast<Eigen::Index>(i);
                if (data.z(r) < lambda) {
                    X1.row(i1) = data.regressors.row(r);
                    y1(i1++) = data.targets(r);
                } else {
                    X2.row(i2) = data.regressors.row(r);
                    y2(i2++) = data.targets(r);
                }
            }
            auto [c1, r1] = restricted(X1, y1);
            auto [c2, r2] = restricted(X2, y2);
            null.coef1 = c1;
            null.coef2 = c2;
            Eigen::VectorXd all(r1.size() + r2.size());
            all << r1, r2;
            null.residuals = detail::centred(all);
            break;
        }
    }

    if (kind == NullModel::ThresholdUnitRoot) {
        const double r1 = detail::process_radius(kind, null.coef1);
        const double r2 = detail::process_radius(kind, null.coef2);
        if (r1 >= 1.0 && r2 >= 1.0)
            throw SimulationError("threshold null is explosive in both regimes (companion radii " + std::to_string(r1) +
                                  ", " + std::to_string(r2) + ")");
    } else {
        const double r = detail::process_radius(kind, null.coef1);
        if (r >= 1.0)
            throw SimulationError("null dynamics are explosive or contain an extra unit root (companion radius " +
                                  std::to_string(r) + ")");
    }
    return null;
}

/// Generates a series of `length` levels: the process's initial levels, then
/// Δy_t = coef(regime)' x_{t-1} + e_t with e_t drawn with replacement from `pool`.
inline LogPriceSeries simulate_null(const NullProcess& null, std::span<const double> pool, std::size_t length, Rng& rng) {
    if (pool.empty()) throw SizingError("residual pool is empty");
    const std::size_t start = null.initial_levels.size();
    if (length <= start)
        throw SizingError("simulated length " + std::to_string(length) + " must exceed the " + std::to_string(start) +
                          " initial levels");
    if (!null.coef1.allFinite() || (null.kind == NullModel::ThresholdUnitRoot && !null.coef2.allFinite()))
        throw SimulationError("null model has non-finite coefficients");

    const auto k = static_cast<std::size_t>(null.k);
    const auto m = static_cast<std::size_t>(null.m);
    std::vector<double> y(length);
    std::copy(null.initial_levels.begin(), null.initial_levels.end(), y.begin());
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    for (std::size_t t = start; t < length; ++t) {
        const Eigen::VectorXd* coef = &null.coef1;
        if (null.kind == NullModel::ThresholdUnitRoot && !(y[t - 1] - y[t - 1 - m] < null.lambda)) coef = &null.coef2;
        const auto& c = *coef;
        double dy = c(0) * y[t - 1] + c(1);
        for (std::size_t j = 1; j <= k; ++j) dy += c(static_cast<Eigen::Index>(j) + 1) * (y[t - j] - y[t - j - 1]);
        dy += pool[pick(rng)];
        y[t] = y[t - 1] + dy;
        if (!std::isfinite(y[t]) || std::abs(y[t]) > 1e100)
            throw SimulationError("simulated path diverged at observation " + std::to_string(t + 1));
    }
    return LogPriceSeries::consecutive(null.start, std::move(y));
}

/// Bootstrap test of a scalar statistic: each replication simulates the null process
/// and evaluates `statistic(series)`.
template <class Statistic>
TestResult run(double observed, const NullProcess& null, Statistic&& statistic, const BootstrapSpec& spec) {
    const std::span<const double> pool(null.residuals);
    auto draws = draw_replications<1>(
        [&](Rng& rng) {
            const LogPriceSeries sim = simulate_null(null, pool, null.length, rng);
            return std::array<double, 1>{statistic(sim)};
        },
        spec);
    return summarize(observed, std::move(draws.draws[0]), spec.seed, draws.redraws);
}

}  // namespace tarur
