#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tarur/bootstrap.hpp"
#include "tarur/classic_unitroot.hpp"
#include "tarur/error.hpp"
#include "tarur/report.hpp"
#include "tarur/series.hpp"
#include "tarur/tar_model.hpp"
#include "tarur/threshold_tests.hpp"
#include "tarur/unitroot_tests.hpp"

namespace tarur {

/// Names of the regressors in x_{t-1}, in column order.
[[nodiscard]] inline std::vector<std::string> regressor_names(int k) {
    std::vector<std::string> names{"y(t-1)", "intercept"};
    for (int j = 1; j <= k; ++j) names.push_back("dy(t-" + std::to_string(j) + ")");
    return names;
}

/// Shortest series for which every requested delay leaves n >= (k + 3) / pi1 rows,
/// so each regime can be identified after trimming.
[[nodiscard]] inline std::size_t minimum_length(int k, const std::vector<int>& m_values, double pi1) {
    const int m_max = m_values.empty() ? 1 : *std::max_element(m_values.begin(), m_values.end());
    const auto rows = static_cast<std::size_t>(std::ceil(static_cast<double>(min_regime_size(k)) / pi1 - 1e-9));
    return first_target_index(k, m_max) + std::max(rows, 2 * min_regime_size(k));
}

inline void validate(const AnalysisConfig& c) {
    if (c.k < 1) throw SizingError("k must be >= 1");
    if (!(c.pi1 > 0.0 && c.pi1 < 0.5)) throw SizingError("pi1 must lie in (0, 0.5)");
    if (c.replications == 0) throw SizingError("replications must be >= 1");
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw SizingError("alpha must lie in (0, 1)");
    if (c.digits < 1 || c.digits > 17) throw SizingError("digits must lie in 1..17");
    for (const int m : c.m_values)
        if (m < 1) throw SizingError("delays must be >= 1, got " + std::to_string(m));
    if (c.threshold_null == NullModel::ThresholdUnitRoot)
        throw SizingError("threshold-effect bootstrap needs a linear null model");
}

[[nodiscard]] inline Provenance make_provenance(const AnalysisConfig& c, const LogPriceSeries& s) {
    Provenance p;
    p.seed = c.seed;
    p.replications = c.replications;
    p.input = c.input;
    p.price_column = c.columns.price_column;
    p.observations = s.size();
    p.first_period = s.metadata().first.to_string();
    p.last_period = s.metadata().last.to_string();
    p.k = c.k;
    p.m_values = c.m_values;
    p.pi1 = c.pi1;
    p.covariance = std::string(to_string(c.covariance));
    p.threshold_null = std::string(to_string(c.threshold_null));
    p.unit_root_null = std::string(to_string(NullModel::ThresholdUnitRoot));
    p.lambda_in_bootstrap = c.reestimate_lambda ? "re-estimated" : "fixed";
    p.alpha = c.alpha;
    p.adf_deterministic = std::string(to_string(c.classic.adf_deterministic));
    p.pp_deterministic = std::string(to_string(c.classic.pp_deterministic));
    p.kpss_deterministic = std::string(to_string(c.classic.kpss_deterministic));
    p.adf_max_lag = c.classic.adf_max_lag;
    p.adf_lag_rule = std::string(to_string(c.classic.adf_lag_rule));
    p.bandwidth_rule = std::string(to_string(c.classic.bandwidth_rule));
    p.decision_rule =
        "joint null rejected if p(R1) < alpha or p(R2) < alpha; then both -t significant -> H1, "
        "one -> H2 (unit root in the other regime), none -> inconclusive; otherwise H0";
    p.sample_alignment = "per-(k,m) maximal sample n = T - max(k+1, m+1)";
    return p;
}

/// Full protocol on an already loaded series.
inline AnalysisReport run_pipeline(const LogPriceSeries& series, const AnalysisConfig& config) {
    validate(config);
    const std::size_t need = minimum_length(config.k, config.m_values, config.pi1);
    if (series.size() < need)
        throw SizingError("series has " + std::to_string(series.size()) + " observations; k=" +
                          std::to_string(config.k) + " with the requested delays needs T >= " + std::to_string(need));

    AnalysisReport report;
    report.provenance = make_provenance(config, series);

    try {
        for (const auto& r : classic_battery(series, config.classic)) report.classic.push_back(to_row(r));
    } catch (const Error& e) {
        report.notes.push_back(std::string("classic battery failed: ") + e.what());
    }

    std::vector<int> delays = config.m_values;
    std::sort(delays.begin(), delays.end());
    delays.erase(std::unique(delays.begin(), delays.end()), delays.end());

    const ThresholdTestOptions topts{config.pi1, config.covariance};
    for (const int m : delays) {
        ThresholdRow row;
        row.m = m;
        BootstrapSpec spec;
        spec.replications = config.replications;
        spec.null_model = config.threshold_null;
        spec.threads = config.threads;
        spec.seed = derive_stream(config.seed, {kThresholdEffectStream, static_cast<std::uint64_t>(m)});
        try {
            const auto test = threshold_effect_test(series, config.k, m, topts, spec);
            const TarDataset data = build_dataset(series, config.k, m);
            row.lambda_hat = estimate(data, build_grid(data, config.pi1), config.covariance).lambda_hat;
            row.ok = true;
            row.w = test.result.statistic;
            row.lambda_at_sup = test.lambda_at_sup;
            row.crit10 = test.result.crit10;
            row.crit5 = test.result.crit5;
            row.crit1 = test.result.crit1;
            row.p_value = test.result.p_value;
            row.replications = test.result.replications;
            row.redraws = test.result.redraws;
            row.seed = test.result.seed;
            if (!report.w_max || row.w > *report.w_max) {
                report.w_max = row.w;
                report.m_hat = m;
            }
        } catch (const Error& e) {
            row.error = e.what();
            report.notes.push_back("threshold-effect test failed at m=" + std::to_string(m) + ": " + e.what());
        }
        report.threshold.push_back(std::move(row));
    }

    if (report.m_hat) {
        const int m = *report.m_hat;
        const TarDataset data = build_dataset(series, config.k, m);
        const TarFit fit = estimate(data, build_grid(data, config.pi1), config.covariance);
        report.lambda_hat = fit.lambda_hat;
        const auto names = regressor_names(config.k);
        for (std::size_t j = 0; j < names.size(); ++j) {
            const auto i = static_cast<Eigen::Index>(j);
            report.coefficients.push_back({names[j], fit.theta1(i), fit.se1(i), fit.theta2(i), fit.se2(i)});
        }
        const RegimeSeries regimes = classify(series, fit);
        report.n1 = regimes.n1;
        report.n2 = regimes.n2;
        report.share1 = regimes.share1;
        report.share2 = regimes.share2;
        for (std::size_t t = 0; t < series.size(); ++t)
            report.regimes.push_back({regimes.dates[t].to_string(), regimes.labels[t], regimes.z[t]});
    }

    const UnitRootOptions uopts{config.pi1, config.covariance, config.reestimate_lambda, config.alpha};
    for (const auto& trow : report.threshold) {
        if (!trow.ok) continue;
        UnitRootRow row;
        row.m = trow.m;
        row.lambda_hat = trow.lambda_hat;
        BootstrapSpec spec;
        spec.replications = config.replications;
        spec.null_model = NullModel::ThresholdUnitRoot;
        spec.threads = config.threads;
        spec.seed = derive_stream(config.seed, {kUnitRootStream, static_cast<std::uint64_t>(trow.m)});
        try {
            const auto v = test_unit_roots(series, config.k, trow.m, trow.lambda_hat, uopts, spec);
            row.ok = true;
            row.r1 = v.r1;
            row.r2 = v.r2;
            row.t1 = v.t1;
            row.t2 = v.t2;
            row.hypothesis = std::string(to_string(v.hypothesis));
            if (report.m_hat && *report.m_hat == trow.m) report.verdict = row.hypothesis;
        } catch (const Error& e) {
            row.error = e.what();
            report.notes.push_back("threshold unit-root tests failed at m=" + std::to_string(trow.m) + ": " + e.what());
        }
        report.unit_roots.push_back(std::move(row));
    }
    if (!report.m_hat) report.notes.push_back("no delay produced a threshold-effect statistic");
    return report;
}

/// Loads `config.input` and runs the full protocol.
inline AnalysisReport run_pipeline(const AnalysisConfig& config) {
    validate(config);
    const LogPriceSeries series = load_series_file(config.input, config.columns);
    return run_pipeline(series, config);
}

}  // namespace tarur
