#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tarur/bootstrap.hpp"
#include "tarur/classic_unitroot.hpp"
#include "tarur/linreg.hpp"
#include "tarur/series.hpp"
#include "tarur/unitroot_tests.hpp"

namespace tarur {

inline constexpr std::string_view kVersion = "1.0.0";

enum class OutputFormat { Text, Csv, Json };

[[nodiscard]] inline std::string_view to_string(OutputFormat f) noexcept {
    switch (f) {
        case OutputFormat::Text: return "text";
        case OutputFormat::Csv: return "csv";
        case OutputFormat::Json: return "json";
    }
    return "?";
}

/// Every setting of a full analysis. Defaults reproduce the reference protocol:
/// k = 12, m = 1..12, trimming 0.15, 2000 bootstrap replications.
struct AnalysisConfig {
    std::string input;
    ColumnSpec columns;
    int k = 12;
    std::vector<int> m_values{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    double pi1 = kDefaultTrim;
    std::size_t replications = 2000;
    std::uint64_t seed = kDefaultSeed;
    std::string out_dir = "tarur-out";
    std::vector<OutputFormat> formats{OutputFormat::Json, OutputFormat::Csv, OutputFormat::Text};
    int digits = 6;
    NullModel threshold_null = NullModel::LinearUnitRoot;
    CovarianceType covariance = CovarianceType::HC0;
    bool reestimate_lambda = true;
    double alpha = 0.10;
    ClassicOptions classic{};
    unsigned threads = 0;  // execution only; excluded from reports

    friend bool operator==(const AnalysisConfig&, const AnalysisConfig&) = default;
};

/// Settings that determine the numbers in a report.
struct Provenance {
    std::string version{kVersion};
    std::string rng_algorithm{kRngAlgorithm};
    std::uint64_t seed = 0;
    std::size_t replications = 0;
    std::string input;
    std::string price_column;
    std::size_t observations = 0;
    std::string first_period;
    std::string last_period;
    int k = 0;
    std::vector<int> m_values;
    double pi1 = 0.0;
    std::string covariance;
    std::string threshold_null;
    std::string unit_root_null;
    std::string lambda_in_bootstrap;
    double alpha = 0.0;
    std::string adf_deterministic;
    std::string pp_deterministic;
    std::string kpss_deterministic;
    int adf_max_lag = 0;
    std::string adf_lag_rule;
    std::string bandwidth_rule;
    std::string decision_rule;
    std::string sample_alignment;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct ClassicRow {
    std::string test;
    std::string variable;
    std::string deterministic;
    double statistic = 0.0;
    double crit10 = 0.0;
    double crit5 = 0.0;
    double crit1 = 0.0;
    double p_value = 0.0;
    int lags = 0;
    int bandwidth = 0;
    std::size_t n_obs = 0;
    std::string notes;

    friend bool operator==(const ClassicRow&, const ClassicRow&) = default;
};

struct ThresholdRow {
    int m = 0;
    bool ok = false;
    double w = 0.0;
    double lambda_at_sup = 0.0;
    double lambda_hat = 0.0;  // least-squares threshold at this m
    double crit10 = 0.0;
    double crit5 = 0.0;
    double crit1 = 0.0;
    double p_value = 0.0;
    std::size_t replications = 0;
    std::size_t redraws = 0;
    std::uint64_t seed = 0;
    std::string error;

    friend bool operator==(const ThresholdRow&, const ThresholdRow&) = default;
};

struct CoefficientRow {
    std::string regressor;
    double estimate1 = 0.0;
    double se1 = 0.0;
    double estimate2 = 0.0;
    double se2 = 0.0;

    friend bool operator==(const CoefficientRow&, const CoefficientRow&) = default;
};

struct UnitRootRow {
    int m = 0;
    bool ok = false;
    double lambda_hat = 0.0;
    TestResult r1;
    TestResult r2;
    TestResult t1;  // statistic is -t1
    TestResult t2;  // statistic is -t2
    std::string hypothesis;
    std::string error;

    friend bool operator==(const UnitRootRow&, const UnitRootRow&) = default;
};

struct RegimeRow {
    std::string period;
    int label = kRegimeUndefined;
    std::optional<double> z;

    friend bool operator==(const RegimeRow&, const RegimeRow&) = default;
};

struct AnalysisReport {
    Provenance provenance;
    std::vector<ClassicRow> classic;
    std::vector<ThresholdRow> threshold;
    std::optional<int> m_hat;
    std::optional<double> w_max;
    std::optional<double> lambda_hat;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    double share1 = 0.0;
    double share2 = 0.0;
    std::vector<CoefficientRow> coefficients;
    std::vector<UnitRootRow> unit_roots;
    std::string verdict;
    std::vector<RegimeRow> regimes;
    std::vector<std::string> notes;

    friend bool operator==(const AnalysisReport&, const AnalysisReport&) = default;
};

[[nodiscard]] inline ClassicRow to_row(const ClassicResult& r) {
    return {std::string(to_string(r.test)), std::string(to_string(r.variable)), std::string(to_string(r.deterministic)),
            r.statistic, r.crit10, r.crit5, r.crit1, r.p_value, r.lags, r.bandwidth, r.n_obs, r.notes};
}

NLOHMANN_JSON_SERIALIZE_ENUM(OutputFormat, {{OutputFormat::Text, "text"},
                                            {OutputFormat::Csv, "csv"},
                                            {OutputFormat::Json, "json"}})
NLOHMANN_JSON_SERIALIZE_ENUM(NullModel, {{NullModel::LinearUnitRoot, "linear-unit-root"},
                                         {NullModel::LinearUnrestricted, "linear-unrestricted"},
                                         {NullModel::ThresholdUnitRoot, "threshold-unit-root"}})
NLOHMANN_JSON_SERIALIZE_ENUM(CovarianceType, {{CovarianceType::HC0, "hc0"},
                                              {CovarianceType::HC1, "hc1"},
                                              {CovarianceType::Classical, "classical"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Deterministic, {{Deterministic::None, "none"},
                                             {Deterministic::Constant, "const"},
                                             {Deterministic::Trend, "trend"}})
NLOHMANN_JSON_SERIALIZE_ENUM(LagRule, {{LagRule::AIC, "aic"}, {LagRule::BIC, "bic"}, {LagRule::Fixed, "fixed"}})
NLOHMANN_JSON_SERIALIZE_ENUM(BandwidthRule, {{BandwidthRule::NeweyWest, "newey-west"},
                                             {BandwidthRule::Short, "short"},
                                             {BandwidthRule::Long, "long"},
                                             {BandwidthRule::Fixed, "fixed"}})

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ColumnSpec, date_column, price_column, date_format)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ClassicOptions, adf_deterministic, pp_deterministic, kpss_deterministic, adf_max_lag,
                                   adf_lag_rule, bandwidth_rule, fixed_bandwidth)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(AnalysisConfig, input, columns, k, m_values, pi1, replications, seed, out_dir,
                                   formats, digits, threshold_null, covariance, reestimate_lambda, alpha, classic)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Provenance, version, rng_algorithm, seed, replications, input, price_column,
                                   observations, first_period, last_period, k, m_values, pi1, covariance,
                                   threshold_null, unit_root_null, lambda_in_bootstrap, alpha, adf_deterministic,
                                   pp_deterministic, kpss_deterministic, adf_max_lag, adf_lag_rule, bandwidth_rule,
                                   decision_rule, sample_alignment)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ClassicRow, test, variable, deterministic, statistic, crit10, crit5, crit1, p_value,
                                   lags, bandwidth, n_obs, notes)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TestResult, statistic, crit10, crit5, crit1, p_value, replications, seed, redraws)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ThresholdRow, m, ok, w, lambda_at_sup, lambda_hat, crit10, crit5, crit1, p_value,
                                   replications, redraws, seed, error)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CoefficientRow, regressor, estimate1, se1, estimate2, se2)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(UnitRootRow, m, ok, lambda_hat, r1, r2, t1, t2, hypothesis, error)

template <class Json, class T>
void optional_to_json(Json& j, const char* key, const std::optional<T>& v) {
    j[key] = v ? Json(*v) : Json(nullptr);
}

template <class Json, class T>
void optional_from_json(const Json& j, const char* key, std::optional<T>& v) {
    const auto& node = j.at(key);
    v = node.is_null() ? std::nullopt : std::optional<T>(node.template get<T>());
}

template <class Json>
void to_json(Json& j, const RegimeRow& r) {
    j = Json::object();
    j["period"] = r.period;
    j["label"] = r.label;
    optional_to_json(j, "z", r.z);
}

template <class Json>
void from_json(const Json& j, RegimeRow& r) {
    j.at("period").get_to(r.period);
    j.at("label").get_to(r.label);
    optional_from_json(j, "z", r.z);
}

template <class Json>
void to_json(Json& j, const AnalysisReport& r) {
    j = Json::object();
    j["provenance"] = r.provenance;
    j["classic"] = r.classic;
    j["threshold"] = r.threshold;
    optional_to_json(j, "m_hat", r.m_hat);
    optional_to_json(j, "w_max", r.w_max);
    optional_to_json(j, "lambda_hat", r.lambda_hat);
    j["n1"] = r.n1;
    j["n2"] = r.n2;
    j["share1"] = r.share1;
    j["share2"] = r.share2;
    j["coefficients"] = r.coefficients;
    j["unit_roots"] = r.unit_roots;
    j["verdict"] = r.verdict;
    j["regimes"] = r.regimes;
    j["notes"] = r.notes;
}

template <class Json>
void from_json(const Json& j, AnalysisReport& r) {
    j.at("provenance").get_to(r.provenance);
    j.at("classic").get_to(r.classic);
    j.at("threshold").get_to(r.threshold);
    optional_from_json(j, "m_hat", r.m_hat);
    optional_from_json(j, "w_max", r.w_max);
    optional_from_json(j, "lambda_hat", r.lambda_hat);
    j.at("n1").get_to(r.n1);
    j.at("n2").get_to(r.n2);
    j.at("share1").get_to(r.share1);
    j.at("share2").get_to(r.share2);
    j.at("coefficients").get_to(r.coefficients);
    j.at("unit_roots").get_to(r.unit_roots);
    j.at("verdict").get_to(r.verdict);
    j.at("regimes").get_to(r.regimes);
    j.at("notes").get_to(r.notes);
}

/// Machine-readable report; stable byte-for-byte for equal reports.
[[nodiscard]] inline std::string to_json_text(const AnalysisReport& report) {
    nlohmann::json j = report;
    return j.dump(2) + "\n";
}

[[nodiscard]] inline AnalysisReport report_from_json_text(const std::string& text) {
    return nlohmann::json::parse(text).get<AnalysisReport>();
}

[[nodiscard]] inline std::string to_json_text(const AnalysisConfig& config) {
    nlohmann::json j = config;
    return j.dump(2) + "\n";
}

}  // namespace tarur
