// Command-line driver: load a monthly price CSV, run the threshold unit-root
// protocol and write the report files.

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tarur/error.hpp"
#include "tarur/export.hpp"
#include "tarur/pipeline.hpp"

namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kComputeError = 3 };

/// "A:B" -> A..B inclusive; "A" -> {A}; "none" or an empty string -> no delays.
std::vector<int> parse_m_range(const std::string& text) {
    if (text.empty() || text == "none") return {};
    const auto colon = text.find(':');
    std::size_t used = 0;
    const int a = std::stoi(text.substr(0, colon), &used);
    if (used != (colon == std::string::npos ? text.size() : colon)) throw CLI::ValidationError("--m-range", text);
    if (colon == std::string::npos) return {a};
    const std::string tail = text.substr(colon + 1);
    const int b = std::stoi(tail, &used);
    if (used != tail.size() || b < a) throw CLI::ValidationError("--m-range", "expected A:B with A <= B, got " + text);
    std::vector<int> out;
    for (int m = a; m <= b; ++m) out.push_back(m);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    tarur::AnalysisConfig config;
    CLI::App app{"Two-regime threshold autoregression unit-root analysis of a monthly price series"};
    app.set_version_flag("--version", std::string(tarur::kVersion));

    std::string m_range = "1:12";
    std::vector<std::string> formats{"json", "csv", "text"};
    bool fixed_lambda = false;
    bool print_config = false;

    std::string threshold_null = "linear-unit-root";
    std::string covariance = "hc0";
    std::string adf_det = "none";
    std::string pp_det = "none";
    std::string kpss_det = "const";
    std::string lag_rule = "aic";
    std::string bw_rule = "newey-west";

    const std::map<std::string, tarur::NullModel> nulls{{"linear-unit-root", tarur::NullModel::LinearUnitRoot},
                                                        {"linear-unrestricted", tarur::NullModel::LinearUnrestricted}};
    const std::map<std::string, tarur::CovarianceType> covs{{"hc0", tarur::CovarianceType::HC0},
                                                           {"hc1", tarur::CovarianceType::HC1},
                                                           {"classical", tarur::CovarianceType::Classical}};
    const std::map<std::string, tarur::Deterministic> dets{{"none", tarur::Deterministic::None},
                                                          {"const", tarur::Deterministic::Constant},
                                                          {"trend", tarur::Deterministic::Trend}};
    const std::map<std::string, tarur::LagRule> lag_rules{
        {"aic", tarur::LagRule::AIC}, {"bic", tarur::LagRule::BIC}, {"fixed", tarur::LagRule::Fixed}};
    const std::map<std::string, tarur::BandwidthRule> bw_rules{{"newey-west", tarur::BandwidthRule::NeweyWest},
                                                              {"short", tarur::BandwidthRule::Short},
                                                              {"long", tarur::BandwidthRule::Long},
                                                              {"fixed", tarur::BandwidthRule::Fixed}};
    const auto keys = [](const auto& map) {
        std::vector<std::string> out;
        for (const auto& [key, value] : map) out.push_back(key);
        return CLI::IsMember(out);
    };

    app.add_option("--input", config.input, "CSV or TSV file with a date column and a price column");
    app.add_option("--date-column", config.columns.date_column, "date column header")->capture_default_str();
    app.add_option("--price-column", config.columns.price_column, "price column header")->capture_default_str();
    app.add_option("--date-format", config.columns.date_format, "strptime-style date format")->capture_default_str();
    app.add_option("--k", config.k, "autoregressive order")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--m-range", m_range, "threshold delays as A:B, a single A, or 'none'")->capture_default_str();
    app.add_option("--pi1", config.pi1, "lower trimming quantile")->capture_default_str()->check(CLI::Range(0.0, 0.5));
    app.add_option("--replications", config.replications, "bootstrap replications")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--seed", config.seed, "root random seed")->capture_default_str();
    app.add_option("--format", formats, "output formats: json, csv, text")
        ->capture_default_str()
        ->check(CLI::IsMember({"json", "csv", "text"}));
    app.add_option("--out", config.out_dir, "output directory")->capture_default_str();
    app.add_option("--digits", config.digits, "significant digits in csv and text output")
        ->capture_default_str()
        ->check(CLI::Range(1, 17));
    app.add_option("--threads", config.threads, "worker threads (0 = hardware concurrency)")->capture_default_str();
    app.add_option("--threshold-null", threshold_null, "null model for the sup-Wald bootstrap")
        ->check(keys(nulls))
        ->capture_default_str();
    app.add_option("--covariance", covariance, "coefficient covariance")
        ->check(keys(covs))
        ->capture_default_str();
    app.add_flag("--fixed-lambda", fixed_lambda, "keep the threshold fixed in unit-root bootstrap replications");
    app.add_option("--alpha", config.alpha, "significance level of the regime decision rule")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    app.add_option("--adf-deterministic", adf_det)->check(keys(dets))->capture_default_str();
    app.add_option("--pp-deterministic", pp_det)->check(keys(dets))->capture_default_str();
    app.add_option("--kpss-deterministic", kpss_det)->check(keys(dets))->capture_default_str();
    app.add_option("--adf-max-lag", config.classic.adf_max_lag)->check(CLI::NonNegativeNumber);
    app.add_option("--adf-lag-rule", lag_rule)->check(keys(lag_rules))->capture_default_str();
    app.add_option("--bandwidth-rule", bw_rule)->check(keys(bw_rules))->capture_default_str();
    app.add_option("--bandwidth", config.classic.fixed_bandwidth, "bandwidth for --bandwidth-rule fixed")
        ->check(CLI::NonNegativeNumber);
    app.add_flag("--print-config", print_config, "print the resolved configuration as JSON and exit");

    try {
        app.parse(argc, argv);
        config.m_values = parse_m_range(m_range);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: invalid --m-range '" << m_range << "': " << e.what() << "\n";
        return kUsage;
    }
    config.reestimate_lambda = !fixed_lambda;
    config.threshold_null = nulls.at(threshold_null);
    config.covariance = covs.at(covariance);
    config.classic.adf_deterministic = dets.at(adf_det);
    config.classic.pp_deterministic = dets.at(pp_det);
    config.classic.kpss_deterministic = dets.at(kpss_det);
    config.classic.adf_lag_rule = lag_rules.at(lag_rule);
    config.classic.bandwidth_rule = bw_rules.at(bw_rule);
    config.formats.clear();
    for (const auto& f : formats)
        config.formats.push_back(f == "json" ? tarur::OutputFormat::Json
                                 : f == "csv" ? tarur::OutputFormat::Csv
                                              : tarur::OutputFormat::Text);

    if (print_config) {
        std::cout << tarur::to_json_text(config);
        return kOk;
    }
    if (config.input.empty()) {
        std::cerr << "error: --input is required\n";
        return kUsage;
    }

    tarur::AnalysisReport report;
    try {
        report = tarur::run_pipeline(config);
    } catch (const tarur::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const tarur::SizingError& e) {
        std::cerr << "sizing error: " << e.what() << "\n";
        return kDataError;
    } catch (const tarur::IoError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kDataError;
    } catch (const tarur::Error& e) {
        std::cerr << "computation failed: " << e.what() << "\n";
        return kComputeError;
    }

    try {
        for (const auto& path : tarur::export_report(report, config.out_dir, config.formats, config.digits))
            std::cerr << "wrote " << path.string() << "\n";
    } catch (const tarur::Error& e) {
        std::cerr << "output error: " << e.what() << "\n";
        return kComputeError;
    }

    if (!config.m_values.empty() && !report.m_hat) {
        std::cerr << "computation failed: the threshold-effect test failed for every delay\n";
        return kComputeError;
    }
    if (report.m_hat)
        std::cout << "m_hat=" << *report.m_hat << " W=" << tarur::format_number(*report.w_max, config.digits)
                  << " lambda_hat=" << tarur::format_number(*report.lambda_hat, config.digits)
                  << " verdict=" << (report.verdict.empty() ? "n/a" : report.verdict) << "\n";
    return kOk;
}
