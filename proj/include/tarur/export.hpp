#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "tarur/error.hpp"
#include "tarur/report.hpp"

namespace tarur {

/// `value` with `digits` significant digits, '.' decimal point, no grouping.
[[nodiscard]] inline std::string format_number(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, value);
    return buf;
}

namespace detail {

class CsvWriter {
public:
    explicit CsvWriter(int digits) : digits_(digits) {}

    CsvWriter& header(std::initializer_list<const char*> names) {
        bool first = true;
        for (const char* n : names) {
            if (!first) out_ << ',';
            out_ << n;
            first = false;
        }
        out_ << '\n';
        return *this;
    }

    template <class... Cells>
    CsvWriter& row(const Cells&... cells) {
        bool first = true;
        ((cell(cells, first)), ...);
        out_ << '\n';
        return *this;
    }

    [[nodiscard]] std::string str() const { return out_.str(); }

private:
    void sep(bool& first) {
        if (!first) out_ << ',';
        first = false;
    }
    void cell(double v, bool& first) {
        sep(first);
        out_ << format_number(v, digits_);
    }
    void cell(int v, bool& first) {
        sep(first);
        out_ << v;
    }
    void cell(std::size_t v, bool& first) {
        sep(first);
        out_ << v;
    }
    void cell(const std::string& v, bool& first) {
        sep(first);
        if (v.find_first_of(",\"\n") == std::string::npos) {
            out_ << v;
            return;
        }
        out_ << '"';
        for (const char c : v) out_ << (c == '"' ? "\"\"" : std::string(1, c));
        out_ << '"';
    }
    void cell(const std::optional<double>& v, bool& first) {
        sep(first);
        if (v) out_ << format_number(*v, digits_);
    }

    int digits_;
    std::ostringstream out_;
};

}  // namespace detail

[[nodiscard]] inline std::string classic_csv(const AnalysisReport& r, int digits) {
    detail::CsvWriter w(digits);
    w.header({"test", "variable", "deterministic", "statistic", "crit10", "crit5", "crit1", "p", "lags", "bandwidth"});
    for (const auto& c : r.classic)
        w.row(c.test, c.variable, c.deterministic, c.statistic, c.crit10, c.crit5, c.crit1, c.p_value, c.lags,
              c.bandwidth);
    return w.str();
}

[[nodiscard]] inline std::string threshold_csv(const AnalysisReport& r, int digits) {
    detail::CsvWriter w(digits);
    w.header({"m", "W", "crit10", "crit5", "crit1", "p"});
    for (const auto& t : r.threshold) {
        if (t.ok)
            w.row(t.m, t.w, t.crit10, t.crit5, t.crit1, t.p_value);
        else
            w.row(t.m, std::string(), std::string(), std::string(), std::string(), std::string());
    }
    return w.str();
}

[[nodiscard]] inline std::string coefficients_csv(const AnalysisReport& r, int digits) {
    detail::CsvWriter w(digits);
    w.header({"regressor", "estimate1", "se1", "estimate2", "se2"});
    for (const auto& c : r.coefficients) w.row(c.regressor, c.estimate1, c.se1, c.estimate2, c.se2);
    return w.str();
}

[[nodiscard]] inline std::string r_tests_csv(const AnalysisReport& r, int digits) {
    detail::CsvWriter w(digits);
    w.header({"m", "R1", "R1_crit10", "R1_crit5", "R1_crit1", "R1_p", "R2", "R2_crit10", "R2_crit5", "R2_crit1",
              "R2_p"});
    for (const auto& u : r.unit_roots) {
        if (!u.ok) continue;
        w.row(u.m, u.r1.statistic, u.r1.crit10, u.r1.crit5, u.r1.crit1, u.r1.p_value, u.r2.statistic, u.r2.crit10,
              u.r2.crit5, u.r2.crit1, u.r2.p_value);
    }
    return w.str();
}

[[nodiscard]] inline std::string t_tests_csv(const AnalysisReport& r, int digits) {
    detail::CsvWriter w(digits);
    w.header({"m", "neg_t1", "t1_crit10", "t1_crit5", "t1_crit1", "t1_p", "neg_t2", "t2_crit10", "t2_crit5",
              "t2_crit1", "t2_p"});
    for (const auto& u : r.unit_roots) {
        if (!u.ok) continue;
        w.row(u.m, u.t1.statistic, u.t1.crit10, u.t1.crit5, u.t1.crit1, u.t1.p_value, u.t2.statistic, u.t2.crit10,
              u.t2.crit5, u.t2.crit1, u.t2.p_value);
    }
    return w.str();
}

/// One row per input month; label 0 marks months before the first regression target.
[[nodiscard]] inline std::string regimes_csv(const AnalysisReport& r, int digits) {
    detail::CsvWriter w(digits);
    w.header({"period", "label", "z"});
    for (const auto& g : r.regimes) w.row(g.period, g.label, g.z);
    return w.str();
}

[[nodiscard]] inline std::string text_report(const AnalysisReport& r, int digits) {
    std::ostringstream os;
    const auto num = [&](double v) { return format_number(v, digits); };
    const auto& p = r.provenance;
    os << "tarur " << p.version << " threshold unit-root analysis\n";
    os << "input: " << p.input << " (" << p.observations << " months, " << p.first_period << " to " << p.last_period
       << ")\n";
    os << "k=" << p.k << " pi1=" << num(p.pi1) << " replications=" << p.replications << " seed=" << p.seed
       << " rng=" << p.rng_algorithm << "\n";
    os << "covariance=" << p.covariance << " threshold-null=" << p.threshold_null
       << " lambda-in-bootstrap=" << p.lambda_in_bootstrap << " alpha=" << num(p.alpha) << "\n\n";

    os << "Conventional unit-root tests\n";
    os << std::left << std::setw(6) << "test" << std::setw(18) << "variable" << std::setw(14) << "statistic"
       << std::setw(12) << "crit10" << std::setw(12) << "crit5" << std::setw(12) << "crit1" << "p\n";
    for (const auto& c : r.classic)
        os << std::setw(6) << c.test << std::setw(18) << c.variable << std::setw(14) << num(c.statistic) << std::setw(12)
           << num(c.crit10) << std::setw(12) << num(c.crit5) << std::setw(12) << num(c.crit1) << num(c.p_value)
           << "\n";

    os << "\nThreshold effect (sup-Wald)\n";
    os << std::setw(5) << "m" << std::setw(14) << "W" << std::setw(12) << "crit10" << std::setw(12) << "crit5"
       << std::setw(12) << "crit1" << std::setw(12) << "p" << "lambda_hat\n";
    for (const auto& t : r.threshold) {
        os << std::setw(5) << t.m;
        if (t.ok)
            os << std::setw(14) << num(t.w) << std::setw(12) << num(t.crit10) << std::setw(12) << num(t.crit5)
               << std::setw(12) << num(t.crit1) << std::setw(12) << num(t.p_value) << num(t.lambda_hat) << "\n";
        else
            os << "failed: " << t.error << "\n";
    }
    if (r.m_hat) {
        os << "\nm_hat=" << *r.m_hat << " W=" << num(*r.w_max) << " lambda_hat=" << num(*r.lambda_hat)
           << " regime shares " << num(100.0 * r.share1) << "% / " << num(100.0 * r.share2) << "% (n1=" << r.n1
           << ", n2=" << r.n2 << ")\n";
        os << std::setw(14) << "regressor" << std::setw(14) << "estimate1" << std::setw(14) << "se1" << std::setw(14)
           << "estimate2" << "se2\n";
        for (const auto& c : r.coefficients)
            os << std::setw(14) << c.regressor << std::setw(14) << num(c.estimate1) << std::setw(14) << num(c.se1)
               << std::setw(14) << num(c.estimate2) << num(c.se2) << "\n";
    }

    os << "\nThreshold unit-root tests (t columns report -t)\n";
    os << std::setw(5) << "m" << std::setw(11) << "R1" << std::setw(9) << "p" << std::setw(11) << "R2" << std::setw(9)
       << "p" << std::setw(11) << "-t1" << std::setw(9) << "p" << std::setw(11) << "-t2" << std::setw(9) << "p"
       << "verdict\n";
    for (const auto& u : r.unit_roots) {
        os << std::setw(5) << u.m;
        if (!u.ok) {
            os << "failed: " << u.error << "\n";
            continue;
        }
        os << std::setw(11) << num(u.r1.statistic) << std::setw(9) << num(u.r1.p_value) << std::setw(11)
           << num(u.r2.statistic) << std::setw(9) << num(u.r2.p_value) << std::setw(11) << num(u.t1.statistic)
           << std::setw(9) << num(u.t1.p_value) << std::setw(11) << num(u.t2.statistic) << std::setw(9)
           << num(u.t2.p_value) << u.hypothesis << "\n";
    }
    os << "\nverdict at m_hat: " << (r.verdict.empty() ? "n/a" : r.verdict) << "\n";
    os << "decision rule: " << p.decision_rule << "\n";
    for (const auto& n : r.notes) os << "note: " << n << "\n";
    return os.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << content;
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

/// Writes the report in each requested format under `dir` and returns the paths written.
inline std::vector<std::filesystem::path> export_report(const AnalysisReport& report, const std::filesystem::path& dir,
                                                        const std::vector<OutputFormat>& formats, int digits) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw IoError("cannot create output directory '" + dir.string() + "'");
    std::vector<std::filesystem::path> written;
    const auto emit = [&](const char* name, const std::string& content) {
        write_file(dir / name, content);
        written.push_back(dir / name);
    };
    for (const auto f : formats) {
        switch (f) {
            case OutputFormat::Json: emit("report.json", to_json_text(report)); break;
            case OutputFormat::Text: emit("report.txt", text_report(report, digits)); break;
            case OutputFormat::Csv:
                emit("classic_unit_root.csv", classic_csv(report, digits));
                emit("threshold_effect.csv", threshold_csv(report, digits));
                emit("coefficients.csv", coefficients_csv(report, digits));
                emit("threshold_unit_root_r.csv", r_tests_csv(report, digits));
                emit("threshold_unit_root_t.csv", t_tests_csv(report, digits));
                emit("regimes.csv", regimes_csv(report, digits));
                break;
        }
    }
    return written;
}

}  // namespace tarur
