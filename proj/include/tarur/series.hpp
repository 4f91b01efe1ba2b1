#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <compare>
#include <cstddef>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tarur/error.hpp"

namespace tarur {

/// A calendar month. Ordering follows time.
struct YearMonth {
    int year = 1970;
    int month = 1;  // 1..12

    [[nodiscard]] constexpr long ordinal() const noexcept { return static_cast<long>(year) * 12 + (month - 1); }

    [[nodiscard]] static constexpr YearMonth from_ordinal(long ord) noexcept {
        const long y = ord >= 0 ? ord / 12 : -((-ord + 11) / 12);
        return {static_cast<int>(y), static_cast<int>(ord - y * 12) + 1};
    }

    [[nodiscard]] constexpr YearMonth plus_months(long n) const noexcept { return from_ordinal(ordinal() + n); }

    [[nodiscard]] std::string to_string() const {
        std::ostringstream os;
        os << std::setfill('0') << std::setw(4) << year << '-' << std::setw(2) << month;
        return os.str();
    }

    friend constexpr auto operator<=>(const YearMonth& a, const YearMonth& b) noexcept {
        return a.ordinal() <=> b.ordinal();
    }
    friend constexpr bool operator==(const YearMonth&, const YearMonth&) noexcept = default;
};

/// Parses `text` with a strftime-style `format` (e.g. "%Y-%m", "%Y-%m-%d", "%m/%d/%Y").
/// Returns false when the text does not match or has trailing characters.
inline bool parse_year_month(const std::string& text, const std::string& format, YearMonth& out) {
    std::tm tm{};
    tm.tm_mday = 1;
    std::istringstream in(text);
    in >> std::get_time(&tm, format.c_str());
    if (in.fail()) return false;
    in >> std::ws;
    if (!in.eof()) return false;
    const int month = tm.tm_mon + 1;
    if (month < 1 || month > 12) return false;
    out = YearMonth{tm.tm_year + 1900, month};
    return true;
}

struct SeriesMetadata {
    std::string source;
    std::string price_column;
    std::size_t rows = 0;
    YearMonth first{};
    YearMonth last{};
};

/// Monthly log-price levels y_t = ln(P_t) on a gap-free calendar.
class LogPriceSeries {
public:
    LogPriceSeries(std::vector<YearMonth> dates, std::vector<double> values, SeriesMetadata meta = {})
        : dates_(std::move(dates)), values_(std::move(values)), meta_(std::move(meta)) {
        if (dates_.size() != values_.size())
            throw SizingError("series has " + std::to_string(dates_.size()) + " dates but " +
                              std::to_string(values_.size()) + " values");
        if (values_.size() < 2) throw SizingError("series needs at least 2 observations");
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i]))
                throw DataError("non-finite log value at observation " + std::to_string(i + 1), i + 1);
            if (i > 0 && !(dates_[i - 1] < dates_[i]))
                throw DataError("dates not strictly increasing at " + dates_[i].to_string(), i + 1);
        }
        meta_.rows = values_.size();
        meta_.first = dates_.front();
        meta_.last = dates_.back();
    }

    /// Builds a series with consecutive months starting at `start`.
    static LogPriceSeries consecutive(YearMonth start, std::vector<double> values, SeriesMetadata meta = {}) {
        std::vector<YearMonth> dates(values.size());
        for (std::size_t i = 0; i < dates.size(); ++i) dates[i] = start.plus_months(static_cast<long>(i));
        return LogPriceSeries(std::move(dates), std::move(values), std::move(meta));
    }

    [[nodiscard]] const std::vector<YearMonth>& dates() const noexcept { return dates_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] const SeriesMetadata& metadata() const noexcept { return meta_; }

    [[nodiscard]] std::vector<double> differences() const {
        std::vector<double> d(values_.size() - 1);
        for (std::size_t i = 1; i < values_.size(); ++i) d[i - 1] = values_[i] - values_[i - 1];
        return d;
    }

private:
    std::vector<YearMonth> dates_;
    std::vector<double> values_;
    SeriesMetadata meta_;
};

struct ColumnSpec {
    std::string date_column = "date";
    std::string price_column = "close";
    std::string date_format = "%Y-%m";
};

namespace detail {

inline std::string trim_field(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

inline std::vector<std::string> split_fields(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, delim)) out.push_back(trim_field(field));
    if (!line.empty() && line.back() == delim) out.emplace_back();
    return out;
}

}  // namespace detail

/// Reads a delimited table (comma or tab, detected from the header) and returns the
/// natural-log price series sorted by date. Rows are numbered from 1, header excluded.
inline LogPriceSeries load_series(std::istream& in, const ColumnSpec& spec, std::string source = "<stream>") {
    std::string header;
    while (std::getline(in, header)) {
        if (!header.empty() && header.back() == '\r') header.pop_back();
        if (!detail::trim_field(header).empty()) break;
    }
    if (header.empty()) throw DataError("input has no header row");
    if (header.size() >= 3 && header.compare(0, 3, "\xEF\xBB\xBF") == 0) header.erase(0, 3);

    const char delim = header.find('\t') != std::string::npos && header.find(',') == std::string::npos ? '\t' : ',';
    const auto names = detail::split_fields(header, delim);
    const auto column = [&](const std::string& name) {
        const auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) throw DataError("column '" + name + "' not found in header");
        return static_cast<std::size_t>(it - names.begin());
    };
    const std::size_t date_col = column(spec.date_column);
    const std::size_t price_col = column(spec.price_column);

    struct Row {
        YearMonth date;
        double log_price;
        std::size_t row;
    };
    std::vector<Row> rows;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim_field(line).empty()) continue;
        ++row;
        const auto fields = detail::split_fields(line, delim);
        const std::string where = "row " + std::to_string(row);
        if (fields.size() <= std::max(date_col, price_col))
            throw DataError(where + ": expected at least " + std::to_string(std::max(date_col, price_col) + 1) +
                                " fields, found " + std::to_string(fields.size()),
                            row);
        YearMonth date;
        if (!parse_year_month(fields[date_col], spec.date_format, date))
            throw DataError(where + ": cannot parse date '" + fields[date_col] + "' with format '" +
                                spec.date_format + "'",
                            row);
        double price = 0.0;
        std::size_t consumed = 0;
        try {
            price = std::stod(fields[price_col], &consumed);
        } catch (const std::exception&) {
            consumed = 0;
        }
        if (consumed == 0 || consumed != fields[price_col].size())
            throw DataError(where + ": cannot parse price '" + fields[price_col] + "'", row);
        if (!(price > 0.0) || !std::isfinite(price))
            throw DataError(where + ": price must be strictly positive and finite, got '" + fields[price_col] + "'",
                            row);
        rows.push_back({date, std::log(price), row});
    }
    if (rows.size() < 2) throw SizingError("input has " + std::to_string(rows.size()) + " data rows; need at least 2");

    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const long step = rows[i].date.ordinal() - rows[i - 1].date.ordinal();
        if (step == 0)
            throw DataError("row " + std::to_string(rows[i].row) + ": duplicate period " + rows[i].date.to_string() +
                                " (also row " + std::to_string(rows[i - 1].row) + ")",
                            rows[i].row);
        if (step != 1)
            throw DataError("gap in monthly sequence between " + rows[i - 1].date.to_string() + " and " +
                                rows[i].date.to_string(),
                            rows[i].row);
    }

    std::vector<YearMonth> dates;
    std::vector<double> values;
    dates.reserve(rows.size());
    values.reserve(rows.size());
    for (const auto& r : rows) {
        dates.push_back(r.date);
        values.push_back(r.log_price);
    }
    SeriesMetadata meta;
    meta.source = std::move(source);
    meta.price_column = spec.price_column;
    return LogPriceSeries(std::move(dates), std::move(values), std::move(meta));
}

inline LogPriceSeries load_series_file(const std::string& path, const ColumnSpec& spec) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open input file '" + path + "'");
    return load_series(in, spec, path);
}

/// Aligned regression data for a TAR(k) with threshold delay m.
///
/// Row i targets Δy_t with t = first_target + i, regressors
/// x_{t-1} = (y_{t-1}, 1, Δy_{t-1}, ..., Δy_{t-k}) and threshold value
/// Z_{t-1} = y_{t-1} - y_{t-1-m}. Only observations before t enter row i.
struct TarDataset {
    int k = 1;
    int m = 1;
    Eigen::VectorXd targets;
    Eigen::MatrixXd regressors;
    Eigen::VectorXd z;
    std::vector<std::size_t> effective_index;

    [[nodiscard]] std::size_t n() const noexcept { return static_cast<std::size_t>(targets.size()); }
    [[nodiscard]] std::size_t params() const noexcept { return static_cast<std::size_t>(k) + 2; }
};

/// Index (0-based, into y) of the first usable target: max(k + 1, m + 1).
[[nodiscard]] inline std::size_t first_target_index(int k, int m) noexcept {
    return static_cast<std::size_t>(std::max(k, m)) + 1;
}

inline TarDataset build_dataset(std::span<const double> y, int k, int m) {
    if (k < 1) throw SizingError("autoregressive order k must be >= 1, got " + std::to_string(k));
    if (m < 1) throw SizingError("threshold delay m must be >= 1, got " + std::to_string(m));
    const std::size_t start = first_target_index(k, m);
    const std::size_t T = y.size();
    if (T <= start)
        throw SizingError("series of length " + std::to_string(T) + " too short for k=" + std::to_string(k) +
                          ", m=" + std::to_string(m) + "; need T >= " + std::to_string(start + 1));
    const std::size_t n = T - start;
    const auto p = static_cast<Eigen::Index>(k) + 2;

    TarDataset d;
    d.k = k;
    d.m = m;
    d.targets.resize(static_cast<Eigen::Index>(n));
    d.regressors.resize(static_cast<Eigen::Index>(n), p);
    d.z.resize(static_cast<Eigen::Index>(n));
    d.effective_index.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t t = start + i;
        const auto r = static_cast<Eigen::Index>(i);
        d.targets(r) = y[t] - y[t - 1];
        d.regressors(r, 0) = y[t - 1];
        d.regressors(r, 1) = 1.0;
        for (int j = 1; j <= k; ++j) d.regressors(r, 1 + j) = y[t - j] - y[t - j - 1];
        d.z(r) = y[t - 1] - y[t - 1 - static_cast<std::size_t>(m)];
        d.effective_index[i] = t;
    }
    return d;
}

inline TarDataset build_dataset(const LogPriceSeries& series, int k, int m) {
    return build_dataset(std::span<const double>(series.values()), k, m);
}

}  // namespace tarur
