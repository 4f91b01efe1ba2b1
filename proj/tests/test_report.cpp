#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "synthetic.hpp"
#include "tarur/export.hpp"
#include "tarur/pipeline.hpp"

using namespace tarur;

namespace {

AnalysisConfig quick_config() {
    AnalysisConfig c;
    c.input = "synthetic";
    c.k = 2;
    c.m_values = {1, 2, 3};
    c.replications = 12;
    c.threads = 1;
    return c;
}

LogPriceSeries quick_series(std::uint64_t seed = 1, std::size_t T = 150) {
    return sim::as_series(sim::random_walk(T, seed, 0.06, 7.0));
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("tarur-test-" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace

TEST(Config, DefaultsMatchTheReferenceProtocol) {
    const auto j = nlohmann::json::parse(to_json_text(AnalysisConfig{}));
    EXPECT_EQ(j.at("k"), 12);
    EXPECT_EQ(j.at("m_values"), nlohmann::json({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12}));
    EXPECT_EQ(j.at("pi1"), 0.15);
    EXPECT_EQ(j.at("replications"), 2000);
    EXPECT_EQ(j.at("covariance"), "hc0");
    EXPECT_EQ(j.at("threshold_null"), "linear-unit-root");
    EXPECT_EQ(j.at("reestimate_lambda"), true);
    EXPECT_EQ(j.at("alpha"), 0.10);
    EXPECT_EQ(j.at("digits"), 6);
    EXPECT_FALSE(j.contains("threads"));
}

TEST(Pipeline, ShortSeriesIsASizingErrorBeforeAnyComputation) {
    AnalysisConfig c;
    c.input = "toy";
    EXPECT_THROW((void)run_pipeline(quick_series(1, 30), c), SizingError);
}

TEST(Pipeline, InvalidConfigurationIsRejected) {
    auto c = quick_config();
    c.m_values = {0};
    EXPECT_THROW((void)run_pipeline(quick_series(), c), SizingError);
    c = quick_config();
    c.threshold_null = NullModel::ThresholdUnitRoot;
    EXPECT_THROW((void)run_pipeline(quick_series(), c), SizingError);
}

TEST(Pipeline, ProducesEveryTableAndAConsistentVerdict) {
    const auto series = quick_series();
    const AnalysisReport r = run_pipeline(series, quick_config());
    EXPECT_EQ(r.classic.size(), 6u);
    ASSERT_EQ(r.threshold.size(), 3u);
    ASSERT_TRUE(r.m_hat);
    double best = -1.0;
    for (const auto& t : r.threshold) {
        ASSERT_TRUE(t.ok) << t.error;
        best = std::max(best, t.w);
    }
    EXPECT_EQ(*r.w_max, best);
    EXPECT_EQ(r.coefficients.size(), 4u);
    EXPECT_EQ(r.regimes.size(), series.size());
    EXPECT_EQ(r.n1 + r.n2, series.size() - first_target_index(2, *r.m_hat));
    ASSERT_EQ(r.unit_roots.size(), 3u);
    for (const auto& u : r.unit_roots)
        if (u.m == *r.m_hat) EXPECT_EQ(r.verdict, u.hypothesis);
    EXPECT_EQ(r.provenance.seed, kDefaultSeed);
    EXPECT_EQ(r.provenance.replications, 12u);
    EXPECT_EQ(r.provenance.rng_algorithm, kRngAlgorithm);
    EXPECT_EQ(r.provenance.observations, series.size());
}

TEST(Report, JsonRoundTripIsFieldForField) {
    const AnalysisReport r = run_pipeline(quick_series(3), quick_config());
    const std::string text = to_json_text(r);
    const AnalysisReport back = report_from_json_text(text);
    EXPECT_EQ(back, r);
    EXPECT_EQ(to_json_text(back), text);
}

TEST(Report, DeterministicAcrossRunsAndThreadCounts) {
    auto c = quick_config();
    const auto series = quick_series(4);
    const std::string a = to_json_text(run_pipeline(series, c));
    const std::string b = to_json_text(run_pipeline(series, c));
    c.threads = 3;
    const std::string d = to_json_text(run_pipeline(series, c));
    EXPECT_EQ(a, b);
    EXPECT_EQ(a, d);
}

TEST(Export, TableShapes) {
    const auto series = quick_series(5);
    const AnalysisReport r = run_pipeline(series, quick_config());
    const std::string t2 = threshold_csv(r, 6);
    EXPECT_EQ(t2.substr(0, t2.find('\n')), "m,W,crit10,crit5,crit1,p");
    EXPECT_EQ(count_lines(t2), 1u + 3u);
    EXPECT_EQ(count_lines(regimes_csv(r, 6)), 1u + series.size());
    EXPECT_EQ(count_lines(classic_csv(r, 6)), 7u);
    EXPECT_EQ(count_lines(coefficients_csv(r, 6)), 5u);
    const std::string reg = regimes_csv(r, 6);
    EXPECT_NE(reg.find("\n1990-12,0,\n"), std::string::npos);
}

TEST(Export, EmptyDelayRangeGivesHeaderOnly) {
    auto c = quick_config();
    c.m_values.clear();
    const AnalysisReport r = run_pipeline(quick_series(6), c);
    EXPECT_EQ(threshold_csv(r, 6), "m,W,crit10,crit5,crit1,p\n");
    EXPECT_FALSE(r.m_hat);
}

TEST(Export, NumberFormatting) {
    EXPECT_EQ(format_number(127.123456789, 6), "127.123");
    EXPECT_EQ(format_number(-0.14180001, 4), "-0.1418");
    EXPECT_EQ(format_number(1234567.0, 6), "1.23457e+06");
}

TEST(Export, WritesRequestedFormatsAndIsByteStable) {
    const AnalysisReport r = run_pipeline(quick_series(7), quick_config());
    const auto dir = scratch("export");
    const auto files = export_report(r, dir, {OutputFormat::Json, OutputFormat::Csv, OutputFormat::Text}, 6);
    EXPECT_EQ(files.size(), 8u);
    std::ifstream in(dir / "report.json");
    std::stringstream buf;
    buf << in.rdbuf();
    EXPECT_EQ(buf.str(), to_json_text(r));
    EXPECT_TRUE(std::filesystem::exists(dir / "threshold_effect.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "report.txt"));
    std::filesystem::remove_all(dir);
}

TEST(Export, UnwritablePathIsAnIoError) {
    const AnalysisReport r;
    const auto dir = scratch("blocked");
    std::filesystem::create_directories(dir);
    write_file(dir / "file", "x");
    EXPECT_THROW((void)export_report(r, dir / "file" / "sub", {OutputFormat::Json}, 6), IoError);
    std::filesystem::remove_all(dir);
}
