#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "tsens/common.hpp"
#include "tsens/series.hpp"

using namespace tsens;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

TimeSeries make_series(std::vector<double> values) {
    TimeSeries s;
    s.values = std::move(values);
    s.name = "test";
    return s;
}

} // namespace

TEST_CASE("load_csv reads bare value rows") {
    const auto path = write_temp("tsens_plain.csv", "1\n2\n3\n");
    const TimeSeries s = load_csv(path);
    CHECK(s.values == std::vector<double>{1, 2, 3});
    CHECK(s.name == "tsens_plain");
    CHECK(s.transform_log.empty());
}

TEST_CASE("load_csv handles header, date column, CRLF, trailing blank") {
    const auto path = write_temp("tsens_dated.csv", "year,value\r\n1821,269\r\n1822,321\r\n\n");
    const TimeSeries s = load_csv(path);
    CHECK(s.values == std::vector<double>{269, 321});
}

TEST_CASE("load_csv error cases") {
    CHECK_THROWS_WITH_AS(load_csv("/nonexistent/file.csv"),
                         doctest::Contains("cannot open"), TsError);
    const auto bad = write_temp("tsens_bad.csv", "1\nabc\n3\n");
    CHECK_THROWS_WITH_AS(load_csv(bad), doctest::Contains("row 2"), TsError);
    const auto empty = write_temp("tsens_empty.csv", "");
    CHECK_THROWS_WITH_AS(load_csv(empty), doctest::Contains("empty"), TsError);
    const auto midblank = write_temp("tsens_midblank.csv", "1\n\n3\n");
    CHECK_THROWS_AS(load_csv(midblank), TsError);
}

TEST_CASE("bundled lynx dataset has the documented size") {
    const TimeSeries lynx = load_csv(std::string(TSENS_SOURCE_DIR) + "/data/lynx.csv");
    CHECK(lynx.size() == 114);
    CHECK(lynx.values.front() == 269);
    CHECK(lynx.values.back() == 3396);
}

TEST_CASE("log10 transform on exact powers") {
    const TimeSeries s = apply_transform(make_series({1, 10, 100}), {TransformKind::Log10});
    CHECK(s.values[0] == doctest::Approx(0).epsilon(1e-15));
    CHECK(s.values[1] == doctest::Approx(1).epsilon(1e-15));
    CHECK(s.values[2] == doctest::Approx(2).epsilon(1e-15));
    CHECK(s.transform_log.size() == 1);
}

TEST_CASE("linear rescale endpoints and midpoint") {
    TransformSpec spec{TransformKind::LinearRescale, 0, 10, 0, 1};
    const TimeSeries s = apply_transform(make_series({0, 5, 10}), spec);
    CHECK(s.values == std::vector<double>{0, 0.5, 1});
}

TEST_CASE("transform round trips") {
    Rng rng(7);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> values(20);
        for (double& v : values) v = rng.uniform(0.5, 400.0);
        const TimeSeries raw = make_series(values);

        TransformSpec rescale{TransformKind::LinearRescale, 0.5, 400.0, -1.0, 1.0};
        for (const TransformSpec& spec : {TransformSpec{TransformKind::Log10}, rescale}) {
            const TimeSeries back = invert_transform(apply_transform(raw, spec), spec);
            CHECK(back.transform_log.empty());
            for (std::size_t i = 0; i < values.size(); ++i)
                CHECK(back.values[i] == doctest::Approx(values[i]).epsilon(1e-10));
        }
    }
}

TEST_CASE("transform errors") {
    CHECK_THROWS_AS(apply_transform(make_series({1, -2}), {TransformKind::Log10}), TsError);
    TransformSpec degenerate{TransformKind::LinearRescale, 3, 3, 0, 1};
    CHECK_THROWS_WITH_AS(apply_transform(make_series({1}), degenerate),
                         doctest::Contains("zero-width"), TsError);
    CHECK_THROWS_WITH_AS(invert_transform(make_series({1}), {TransformKind::Log10}),
                         doctest::Contains("empty"), TsError);
    TimeSeries logged = apply_transform(make_series({1, 10}), {TransformKind::Log10});
    CHECK_THROWS_WITH_AS(invert_transform(logged, degenerate), doctest::Contains("match"), TsError);
}

TEST_CASE("split produces chronological contiguous segments") {
    const TimeSeries s = make_series({1, 2, 3, 4, 5});
    const auto segments = split(s, {3, 1, 1});
    CHECK(segments[0].values == std::vector<double>{1, 2, 3});
    CHECK(segments[1].values == std::vector<double>{4});
    CHECK(segments[2].values == std::vector<double>{5});

    CHECK_THROWS_WITH_AS(split(s, {3, 1, 2}), doctest::Contains("sum"), TsError);
}

TEST_CASE("split of lynx matches the documented segment lengths") {
    const TimeSeries lynx = load_csv(std::string(TSENS_SOURCE_DIR) + "/data/lynx.csv");
    const auto segments = split(lynx, {80, 20, 14});
    CHECK(segments[0].size() == 80);
    CHECK(segments[1].size() == 20);
    CHECK(segments[2].size() == 14);

    std::vector<double> rejoined = segments[0].values;
    rejoined.insert(rejoined.end(), segments[1].values.begin(), segments[1].values.end());
    rejoined.insert(rejoined.end(), segments[2].values.begin(), segments[2].values.end());
    CHECK(rejoined == lynx.values);
}

TEST_CASE("window enumerates sliding patterns") {
    const PatternSet set = window(make_series({1, 2, 3, 4, 5}), 2, 1);
    CHECK(set.n == 3);
    CHECK(set.inputs == std::vector<double>{1, 2, 2, 3, 3, 4});
    CHECK(set.targets == std::vector<double>{3, 4, 5});
}

TEST_CASE("window count matches N-p for q=1") {
    std::vector<double> values(80);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<double>(i);
    const PatternSet set = window(make_series(values), 7, 1);
    CHECK(set.n == 73);
    // concatenated targets reproduce y_{p+1..N}
    for (int i = 0; i < set.n; ++i) CHECK(set.targets[i] == values[i + 7]);
}

TEST_CASE("window with q=2 uses stride-1 target blocks") {
    const PatternSet set = window(make_series({1, 2, 3, 4, 5, 6}), 2, 2);
    CHECK(set.n == 3);
    CHECK(set.targets == std::vector<double>{3, 4, 4, 5, 5, 6});

    CHECK_THROWS_WITH_AS(window(make_series({1, 2}), 2, 1), doctest::Contains("too short"), TsError);
}

TEST_CASE("metrics on worked examples") {
    const std::vector<double> same{3, 4, 5};
    const ErrorTriple zero = metrics(same, same);
    CHECK(zero.mae == 0);
    CHECK(zero.mse == 0);
    CHECK(zero.mape == 0);

    const ErrorTriple one = metrics(std::vector<double>{100}, std::vector<double>{90});
    CHECK(one.mae == doctest::Approx(10).epsilon(1e-15));
    CHECK(one.mse == doctest::Approx(100).epsilon(1e-15));
    CHECK(one.mape == doctest::Approx(10).epsilon(1e-15));

    const ErrorTriple two = metrics(std::vector<double>{2, 4}, std::vector<double>{3, 3});
    CHECK(two.mae == doctest::Approx(1).epsilon(1e-15));
    CHECK(two.mse == doctest::Approx(1).epsilon(1e-15));
    CHECK(two.mape == doctest::Approx(37.5).epsilon(1e-15));
}

TEST_CASE("metrics error cases") {
    CHECK_THROWS_WITH_AS(metrics(std::vector<double>{1, 2}, std::vector<double>{1}),
                         doctest::Contains("length"), TsError);
    CHECK_THROWS_WITH_AS(metrics(std::vector<double>{0}, std::vector<double>{1}),
                         doctest::Contains("MAPE"), TsError);
}

TEST_CASE("metric properties on random sequences") {
    Rng rng(11);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> actual(12), forecast(12);
        for (auto& v : actual) v = rng.uniform(0.5, 10.0);
        for (auto& v : forecast) v = rng.uniform(0.5, 10.0);
        const ErrorTriple e = metrics(actual, forecast);
        CHECK(e.mse >= 0);
        // Jensen: MAE^2 <= MSE
        CHECK(e.mae * e.mae <= e.mse * (1 + 1e-12));
        // MAPE invariant under common positive scaling
        const double c = rng.uniform(0.1, 30.0);
        std::vector<double> sa = actual, sf = forecast;
        for (auto& v : sa) v *= c;
        for (auto& v : sf) v *= c;
        CHECK(metrics(sa, sf).mape == doctest::Approx(e.mape).epsilon(1e-10));
    }
}
