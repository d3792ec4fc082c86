#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "tsens/common.hpp"
#include "tsens/ensemble.hpp"

using namespace tsens;

namespace {

TimeSeries synthetic_series(std::uint64_t seed, int n) {
    // noisy sine, positive everywhere so MAPE is always defined
    Rng rng(seed);
    TimeSeries s;
    s.name = "synthetic";
    s.values.resize(n);
    for (int t = 0; t < n; ++t)
        s.values[t] = 2.0 + std::sin(0.4 * t) + 0.1 * rng.uniform(-1.0, 1.0);
    return s;
}

TrainerSpec quick(TrainerKind kind) {
    TrainerSpec spec;
    spec.kind = kind;
    spec.max_epochs = 60;
    spec.stagnation_window = 0;
    return spec;
}

} // namespace

TEST_CASE("compute_weight worked examples") {
    const auto [g1, w1] = compute_weight({0.5, 0.25, 0.25});
    CHECK(g1 == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(w1 == doctest::Approx(std::exp(1.0)).epsilon(1e-15));

    const auto [g0, w0] = compute_weight({0, 0, 0});
    CHECK(g0 == 50.0);
    CHECK(w0 == doctest::Approx(std::exp(50.0)).epsilon(1e-12));

    const auto [ga, wa] = compute_weight({0.5, 0.25, 0.25});
    const auto [gb, wb] = compute_weight({1.0, 0.5, 0.5});
    CHECK(wa / wb == doctest::Approx(std::exp(0.5)).epsilon(1e-12));
    CHECK(ga > gb); // more error, less weight
}

TEST_CASE("weight monotonicity below the clamp") {
    Rng rng(3);
    for (int rep = 0; rep < 200; ++rep) {
        ErrorTriple a{rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0), rng.uniform(0.1, 50.0)};
        ErrorTriple b = a;
        b.mse += rng.uniform(0.01, 1.0);
        const auto [ga, wa] = compute_weight(a);
        const auto [gb, wb] = compute_weight(b);
        CHECK(wa > wb);
    }
}

TEST_CASE("combine worked examples and errors") {
    CHECK(combine(std::vector<double>{3.0}, {{1.0, 2.0}}) == std::vector<double>{1.0, 2.0});
    CHECK(combine(std::vector<double>{1.0, 1.0}, {{0.0, 0.0}, {2.0, 4.0}}) ==
          std::vector<double>{1.0, 2.0});
    CHECK(combine(std::vector<double>{1.0, 3.0}, {{0.0}, {4.0}}) == std::vector<double>{3.0});

    CHECK_THROWS_AS(combine(std::vector<double>{1.0}, {{1.0}, {2.0}}), TsError);
    CHECK_THROWS_AS(combine(std::vector<double>{1.0, 1.0}, {{1.0}, {2.0, 3.0}}), TsError);
    CHECK_THROWS_AS(combine(std::vector<double>{1.0, 0.0}, {{1.0}, {2.0}}), TsError);
}

TEST_CASE("combine equals a brute-force weighted mean and stays in the envelope") {
    Rng rng(19);
    for (int rep = 0; rep < 300; ++rep) {
        const int k = 1 + static_cast<int>(rng.uniform01() * 6);
        const int len = 1 + static_cast<int>(rng.uniform01() * 10);
        std::vector<double> weights(k);
        std::vector<std::vector<double>> forecasts(k, std::vector<double>(len));
        for (auto& w : weights) w = rng.uniform(0.01, 10.0);
        for (auto& f : forecasts)
            for (auto& v : f) v = rng.uniform(-5.0, 5.0);

        const auto combined = combine(weights, forecasts);
        for (int t = 0; t < len; ++t) {
            double num = 0.0, den = 0.0, lo = forecasts[0][t], hi = forecasts[0][t];
            for (int i = 0; i < k; ++i) {
                num += weights[i] * forecasts[i][t];
                den += weights[i];
                lo = std::min(lo, forecasts[i][t]);
                hi = std::max(hi, forecasts[i][t]);
            }
            CHECK(std::abs(combined[t] - num / den) <= 1e-12 * (1.0 + std::abs(num / den)));
            CHECK(combined[t] >= lo - 1e-12);
            CHECK(combined[t] <= hi + 1e-12);
        }
    }
}

TEST_CASE("k=1 ensemble reproduces the single trainer's forecast") {
    const TimeSeries series = synthetic_series(1, 60);
    const NetworkConfig config(3, 2, 1);
    const EnsembleResult result = run_ensemble(series, {40, 10, 10}, config,
                                               {quick(TrainerKind::Rprop)}, 2, 11);
    CHECK(result.evaluations.size() == 1);
    CHECK(result.combined_forecast == result.member_forecasts[0]);
    CHECK(result.combined_forecast.size() == 10);
    CHECK(result.warnings.empty());
}

TEST_CASE("identical trainer specs produce identical members equal to the combination") {
    const TimeSeries series = synthetic_series(2, 60);
    const NetworkConfig config(3, 2, 1);
    const EnsembleResult result =
        run_ensemble(series, {40, 10, 10}, config,
                     {quick(TrainerKind::Scg), quick(TrainerKind::Scg), quick(TrainerKind::Scg)},
                     2, 3);
    REQUIRE(result.member_forecasts.size() == 3);
    CHECK(result.member_forecasts[0] == result.member_forecasts[1]);
    CHECK(result.member_forecasts[0] == result.member_forecasts[2]);
    for (std::size_t t = 0; t < result.combined_forecast.size(); ++t)
        CHECK(result.combined_forecast[t] ==
              doctest::Approx(result.member_forecasts[0][t]).epsilon(1e-14));
    CHECK(result.evaluations[0].name == "SCG");
    CHECK(result.evaluations[1].name == "SCG#2");
}

TEST_CASE("reordering trainers permutes members and leaves the combination unchanged") {
    const TimeSeries series = synthetic_series(3, 70);
    const NetworkConfig config(4, 2, 1);
    const std::vector<TrainerSpec> order_a{quick(TrainerKind::Rprop), quick(TrainerKind::Lm),
                                           quick(TrainerKind::Bfgs)};
    const std::vector<TrainerSpec> order_b{quick(TrainerKind::Bfgs), quick(TrainerKind::Rprop),
                                           quick(TrainerKind::Lm)};
    const EnsembleResult a = run_ensemble(series, {45, 13, 12}, config, order_a, 2, 7);
    const EnsembleResult b = run_ensemble(series, {45, 13, 12}, config, order_b, 2, 7);

    for (std::size_t i = 0; i < order_a.size(); ++i) {
        const auto name = a.evaluations[i].name;
        const auto it = std::find_if(b.evaluations.begin(), b.evaluations.end(),
                                     [&](const auto& e) { return e.name == name; });
        REQUIRE(it != b.evaluations.end());
        const std::size_t j = it - b.evaluations.begin();
        CHECK(a.member_forecasts[i] == b.member_forecasts[j]);
        CHECK(a.evaluations[i].w == b.evaluations[j].w);
    }
    // identical up to summation order in the weighted mean
    REQUIRE(a.combined_forecast.size() == b.combined_forecast.size());
    for (std::size_t t = 0; t < a.combined_forecast.size(); ++t)
        CHECK(a.combined_forecast[t] ==
              doctest::Approx(b.combined_forecast[t]).epsilon(1e-12));
}

TEST_CASE("duplicating a trainer pulls the combination toward it") {
    const TimeSeries series = synthetic_series(4, 60);
    const NetworkConfig config(3, 2, 1);
    const std::vector<TrainerSpec> base{quick(TrainerKind::Rprop), quick(TrainerKind::Lm)};
    std::vector<TrainerSpec> dup = base;
    dup.push_back(quick(TrainerKind::Lm)); // same kind, same derived seeds

    const EnsembleResult before = run_ensemble(series, {40, 10, 10}, config, base, 2, 9);
    const EnsembleResult after = run_ensemble(series, {40, 10, 10}, config, dup, 2, 9);

    const auto& lm = before.member_forecasts[1];
    for (std::size_t t = 0; t < lm.size(); ++t) {
        const double gap_before = std::abs(before.combined_forecast[t] - lm[t]);
        const double gap_after = std::abs(after.combined_forecast[t] - lm[t]);
        if (gap_before > 1e-12) CHECK(gap_after < gap_before);
    }
}

TEST_CASE("run_ensemble is a pure function of its inputs") {
    const TimeSeries series = synthetic_series(5, 60);
    const NetworkConfig config(3, 2, 1);
    const std::vector<TrainerSpec> specs{quick(TrainerKind::Rprop), quick(TrainerKind::Scg),
                                         quick(TrainerKind::Bfgs)};
    const EnsembleResult a = run_ensemble(series, {40, 10, 10}, config, specs, 3, 21);
    const EnsembleResult b = run_ensemble(series, {40, 10, 10}, config, specs, 3, 21);
    CHECK(a.combined_forecast == b.combined_forecast);
    CHECK(a.member_forecasts == b.member_forecasts);
    for (std::size_t i = 0; i < a.evaluations.size(); ++i)
        CHECK(a.evaluations[i].w == b.evaluations[i].w);
}

TEST_CASE("combined forecast lies in the member envelope") {
    const TimeSeries series = synthetic_series(6, 80);
    const NetworkConfig config(4, 3, 1);
    const EnsembleResult result =
        run_ensemble(series, {52, 14, 14}, config,
                     {quick(TrainerKind::Rprop), quick(TrainerKind::Lm), quick(TrainerKind::Scg)},
                     2, 13);
    for (std::size_t t = 0; t < result.combined_forecast.size(); ++t) {
        double lo = result.member_forecasts[0][t], hi = lo;
        for (const auto& member : result.member_forecasts) {
            lo = std::min(lo, member[t]);
            hi = std::max(hi, member[t]);
        }
        CHECK(result.combined_forecast[t] >= lo - 1e-12);
        CHECK(result.combined_forecast[t] <= hi + 1e-12);
    }
    // original-scale view with an empty transform log equals the working view
    CHECK(result.combined_forecast_original == result.combined_forecast);
}

TEST_CASE("a failing trainer is dropped with a warning when others survive") {
    const TimeSeries series = synthetic_series(7, 60);
    const NetworkConfig config(3, 2, 1);
    TrainerSpec diverging = quick(TrainerKind::GdMomentum);
    diverging.hyper.learning_rate = 1e18; // guaranteed overflow to non-finite loss
    const std::vector<TrainerSpec> specs{quick(TrainerKind::Rprop), diverging};

    const EnsembleResult result = run_ensemble(series, {40, 10, 10}, config, specs, 2, 5);
    CHECK(result.evaluations.size() == 1);
    CHECK(result.evaluations[0].name == "RPROP");
    bool warned = false;
    for (const auto& w : result.warnings)
        if (w.find("GD_MOMENTUM") != std::string::npos && w.find("dropped") != std::string::npos)
            warned = true;
    CHECK(warned);

    // and an error when nothing survives
    CHECK_THROWS_WITH_AS(run_ensemble(series, {40, 10, 10}, config, {diverging}, 2, 5),
                         doctest::Contains("every trainer failed"), TsError);
}

TEST_CASE("even trainer counts warn but run") {
    const TimeSeries series = synthetic_series(8, 60);
    const NetworkConfig config(3, 2, 1);
    const EnsembleResult result = run_ensemble(
        series, {40, 10, 10}, config, {quick(TrainerKind::Rprop), quick(TrainerKind::Lm)}, 2, 4);
    bool warned = false;
    for (const auto& w : result.warnings)
        if (w.find("odd") != std::string::npos) warned = true;
    CHECK(warned);
    CHECK(result.evaluations.size() == 2);
}

TEST_CASE("working and original scales are linked by the transform chain") {
    TimeSeries series = synthetic_series(9, 60);
    for (auto& v : series.values) v = std::pow(10.0, v * 0.3); // positive, varied
    const TimeSeries logged = apply_transform(series, {TransformKind::Log10});

    const NetworkConfig config(3, 2, 1);
    const EnsembleResult result = run_ensemble(logged, {40, 10, 10}, config,
                                               {quick(TrainerKind::Rprop)}, 2, 2);
    for (std::size_t t = 0; t < result.combined_forecast.size(); ++t)
        CHECK(result.combined_forecast_original[t] ==
              doctest::Approx(std::pow(10.0, result.combined_forecast[t])).epsilon(1e-12));
    // original actuals recover the raw series tail
    for (std::size_t t = 0; t < result.test_actuals_original.size(); ++t)
        CHECK(result.test_actuals_original[t] ==
              doctest::Approx(series.values[50 + t]).epsilon(1e-10));
}
