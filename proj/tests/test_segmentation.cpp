#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "cpd/distance.hpp"
#include "cpd/harness.hpp"
#include "cpd/segmentation.hpp"
#include "cpd/simulate.hpp"

using namespace cpd;

namespace {

bool spacing_ok(const ChangepointConfig& c, int n, int min_len) {
    int prev = 0;
    for (int t : c.taus) {
        if (t - prev < min_len) return false;
        prev = t;
    }
    return c.empty() || n - c.taus.back() >= min_len;
}

} // namespace

TEST_CASE("binary_segment: changepoint-free noise usually yields an empty configuration") {
    int empty = 0;
    for (int r = 0; r < 200; ++r) {
        const TimeSeries x = simulate_ar(ArModel({}, 1.0), 500, mix_seed(201, r));
        if (binary_segment(x, 0).empty()) ++empty;
    }
    // the top-level test holds its 5% level; child segments add little here
    CHECK(empty >= 180);
}

TEST_CASE("binary_segment: locates a single strong shift") {
    // each accepted split spawns two child tests at level alpha, so the
    // exactly-one rate is bounded near (1 - 2 alpha); misses are spurious
    // second changepoints, not missed or misplaced ones
    StepMeanFunction mean(ChangepointConfig({250}), {0.0, 3.0});
    int good = 0, missed_or_off = 0;
    for (int r = 0; r < 200; ++r) {
        const TimeSeries x = simulate_ar(ArModel({}, 1.0), mean, 500, mix_seed(202, r));
        const ChangepointConfig c = binary_segment(x, 0);
        if (c.count() == 1 && std::abs(c.taus[0] - 250) <= 10) ++good;
        if (c.count() == 0 || (c.count() == 1 && std::abs(c.taus[0] - 250) > 10)) ++missed_or_off;
    }
    CHECK(good >= 175);
    CHECK(missed_or_off == 0);
}

TEST_CASE("binary_segment: deterministic") {
    StepMeanFunction mean(ChangepointConfig({150, 300}), {0.0, 1.5, 0.0});
    const TimeSeries x = simulate_ar(ArModel({0.5}, 1.0), mean, 450, 203);
    const ChangepointConfig a = binary_segment(x, 1);
    const ChangepointConfig b = binary_segment(x, 1);
    CHECK(a == b);
}

TEST_CASE("binary_segment: output respects spacing and ordering") {
    for (int r = 0; r < 25; ++r) {
        StepMeanFunction mean(ChangepointConfig({100, 200, 300, 400}), {0.0, 2.0, 0.0, 2.0, 0.0});
        const TimeSeries x = simulate_ar(ArModel({0.4}, 1.0), mean, 500, mix_seed(204, r));
        SegmentationParams params;
        const ChangepointConfig c = binary_segment(x, 1, params);
        CHECK(spacing_ok(c, 500, params.resolve_min_len(1)));
    }
}

TEST_CASE("binary_segment: series too short") {
    const TimeSeries x = simulate_ar(ArModel({}, 1.0), 15, 205);
    CHECK_THROWS_AS(binary_segment(x, 0), std::invalid_argument);
}

TEST_CASE("sample_intervals: count, spacing, determinism") {
    CHECK(sample_intervals(100, 0, 10, 1).empty());

    const auto intervals = sample_intervals(500, 200, 10, 42);
    REQUIRE(intervals.size() == 200);
    for (const auto& [a, b] : intervals) {
        CHECK(a >= 0);
        CHECK(b <= 500);
        CHECK(b - a >= 10);
    }
    CHECK(sample_intervals(500, 200, 10, 42) == intervals);
    CHECK(sample_intervals(500, 200, 10, 43) != intervals);

    CHECK_THROWS_AS(sample_intervals(100, 10, 3, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_intervals(8, 10, 10, 1), std::invalid_argument);
}

TEST_CASE("wbs: finds well-separated shifts") {
    StepMeanFunction mean(ChangepointConfig({250}), {0.0, 3.0});
    int good = 0;
    for (int r = 0; r < 200; ++r) {
        const TimeSeries x = simulate_ar(ArModel({}, 1.0), mean, 500, mix_seed(206, r));
        SegmentationParams params;
        params.seed = mix_seed(206, r, 1);
        const ChangepointConfig c = wbs(x, 0, params);
        if (c.count() == 1 && std::abs(c.taus[0] - 250) <= 10) ++good;
    }
    CHECK(good >= 190);
}

TEST_CASE("wbs: false positives exceed binary segmentation's on correlated noise") {
    int fp_wbs = 0, fp_bs = 0;
    for (int r = 0; r < 200; ++r) {
        const TimeSeries x = simulate_ar(ArModel({0.5}, 1.0), 500, mix_seed(207, r));
        SegmentationParams params;
        params.seed = mix_seed(207, r, 1);
        if (!wbs(x, 1, params).empty()) ++fp_wbs;
        if (!binary_segment(x, 1, params).empty()) ++fp_bs;
    }
    CHECK(fp_wbs > fp_bs);
    CHECK(fp_wbs > 0);
}

TEST_CASE("wbs: raising the threshold constant never adds changepoints") {
    StepMeanFunction mean(ChangepointConfig({125, 250, 375}), {0.0, 1.0, 0.0, 1.0});
    const TimeSeries x = simulate_ar(ArModel({0.5}, 1.0), mean, 500, 208);
    int prev = 1 << 20;
    for (double c : {0.9, 1.1, 1.3, 1.6, 2.0}) {
        SegmentationParams params;
        params.seed = 5;
        params.wbs_constant = c;
        const int m = wbs(x, 1, params).count();
        CHECK(m <= prev);
        prev = m;
    }
}

TEST_CASE("wbs: deterministic given the seed") {
    StepMeanFunction mean(ChangepointConfig({200}), {0.0, 1.0});
    const TimeSeries x = simulate_ar(ArModel({0.3}, 1.0), mean, 400, 209);
    SegmentationParams params;
    params.seed = 77;
    CHECK(wbs(x, 1, params) == wbs(x, 1, params));
}

TEST_CASE("wbs: output respects spacing and ordering") {
    for (int r = 0; r < 25; ++r) {
        StepMeanFunction mean(ChangepointConfig({100, 200, 300, 400}), {0.0, 2.0, 0.0, 2.0, 0.0});
        const TimeSeries x = simulate_ar(ArModel({0.4}, 1.0), mean, 500, mix_seed(210, r));
        SegmentationParams params;
        params.seed = mix_seed(210, r, 1);
        const ChangepointConfig c = wbs(x, 1, params);
        CHECK(spacing_ok(c, 500, params.resolve_min_len(1)));
    }
}

TEST_CASE("wbs beats binary segmentation on nine alternating shifts") {
    // frequent sign flips are where the recursion's single test gets fooled
    const ScenarioSpec spec = builtin_scenario("alternating-9", {0.5}, 2.0);
    const auto& truth = std::get<StepMeanFunction>(spec.truth);
    double d_wbs = 0.0, d_bs = 0.0;
    for (int r = 0; r < 200; ++r) {
        const TimeSeries x = simulate_ar(spec.noise, truth, 500, mix_seed(212, r));
        SegmentationParams params;
        params.seed = mix_seed(212, r, 1);
        d_wbs += config_distance(truth.config, wbs(x, 1, params), 500);
        d_bs += config_distance(truth.config, binary_segment(x, 1, params), 500);
    }
    CHECK(d_wbs < d_bs);
}

TEST_CASE("wbs_interval_count: capped form of the sampling recommendation") {
    CHECK(wbs_interval_count(500, 10) == 5000);
    CHECK(wbs_interval_count(60, 30) < 5000);
    CHECK(wbs_interval_count(60, 30) > 0);
}

TEST_CASE("both searches: a 5-sigma center shift is found exactly once") {
    StepMeanFunction mean(ChangepointConfig({250}), {0.0, 5.0});
    int ok_bs = 0, ok_wbs = 0;
    for (int r = 0; r < 200; ++r) {
        const TimeSeries x = simulate_ar(ArModel({}, 1.0), mean, 500, mix_seed(211, r));
        SegmentationParams params;
        params.seed = mix_seed(211, r, 1);
        if (binary_segment(x, 0, params).count() == 1) ++ok_bs;
        if (wbs(x, 0, params).count() == 1) ++ok_wbs;
    }
    CHECK(ok_bs >= 175); // bounded by the recursion's 2*alpha child false positives
    CHECK(ok_wbs >= 198);
}
