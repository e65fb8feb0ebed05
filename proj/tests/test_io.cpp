#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cpd/io.hpp"

using namespace cpd;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

} // namespace

TEST_CASE("CSV series: header optional, values parsed") {
    CHECK(parse_series_csv("value\n1.5\n-2\n3e-1\n").values ==
          std::vector<double>{1.5, -2.0, 0.3});
    CHECK(parse_series_csv("1.5\n-2\n").values == std::vector<double>{1.5, -2.0});
    CHECK_THROWS_AS(parse_series_csv("value\n1.0\noops\n"), io_error);
    CHECK_THROWS_AS(parse_series_csv("header_only\n"), io_error);
    CHECK_THROWS_AS(parse_series_csv("1.0\nnan\n"), io_error);
}

TEST_CASE("JSON series: array of numbers") {
    CHECK(parse_series_json("[1, 2.5, -3]").values == std::vector<double>{1.0, 2.5, -3.0});
    CHECK_THROWS_AS(parse_series_json("{\"a\": 1}"), io_error);
    CHECK_THROWS_AS(parse_series_json("[1, \"x\"]"), io_error);
    CHECK_THROWS_AS(parse_series_json("[1, 2"), io_error);
}

TEST_CASE("series round-trips through both exporters") {
    const TimeSeries x{std::vector<double>{0.25, -1.75, 3.0, 12.125}};

    const auto csv = temp_file("cpd_series_roundtrip.csv");
    write_series_csv(csv.string(), x);
    CHECK(read_series(csv.string()).values == x.values);

    const auto jsn = temp_file("cpd_series_roundtrip.json");
    write_series_json(jsn.string(), x);
    CHECK(read_series(jsn.string()).values == x.values);

    std::filesystem::remove(csv);
    std::filesystem::remove(jsn);
}

TEST_CASE("read_series: missing file") {
    CHECK_THROWS_AS(read_series("/nonexistent/path/series.csv"), io_error);
}

TEST_CASE("AmocResult serializes every field") {
    AmocResult r;
    r.method = AmocMethod::ScusumZ;
    r.statistic = 1.5;
    r.scaled_statistic = 2.0;
    r.location = 42;
    r.critical_value = 0.46;
    r.p_value = 0.01;
    r.reject = true;
    r.alpha = 0.05;
    r.order_used = 2;
    const json j = to_json(r);
    CHECK(j.at("method") == "scusumz");
    CHECK(j.at("statistic") == 1.5);
    CHECK(j.at("scaled_statistic") == 2.0);
    CHECK(j.at("location") == 42);
    CHECK(j.at("critical_value") == 0.46);
    CHECK(j.at("p_value") == 0.01);
    CHECK(j.at("reject") == true);

    r.p_value.reset();
    CHECK(to_json(r).at("p_value").is_null());
}

TEST_CASE("scenario config: built-in and custom truths") {
    const json builtin = json::parse(R"({
        "scenario": "alternating-3", "phi": [0.5], "n": 500, "delta": 2.0,
        "replications": 50, "seed": 9,
        "methods": [{"method": "ga", "criterion": "mbic"}, {"method": "bs"}]
    })");
    const SimulationConfig cfg = simulation_config_from_json(builtin);
    CHECK(cfg.scenario.replications == 50);
    CHECK(cfg.scenario.seed == 9);
    CHECK(cfg.methods.size() == 2);
    CHECK(cfg.methods[0].kind == MethodSpec::Kind::GaPenalized);
    CHECK(cfg.methods[0].criterion == Criterion::MBIC);
    CHECK(cfg.methods[1].kind == MethodSpec::Kind::BinarySegmentation);
    const auto& truth = std::get<StepMeanFunction>(cfg.scenario.truth);
    CHECK(truth.config.taus == std::vector<int>{126, 251, 376});
    CHECK(truth.mus == std::vector<double>{0.0, 2.0, 0.0, 2.0});

    const json custom = json::parse(R"({
        "scenario": "custom", "phi": [], "n": 100,
        "taus": [30, 60], "mus": [0.0, 1.0, 0.5],
        "methods": [{"method": "scusumz", "alpha": 0.1}]
    })");
    const SimulationConfig c2 = simulation_config_from_json(custom);
    CHECK(std::get<StepMeanFunction>(c2.scenario.truth).config.taus == std::vector<int>{30, 60});
    CHECK(c2.methods[0].alpha == 0.1);

    CHECK_THROWS_AS(simulation_config_from_json(json::parse(R"({"n": 100})")), io_error);
    CHECK_THROWS_AS(
        simulation_config_from_json(json::parse(
            R"({"scenario": "none", "methods": [{"method": "nope"}]})")),
        io_error);
}

TEST_CASE("experiment CSV: one row per replicate per method") {
    ScenarioSpec spec = builtin_scenario("none", {}, 0.0);
    spec.replications = 4;
    std::vector<MethodSpec> methods(2);
    methods[0].kind = MethodSpec::Kind::CusumX;
    methods[0].order = 0;
    methods[1].kind = MethodSpec::Kind::ScusumZ;
    methods[1].order = 0;
    const ExperimentResult res = run_experiment(spec, methods, 1);

    std::ostringstream out;
    write_experiment_csv(out, res);
    std::istringstream in(out.str());
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 1 + 4 * 2);
    CHECK(out.str().rfind("replicate,method,error,m_true,m_hat,reject,distance,runtime_ms,"
                          "changepoints\n", 0) == 0);
}

TEST_CASE("GA params from JSON override only what they mention") {
    const GaParams ga = ga_params_from_json(json::parse(R"({"population": 64, "seed": 5})"));
    CHECK(ga.population == 64);
    CHECK(ga.seed == 5);
    CHECK(ga.max_generations == GaParams{}.max_generations);
}
