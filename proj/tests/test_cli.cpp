#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cpd/simulate.hpp"

using nlohmann::json;

namespace {

const std::filesystem::path kWorkDir =
    std::filesystem::temp_directory_path() / "cpd-cli-tests";

struct CliRun {
    int exit_code = -1;
    std::string stdout_text;
};

CliRun run_cli(const std::string& args) {
    std::filesystem::create_directories(kWorkDir);
    const std::filesystem::path out = kWorkDir / "stdout.txt";
    const std::string cmd =
        std::string(CPD_CLI_PATH) + " " + args + " > " + out.string() + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    CliRun r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out);
    std::stringstream buf;
    buf << in.rdbuf();
    r.stdout_text = buf.str();
    return r;
}

std::string write_constant_series() {
    std::filesystem::create_directories(kWorkDir);
    const auto path = kWorkDir / "constant.csv";
    std::ofstream out(path);
    out << "value\n";
    for (int i = 0; i < 200; ++i) out << "4.25\n";
    return path.string();
}

std::string write_shift_series() {
    std::filesystem::create_directories(kWorkDir);
    const auto path = kWorkDir / "shift.csv";
    cpd::StepMeanFunction mean(cpd::ChangepointConfig({250}), {0.0, 3.0});
    const cpd::TimeSeries x = cpd::simulate_ar(cpd::ArModel({}, 1.0), mean, 500, 12345);
    std::ofstream out(path);
    out << "value\n";
    out.precision(17);
    for (double v : x.values) out << v << "\n";
    return path.string();
}

} // namespace

TEST_CASE("detect: constant series accepts with a zero statistic") {
    const std::string input = write_constant_series();
    const CliRun r = run_cli("detect --input " + input + " --method scusumz");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.stdout_text);
    CHECK(j.at("tool") == "cpdetect");
    CHECK(j.at("result").at("statistic") == 0.0);
    CHECK(j.at("result").at("reject") == false);
    CHECK(j.at("params").at("alpha") == 0.05);
}

TEST_CASE("detect: finds a strong shift and reports its location") {
    const std::string input = write_shift_series();
    const CliRun r = run_cli("detect --input " + input + " --method scusumz --order 0");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.stdout_text);
    CHECK(j.at("result").at("reject") == true);
    const int loc = j.at("result").at("location").get<int>();
    CHECK(loc >= 240);
    CHECK(loc <= 260);
}

TEST_CASE("detect: missing file exits 2") {
    const CliRun r = run_cli("detect --input /no/such/file.csv");
    CHECK(r.exit_code == 2);
}

TEST_CASE("detect: invalid alpha exits 3") {
    const std::string input = write_constant_series();
    const CliRun r = run_cli("detect --input " + input + " --alpha 1.5");
    CHECK(r.exit_code == 3);
}

TEST_CASE("detect: unknown flag exits 3") {
    const std::string input = write_constant_series();
    const CliRun r = run_cli("detect --input " + input + " --frobnicate");
    CHECK(r.exit_code == 3);
}

TEST_CASE("segment: bs finds the center shift; reruns are byte-identical") {
    const std::string input = write_shift_series();
    const std::string args = "segment --input " + input + " --method bs --order 0";
    const CliRun a = run_cli(args);
    REQUIRE(a.exit_code == 0);
    const json j = json::parse(a.stdout_text);
    const auto taus = j.at("result").at("changepoints").at("taus").get<std::vector<int>>();
    REQUIRE(taus.size() == 1);
    CHECK(std::abs(taus[0] - 250) <= 10);

    const CliRun b = run_cli(args);
    CHECK(a.stdout_text == b.stdout_text);
}

TEST_CASE("segment: ga with mbic on the shift series") {
    const std::string input = write_shift_series();
    const CliRun r = run_cli("segment --input " + input +
                             " --method ga --criterion mbic --order 0 --seed 4");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.stdout_text);
    const auto taus = j.at("result").at("changepoints").at("taus").get<std::vector<int>>();
    REQUIRE(taus.size() == 1);
    CHECK(std::abs(taus[0] - 250) <= 10);
    CHECK(j.at("result").contains("global_ar"));
    CHECK(j.at("params").at("seed") == 4);
}

TEST_CASE("segment: ga with aic overfits clean noise") {
    std::filesystem::create_directories(kWorkDir);
    const auto path = kWorkDir / "noise.csv";
    {
        const cpd::TimeSeries x = cpd::simulate_ar(cpd::ArModel({}, 1.0), 500, 777);
        std::ofstream out(path);
        out.precision(17);
        for (double v : x.values) out << v << "\n";
    }
    const CliRun r = run_cli("segment --input " + path.string() +
                             " --method ga --criterion aic --order 0 --seed 2 --min-spacing 1");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.stdout_text);
    CHECK(j.at("result").at("changepoints").at("m").get<int>() >= 3);
}

TEST_CASE("segment: wbs deterministic in --seed") {
    const std::string input = write_shift_series();
    const std::string args =
        "segment --input " + input + " --method wbs --order 0 --seed 9";
    const CliRun a = run_cli(args);
    const CliRun b = run_cli(args);
    REQUIRE(a.exit_code == 0);
    CHECK(a.stdout_text == b.stdout_text);
}

TEST_CASE("distance: worked example") {
    const CliRun r = run_cli("distance --a 250 --b 250,400 --n 500");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.stdout_text);
    CHECK(j.at("result").at("distance") == 1.0);
    CHECK(j.at("result").at("count_gap") == 1);
    CHECK(j.at("result").at("assignment_cost") == 0.0);
}

TEST_CASE("critvals: gumbel closed form") {
    const CliRun r = run_cli("critvals --law gumbel --alpha 0.95");
    REQUIRE(r.exit_code == 0);
    const json j = json::parse(r.stdout_text);
    const double q = j.at("result").at("quantiles").begin().value().get<double>();
    CHECK(std::abs(q - 3.6633) < 0.001);
}

TEST_CASE("critvals: unknown law exits 3") {
    const CliRun r = run_cli("critvals --law weibull");
    CHECK(r.exit_code == 3);
}

TEST_CASE("simulate: one CSV row per method per replicate") {
    std::filesystem::create_directories(kWorkDir);
    const auto cfg_path = kWorkDir / "scenario.json";
    {
        std::ofstream out(cfg_path);
        out << R"({
            "scenario": "single-middle", "phi": [], "n": 200, "delta": 3.0,
            "replications": 1, "seed": 5, "order": 0,
            "methods": [{"method": "scusumz", "order": 0},
                        {"method": "bs", "order": 0},
                        {"method": "wbs", "order": 0}]
        })";
    }
    const auto csv_path = kWorkDir / "tidy.csv";
    const CliRun r = run_cli("simulate --config " + cfg_path.string() + " --out-csv " +
                             csv_path.string());
    REQUIRE(r.exit_code == 0);

    std::ifstream in(csv_path);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 1 + 3); // header + one row per method

    const json j = json::parse(r.stdout_text);
    CHECK(j.at("result").at("replications") == 1);
    CHECK(j.at("result").at("methods").size() == 3);
}
