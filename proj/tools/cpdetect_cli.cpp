// cpdetect: changepoint detection for autocorrelated time series.
//
// Subcommands: detect, segment, distance, simulate, critvals. Results are
// printed as JSON envelopes that embed the full effective configuration, so
// any run can be replayed from its output alone.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cpd/cpd.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 2;
constexpr int kExitParams = 3;
constexpr int kExitNumeric = 4;

cpd::json envelope(const std::string& command, cpd::json params, cpd::json result) {
    return cpd::json{{"tool", "cpdetect"},
                     {"version", cpd::kVersion},
                     {"command", command},
                     {"params", std::move(params)},
                     {"result", std::move(result)}};
}

int parse_order(const std::string& text) {
    if (text == "auto") return cpd::kAutoOrder;
    try {
        std::size_t pos = 0;
        const int p = std::stoi(text, &pos);
        if (pos != text.size() || p < 0) throw std::invalid_argument("");
        return p;
    } catch (const std::exception&) {
        throw std::invalid_argument("--order expects a nonnegative integer or 'auto'");
    }
}

std::vector<int> parse_time_list(const std::string& text) {
    std::vector<int> out;
    if (text.empty() || text == "none") return out;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) {
        try {
            std::size_t pos = 0;
            const int t = std::stoi(field, &pos);
            if (pos != field.size()) throw std::invalid_argument("");
            out.push_back(t);
        } catch (const std::exception&) {
            throw std::invalid_argument("changepoint lists must be comma-separated integers");
        }
    }
    return out;
}

struct DetectArgs {
    std::string input;
    std::string method = "scusumz";
    std::string order = "auto";
    double alpha = 0.05;
    double crop_lo = 0.05;
    double crop_hi = 0.95;
    bool refit = false;
    std::string curve_out;
};

int cmd_detect(const DetectArgs& args) {
    const cpd::TimeSeries x = cpd::read_series(args.input);
    const int order = parse_order(args.order);

    cpd::AmocResult r;
    cpd::LrtOptions lrt_opts{args.refit};
    if (args.method == "cusumx") {
        r = cpd::cusum_test_x(x, order, args.alpha);
    } else if (args.method == "cusumz") {
        r = cpd::cusum_test_z(x, order, args.alpha);
    } else if (args.method == "scusumx") {
        r = cpd::scusum_x(x, order, args.alpha);
    } else if (args.method == "scusumz") {
        r = cpd::scusum_z(x, order, args.alpha);
    } else if (args.method == "lrt") {
        r = cpd::lrt_gumbel(x, order, args.alpha, lrt_opts);
    } else if (args.method == "lrt-cropped") {
        r = cpd::lrt_cropped(x, order, args.crop_lo, args.crop_hi, args.alpha, lrt_opts);
    } else {
        throw std::invalid_argument("unknown --method '" + args.method + "'");
    }

    if (!args.curve_out.empty()) {
        std::vector<double> curve;
        if (args.method == "cusumx" || args.method == "scusumx") {
            curve = cpd::cusum_curve(x.values);
        } else if (args.method == "cusumz" || args.method == "scusumz") {
            const cpd::ArModel m = cpd::fit_ar_yule_walker(x, r.order_used);
            curve = cpd::cusum_curve(cpd::one_step_residuals(x, m));
        } else {
            throw std::invalid_argument("--curve-out is only available for CUSUM-type methods");
        }
        std::ofstream out(args.curve_out);
        if (!out) throw cpd::io_error("cannot open output file: " + args.curve_out);
        out << "k,cusum\n";
        out.precision(17);
        for (std::size_t k = 0; k < curve.size(); ++k) out << (k + 1) << ',' << curve[k] << '\n';
    }

    cpd::json params{{"input", args.input},   {"method", args.method},
                     {"order", args.order},   {"alpha", args.alpha},
                     {"refit", args.refit}};
    if (args.method == "lrt-cropped") {
        params["crop_lo"] = args.crop_lo;
        params["crop_hi"] = args.crop_hi;
    }
    std::cout << envelope("detect", std::move(params), cpd::to_json(r)).dump(2) << "\n";
    std::cerr << (r.reject ? "changepoint at t=" + std::to_string(r.location) : "no changepoint")
              << " (" << args.method << ", scaled=" << r.scaled_statistic
              << ", critical=" << r.critical_value << ")\n";
    return kExitOk;
}

struct SegmentArgs {
    std::string input;
    std::string method;
    std::string criterion = "bic";
    std::string order = "auto";
    double alpha = 0.01;
    std::uint64_t seed = 1;
    int min_spacing = 0;
    double wbs_constant = 1.3;
    int wbs_intervals = 0;
    std::string ga_config;
    std::string ga_log;
};

int cmd_segment(const SegmentArgs& args) {
    const cpd::TimeSeries x = cpd::read_series(args.input);
    int order = parse_order(args.order);
    if (order == cpd::kAutoOrder) order = cpd::select_ar_order(x);

    cpd::ChangepointConfig config;
    cpd::json extra;
    if (args.method == "bs" || args.method == "wbs") {
        cpd::SegmentationParams params;
        params.alpha = args.alpha;
        params.seed = args.seed;
        params.min_segment_length = args.min_spacing;
        params.wbs_constant = args.wbs_constant;
        params.wbs_intervals = args.wbs_intervals;
        config = (args.method == "bs") ? cpd::binary_segment(x, order, params)
                                       : cpd::wbs(x, order, params);
    } else if (args.method == "ga") {
        cpd::GaParams ga;
        if (!args.ga_config.empty()) {
            std::ifstream in(args.ga_config);
            if (!in) throw cpd::io_error("cannot open GA config: " + args.ga_config);
            cpd::json j;
            try {
                in >> j;
            } catch (const cpd::json::exception& e) {
                throw cpd::io_error(std::string("GA config: ") + e.what());
            }
            ga = cpd::ga_params_from_json(j);
        }
        ga.seed = args.seed;
        if (args.min_spacing > 0) ga.min_spacing = args.min_spacing;
        const cpd::GaResult res = cpd::ga_search(x, cpd::criterion_from_name(args.criterion), ga, order);
        config = res.config;
        extra["objective"] = res.objective_value;
        extra["generations"] = res.generations;
        if (!args.ga_log.empty()) cpd::write_ga_log_csv(args.ga_log, res);
    } else {
        throw std::invalid_argument("unknown --method '" + args.method + "'");
    }

    const cpd::ArFit fit = cpd::fit_ar_differenced(x, order);
    cpd::json result{{"changepoints", cpd::to_json(config)},
                     {"global_ar", cpd::to_json(fit.model)},
                     {"yule_walker_fallback", fit.yule_walker_fallback}};
    for (auto& [k, v] : extra.items()) result[k] = v;

    cpd::json params{{"input", args.input},
                     {"method", args.method},
                     {"criterion", args.criterion},
                     {"order", order},
                     {"alpha", args.alpha},
                     {"seed", args.seed},
                     {"min_spacing", args.min_spacing},
                     {"wbs_constant", args.wbs_constant},
                     {"wbs_intervals", args.wbs_intervals}};
    std::cout << envelope("segment", std::move(params), std::move(result)).dump(2) << "\n";
    return kExitOk;
}

struct DistanceArgs {
    std::string a;
    std::string b;
    int n = 0;
};

int cmd_distance(const DistanceArgs& args) {
    if (args.n < 2) throw std::invalid_argument("--n must be at least 2");
    const cpd::ChangepointConfig ca(parse_time_list(args.a));
    const cpd::ChangepointConfig cb(parse_time_list(args.b));
    const cpd::ConfigDistanceResult d = cpd::config_distance_full(ca, cb, args.n);

    cpd::json matching = cpd::json::array();
    for (const auto& [ta, tb] : d.matching) {
        matching.push_back(cpd::json{{"a", ta}, {"b", tb}});
    }
    cpd::json result{{"distance", d.distance},
                     {"count_gap", d.count_gap},
                     {"assignment_cost", d.assignment_cost},
                     {"matching", matching}};
    cpd::json params{{"a", args.a}, {"b", args.b}, {"n", args.n}};
    std::cout << envelope("distance", std::move(params), std::move(result)).dump(2) << "\n";
    return kExitOk;
}

struct SimulateArgs {
    std::string config;
    std::string out_csv;
    int jobs = 1;
};

int cmd_simulate(const SimulateArgs& args) {
    const cpd::SimulationConfig cfg = cpd::read_simulation_config(args.config);
    const cpd::ExperimentResult result = cpd::run_experiment(cfg.scenario, cfg.methods, args.jobs);
    if (!args.out_csv.empty()) cpd::write_experiment_csv(args.out_csv, result);

    cpd::json params{{"config", args.config}, {"out_csv", args.out_csv}, {"jobs", args.jobs},
                     {"seed", cfg.scenario.seed}};
    std::cout << envelope("simulate", std::move(params), cpd::summary_to_json(result)).dump(2)
              << "\n";
    return kExitOk;
}

struct CritvalsArgs {
    std::string law;
    double alpha = 0.0; // 0 -> full table
    int paths = 200000;
    int grid = 10000;
    std::uint64_t seed = 873251;
    double crop_lo = 0.05;
    double crop_hi = 0.95;
    std::string cache_dir;
    int jobs = 0;
};

int cmd_critvals(const CritvalsArgs& args) {
    if (!args.cache_dir.empty()) {
        cpd::CriticalValueCache::instance().set_directory(args.cache_dir);
    }
    cpd::json result;
    cpd::json params{{"law", args.law}, {"paths", args.paths}, {"grid", args.grid},
                     {"seed", args.seed}};

    if (args.law == "gumbel") {
        cpd::json q;
        if (args.alpha > 0.0) {
            q[std::to_string(args.alpha)] = cpd::gumbel_quantile(args.alpha);
        } else {
            for (double lvl : cpd::CriticalValueCache::default_levels()) {
                q[std::to_string(lvl)] = cpd::gumbel_quantile(lvl);
            }
        }
        result = cpd::json{{"law", "gumbel"}, {"quantiles", std::move(q)}, {"analytic", true}};
    } else {
        cpd::LimitLaw law;
        if (args.law == "supbridge") {
            law = cpd::LimitLaw::sup_abs_bridge();
        } else if (args.law == "intsqbridge") {
            law = cpd::LimitLaw::int_sq_bridge();
        } else if (args.law == "cropped") {
            law = cpd::LimitLaw::cropped_sup_ratio(args.crop_lo, args.crop_hi);
            params["crop_lo"] = args.crop_lo;
            params["crop_hi"] = args.crop_hi;
        } else {
            throw std::invalid_argument("unknown --law '" + args.law + "'");
        }
        cpd::McSettings ms{args.paths, args.grid, args.seed, args.jobs};
        cpd::json q;
        if (args.alpha > 0.0) {
            q[std::to_string(args.alpha)] =
                cpd::CriticalValueCache::instance().quantile(law, args.alpha, ms);
        } else {
            const cpd::QuantileTable table = cpd::CriticalValueCache::instance().table(law, ms);
            for (const auto& [lvl, crit] : table.levels) q[std::to_string(lvl)] = crit;
        }
        result = cpd::json{{"law", args.law}, {"quantiles", std::move(q)}, {"analytic", false}};
        if (args.law == "supbridge") {
            result["analytic_reference"] = cpd::sup_bridge_quantile(args.alpha > 0.0 ? args.alpha : 0.95);
        }
    }
    std::cout << envelope("critvals", std::move(params), std::move(result)).dump(2) << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Changepoint detection for autocorrelated time series"};
    app.require_subcommand(1);

    DetectArgs detect_args;
    auto* detect = app.add_subcommand("detect", "Run one at-most-one-changepoint test");
    detect->add_option("--input", detect_args.input, "Series file (CSV column or JSON array)")
        ->required();
    detect->add_option("--method", detect_args.method,
                       "cusumx|cusumz|scusumx|scusumz|lrt|lrt-cropped");
    detect->add_option("--order", detect_args.order, "AR order, or 'auto'");
    detect->add_option("--alpha", detect_args.alpha, "Significance level");
    detect->add_option("--crop-lo", detect_args.crop_lo, "Lower crop fraction (lrt-cropped)");
    detect->add_option("--crop-hi", detect_args.crop_hi, "Upper crop fraction (lrt-cropped)");
    detect->add_flag("--refit", detect_args.refit, "Re-estimate AR coefficients per split (LRT)");
    detect->add_option("--curve-out", detect_args.curve_out, "Write the CUSUM curve as CSV");

    SegmentArgs segment_args;
    auto* segment = app.add_subcommand("segment", "Estimate a multiple-changepoint configuration");
    segment->add_option("--input", segment_args.input, "Series file")->required();
    segment->add_option("--method", segment_args.method, "bs|wbs|ga")->required();
    segment->add_option("--criterion", segment_args.criterion, "aic|bic|mbic|mdl (ga)");
    segment->add_option("--order", segment_args.order, "AR order, or 'auto'");
    segment->add_option("--alpha", segment_args.alpha, "Per-segment test level (bs)");
    segment->add_option("--seed", segment_args.seed, "Seed for randomized searches");
    segment->add_option("--min-spacing", segment_args.min_spacing, "Minimum segment length");
    segment->add_option("--wbs-constant", segment_args.wbs_constant, "WBS threshold constant");
    segment->add_option("--wbs-intervals", segment_args.wbs_intervals, "WBS interval count");
    segment->add_option("--ga-config", segment_args.ga_config, "GA parameters (JSON file)");
    segment->add_option("--ga-log", segment_args.ga_log, "Write per-generation objective CSV");

    DistanceArgs distance_args;
    auto* distance = app.add_subcommand("distance", "Distance between two configurations");
    distance->add_option("--a", distance_args.a, "First changepoint list, e.g. 100,250")->required();
    distance->add_option("--b", distance_args.b, "Second changepoint list")->required();
    distance->add_option("--n", distance_args.n, "Series length")->required();

    SimulateArgs simulate_args;
    auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo experiment");
    simulate->add_option("--config", simulate_args.config, "Scenario config (JSON file)")->required();
    simulate->add_option("--out-csv", simulate_args.out_csv, "Write per-replicate tidy CSV");
    simulate->add_option("--jobs", simulate_args.jobs, "Parallel replicates");

    CritvalsArgs critvals_args;
    auto* critvals = app.add_subcommand("critvals", "Critical values of the null limit laws");
    critvals->add_option("--law", critvals_args.law, "supbridge|intsqbridge|cropped|gumbel")
        ->required();
    critvals->add_option("--alpha", critvals_args.alpha, "Single probability level");
    critvals->add_option("--paths", critvals_args.paths, "Monte Carlo paths");
    critvals->add_option("--grid", critvals_args.grid, "Bridge grid size");
    critvals->add_option("--seed", critvals_args.seed, "Monte Carlo seed");
    critvals->add_option("--crop-lo", critvals_args.crop_lo, "Lower crop fraction");
    critvals->add_option("--crop-hi", critvals_args.crop_hi, "Upper crop fraction");
    critvals->add_option("--cache-dir", critvals_args.cache_dir,
                         "Cache directory (default: CPDETECT_CACHE_DIR)");
    critvals->add_option("--jobs", critvals_args.jobs, "Simulation threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitParams;
    }

    try {
        if (detect->parsed()) return cmd_detect(detect_args);
        if (segment->parsed()) return cmd_segment(segment_args);
        if (distance->parsed()) return cmd_distance(distance_args);
        if (simulate->parsed()) return cmd_simulate(simulate_args);
        if (critvals->parsed()) return cmd_critvals(critvals_args);
    } catch (const cpd::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParams;
    } catch (const cpd::numeric_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitParams;
}
