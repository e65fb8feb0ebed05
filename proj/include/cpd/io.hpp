#pragma once

#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpd/amoc.hpp"
#include "cpd/harness.hpp"
#include "cpd/types.hpp"

namespace cpd {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Series ingestion: single numeric CSV column (header optional) or a JSON
// array of numbers. Exporters mirror both formats.
// ---------------------------------------------------------------------------

namespace detail {

inline bool parse_double(const std::string& field, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(field, &pos);
        while (pos < field.size() && std::isspace(static_cast<unsigned char>(field[pos]))) ++pos;
        return pos == field.size();
    } catch (const std::exception&) {
        return false;
    }
}

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

} // namespace detail

inline TimeSeries parse_series_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw io_error(std::string("series JSON: ") + e.what());
    }
    if (!j.is_array()) throw io_error("series JSON: expected an array of numbers");
    std::vector<double> values;
    values.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) throw io_error("series JSON: non-numeric entry");
        values.push_back(v.get<double>());
    }
    try {
        return TimeSeries(std::move(values));
    } catch (const std::exception& e) {
        throw io_error(std::string("series JSON: ") + e.what());
    }
}

inline TimeSeries parse_series_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<double> values;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string field = detail::trim(line);
        if (field.empty()) continue;
        double v = 0.0;
        if (!detail::parse_double(field, v)) {
            if (line_no == 1 && values.empty()) continue; // header
            std::ostringstream os;
            os << "series CSV: unparsable value on line " << line_no << ": '" << field << "'";
            throw io_error(os.str());
        }
        values.push_back(v);
    }
    if (values.empty()) throw io_error("series CSV: no numeric values found");
    try {
        return TimeSeries(std::move(values));
    } catch (const std::exception& e) {
        throw io_error(std::string("series CSV: ") + e.what());
    }
}

inline TimeSeries read_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open input file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const std::string head = detail::trim(text.substr(0, 64));
    if (!head.empty() && head.front() == '[') return parse_series_json(text);
    return parse_series_csv(text);
}

inline void write_series_csv(const std::string& path, const TimeSeries& x) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open output file: " + path);
    out << "value\n";
    out.precision(17);
    for (double v : x.values) out << v << "\n";
}

inline void write_series_json(const std::string& path, const TimeSeries& x) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open output file: " + path);
    out << json(x.values).dump() << "\n";
}

// ---------------------------------------------------------------------------
// Result serialization
// ---------------------------------------------------------------------------

inline json to_json(const ChangepointConfig& c) {
    return json{{"m", c.count()}, {"taus", c.taus}};
}

inline json to_json(const ArModel& m) {
    return json{{"order", m.order()},
                {"phi", m.phi()},
                {"sigma2", m.sigma2()},
                {"long_run_variance", m.long_run_variance()}};
}

inline json to_json(const AmocResult& r) {
    json j{{"method", amoc_method_name(r.method)},
           {"statistic", r.statistic},
           {"scaled_statistic", r.scaled_statistic},
           {"location", r.location},
           {"critical_value", r.critical_value},
           {"reject", r.reject},
           {"alpha", r.alpha},
           {"order", r.order_used}};
    if (r.p_value) {
        j["p_value"] = *r.p_value;
    } else {
        j["p_value"] = nullptr;
    }
    return j;
}

inline json to_json(const MethodSummary& s) {
    return json{{"method", s.method},
                {"replicates", s.replicates},
                {"errors", s.errors},
                {"rejection_rate", s.rejection_rate},
                {"mean_m_hat", s.mean_m_hat},
                {"prob_correct_m", s.prob_correct_m},
                {"mean_distance", s.mean_distance},
                {"distance_se", s.distance_se},
                {"mean_runtime_ms", s.mean_runtime_ms}};
}

inline json summary_to_json(const ExperimentResult& r) {
    json methods = json::array();
    for (const auto& s : r.summary) methods.push_back(to_json(s));
    return json{{"scenario", r.spec.name},
                {"n", r.spec.n},
                {"replications", r.spec.replications},
                {"seed", r.spec.seed},
                {"noise", to_json(r.spec.noise)},
                {"methods", methods}};
}

/// Tidy CSV: one row per replicate per method.
inline void write_experiment_csv(std::ostream& out, const ExperimentResult& r) {
    out << "replicate,method,error,m_true,m_hat,reject,distance,runtime_ms,changepoints\n";
    out.precision(12);
    for (const ReplicateRecord& rec : r.records) {
        out << rec.replicate << ',' << rec.method << ',' << (rec.failed ? 1 : 0) << ','
            << rec.m_true << ',' << rec.detected.count() << ',' << (rec.reject ? 1 : 0) << ','
            << rec.distance << ',' << rec.runtime_ms << ',';
        for (std::size_t i = 0; i < rec.detected.taus.size(); ++i) {
            if (i) out << ';';
            out << rec.detected.taus[i];
        }
        out << '\n';
    }
}

inline void write_experiment_csv(const std::string& path, const ExperimentResult& r) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open output file: " + path);
    write_experiment_csv(out, r);
}

inline void write_ga_log_csv(const std::string& path, const GaResult& r) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open output file: " + path);
    out << "generation,best_objective\n";
    out.precision(17);
    for (std::size_t g = 0; g < r.best_by_generation.size(); ++g) {
        out << g << ',' << r.best_by_generation[g] << '\n';
    }
}

// ---------------------------------------------------------------------------
// Config files
// ---------------------------------------------------------------------------

inline GaParams ga_params_from_json(const json& j) {
    GaParams ga;
    ga.population = j.value("population", ga.population);
    ga.max_generations = j.value("max_generations", ga.max_generations);
    ga.stagnation_limit = j.value("stagnation_limit", ga.stagnation_limit);
    ga.mutation_rate = j.value("mutation_rate", ga.mutation_rate);
    ga.crossover_rate = j.value("crossover_rate", ga.crossover_rate);
    ga.elite_count = j.value("elite_count", ga.elite_count);
    ga.min_spacing = j.value("min_spacing", ga.min_spacing);
    ga.seed = j.value("seed", ga.seed);
    return ga;
}

inline MethodSpec method_spec_from_json(const json& j) {
    MethodSpec m;
    const std::string name = j.at("method").get<std::string>();
    if (name == "cusumx") m.kind = MethodSpec::Kind::CusumX;
    else if (name == "cusumz") m.kind = MethodSpec::Kind::CusumZ;
    else if (name == "scusumx") m.kind = MethodSpec::Kind::ScusumX;
    else if (name == "scusumz") m.kind = MethodSpec::Kind::ScusumZ;
    else if (name == "lrt") m.kind = MethodSpec::Kind::LrtGumbel;
    else if (name == "lrt-cropped") m.kind = MethodSpec::Kind::LrtCropped;
    else if (name == "bs") m.kind = MethodSpec::Kind::BinarySegmentation;
    else if (name == "wbs") m.kind = MethodSpec::Kind::Wbs;
    else if (name == "ga") m.kind = MethodSpec::Kind::GaPenalized;
    else throw io_error("scenario config: unknown method '" + name + "'");

    m.alpha = j.value("alpha", m.alpha);
    m.seg.alpha = j.value("alpha", m.seg.alpha);
    if (j.contains("criterion")) m.criterion = criterion_from_name(j.at("criterion").get<std::string>());
    if (j.contains("order")) m.order = j.at("order").get<int>();
    m.crop_lo = j.value("crop_lo", m.crop_lo);
    m.crop_hi = j.value("crop_hi", m.crop_hi);
    if (j.contains("min_segment_length")) {
        m.seg.min_segment_length = j.at("min_segment_length").get<int>();
    }
    m.seg.wbs_constant = j.value("wbs_constant", m.seg.wbs_constant);
    m.seg.wbs_intervals = j.value("wbs_intervals", m.seg.wbs_intervals);
    if (j.contains("ga")) m.ga = ga_params_from_json(j.at("ga"));
    m.label = j.value("label", std::string{});
    return m;
}

struct SimulationConfig {
    ScenarioSpec scenario;
    std::vector<MethodSpec> methods;
};

inline SimulationConfig simulation_config_from_json(const json& j) {
    SimulationConfig cfg;
    try {
        const std::string name = j.value("scenario", std::string("custom"));
        const int n = j.value("n", 500);
        const double sigma2 = j.value("sigma2", 1.0);
        std::vector<double> phi;
        if (j.contains("phi")) phi = j.at("phi").get<std::vector<double>>();
        if (name == "custom") {
            cfg.scenario.name = name;
            cfg.scenario.noise = ArModel(phi, sigma2);
            cfg.scenario.n = n;
            std::vector<int> taus;
            std::vector<double> mus{0.0};
            if (j.contains("taus")) taus = j.at("taus").get<std::vector<int>>();
            if (j.contains("mus")) mus = j.at("mus").get<std::vector<double>>();
            cfg.scenario.truth = StepMeanFunction(ChangepointConfig(std::move(taus)), std::move(mus));
        } else {
            cfg.scenario = builtin_scenario(name, phi, j.value("delta", 1.0), sigma2, n);
        }
        cfg.scenario.replications = j.value("replications", 200);
        cfg.scenario.seed = j.value("seed", std::uint64_t{1});
        for (const auto& mj : j.at("methods")) cfg.methods.push_back(method_spec_from_json(mj));
    } catch (const json::exception& e) {
        throw io_error(std::string("scenario config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw io_error(std::string("scenario config: ") + e.what());
    }
    return cfg;
}

inline SimulationConfig read_simulation_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open scenario config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw io_error(std::string("scenario config: ") + e.what());
    }
    return simulation_config_from_json(j);
}

} // namespace cpd
