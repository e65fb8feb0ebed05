#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cpd/amoc.hpp"
#include "cpd/distance.hpp"
#include "cpd/parallel.hpp"
#include "cpd/penalized.hpp"
#include "cpd/rng.hpp"
#include "cpd/segmentation.hpp"
#include "cpd/simulate.hpp"
#include "cpd/types.hpp"

namespace cpd {

/// Truth with a random number of changepoints: a Poisson count (redrawn while
/// it exceeds (N-1)/min_spacing), locations uniform without replacement, and
/// regime means drawn from a centered Gaussian.
struct RandomTruthSpec {
    double count_mean = 5.0;
    double mean_sd = 1.5;
    int min_spacing = 5;
};

struct ScenarioSpec {
    std::string name = "custom";
    ArModel noise;
    int n = 500;
    std::variant<StepMeanFunction, RandomTruthSpec> truth = StepMeanFunction::constant(0.0);
    int replications = 200;
    std::uint64_t seed = 1;
};

/// Equally spaced changepoint times tau_i = i*n/(m+1) + 1, the convention
/// used by all built-in step scenarios (251 at n=500, m=1; 126/251/376 at
/// m=3).
inline std::vector<int> equally_spaced_times(int n, int m) {
    std::vector<int> taus(static_cast<std::size_t>(m));
    for (int i = 1; i <= m; ++i) {
        taus[static_cast<std::size_t>(i - 1)] = i * n / (m + 1) + 1;
    }
    return taus;
}

namespace detail {

inline StepMeanFunction staircase_truth(int n, int m, double delta) {
    std::vector<double> mus(static_cast<std::size_t>(m) + 1);
    for (int i = 0; i <= m; ++i) mus[static_cast<std::size_t>(i)] = delta * i;
    return StepMeanFunction(ChangepointConfig(equally_spaced_times(n, m)), std::move(mus));
}

inline StepMeanFunction alternating_truth(int n, int m, double delta) {
    std::vector<double> mus(static_cast<std::size_t>(m) + 1);
    for (int i = 0; i <= m; ++i) mus[static_cast<std::size_t>(i)] = (i % 2 == 0) ? 0.0 : delta;
    return StepMeanFunction(ChangepointConfig(equally_spaced_times(n, m)), std::move(mus));
}

/// Nine unevenly spaced shifts with mixed signs and magnitudes. The shape is
/// a fixed constant of this harness (scaled by delta), not taken from any
/// reference data set.
inline StepMeanFunction keyblade_truth(int n, double delta) {
    const double f = static_cast<double>(n) / 500.0;
    std::vector<int> taus;
    for (int t : {40, 95, 130, 210, 250, 300, 330, 410, 455}) {
        taus.push_back(static_cast<int>(std::lround(t * f)));
    }
    const std::vector<double> base = {0.0, 2.0, 1.0, 4.0, 2.0, 3.5, 0.5, 3.0, 1.5, 3.5};
    std::vector<double> mus;
    for (double b : base) mus.push_back(delta * b);
    return StepMeanFunction(ChangepointConfig(std::move(taus)), std::move(mus));
}

} // namespace detail

/// Named simulation designs. Shift magnitudes scale with delta; sigma^2 and
/// n are free parameters with the usual defaults.
inline ScenarioSpec builtin_scenario(const std::string& name, const std::vector<double>& phi,
                                     double delta, double sigma2 = 1.0, int n = 500) {
    ScenarioSpec spec;
    spec.name = name;
    spec.noise = ArModel(phi, sigma2);
    spec.n = n;
    if (name == "none") {
        spec.truth = StepMeanFunction::constant(0.0);
    } else if (name == "single-middle") {
        spec.truth = detail::staircase_truth(n, 1, delta);
    } else if (name == "staircase-3") {
        spec.truth = detail::staircase_truth(n, 3, delta);
    } else if (name == "alternating-3") {
        spec.truth = detail::alternating_truth(n, 3, delta);
    } else if (name == "staircase-9") {
        spec.truth = detail::staircase_truth(n, 9, delta);
    } else if (name == "alternating-9") {
        spec.truth = detail::alternating_truth(n, 9, delta);
    } else if (name == "keyblade") {
        spec.truth = detail::keyblade_truth(n, delta);
    } else if (name == "random") {
        spec.truth = RandomTruthSpec{};
    } else {
        throw std::invalid_argument("builtin_scenario: unknown scenario '" + name + "'");
    }
    return spec;
}

/// Draw a concrete step mean from a RandomTruthSpec.
inline StepMeanFunction draw_random_truth(const RandomTruthSpec& spec, int n, std::uint64_t seed) {
    GaussianSampler rng(seed);
    const int cap = (n - 1) / std::max(1, spec.min_spacing);
    int m = 0;
    do {
        // Poisson by inversion from a single uniform sequence
        const double limit = std::exp(-spec.count_mean);
        double prod = 1.0;
        m = -1;
        do {
            prod *= rng.uniform01();
            ++m;
        } while (prod > limit);
    } while (m > cap);

    std::vector<int> taus;
    if (m > 0) {
        // uniform without replacement over {2, ..., n-1}
        std::vector<int> pool;
        pool.reserve(static_cast<std::size_t>(n - 2));
        for (int t = 2; t <= n - 1; ++t) pool.push_back(t);
        for (int i = 0; i < m; ++i) {
            const std::size_t j = static_cast<std::size_t>(i) +
                                  static_cast<std::size_t>(rng.below(pool.size() - static_cast<std::size_t>(i)));
            std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
        }
        taus.assign(pool.begin(), pool.begin() + m);
        std::sort(taus.begin(), taus.end());
    }
    std::vector<double> mus(static_cast<std::size_t>(m) + 1);
    for (auto& mu : mus) mu = spec.mean_sd * rng.normal();
    return StepMeanFunction(ChangepointConfig(std::move(taus)), std::move(mus));
}

// ---------------------------------------------------------------------------
// Method descriptors
// ---------------------------------------------------------------------------

struct MethodSpec {
    enum class Kind {
        CusumX,
        CusumZ,
        ScusumX,
        ScusumZ,
        LrtGumbel,
        LrtCropped,
        BinarySegmentation,
        Wbs,
        GaPenalized,
    };

    Kind kind = Kind::ScusumZ;
    double alpha = 0.05;
    Criterion criterion = Criterion::BIC;   // GaPenalized only
    std::optional<int> order;               // default: the scenario's true order
    double crop_lo = 0.05, crop_hi = 0.95;  // LrtCropped only
    SegmentationParams seg;                 // BinarySegmentation / Wbs
    GaParams ga;                            // GaPenalized
    std::string label;                      // defaults to a canonical name

    std::string canonical_label() const {
        if (!label.empty()) return label;
        switch (kind) {
            case Kind::CusumX: return "cusumx";
            case Kind::CusumZ: return "cusumz";
            case Kind::ScusumX: return "scusumx";
            case Kind::ScusumZ: return "scusumz";
            case Kind::LrtGumbel: return "lrt";
            case Kind::LrtCropped: return "lrt-cropped";
            case Kind::BinarySegmentation: return "bs";
            case Kind::Wbs: return "wbs";
            case Kind::GaPenalized: return "ga+" + criterion_name(criterion);
        }
        return "?";
    }
};

struct ReplicateRecord {
    int replicate = 0;
    std::string method;
    bool failed = false;
    std::string error_message;
    int m_true = 0;
    ChangepointConfig detected;
    bool reject = false;
    double distance = 0.0;
    double runtime_ms = 0.0;
};

struct MethodSummary {
    std::string method;
    int replicates = 0; // successful replicates included in the aggregates
    int errors = 0;
    double rejection_rate = 0.0; // P(at least one changepoint flagged)
    double mean_m_hat = 0.0;
    double prob_correct_m = 0.0;
    double mean_distance = 0.0;
    double distance_se = 0.0;
    double mean_runtime_ms = 0.0;
};

struct ExperimentResult {
    ScenarioSpec spec;
    std::vector<std::string> method_labels;
    std::vector<ReplicateRecord> records; // replication-major, method-minor
    std::vector<MethodSummary> summary;
};

namespace detail {

inline ChangepointConfig run_method(const MethodSpec& m, const TimeSeries& x, int true_order,
                                    std::uint64_t seed, bool& reject) {
    const int order = m.order.value_or(true_order);
    const auto as_config = [&](const AmocResult& r) {
        reject = r.reject;
        return r.reject ? ChangepointConfig({r.location}) : ChangepointConfig{};
    };
    switch (m.kind) {
        case MethodSpec::Kind::CusumX: return as_config(cusum_test_x(x, order, m.alpha));
        case MethodSpec::Kind::CusumZ: return as_config(cusum_test_z(x, order, m.alpha));
        case MethodSpec::Kind::ScusumX: return as_config(scusum_x(x, order, m.alpha));
        case MethodSpec::Kind::ScusumZ: return as_config(scusum_z(x, order, m.alpha));
        case MethodSpec::Kind::LrtGumbel: return as_config(lrt_gumbel(x, order, m.alpha));
        case MethodSpec::Kind::LrtCropped:
            return as_config(lrt_cropped(x, order, m.crop_lo, m.crop_hi, m.alpha));
        case MethodSpec::Kind::BinarySegmentation: {
            const ChangepointConfig c = binary_segment(x, order, m.seg);
            reject = !c.empty();
            return c;
        }
        case MethodSpec::Kind::Wbs: {
            SegmentationParams p = m.seg;
            p.seed = seed;
            const ChangepointConfig c = wbs(x, order, p);
            reject = !c.empty();
            return c;
        }
        case MethodSpec::Kind::GaPenalized: {
            GaParams g = m.ga;
            g.seed = seed;
            const ChangepointConfig c = ga_search(x, m.criterion, g, order).config;
            reject = !c.empty();
            return c;
        }
    }
    throw std::logic_error("run_method: unhandled method kind");
}

} // namespace detail

/// Aggregate the per-replicate records; failed replicates are excluded from
/// every average and reported through the error count.
inline std::vector<MethodSummary> summarize(const ExperimentResult& result) {
    std::vector<MethodSummary> out;
    for (const std::string& label : result.method_labels) {
        MethodSummary s;
        s.method = label;
        double sum_d = 0.0, sum_d2 = 0.0, sum_m = 0.0, sum_rt = 0.0;
        int rejects = 0, correct = 0;
        for (const ReplicateRecord& r : result.records) {
            if (r.method != label) continue;
            if (r.failed) {
                ++s.errors;
                continue;
            }
            ++s.replicates;
            sum_d += r.distance;
            sum_d2 += r.distance * r.distance;
            sum_m += r.detected.count();
            sum_rt += r.runtime_ms;
            if (r.reject) ++rejects;
            if (r.detected.count() == r.m_true) ++correct;
        }
        if (s.replicates > 0) {
            const double n = static_cast<double>(s.replicates);
            s.rejection_rate = static_cast<double>(rejects) / n;
            s.mean_m_hat = sum_m / n;
            s.prob_correct_m = static_cast<double>(correct) / n;
            s.mean_distance = sum_d / n;
            const double var = std::max(0.0, sum_d2 / n - s.mean_distance * s.mean_distance);
            s.distance_se = s.replicates > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
            s.mean_runtime_ms = sum_rt / n;
        }
        out.push_back(std::move(s));
    }
    return out;
}

/// Run every method on the same simulated realization, replication by
/// replication. Replicate seeds derive deterministically from the scenario
/// seed, and method substreams from the replicate seed, so the result is
/// identical for every parallelism degree.
inline ExperimentResult run_experiment(const ScenarioSpec& spec,
                                       const std::vector<MethodSpec>& methods, int jobs = 1) {
    if (methods.empty()) throw std::invalid_argument("run_experiment: no methods given");
    if (spec.replications < 1) throw std::invalid_argument("run_experiment: need replications >= 1");
    if (const auto* fixed = std::get_if<StepMeanFunction>(&spec.truth)) {
        fixed->config.require_valid_for(spec.n);
    }

    ExperimentResult result;
    result.spec = spec;
    for (const MethodSpec& m : methods) result.method_labels.push_back(m.canonical_label());

    const int reps = spec.replications;
    const int n_methods = static_cast<int>(methods.size());
    result.records.assign(static_cast<std::size_t>(reps) * static_cast<std::size_t>(n_methods), {});

    parallel_for_blocks(reps, jobs, [&](int begin, int end) {
        for (int r = begin; r < end; ++r) {
            const std::uint64_t rep_seed = mix_seed(spec.seed, static_cast<std::uint64_t>(r));
            StepMeanFunction truth;
            if (const auto* fixed = std::get_if<StepMeanFunction>(&spec.truth)) {
                truth = *fixed;
            } else {
                truth = draw_random_truth(std::get<RandomTruthSpec>(spec.truth), spec.n,
                                          mix_seed(rep_seed, 0x7275746873ULL));
            }
            const TimeSeries x = simulate_ar(spec.noise, truth, spec.n, rep_seed);

            for (int mi = 0; mi < n_methods; ++mi) {
                ReplicateRecord rec;
                rec.replicate = r;
                rec.method = result.method_labels[static_cast<std::size_t>(mi)];
                rec.m_true = truth.config.count();
                const auto t0 = std::chrono::steady_clock::now();
                try {
                    bool reject = false;
                    rec.detected = detail::run_method(
                        methods[static_cast<std::size_t>(mi)], x, spec.noise.order(),
                        mix_seed(rep_seed, static_cast<std::uint64_t>(mi) + 1), reject);
                    rec.reject = reject;
                    rec.distance = config_distance(truth.config, rec.detected, spec.n);
                } catch (const std::exception& e) {
                    rec.failed = true;
                    rec.error_message = e.what();
                }
                rec.runtime_ms = std::chrono::duration<double, std::milli>(
                                     std::chrono::steady_clock::now() - t0)
                                     .count();
                result.records[static_cast<std::size_t>(r) * static_cast<std::size_t>(n_methods) +
                               static_cast<std::size_t>(mi)] = std::move(rec);
            }
        }
    });

    result.summary = summarize(result);
    return result;
}

} // namespace cpd
