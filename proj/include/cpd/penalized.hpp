#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpd/estimate.hpp"
#include "cpd/rng.hpp"
#include "cpd/types.hpp"

namespace cpd {

enum class Criterion { AIC, BIC, MBIC, MDL };

inline std::string criterion_name(Criterion c) {
    switch (c) {
        case Criterion::AIC: return "aic";
        case Criterion::BIC: return "bic";
        case Criterion::MBIC: return "mbic";
        case Criterion::MDL: return "mdl";
    }
    return "?";
}

inline Criterion criterion_from_name(const std::string& s) {
    if (s == "aic") return Criterion::AIC;
    if (s == "bic") return Criterion::BIC;
    if (s == "mbic") return Criterion::MBIC;
    if (s == "mdl") return Criterion::MDL;
    throw std::invalid_argument("unknown criterion: " + s);
}

/// Penalty term of the model-selection objective (everything except the
/// sigma^2 cost):
///   AIC   2 (2m + 3)
///   BIC   (2m + 2) ln N
///   mBIC  (3/2) m ln N + (1/2) sum_i ln((tau_i - tau_{i-1}) / N)
///   MDL   ln m + (1/2) sum_i ln(tau_i - tau_{i-1}) + sum_{i=2..m} ln tau_i
/// mBIC and MDL are zero when m = 0. mBIC can be negative for very uneven
/// segmentations; the logs of fractional segment lengths are negative.
inline double penalty(Criterion criterion, const ChangepointConfig& config, int n) {
    config.require_valid_for(n);
    const int m = config.count();
    for (int i = 0; i <= m; ++i) {
        if (config.regime_length(i, n) < 1) throw std::invalid_argument("penalty: empty regime");
    }
    const double logn = std::log(static_cast<double>(n));
    switch (criterion) {
        case Criterion::AIC:
            return 2.0 * (2.0 * m + 3.0);
        case Criterion::BIC:
            return (2.0 * m + 2.0) * logn;
        case Criterion::MBIC: {
            if (m == 0) return 0.0;
            double s = 0.0;
            for (int i = 0; i <= m; ++i) {
                s += std::log(static_cast<double>(config.regime_length(i, n)) /
                              static_cast<double>(n));
            }
            return 1.5 * m * logn + 0.5 * s;
        }
        case Criterion::MDL: {
            if (m == 0) return 0.0;
            double s = std::log(static_cast<double>(m));
            for (int i = 0; i <= m; ++i) {
                s += 0.5 * std::log(static_cast<double>(config.regime_length(i, n)));
            }
            for (int i = 2; i <= m; ++i) {
                s += std::log(static_cast<double>(config.taus[static_cast<std::size_t>(i - 1)]));
            }
            return s;
        }
    }
    return 0.0;
}

/// Cost term: N ln sigma^2 for AIC/BIC, (N/2) ln sigma^2 for mBIC/MDL, with
/// sigma^2 the mean squared one-step residual under the configuration
/// (segment means subtracted, global AR coefficients fixed).
inline double objective_cost(Criterion criterion, double sigma2, int n) {
    const double scale = (criterion == Criterion::AIC || criterion == Criterion::BIC)
                             ? static_cast<double>(n)
                             : 0.5 * static_cast<double>(n);
    return scale * std::log(sigma2);
}

inline double objective(const TimeSeries& x, const ChangepointConfig& config, Criterion criterion,
                        const ArModel& model) {
    const int n = x.size();
    // a perfect fit is legal input (constant segments); floor the variance so
    // the log stays finite and ties fall to the penalty term
    const double s2 = std::max(config_residual_variance(x, config, model), 1e-300);
    return objective_cost(criterion, s2, n) + penalty(criterion, config, n);
}

namespace detail {

struct BestConfig {
    bool have = false;
    double value = 0.0;
    std::vector<int> taus;

    /// Ties prefer fewer changepoints, then the lexicographically smallest
    /// time vector.
    void offer(double v, const std::vector<int>& t) {
        if (!have || v < value ||
            (v == value && (t.size() < taus.size() || (t.size() == taus.size() && t < taus)))) {
            have = true;
            value = v;
            taus = t;
        }
    }
};

inline void exhaustive_recurse(const TimeSeries& x, Criterion criterion, const ArModel& model,
                               int min_spacing, std::vector<int>& current, int next_min,
                               BestConfig& best) {
    const int n = x.size();
    ChangepointConfig config{std::vector<int>(current)};
    best.offer(objective(x, config, criterion, model), current);
    for (int t = next_min; t <= n - min_spacing; ++t) {
        current.push_back(t);
        exhaustive_recurse(x, criterion, model, min_spacing, current, t + min_spacing, best);
        current.pop_back();
    }
}

} // namespace detail

/// Global minimizer of the penalized objective over every admissible
/// configuration. Exponential in N; restricted to N <= 22.
inline ChangepointConfig exhaustive_search(const TimeSeries& x, Criterion criterion,
                                           const ArModel& model, int min_spacing) {
    const int n = x.size();
    if (n > 22) throw std::invalid_argument("exhaustive_search: N must be <= 22");
    if (min_spacing < 1) throw std::invalid_argument("exhaustive_search: min_spacing must be >= 1");
    detail::BestConfig best;
    std::vector<int> current;
    detail::exhaustive_recurse(x, criterion, model, min_spacing, current, min_spacing, best);
    return ChangepointConfig(std::move(best.taus));
}

struct GaParams {
    int population = 200;
    int max_generations = 500;
    int stagnation_limit = 50;
    double mutation_rate = 0.0;  // 0 -> 1/N per bit
    double crossover_rate = 0.9;
    int elite_count = 5;
    int min_spacing = 0;         // 0 -> max(5, p + 2)
    std::uint64_t seed = 1;

    void validate() const {
        if (population < 2 || elite_count < 0 || elite_count >= population) {
            throw std::invalid_argument("GaParams: need 0 <= elite_count < population");
        }
        if (mutation_rate < 0.0 || mutation_rate >= 1.0) {
            throw std::invalid_argument("GaParams: mutation_rate must lie in [0, 1)");
        }
        if (crossover_rate < 0.0 || crossover_rate > 1.0) {
            throw std::invalid_argument("GaParams: crossover_rate must lie in [0, 1]");
        }
    }
};

struct GaResult {
    ChangepointConfig config;
    double objective_value = 0.0;
    int generations = 0;
    std::vector<double> best_by_generation;
    ArModel model;
    bool yule_walker_fallback = false;
};

namespace detail {

using Chromosome = std::vector<std::uint8_t>; // bit t-1 set <=> changepoint at time t

inline std::vector<int> decode(const Chromosome& c) {
    std::vector<int> taus;
    for (int t = 1; t <= static_cast<int>(c.size()); ++t) {
        if (c[static_cast<std::size_t>(t - 1)]) taus.push_back(t);
    }
    return taus;
}

/// Enforce spacing directly on the chromosome by dropping the later of two
/// clashing changepoints; the series boundaries act as fixed changepoints.
inline void repair(Chromosome& c, int n, int min_spacing) {
    int prev = 0;
    for (int t = 1; t <= n - 1; ++t) {
        if (!c[static_cast<std::size_t>(t - 1)]) continue;
        if (t - prev < min_spacing || n - t < min_spacing) {
            c[static_cast<std::size_t>(t - 1)] = 0;
        } else {
            prev = t;
        }
    }
}

/// Candidate changepoint times proposed from the data: residuals under the
/// current configuration are scanned greedily for the strongest two-sample
/// mean contrasts, recursing into the split segments. These localize shifts
/// sharply even when no subset of them improves the objective on its own.
inline std::vector<int> contrast_candidates(const TimeSeries& x, const ArModel& model,
                                            const std::vector<int>& taus, int min_spacing,
                                            int want) {
    const int n = x.size();
    const std::vector<double> mus = segment_means(x, ChangepointConfig(std::vector<int>(taus)));
    const ChangepointConfig config{std::vector<int>(taus)};
    const auto& phi = model.phi();
    const int p = model.order();
    std::vector<double> prefix(static_cast<std::size_t>(n) + 1, 0.0);
    for (int t = 1; t <= n; ++t) {
        double v = x.at_time(t) - mus[static_cast<std::size_t>(config.regime_of(t))];
        for (int j = 1; j <= p && t - j >= 1; ++j) {
            v -= phi[static_cast<std::size_t>(j - 1)] *
                 (x.at_time(t - j) - mus[static_cast<std::size_t>(config.regime_of(t - j))]);
        }
        prefix[static_cast<std::size_t>(t)] = prefix[static_cast<std::size_t>(t - 1)] + v;
    }

    std::vector<int> cuts = taus; // segment boundaries, grown greedily
    std::vector<int> found;
    while (static_cast<int>(found.size()) < want) {
        double best_contrast = -1.0;
        int best_t = 0;
        int lo = 1;
        std::vector<int> bounds = cuts;
        bounds.push_back(n);
        std::sort(bounds.begin(), bounds.end());
        for (int hi : bounds) {
            const double len = static_cast<double>(hi - lo + 1);
            if (len >= 2 * min_spacing) {
                const double total =
                    prefix[static_cast<std::size_t>(hi)] - prefix[static_cast<std::size_t>(lo - 1)];
                for (int t = lo + min_spacing - 1; t <= hi - min_spacing; ++t) {
                    const double nl = static_cast<double>(t - lo + 1);
                    const double nr = len - nl;
                    const double sl = prefix[static_cast<std::size_t>(t)] -
                                      prefix[static_cast<std::size_t>(lo - 1)];
                    const double c =
                        std::abs(std::sqrt(nl * nr / len) * (sl / nl - (total - sl) / nr));
                    if (c > best_contrast) {
                        best_contrast = c;
                        best_t = t;
                    }
                }
            }
            lo = hi + 1;
        }
        if (best_t == 0) break;
        found.push_back(best_t);
        cuts.push_back(best_t);
        std::sort(cuts.begin(), cuts.end());
    }
    return found;
}

/// Deterministic local search on a configuration: best single-changepoint
/// move, addition, or removal per sweep, iterated to a fixpoint. Bit-flip
/// mutation explores additions and removals well but almost never produces
/// the coordinated off/on pair that shifts an existing changepoint, so the
/// evolutionary loop alone leaves positions coarse.
inline void polish_config(const TimeSeries& x, Criterion criterion, const ArModel& model,
                          int min_spacing, std::vector<int>& taus, double& best) {
    const int n = x.size();
    const auto value = [&](const std::vector<int>& t) {
        return objective(x, ChangepointConfig(std::vector<int>(t)), criterion, model);
    };
    for (int sweep = 0; sweep < 30; ++sweep) {
        double best_candidate = best;
        std::vector<int> winner;
        bool found = false;

        // move one changepoint anywhere between its neighbours
        for (std::size_t i = 0; i < taus.size(); ++i) {
            const int lo = (i == 0 ? 0 : taus[i - 1]) + min_spacing;
            const int hi = (i + 1 == taus.size() ? n : taus[i + 1]) - min_spacing;
            std::vector<int> cand = taus;
            for (int t = lo; t <= hi; ++t) {
                if (t == taus[i]) continue;
                cand[i] = t;
                const double v = value(cand);
                if (v < best_candidate - 1e-12) {
                    best_candidate = v;
                    winner = cand;
                    found = true;
                }
            }
        }
        // drop one changepoint
        for (std::size_t i = 0; i < taus.size(); ++i) {
            std::vector<int> cand = taus;
            cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(i));
            const double v = value(cand);
            if (v < best_candidate - 1e-12) {
                best_candidate = v;
                winner = cand;
                found = true;
            }
        }
        // insert one changepoint at any feasible time
        {
            std::vector<int> cand = taus;
            for (int t = min_spacing; t <= n - min_spacing; ++t) {
                bool feasible = true;
                for (int u : taus) {
                    if (std::abs(u - t) < min_spacing) {
                        feasible = false;
                        break;
                    }
                }
                if (!feasible) continue;
                cand = taus;
                cand.insert(std::upper_bound(cand.begin(), cand.end(), t), t);
                const double v = value(cand);
                if (v < best_candidate - 1e-12) {
                    best_candidate = v;
                    winner = cand;
                    found = true;
                }
            }
        }

        if (!found) {
            // Alternating shift patterns can make every single addition (and
            // every pair) lose to the incumbent while the full set of shifts
            // wins, so the escape proposes contrast-based candidate times and
            // tries their subsets jointly; only objective improvements are kept.
            const std::vector<int> cand_times =
                contrast_candidates(x, model, taus, min_spacing, 6);
            const std::size_t k = cand_times.size();
            for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
                std::vector<int> cand = taus;
                bool feasible = true;
                for (std::size_t i = 0; i < k && feasible; ++i) {
                    if (!(mask & (1u << i))) continue;
                    const int t = cand_times[i];
                    for (int u : cand) {
                        if (std::abs(u - t) < min_spacing) {
                            feasible = false;
                            break;
                        }
                    }
                    if (feasible) cand.insert(std::upper_bound(cand.begin(), cand.end(), t), t);
                }
                if (!feasible) continue;
                const double v = value(cand);
                if (v < best_candidate - 1e-12) {
                    best_candidate = v;
                    winner = cand;
                    found = true;
                }
            }
            if (!found) break;
        }
        taus = std::move(winner);
        best = best_candidate;
    }
}

} // namespace detail

/// Genetic-algorithm minimization of the penalized objective. Configurations
/// are binary strings over times 1..N-1; evolution uses elitism, tournament
/// selection, uniform crossover, and per-bit mutation, with spacing repairs
/// applied to every offspring. The returned configuration is additionally a
/// fixpoint of single move/add/drop local steps. Deterministic in ga.seed.
inline GaResult ga_search(const TimeSeries& x, Criterion criterion, const GaParams& ga_in, int p) {
    GaParams ga = ga_in;
    ga.validate();
    const int n = x.size();
    const int min_spacing = ga.min_spacing > 0 ? ga.min_spacing : std::max(5, p + 2);
    if (n <= 2 * min_spacing) throw std::invalid_argument("ga_search: series too short for spacing");
    const double mutation =
        ga.mutation_rate > 0.0 ? ga.mutation_rate : 1.0 / static_cast<double>(n);

    const ArFit fit = fit_ar_differenced(x, p);
    const ArModel& model = fit.model;

    const int bits = n - 1;
    GaussianSampler rng(ga.seed);

    const auto evaluate = [&](const detail::Chromosome& c) {
        return objective(x, ChangepointConfig(detail::decode(c)), criterion, model);
    };

    struct Individual {
        detail::Chromosome genes;
        double fitness = 0.0;
    };

    std::vector<Individual> pop(static_cast<std::size_t>(ga.population));
    for (int i = 0; i < ga.population; ++i) {
        detail::Chromosome c(static_cast<std::size_t>(bits), 0);
        if (i >= ga.population / 2) {
            // sparse random configurations, about 3 changepoints on average
            const double rate = 3.0 / static_cast<double>(n);
            for (int b = 0; b < bits; ++b) {
                if (rng.uniform01() < rate) c[static_cast<std::size_t>(b)] = 1;
            }
            detail::repair(c, n, min_spacing);
        }
        pop[static_cast<std::size_t>(i)].genes = std::move(c);
        pop[static_cast<std::size_t>(i)].fitness = evaluate(pop[static_cast<std::size_t>(i)].genes);
    }

    const auto by_fitness = [](const Individual& a, const Individual& b) {
        return a.fitness < b.fitness;
    };
    std::sort(pop.begin(), pop.end(), by_fitness);

    GaResult out;
    out.model = model;
    out.yule_walker_fallback = fit.yule_walker_fallback;
    out.best_by_generation.push_back(pop.front().fitness);

    const auto tournament = [&]() -> const Individual& {
        const Individual* best = nullptr;
        for (int i = 0; i < 3; ++i) {
            const Individual& cand =
                pop[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(ga.population)))];
            if (best == nullptr || cand.fitness < best->fitness) best = &cand;
        }
        return *best;
    };

    int stagnant = 0;
    int gen = 0;
    for (gen = 1; gen <= ga.max_generations && stagnant < ga.stagnation_limit; ++gen) {
        std::vector<Individual> next;
        next.reserve(static_cast<std::size_t>(ga.population));
        for (int e = 0; e < ga.elite_count; ++e) next.push_back(pop[static_cast<std::size_t>(e)]);
        while (static_cast<int>(next.size()) < ga.population) {
            const Individual& pa = tournament();
            const Individual& pb = tournament();
            detail::Chromosome child = pa.genes;
            if (rng.uniform01() < ga.crossover_rate) {
                for (int b = 0; b < bits; ++b) {
                    if (rng.uniform01() < 0.5) {
                        child[static_cast<std::size_t>(b)] = pb.genes[static_cast<std::size_t>(b)];
                    }
                }
            }
            for (int b = 0; b < bits; ++b) {
                if (rng.uniform01() < mutation) {
                    child[static_cast<std::size_t>(b)] ^= 1;
                }
            }
            detail::repair(child, n, min_spacing);
            Individual kid;
            kid.fitness = evaluate(child);
            kid.genes = std::move(child);
            next.push_back(std::move(kid));
        }
        std::sort(next.begin(), next.end(), by_fitness);
        const double prev_best = pop.front().fitness;
        pop = std::move(next);
        stagnant = (pop.front().fitness < prev_best - 1e-12) ? 0 : stagnant + 1;
        out.best_by_generation.push_back(pop.front().fitness);
    }

    std::vector<int> best_taus = detail::decode(pop.front().genes);
    double best_value = pop.front().fitness;
    detail::polish_config(x, criterion, model, min_spacing, best_taus, best_value);
    out.best_by_generation.push_back(best_value);

    out.config = ChangepointConfig(std::move(best_taus));
    out.objective_value = best_value;
    out.generations = gen - 1;
    return out;
}

} // namespace cpd
