#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpd/parallel.hpp"
#include "cpd/rng.hpp"
#include "cpd/types.hpp"

namespace cpd {

// ---------------------------------------------------------------------------
// Analytic laws
// ---------------------------------------------------------------------------

/// CDF of sup_{[0,1]} |B(t)| for a standard Brownian bridge (Kolmogorov law),
///   K(x) = 1 - 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2),
/// with terms dropped once below 1e-12. For small x the equivalent theta
/// series is used; the alternating form cancels catastrophically there.
inline double sup_bridge_cdf(double x) {
    if (!(x >= 0.0)) throw std::invalid_argument("sup_bridge_cdf: x must be nonnegative");
    if (x < 1e-8) return 0.0;
    if (x < 1.0) {
        // K(x) = sqrt(2 pi)/x * sum_{k>=1} exp(-(2k-1)^2 pi^2 / (8 x^2))
        const double a = 9.869604401089358 / (8.0 * x * x); // pi^2 / (8 x^2)
        double s = 0.0;
        for (int k = 1; k < 64; ++k) {
            const double odd = static_cast<double>(2 * k - 1);
            const double term = std::exp(-odd * odd * a);
            s += term;
            if (term < 1e-12 * (s + 1e-300)) break;
        }
        return std::min(1.0, 2.5066282746310002 / x * s);
    }
    double s = 0.0;
    double sign = 1.0;
    for (int k = 1; k < 256; ++k) {
        const double term = std::exp(-2.0 * static_cast<double>(k) * static_cast<double>(k) * x * x);
        s += sign * term;
        sign = -sign;
        if (term < 1e-12) break;
    }
    return std::clamp(1.0 - 2.0 * s, 0.0, 1.0);
}

/// Quantile of the Kolmogorov law by bisection of sup_bridge_cdf.
inline double sup_bridge_quantile(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("sup_bridge_quantile: level must be in (0, 1)");
    }
    double lo = 0.0, hi = 4.0;
    while (sup_bridge_cdf(hi) < alpha) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        (sup_bridge_cdf(mid) < alpha ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// CDF exp(-2 exp(-x)) of the doubled Gumbel limit.
inline double gumbel_cdf(double x) { return std::exp(-2.0 * std::exp(-x)); }

/// Exact inverse of the doubled Gumbel law: -ln(-ln(alpha)/2).
inline double gumbel_quantile(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("gumbel_quantile: level must be in (0, 1)");
    }
    return -std::log(-std::log(alpha) / 2.0);
}

// ---------------------------------------------------------------------------
// Monte Carlo laws
// ---------------------------------------------------------------------------

enum class LawKind { SupAbsBridge, IntSqBridge, CroppedSupRatio, GumbelDouble };

/// One of the four asymptotic null laws. CroppedSupRatio carries its window.
struct LimitLaw {
    LawKind kind = LawKind::SupAbsBridge;
    double lo = 0.0;
    double hi = 0.0;

    static LimitLaw sup_abs_bridge() { return {LawKind::SupAbsBridge, 0.0, 0.0}; }
    static LimitLaw int_sq_bridge() { return {LawKind::IntSqBridge, 0.0, 0.0}; }
    static LimitLaw cropped_sup_ratio(double lo, double hi) {
        if (!(0.0 < lo && lo < hi && hi < 1.0)) {
            throw std::invalid_argument("cropped_sup_ratio: need 0 < lo < hi < 1");
        }
        return {LawKind::CroppedSupRatio, lo, hi};
    }
    static LimitLaw gumbel_double() { return {LawKind::GumbelDouble, 0.0, 0.0}; }
};

struct McSettings {
    int paths = 200000;
    int grid = 10000;
    std::uint64_t seed = 873251;
    int jobs = 0; // 0 -> hardware concurrency
};

/// Quantile table of one law at one Monte Carlo setting.
struct QuantileTable {
    std::vector<std::pair<double, double>> levels; // (alpha, critical value), alpha ascending
    int paths = 0;
    int grid = 0;
    std::uint64_t seed = 0;

    std::optional<double> lookup(double alpha) const {
        for (const auto& [a, c] : levels) {
            if (std::abs(a - alpha) < 1e-12) return c;
        }
        return std::nullopt;
    }
};

namespace detail {

inline std::string law_key(const LimitLaw& law, int paths, int grid, std::uint64_t seed) {
    std::ostringstream os;
    switch (law.kind) {
        case LawKind::SupAbsBridge: os << "sup_abs_bridge"; break;
        case LawKind::IntSqBridge: os << "int_sq_bridge"; break;
        case LawKind::CroppedSupRatio:
            os << "cropped_sup_ratio[" << law.lo << "," << law.hi << "]";
            break;
        case LawKind::GumbelDouble: os << "gumbel_double"; break;
    }
    os << ":paths=" << paths << ":grid=" << grid << ":seed=" << seed;
    return os.str();
}

/// Functional of one simulated bridge path, evaluated on a uniform grid from
/// partial sums of Gaussian increments: B(t_i) = W(t_i) - t_i W(1).
inline double bridge_functional(const LimitLaw& law, int grid, GaussianSampler& rng,
                                std::vector<double>& w) {
    const double dt = 1.0 / static_cast<double>(grid);
    const double sq = std::sqrt(dt);
    double acc = 0.0;
    for (int i = 0; i < grid; ++i) {
        acc += sq * rng.normal();
        w[static_cast<std::size_t>(i)] = acc;
    }
    const double w1 = w[static_cast<std::size_t>(grid - 1)];

    switch (law.kind) {
        case LawKind::SupAbsBridge: {
            double m = 0.0;
            for (int i = 1; i < grid; ++i) {
                const double b = w[static_cast<std::size_t>(i - 1)] - (static_cast<double>(i) * dt) * w1;
                m = std::max(m, std::abs(b));
            }
            return m;
        }
        case LawKind::IntSqBridge: {
            // trapezoid rule; B(0) = B(1) = 0 so only interior points remain
            double s = 0.0;
            for (int i = 1; i < grid; ++i) {
                const double b = w[static_cast<std::size_t>(i - 1)] - (static_cast<double>(i) * dt) * w1;
                s += b * b;
            }
            return s * dt;
        }
        case LawKind::CroppedSupRatio: {
            double m = 0.0;
            const int first = std::max(1, static_cast<int>(std::ceil(law.lo * grid - 1e-9)));
            const int last = std::min(grid - 1, static_cast<int>(std::floor(law.hi * grid + 1e-9)));
            for (int i = first; i <= last; ++i) {
                const double t = static_cast<double>(i) * dt;
                const double b = w[static_cast<std::size_t>(i - 1)] - t * w1;
                m = std::max(m, b * b / (t * (1.0 - t)));
            }
            return m;
        }
        case LawKind::GumbelDouble:
            throw std::invalid_argument("bridge_functional: Gumbel law is analytic");
    }
    return 0.0;
}

inline std::vector<double> simulate_law_sample(const LimitLaw& law, const McSettings& ms) {
    std::vector<double> values(static_cast<std::size_t>(ms.paths));
    parallel_for_blocks(ms.paths, ms.jobs, [&](int begin, int end) {
        std::vector<double> w(static_cast<std::size_t>(ms.grid));
        for (int path = begin; path < end; ++path) {
            GaussianSampler rng(mix_seed(ms.seed, static_cast<std::uint64_t>(path)));
            values[static_cast<std::size_t>(path)] = bridge_functional(law, ms.grid, rng, w);
        }
    });
    std::sort(values.begin(), values.end());
    return values;
}

/// Linear-interpolation empirical quantile on a sorted sample.
inline double sorted_quantile(const std::vector<double>& sorted, double alpha) {
    const std::size_t n = sorted.size();
    const double h = alpha * static_cast<double>(n - 1);
    const std::size_t i = static_cast<std::size_t>(h);
    if (i + 1 >= n) return sorted.back();
    const double f = h - static_cast<double>(i);
    return sorted[i] * (1.0 - f) + sorted[i + 1] * f;
}

} // namespace detail

/// Process-wide store of tabulated Monte Carlo quantiles. Tables persist to a
/// versioned JSON file when a cache directory is configured (explicitly or
/// via the CPDETECT_CACHE_DIR environment variable); the in-memory sample per
/// key allows arbitrary levels without re-simulation.
class CriticalValueCache {
public:
    static constexpr const char* kFileName = "critical_values_v1.json";

    static CriticalValueCache& instance() {
        static CriticalValueCache cache;
        return cache;
    }

    void set_directory(const std::string& dir) {
        std::lock_guard<std::mutex> lock(mu_);
        dir_ = dir;
        loaded_ = false;
        tables_.clear();
        samples_.clear();
    }

    static std::vector<double> default_levels() {
        return {0.50, 0.75, 0.90, 0.95, 0.975, 0.99};
    }

    /// Quantile of the law at the given probability level, simulating and
    /// caching on first use.
    double quantile(const LimitLaw& law, double alpha, const McSettings& ms) {
        if (!(alpha > 0.0 && alpha < 1.0)) {
            throw std::invalid_argument("quantile: level must be in (0, 1)");
        }
        if (law.kind == LawKind::GumbelDouble) return gumbel_quantile(alpha);
        if (ms.paths < 10000 || ms.grid < 1000) {
            throw std::invalid_argument("quantile: need paths >= 1e4 and grid >= 1e3");
        }
        const std::string key = detail::law_key(law, ms.paths, ms.grid, ms.seed);

        std::lock_guard<std::mutex> lock(mu_);
        load_locked();
        if (auto it = tables_.find(key); it != tables_.end()) {
            if (auto v = it->second.lookup(alpha)) return *v;
            if (auto sit = samples_.find(key); sit != samples_.end()) {
                const double q = detail::sorted_quantile(sit->second, alpha);
                insert_level(it->second, alpha, q);
                save_locked();
                return q;
            }
        }
        const std::vector<double> sample = detail::simulate_law_sample(law, ms);
        QuantileTable table;
        table.paths = ms.paths;
        table.grid = ms.grid;
        table.seed = ms.seed;
        for (double lvl : default_levels()) {
            table.levels.emplace_back(lvl, detail::sorted_quantile(sample, lvl));
        }
        const double q = detail::sorted_quantile(sample, alpha);
        insert_level(table, alpha, q);
        tables_[key] = table;
        samples_[key] = sample;
        save_locked();
        return q;
    }

    QuantileTable table(const LimitLaw& law, const McSettings& ms) {
        quantile(law, 0.95, ms); // ensure tabulated
        std::lock_guard<std::mutex> lock(mu_);
        return tables_.at(detail::law_key(law, ms.paths, ms.grid, ms.seed));
    }

private:
    CriticalValueCache() {
        if (const char* env = std::getenv("CPDETECT_CACHE_DIR")) dir_ = env;
    }

    static void insert_level(QuantileTable& table, double alpha, double value) {
        for (const auto& [a, c] : table.levels) {
            if (std::abs(a - alpha) < 1e-12) return;
        }
        table.levels.emplace_back(alpha, value);
        std::sort(table.levels.begin(), table.levels.end());
    }

    void load_locked() {
        if (loaded_ || dir_.empty()) {
            loaded_ = true;
            return;
        }
        loaded_ = true;
        const std::filesystem::path file = std::filesystem::path(dir_) / kFileName;
        std::ifstream in(file);
        if (!in) return;
        try {
            nlohmann::json j;
            in >> j;
            for (const auto& [key, entry] : j.items()) {
                QuantileTable t;
                t.paths = entry.value("paths", 0);
                t.grid = entry.value("grid", 0);
                t.seed = entry.value("seed", std::uint64_t{0});
                for (const auto& [lvl, crit] : entry.at("quantiles").items()) {
                    t.levels.emplace_back(std::stod(lvl), crit.get<double>());
                }
                std::sort(t.levels.begin(), t.levels.end());
                tables_[key] = std::move(t);
            }
        } catch (const std::exception&) {
            tables_.clear(); // unreadable cache is ignored, not fatal
        }
    }

    void save_locked() const {
        if (dir_.empty()) return;
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        nlohmann::json j;
        for (const auto& [key, t] : tables_) {
            nlohmann::json entry;
            entry["paths"] = t.paths;
            entry["grid"] = t.grid;
            entry["seed"] = t.seed;
            nlohmann::json q;
            for (const auto& [a, c] : t.levels) {
                std::ostringstream lvl;
                lvl << a;
                q[lvl.str()] = c;
            }
            entry["quantiles"] = std::move(q);
            j[key] = std::move(entry);
        }
        std::ofstream out(std::filesystem::path(dir_) / kFileName);
        if (out) out << j.dump(2) << "\n";
    }

    mutable std::mutex mu_;
    std::string dir_;
    bool loaded_ = false;
    std::map<std::string, QuantileTable> tables_;
    std::map<std::string, std::vector<double>> samples_;
};

/// Empirical alpha-quantile of the law's functional over simulated bridges.
inline double mc_quantile(const LimitLaw& law, double alpha, int paths, int grid,
                          std::uint64_t seed, int jobs = 0) {
    McSettings ms{paths, grid, seed, jobs};
    return CriticalValueCache::instance().quantile(law, alpha, ms);
}

/// p-value by linear interpolation in alpha between tabulated levels; values
/// outside the table are clamped to its ends.
inline double table_p_value(const QuantileTable& table, double statistic) {
    if (table.levels.empty()) throw std::invalid_argument("table_p_value: empty table");
    const auto& lv = table.levels;
    if (statistic <= lv.front().second) return 1.0 - lv.front().first;
    if (statistic >= lv.back().second) return 1.0 - lv.back().first;
    for (std::size_t i = 1; i < lv.size(); ++i) {
        if (statistic <= lv[i].second) {
            const double c0 = lv[i - 1].second, c1 = lv[i].second;
            const double a0 = lv[i - 1].first, a1 = lv[i].first;
            const double f = (c1 > c0) ? (statistic - c0) / (c1 - c0) : 0.0;
            return 1.0 - (a0 + f * (a1 - a0));
        }
    }
    return 1.0 - lv.back().first;
}

} // namespace cpd
