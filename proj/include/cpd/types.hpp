#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpd {

inline constexpr const char* kVersion = "0.1.0";

/// Error classes the CLI maps to distinct exit codes.
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Ordered sequence of real observations, indexed 1..N in the statistical
/// conventions used throughout (values[t-1] is X_t).
struct TimeSeries {
    std::vector<double> values;

    TimeSeries() = default;
    explicit TimeSeries(std::vector<double> v) : values(std::move(v)) {
        for (double x : values) {
            if (!std::isfinite(x)) {
                throw std::invalid_argument("TimeSeries: non-finite value");
            }
        }
    }

    int size() const { return static_cast<int>(values.size()); }
    bool empty() const { return values.empty(); }

    /// 1-based accessor matching the X_t notation.
    double at_time(int t) const { return values[static_cast<std::size_t>(t) - 1]; }
};

/// A multiple-changepoint configuration: strictly increasing times
/// tau_1 < ... < tau_m, each in {1, ..., N-1}. Time tau_i is the last index
/// of regime i; consumers apply the boundary conventions tau_0 = 0 and
/// tau_{m+1} = N. Time N itself cannot be a changepoint.
struct ChangepointConfig {
    std::vector<int> taus;

    ChangepointConfig() = default;
    explicit ChangepointConfig(std::vector<int> t) : taus(std::move(t)) {
        for (std::size_t i = 0; i < taus.size(); ++i) {
            if (taus[i] < 1) {
                throw std::invalid_argument("ChangepointConfig: times must be >= 1");
            }
            if (i > 0 && taus[i] <= taus[i - 1]) {
                throw std::invalid_argument("ChangepointConfig: times must be strictly increasing");
            }
        }
    }

    int count() const { return static_cast<int>(taus.size()); }
    bool empty() const { return taus.empty(); }

    bool valid_for(int n) const { return taus.empty() || taus.back() <= n - 1; }

    void require_valid_for(int n) const {
        if (!valid_for(n)) {
            throw std::invalid_argument("ChangepointConfig: changepoint at or beyond series end");
        }
    }

    /// Regime index r(t) in {0, ..., m} of the 1-based time t.
    int regime_of(int t) const {
        return static_cast<int>(std::upper_bound(taus.begin(), taus.end(), t - 1) - taus.begin());
    }

    /// Length of regime i under boundary conventions tau_0 = 0, tau_{m+1} = n.
    int regime_length(int i, int n) const {
        const int lo = (i == 0) ? 0 : taus[i - 1];
        const int hi = (i == count()) ? n : taus[i];
        return hi - lo;
    }

    bool operator==(const ChangepointConfig& other) const { return taus == other.taus; }
};

/// Piecewise-constant mean: regime i (delimited by the configuration) has
/// mean mus[i]; mus.size() == m + 1.
struct StepMeanFunction {
    ChangepointConfig config;
    std::vector<double> mus;

    StepMeanFunction() : mus{0.0} {}
    StepMeanFunction(ChangepointConfig c, std::vector<double> m)
        : config(std::move(c)), mus(std::move(m)) {
        if (static_cast<int>(mus.size()) != config.count() + 1) {
            throw std::invalid_argument("StepMeanFunction: need exactly m+1 regime means");
        }
    }

    static StepMeanFunction constant(double mu) {
        return StepMeanFunction(ChangepointConfig{}, {mu});
    }

    double at(int t) const { return mus[static_cast<std::size_t>(config.regime_of(t))]; }
};

/// Sample mean of each regime of x under the configuration.
inline std::vector<double> segment_means(const TimeSeries& x, const ChangepointConfig& config) {
    const int n = x.size();
    config.require_valid_for(n);
    std::vector<double> means(static_cast<std::size_t>(config.count()) + 1);
    int start = 0; // 0-based start of current regime
    for (int i = 0; i <= config.count(); ++i) {
        const int end = (i == config.count()) ? n : config.taus[static_cast<std::size_t>(i)];
        double s = 0.0;
        for (int t = start; t < end; ++t) {
            s += x.values[static_cast<std::size_t>(t)];
        }
        means[static_cast<std::size_t>(i)] = s / static_cast<double>(end - start);
        start = end;
    }
    return means;
}

} // namespace cpd
