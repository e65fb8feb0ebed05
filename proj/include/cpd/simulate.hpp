#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cpd/ar_model.hpp"
#include "cpd/rng.hpp"
#include "cpd/types.hpp"

namespace cpd {

/// Gaussian AR(p) series with a piecewise-constant mean added. The noise
/// recursion starts from zeros and discards a burn-in of 500 + 10p samples,
/// long enough that the initialization transient is below measurement noise
/// for every |phi| used in practice. Identical (model, mean, n, seed) inputs
/// give bit-identical output.
inline TimeSeries simulate_ar(const ArModel& model, const StepMeanFunction& mean, int n,
                              std::uint64_t seed) {
    const int p = model.order();
    if (n < p + 1) {
        throw std::invalid_argument("simulate_ar: series length must exceed the AR order");
    }
    mean.config.require_valid_for(n);

    const int burn = 500 + 10 * p;
    const double sigma = std::sqrt(model.sigma2());
    const auto& phi = model.phi();

    GaussianSampler rng(seed);
    std::vector<double> eps(static_cast<std::size_t>(burn + n), 0.0);
    for (int t = 0; t < burn + n; ++t) {
        double v = sigma * rng.normal();
        for (int j = 1; j <= p; ++j) {
            if (t - j >= 0) v += phi[static_cast<std::size_t>(j - 1)] * eps[static_cast<std::size_t>(t - j)];
        }
        eps[static_cast<std::size_t>(t)] = v;
    }

    std::vector<double> out(static_cast<std::size_t>(n));
    for (int t = 1; t <= n; ++t) {
        out[static_cast<std::size_t>(t - 1)] = mean.at(t) + eps[static_cast<std::size_t>(burn + t - 1)];
    }
    return TimeSeries(std::move(out));
}

inline TimeSeries simulate_ar(const ArModel& model, int n, std::uint64_t seed) {
    return simulate_ar(model, StepMeanFunction::constant(0.0), n, seed);
}

} // namespace cpd
