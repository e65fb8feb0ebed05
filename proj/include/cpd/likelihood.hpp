#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cpd/ar_model.hpp"
#include "cpd/estimate.hpp"
#include "cpd/linalg.hpp"
#include "cpd/types.hpp"

namespace cpd {

/// Exact Gaussian log-likelihood of the series under a changepoint
/// configuration: regime means are profiled out with segment sample means and
/// the covariance comes from the AR model, evaluated through the one-step
/// prediction decomposition (Durbin-Levinson start-up, AR recursion after lag
/// p).
inline double gaussian_loglik(const TimeSeries& x, const ChangepointConfig& config,
                              const ArModel& model) {
    const int n = x.size();
    config.require_valid_for(n);
    if (n < 1) throw std::invalid_argument("gaussian_loglik: empty series");

    const std::vector<double> mus = segment_means(x, config);
    std::vector<double> y(static_cast<std::size_t>(n));
    for (int t = 1; t <= n; ++t) {
        y[static_cast<std::size_t>(t - 1)] =
            x.at_time(t) - mus[static_cast<std::size_t>(config.regime_of(t))];
    }

    const int p = model.order();
    const double log2pi = std::log(2.0 * std::numbers::pi);
    double ll = 0.0;

    if (p == 0) {
        const double s2 = model.sigma2();
        double sse = 0.0;
        for (double v : y) sse += v * v;
        return -0.5 * static_cast<double>(n) * (log2pi + std::log(s2)) - sse / (2.0 * s2);
    }

    // Prediction coefficients for the first p observations come from the
    // model's theoretical autocovariances.
    const std::vector<double> gamma = theoretical_acvf(model, p);
    std::vector<double> coeff;        // order t-1 predictor coefficients
    double pred_var = gamma[0];       // v_0
    for (int t = 1; t <= std::min(p, n); ++t) {
        double pred = 0.0;
        for (int j = 1; j < t; ++j) {
            pred += coeff[static_cast<std::size_t>(j - 1)] * y[static_cast<std::size_t>(t - 1 - j)];
        }
        const double err = y[static_cast<std::size_t>(t - 1)] - pred;
        ll += -0.5 * (log2pi + std::log(pred_var)) - err * err / (2.0 * pred_var);

        // advance Durbin-Levinson one order
        double num = gamma[static_cast<std::size_t>(t)];
        for (int j = 1; j < t; ++j) {
            num -= coeff[static_cast<std::size_t>(j - 1)] * gamma[static_cast<std::size_t>(t - j)];
        }
        const double refl = num / pred_var;
        std::vector<double> next(static_cast<std::size_t>(t));
        for (int j = 1; j < t; ++j) {
            next[static_cast<std::size_t>(j - 1)] =
                coeff[static_cast<std::size_t>(j - 1)] - refl * coeff[static_cast<std::size_t>(t - 1 - j)];
        }
        next[static_cast<std::size_t>(t - 1)] = refl;
        coeff = std::move(next);
        pred_var *= (1.0 - refl * refl);
        if (!(pred_var > 0.0)) throw numeric_error("gaussian_loglik: prediction variance collapsed");
    }

    const auto& phi = model.phi();
    const double s2 = model.sigma2();
    for (int t = p + 1; t <= n; ++t) {
        double pred = 0.0;
        for (int j = 1; j <= p; ++j) {
            pred += phi[static_cast<std::size_t>(j - 1)] * y[static_cast<std::size_t>(t - 1 - j)];
        }
        const double err = y[static_cast<std::size_t>(t - 1)] - pred;
        ll += -0.5 * (log2pi + std::log(s2)) - err * err / (2.0 * s2);
    }
    return ll;
}

} // namespace cpd
