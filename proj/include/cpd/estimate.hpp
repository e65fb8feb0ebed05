#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "cpd/ar_model.hpp"
#include "cpd/linalg.hpp"
#include "cpd/types.hpp"

namespace cpd {

/// Biased sample autocovariances gamma_hat(0..max_lag) of the mean-centered
/// series (divide-by-N convention, which keeps the Toeplitz system positive
/// definite).
inline std::vector<double> sample_acvf(const TimeSeries& x, int max_lag) {
    const int n = x.size();
    if (n < 2) throw std::invalid_argument("sample_acvf: need at least two observations");
    double mean = 0.0;
    for (double v : x.values) mean += v;
    mean /= static_cast<double>(n);

    std::vector<double> gamma(static_cast<std::size_t>(max_lag) + 1, 0.0);
    for (int h = 0; h <= max_lag; ++h) {
        double s = 0.0;
        for (int t = 0; t + h < n; ++t) {
            s += (x.values[static_cast<std::size_t>(t)] - mean) *
                 (x.values[static_cast<std::size_t>(t + h)] - mean);
        }
        gamma[static_cast<std::size_t>(h)] = s / static_cast<double>(n);
    }
    return gamma;
}

/// One-step-ahead prediction residuals
///   Zhat_t = Xdot_t - phi_1 Xdot_{t-1} - ... - phi_p Xdot_{t-p},
/// where Xdot_t = X_t - Xbar and values before the series start are treated
/// as zero. Returns exactly N residuals.
inline std::vector<double> one_step_residuals(const TimeSeries& x, const ArModel& model) {
    const int n = x.size();
    const int p = model.order();
    if (n <= p) throw std::invalid_argument("one_step_residuals: series shorter than order + 1");

    double mean = 0.0;
    for (double v : x.values) mean += v;
    mean /= static_cast<double>(n);

    const auto& phi = model.phi();
    std::vector<double> z(static_cast<std::size_t>(n));
    for (int t = 1; t <= n; ++t) {
        double v = x.at_time(t) - mean;
        for (int j = 1; j <= p && t - j >= 1; ++j) {
            v -= phi[static_cast<std::size_t>(j - 1)] * (x.at_time(t - j) - mean);
        }
        z[static_cast<std::size_t>(t - 1)] = v;
    }
    return z;
}

/// Innovation variance estimate N^{-1} sum Zhat_t^2.
inline double residual_variance(std::span<const double> z) {
    if (z.empty()) throw std::invalid_argument("residual_variance: empty residuals");
    double s = 0.0;
    for (double v : z) s += v * v;
    return s / static_cast<double>(z.size());
}

/// Classical Yule-Walker fit on the sample autocovariances of the
/// mean-centered series; the returned model is always causal.
inline ArModel fit_ar_yule_walker(const TimeSeries& x, int p) {
    if (p < 0) throw std::invalid_argument("fit_ar_yule_walker: negative order");
    const int n = x.size();
    if (n <= 10 * p || n < 2) {
        throw std::invalid_argument("fit_ar_yule_walker: series too short for requested order");
    }
    const std::vector<double> gamma = sample_acvf(x, p);
    if (gamma[0] <= 0.0) {
        throw numeric_error("fit_ar_yule_walker: degenerate (constant) series");
    }
    if (p == 0) return ArModel({}, gamma[0]);
    const detail::LevinsonResult lv = detail::levinson_durbin(gamma, p);
    return ArModel(lv.phi, lv.sigma2);
}

/// Autocorrelations rho_d(h) of the first difference d_t = X_t - X_{t-1},
/// plus the lag-0 autocovariance of the differences (needed to recover the
/// innovation variance on the original scale).
struct DifferencedAcf {
    std::vector<double> rho; // rho[h] for h = 0..max_lag, rho[0] = 1
    double gamma0 = 0.0;     // sample variance of the differences
};

inline DifferencedAcf differenced_acf(const TimeSeries& x, int max_lag) {
    const int n = x.size();
    if (n < max_lag + 3) throw std::invalid_argument("differenced_acf: series too short");
    std::vector<double> d(static_cast<std::size_t>(n - 1));
    for (int t = 2; t <= n; ++t) {
        d[static_cast<std::size_t>(t - 2)] = x.at_time(t) - x.at_time(t - 1);
    }
    double denom = 0.0;
    for (double v : d) denom += v * v;
    if (denom <= 0.0) throw numeric_error("differenced_acf: degenerate (constant) series");

    DifferencedAcf out;
    out.rho.assign(static_cast<std::size_t>(max_lag) + 1, 0.0);
    out.rho[0] = 1.0;
    out.gamma0 = denom / static_cast<double>(n - 1);
    for (int h = 1; h <= max_lag; ++h) {
        double num = 0.0;
        for (std::size_t t = 0; t + static_cast<std::size_t>(h) < d.size(); ++t) {
            num += d[t] * d[t + static_cast<std::size_t>(h)];
        }
        out.rho[static_cast<std::size_t>(h)] = num / denom;
    }
    return out;
}

struct ArFit {
    ArModel model;
    /// True when the differenced moment system produced a non-causal or
    /// degenerate model and the classical Yule-Walker fit was used instead.
    bool yule_walker_fallback = false;
};

/// AR(p) estimation from first differences. Because E[X_t - X_{t-1}] = 0
/// away from changepoint times, a sparse set of mean shifts has negligible
/// impact on these moments, unlike the plain Yule-Walker fit.
///
/// With g(k) = gamma(k-1) - gamma(k) the AR relations give, for h >= 1,
///   g(h+1) = sum_j phi_j g(h+1-j),   g(k) = -g(1-k) for k <= 0,
/// and g(k) is estimable from the differences:
///   g(k) / gamma_d(0) = 1/2 + rho_d(1) + ... + rho_d(k-1).
/// Solving those p equations as a linear system in phi reduces, at p = 1,
/// to the closed form phi = 1 + 2 rho_d(1).
inline ArFit fit_ar_differenced(const TimeSeries& x, int p) {
    if (p < 0) throw std::invalid_argument("fit_ar_differenced: negative order");
    const int n = x.size();
    if (n <= 10 * p + 1 || n < 3) {
        throw std::invalid_argument("fit_ar_differenced: series too short for requested order");
    }
    const DifferencedAcf dacf = differenced_acf(x, p + 1);
    if (p == 0) {
        // white noise: gamma_d(0) = 2 sigma^2
        return ArFit{ArModel({}, dacf.gamma0 / 2.0), false};
    }

    // cumulative-sum coefficients G(k) = 1/2 + sum_{i<k} rho_d(i), k >= 1
    std::vector<double> big_g(static_cast<std::size_t>(p) + 2, 0.0);
    big_g[1] = 0.5;
    for (int k = 2; k <= p + 1; ++k) {
        big_g[static_cast<std::size_t>(k)] =
            big_g[static_cast<std::size_t>(k - 1)] + dacf.rho[static_cast<std::size_t>(k - 1)];
    }
    const auto g_ext = [&](int k) -> double {
        return (k >= 1) ? big_g[static_cast<std::size_t>(k)] : -big_g[static_cast<std::size_t>(1 - k)];
    };

    const auto fallback = [&]() -> ArFit { return ArFit{fit_ar_yule_walker(x, p), true}; };

    std::vector<double> phi;
    try {
        std::vector<std::vector<double>> a(static_cast<std::size_t>(p),
                                           std::vector<double>(static_cast<std::size_t>(p)));
        std::vector<double> b(static_cast<std::size_t>(p));
        for (int h = 1; h <= p; ++h) {
            b[static_cast<std::size_t>(h - 1)] = big_g[static_cast<std::size_t>(h + 1)];
            for (int j = 1; j <= p; ++j) {
                a[static_cast<std::size_t>(h - 1)][static_cast<std::size_t>(j - 1)] = g_ext(h + 1 - j);
            }
        }
        phi = detail::solve_dense(std::move(a), std::move(b));
    } catch (const numeric_error&) {
        return fallback();
    }

    if (!detail::is_causal(phi)) return fallback();

    // innovation variance from gamma_d(0) = 2 gamma(0) (1 - rho(1))
    try {
        ArModel shape(phi, 1.0);
        const std::vector<double> rho = theoretical_acf(shape, p);
        const double gamma0 = dacf.gamma0 / (2.0 * (1.0 - rho[1]));
        double denom = 1.0;
        for (int j = 1; j <= p; ++j) {
            denom -= phi[static_cast<std::size_t>(j - 1)] * rho[static_cast<std::size_t>(j)];
        }
        const double sigma2 = gamma0 * denom;
        if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) return fallback();
        return ArFit{ArModel(std::move(phi), sigma2), false};
    } catch (const std::exception&) {
        return fallback();
    }
}

/// AIC order selection over p in {0, ..., max_order} on Yule-Walker fits.
inline int select_ar_order(const TimeSeries& x, int max_order = 5) {
    const int n = x.size();
    int best_p = 0;
    double best_aic = 0.0;
    bool have = false;
    for (int p = 0; p <= max_order; ++p) {
        if (n <= 10 * p) break;
        double s2;
        try {
            s2 = fit_ar_yule_walker(x, p).sigma2();
        } catch (const std::exception&) {
            continue;
        }
        const double aic = static_cast<double>(n) * std::log(s2) + 2.0 * static_cast<double>(p);
        if (!have || aic < best_aic) {
            have = true;
            best_aic = aic;
            best_p = p;
        }
    }
    if (!have) throw numeric_error("select_ar_order: no admissible order");
    return best_p;
}

constexpr int kAutoOrder = -1;

/// Mean squared one-step residual when the series is centered by the sample
/// mean of each regime of `config` and filtered by the AR coefficients of
/// `model`. Values before the series start are treated as zero. This is the
/// sigma^2 estimate shared by the penalized objective and the split
/// likelihood-ratio scan.
inline double config_residual_variance(const TimeSeries& x, const ChangepointConfig& config,
                                       const ArModel& model) {
    const int n = x.size();
    config.require_valid_for(n);
    const std::vector<double> mus = segment_means(x, config);
    const auto& phi = model.phi();
    const int p = model.order();

    double ss = 0.0;
    for (int t = 1; t <= n; ++t) {
        double v = x.at_time(t) - mus[static_cast<std::size_t>(config.regime_of(t))];
        for (int j = 1; j <= p && t - j >= 1; ++j) {
            v -= phi[static_cast<std::size_t>(j - 1)] *
                 (x.at_time(t - j) - mus[static_cast<std::size_t>(config.regime_of(t - j))]);
        }
        ss += v * v;
    }
    const double s2 = ss / static_cast<double>(n);
    if (!std::isfinite(s2)) throw numeric_error("config_residual_variance: non-finite result");
    return s2;
}

} // namespace cpd
