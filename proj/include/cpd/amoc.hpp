#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpd/estimate.hpp"
#include "cpd/limit_laws.hpp"
#include "cpd/types.hpp"

namespace cpd {

enum class AmocMethod { CusumX, CusumZ, ScusumX, ScusumZ, LrtGumbel, LrtCropped };

inline std::string amoc_method_name(AmocMethod m) {
    switch (m) {
        case AmocMethod::CusumX: return "cusumx";
        case AmocMethod::CusumZ: return "cusumz";
        case AmocMethod::ScusumX: return "scusumx";
        case AmocMethod::ScusumZ: return "scusumz";
        case AmocMethod::LrtGumbel: return "lrt";
        case AmocMethod::LrtCropped: return "lrt-cropped";
    }
    return "?";
}

/// Outcome of an at-most-one-changepoint test.
struct AmocResult {
    AmocMethod method = AmocMethod::CusumX;
    double statistic = 0.0;        // unscaled functional
    double scaled_statistic = 0.0; // compared against critical_value
    int location = 1;              // argmax of the underlying curve, smallest-index ties
    double critical_value = 0.0;
    std::optional<double> p_value;
    bool reject = false;
    double alpha = 0.05;
    int order_used = 0;
};

/// CUSUM(k) = N^{-1/2} ( sum_{t<=k} y_t - (k/N) sum_t y_t ) for k = 1..N.
/// CUSUM(N) is zero by construction.
inline std::vector<double> cusum_curve(std::span<const double> y) {
    const int n = static_cast<int>(y.size());
    if (n < 2) throw std::invalid_argument("cusum_curve: need at least two observations");
    double total = 0.0;
    for (double v : y) total += v;
    const double root_n = std::sqrt(static_cast<double>(n));
    std::vector<double> curve(static_cast<std::size_t>(n));
    double partial = 0.0;
    for (int k = 1; k <= n; ++k) {
        partial += y[static_cast<std::size_t>(k - 1)];
        curve[static_cast<std::size_t>(k - 1)] =
            (partial - (static_cast<double>(k) / static_cast<double>(n)) * total) / root_n;
    }
    return curve;
}

namespace detail {

/// Argmax of |curve(k)| over admissible k in [1, n-1]; smallest index wins ties.
inline std::pair<double, int> max_abs_location(const std::vector<double>& curve) {
    double best = -1.0;
    int arg = 1;
    for (int k = 1; k <= static_cast<int>(curve.size()) - 1; ++k) {
        const double v = std::abs(curve[static_cast<std::size_t>(k - 1)]);
        if (v > best) {
            best = v;
            arg = k;
        }
    }
    return {best, arg};
}

inline bool is_constant(const TimeSeries& x) {
    const auto [lo, hi] = std::minmax_element(x.values.begin(), x.values.end());
    return *lo == *hi;
}

inline int resolve_order(const TimeSeries& x, int p) {
    if (p == kAutoOrder) return select_ar_order(x);
    if (p < 0) throw std::invalid_argument("amoc: negative AR order");
    return p;
}

inline void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("amoc: significance level must be in (0, 1)");
    }
}

/// Degenerate (exactly constant) input carries no evidence of a mean shift;
/// report a zero statistic rather than failing inside the AR fit.
inline AmocResult constant_series_result(AmocMethod method, double alpha, double critical) {
    AmocResult r;
    r.method = method;
    r.alpha = alpha;
    r.critical_value = critical;
    r.p_value = 1.0;
    r.reject = false;
    return r;
}

} // namespace detail

/// CUSUM test on the raw data, scaled by the estimated long-run standard
/// deviation; the null limit is sup |B(t)|.
inline AmocResult cusum_test_x(const TimeSeries& x, int p = kAutoOrder, double alpha = 0.05) {
    detail::check_alpha(alpha);
    const double crit = sup_bridge_quantile(1.0 - alpha);
    if (detail::is_constant(x)) return detail::constant_series_result(AmocMethod::CusumX, alpha, crit);
    const int order = detail::resolve_order(x, p);

    const ArModel model = fit_ar_yule_walker(x, order);
    const double eta = std::sqrt(model.long_run_variance());
    const std::vector<double> curve = cusum_curve(x.values);
    const auto [maxabs, arg] = detail::max_abs_location(curve);

    AmocResult r;
    r.method = AmocMethod::CusumX;
    r.alpha = alpha;
    r.order_used = order;
    r.statistic = maxabs;
    r.scaled_statistic = maxabs / eta;
    r.location = arg;
    r.critical_value = crit;
    r.p_value = 1.0 - sup_bridge_cdf(r.scaled_statistic);
    r.reject = r.scaled_statistic > r.critical_value;
    return r;
}

/// CUSUM test on one-step-ahead prediction residuals of the null fit, scaled
/// by the estimated innovation standard deviation; same limit as cusum_test_x.
inline AmocResult cusum_test_z(const TimeSeries& x, int p = kAutoOrder, double alpha = 0.05) {
    detail::check_alpha(alpha);
    const double crit = sup_bridge_quantile(1.0 - alpha);
    if (detail::is_constant(x)) return detail::constant_series_result(AmocMethod::CusumZ, alpha, crit);
    const int order = detail::resolve_order(x, p);

    const ArModel model = fit_ar_yule_walker(x, order);
    const std::vector<double> z = one_step_residuals(x, model);
    const double sigma = std::sqrt(residual_variance(z));
    const std::vector<double> curve = cusum_curve(z);
    const auto [maxabs, arg] = detail::max_abs_location(curve);

    AmocResult r;
    r.method = AmocMethod::CusumZ;
    r.alpha = alpha;
    r.order_used = order;
    r.statistic = maxabs;
    r.scaled_statistic = maxabs / sigma;
    r.location = arg;
    r.critical_value = crit;
    r.p_value = 1.0 - sup_bridge_cdf(r.scaled_statistic);
    r.reject = r.scaled_statistic > r.critical_value;
    return r;
}

namespace detail {

inline AmocResult scusum_common(AmocMethod method, const std::vector<double>& curve, double scale2,
                                double alpha, int order, const McSettings& ms) {
    const int n = static_cast<int>(curve.size());
    double sumsq = 0.0;
    for (double v : curve) sumsq += v * v;
    const double statistic = sumsq / static_cast<double>(n);

    auto& cache = CriticalValueCache::instance();
    const LimitLaw law = LimitLaw::int_sq_bridge();
    const QuantileTable table = cache.table(law, ms);
    const double crit = cache.quantile(law, 1.0 - alpha, ms);
    const auto [maxabs, arg] = max_abs_location(curve);

    AmocResult r;
    r.method = method;
    r.alpha = alpha;
    r.order_used = order;
    r.statistic = statistic;
    r.scaled_statistic = statistic / scale2;
    r.location = arg;
    r.critical_value = crit;
    r.p_value = table_p_value(table, r.scaled_statistic);
    r.reject = r.scaled_statistic > r.critical_value;
    return r;
}

} // namespace detail

/// Mean of squared CUSUM values of the raw data scaled by the long-run
/// variance; the null limit is the integral of a squared Brownian bridge.
inline AmocResult scusum_x(const TimeSeries& x, int p = kAutoOrder, double alpha = 0.05,
                           const McSettings& ms = {}) {
    detail::check_alpha(alpha);
    if (detail::is_constant(x)) {
        const double crit = CriticalValueCache::instance().quantile(LimitLaw::int_sq_bridge(),
                                                                    1.0 - alpha, ms);
        return detail::constant_series_result(AmocMethod::ScusumX, alpha, crit);
    }
    const int order = detail::resolve_order(x, p);
    const ArModel model = fit_ar_yule_walker(x, order);
    const std::vector<double> curve = cusum_curve(x.values);
    return detail::scusum_common(AmocMethod::ScusumX, curve, model.long_run_variance(), alpha,
                                 order, ms);
}

/// SCUSUM on one-step-ahead prediction residuals scaled by the innovation
/// variance. The recommended default among the AMOC tests here: it keeps its
/// size under heavy autocorrelation without giving up detection power.
inline AmocResult scusum_z(const TimeSeries& x, int p = kAutoOrder, double alpha = 0.05,
                           const McSettings& ms = {}) {
    detail::check_alpha(alpha);
    if (detail::is_constant(x)) {
        const double crit = CriticalValueCache::instance().quantile(LimitLaw::int_sq_bridge(),
                                                                    1.0 - alpha, ms);
        return detail::constant_series_result(AmocMethod::ScusumZ, alpha, crit);
    }
    const int order = detail::resolve_order(x, p);
    const ArModel model = fit_ar_yule_walker(x, order);
    const std::vector<double> z = one_step_residuals(x, model);
    const std::vector<double> curve = cusum_curve(z);
    return detail::scusum_common(AmocMethod::ScusumZ, curve, residual_variance(z), alpha, order, ms);
}

// ---------------------------------------------------------------------------
// Likelihood ratio scan
// ---------------------------------------------------------------------------

struct LrtOptions {
    /// Re-estimate the AR coefficients at every candidate split instead of
    /// holding them at the null fit. Much slower; intended for validating the
    /// fast path at small N.
    bool refit_per_split = false;
};

namespace detail {

/// sigma_k^2 for every admissible split k: residual variance when the series
/// is centered by the two segment sample means split at k, AR coefficients
/// fixed. Returns values indexed k = 1..n-1.
inline std::vector<double> split_residual_variances(const TimeSeries& x,
                                                    const std::vector<double>& phi) {
    const int n = x.size();
    const int p = static_cast<int>(phi.size());
    std::vector<double> prefix(static_cast<std::size_t>(n) + 1, 0.0);
    for (int t = 1; t <= n; ++t) {
        prefix[static_cast<std::size_t>(t)] =
            prefix[static_cast<std::size_t>(t - 1)] + x.at_time(t);
    }
    std::vector<double> out(static_cast<std::size_t>(n - 1));
    std::vector<double> centered(static_cast<std::size_t>(n));
    for (int k = 1; k <= n - 1; ++k) {
        const double mu1 = prefix[static_cast<std::size_t>(k)] / static_cast<double>(k);
        const double mu2 = (prefix[static_cast<std::size_t>(n)] - prefix[static_cast<std::size_t>(k)]) /
                           static_cast<double>(n - k);
        for (int t = 1; t <= n; ++t) {
            centered[static_cast<std::size_t>(t - 1)] = x.at_time(t) - (t <= k ? mu1 : mu2);
        }
        double ss = 0.0;
        for (int t = 1; t <= n; ++t) {
            double v = centered[static_cast<std::size_t>(t - 1)];
            for (int j = 1; j <= p && t - j >= 1; ++j) {
                v -= phi[static_cast<std::size_t>(j - 1)] * centered[static_cast<std::size_t>(t - 1 - j)];
            }
            ss += v * v;
        }
        out[static_cast<std::size_t>(k - 1)] = ss / static_cast<double>(n);
    }
    return out;
}

inline std::vector<double> split_residual_variances_refit(const TimeSeries& x, int p) {
    const int n = x.size();
    std::vector<double> prefix(static_cast<std::size_t>(n) + 1, 0.0);
    for (int t = 1; t <= n; ++t) {
        prefix[static_cast<std::size_t>(t)] =
            prefix[static_cast<std::size_t>(t - 1)] + x.at_time(t);
    }
    std::vector<double> out(static_cast<std::size_t>(n - 1));
    for (int k = 1; k <= n - 1; ++k) {
        const double mu1 = prefix[static_cast<std::size_t>(k)] / static_cast<double>(k);
        const double mu2 = (prefix[static_cast<std::size_t>(n)] - prefix[static_cast<std::size_t>(k)]) /
                           static_cast<double>(n - k);
        std::vector<double> centered(static_cast<std::size_t>(n));
        for (int t = 1; t <= n; ++t) {
            centered[static_cast<std::size_t>(t - 1)] = x.at_time(t) - (t <= k ? mu1 : mu2);
        }
        std::vector<double> phi;
        try {
            TimeSeries c{std::vector<double>(centered)};
            if (p > 0) phi = fit_ar_yule_walker(c, p).phi();
        } catch (const std::exception&) {
            phi.assign(static_cast<std::size_t>(p), 0.0);
        }
        double ss = 0.0;
        for (int t = 1; t <= n; ++t) {
            double v = centered[static_cast<std::size_t>(t - 1)];
            for (int j = 1; j <= p && t - j >= 1; ++j) {
                v -= phi[static_cast<std::size_t>(j - 1)] * centered[static_cast<std::size_t>(t - 1 - j)];
            }
            ss += v * v;
        }
        out[static_cast<std::size_t>(k - 1)] = ss / static_cast<double>(n);
    }
    return out;
}

/// -2 log Lambda_k = N log(sigma_H0^2 / sigma_k^2) over the admissible range,
/// plus its argmax.
struct LrtScan {
    double statistic = 0.0;
    int location = 1;
};

inline LrtScan lrt_scan(const TimeSeries& x, int p, const LrtOptions& opts, int k_lo, int k_hi) {
    const ArModel h0 = fit_ar_yule_walker(x, p);
    const std::vector<double> z = one_step_residuals(x, h0);
    const double s2_h0 = residual_variance(z);
    const std::vector<double> s2_k = opts.refit_per_split
                                         ? split_residual_variances_refit(x, p)
                                         : split_residual_variances(x, h0.phi());
    LrtScan scan;
    scan.statistic = -std::numeric_limits<double>::infinity();
    for (int k = k_lo; k <= k_hi; ++k) {
        const double s2 = s2_k[static_cast<std::size_t>(k - 1)];
        if (!(s2 > 0.0)) continue;
        const double u = static_cast<double>(x.size()) * std::log(s2_h0 / s2);
        if (u > scan.statistic) {
            scan.statistic = u;
            scan.location = k;
        }
    }
    if (!std::isfinite(scan.statistic)) throw numeric_error("lrt: degenerate variance profile");
    return scan;
}

} // namespace detail

/// Gumbel scaling of the likelihood-ratio statistic U:
///   W_U = sqrt(2 U loglog N) - [2 loglog N + 0.5 logloglog N - 0.5 log pi].
inline double lrt_gumbel_scale(double u, int n) {
    if (n < 20) throw std::invalid_argument("lrt_gumbel_scale: need N >= 20");
    const double lln = std::log(std::log(static_cast<double>(n)));
    return std::sqrt(std::max(0.0, 2.0 * u * lln)) -
           (2.0 * lln + 0.5 * std::log(lln) - 0.5 * std::log(std::numbers::pi));
}

/// Likelihood-ratio test with the extreme-value (doubled Gumbel) scaling.
/// Segment means are profiled; by default the AR coefficients are held at
/// their null estimates across all candidate splits.
inline AmocResult lrt_gumbel(const TimeSeries& x, int p = kAutoOrder, double alpha = 0.05,
                             const LrtOptions& opts = {}) {
    detail::check_alpha(alpha);
    const int n = x.size();
    if (n < 20) throw std::invalid_argument("lrt_gumbel: need N >= 20");
    const double crit = gumbel_quantile(1.0 - alpha);
    if (detail::is_constant(x)) return detail::constant_series_result(AmocMethod::LrtGumbel, alpha, crit);
    const int order = detail::resolve_order(x, p);

    const detail::LrtScan scan = detail::lrt_scan(x, order, opts, 1, n - 1);
    AmocResult r;
    r.method = AmocMethod::LrtGumbel;
    r.alpha = alpha;
    r.order_used = order;
    r.statistic = std::max(0.0, scan.statistic);
    r.scaled_statistic = lrt_gumbel_scale(r.statistic, n);
    r.location = scan.location;
    r.critical_value = crit;
    r.p_value = 1.0 - gumbel_cdf(r.scaled_statistic);
    r.reject = r.scaled_statistic > r.critical_value;
    return r;
}

/// Likelihood-ratio test with the candidate range cropped to lo <= k/N <= hi;
/// the null limit is sup B^2(t) / (t (1 - t)) over the window.
inline AmocResult lrt_cropped(const TimeSeries& x, int p, double lo, double hi,
                              double alpha = 0.05, const LrtOptions& opts = {},
                              const McSettings& ms = {}) {
    detail::check_alpha(alpha);
    if (!(0.0 < lo && lo < hi && hi < 1.0)) {
        throw std::invalid_argument("lrt_cropped: need 0 < lo < hi < 1");
    }
    const int n = x.size();
    const int order_probe = (p == kAutoOrder) ? 0 : p;
    if (static_cast<int>(std::floor(lo * n)) < order_probe + 2) {
        throw std::invalid_argument("lrt_cropped: crop starts before order+2 observations");
    }
    const LimitLaw law = LimitLaw::cropped_sup_ratio(lo, hi);
    auto& cache = CriticalValueCache::instance();
    const double crit = cache.quantile(law, 1.0 - alpha, ms);
    if (detail::is_constant(x)) return detail::constant_series_result(AmocMethod::LrtCropped, alpha, crit);
    const int order = detail::resolve_order(x, p);

    const int k_lo = std::max(1, static_cast<int>(std::ceil(lo * n - 1e-9)));
    const int k_hi = std::min(n - 1, static_cast<int>(std::floor(hi * n + 1e-9)));
    if (k_lo > k_hi) throw std::invalid_argument("lrt_cropped: empty admissible range");

    const detail::LrtScan scan = detail::lrt_scan(x, order, opts, k_lo, k_hi);
    AmocResult r;
    r.method = AmocMethod::LrtCropped;
    r.alpha = alpha;
    r.order_used = order;
    r.statistic = std::max(0.0, scan.statistic);
    r.scaled_statistic = r.statistic;
    r.location = scan.location;
    r.critical_value = crit;
    r.p_value = table_p_value(cache.table(law, ms), r.scaled_statistic);
    r.reject = r.scaled_statistic > r.critical_value;
    return r;
}

} // namespace cpd
