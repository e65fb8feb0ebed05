#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cpd/amoc.hpp"
#include "cpd/estimate.hpp"
#include "cpd/limit_laws.hpp"
#include "cpd/rng.hpp"
#include "cpd/types.hpp"

namespace cpd {

struct SegmentationParams {
    int min_segment_length = 0;  // 0 -> max(10, p + 2)
    /// Per-segment test level of the recursion. The strict default keeps the
    /// recursion's family-wise false-positive rate among the lowest of the
    /// methods here, which is how binary segmentation is usually run.
    double alpha = 0.01;
    bool refit_per_segment = true; // false: hold the global differenced fit
    double wbs_constant = 1.3;   // threshold constant C
    int wbs_intervals = 0;       // 0 -> min(interval-count formula, 5000)
    std::uint64_t seed = 1;
    McSettings mc;               // critical-value tabulation settings

    int resolve_min_len(int p) const {
        return min_segment_length > 0 ? min_segment_length : std::max(10, p + 2);
    }
};

namespace detail {

struct SegmentTest {
    bool reject = false;
    int split = 0; // global 1-based time, last index of the left child
};

/// SCUSUM on a subsegment [s, e] (1-based, inclusive). The segment is
/// recentered at its own sample mean and the residual recursion restarts at
/// the segment start, so every call is a self-contained AMOC test. With
/// refit_per_segment the nuisance fit is re-estimated per segment (the
/// test's own null fit); otherwise the global coefficients are held fixed.
inline SegmentTest scusum_segment(const TimeSeries& x, const std::vector<double>& global_phi,
                                  int p, int s, int e, int min_len,
                                  const SegmentationParams& params, double critical) {
    const int len = e - s + 1;
    std::vector<double> seg(x.values.begin() + (s - 1), x.values.begin() + e);

    std::vector<double> phi = global_phi;
    if (params.refit_per_segment) {
        try {
            phi = fit_ar_yule_walker(TimeSeries{std::vector<double>(seg)}, p).phi();
        } catch (const std::exception&) {
            return {}; // segment too short or degenerate for the null fit
        }
    }

    double mean = 0.0;
    for (double v : seg) mean += v;
    mean /= static_cast<double>(len);

    std::vector<double> z(static_cast<std::size_t>(len));
    for (int i = 0; i < len; ++i) {
        double v = seg[static_cast<std::size_t>(i)] - mean;
        for (int j = 1; j <= p && i - j >= 0; ++j) {
            v -= phi[static_cast<std::size_t>(j - 1)] * (seg[static_cast<std::size_t>(i - j)] - mean);
        }
        z[static_cast<std::size_t>(i)] = v;
    }
    const double s2 = residual_variance(z);
    if (!(s2 > 0.0)) return {};

    const std::vector<double> curve = cusum_curve(z);
    double sumsq = 0.0;
    for (double v : curve) sumsq += v * v;
    const double statistic = sumsq / (static_cast<double>(len) * s2);
    if (!(statistic > critical)) return {};

    // split restricted so both children keep min_len observations
    double best = -1.0;
    int arg = 0;
    for (int k = min_len; k <= len - min_len; ++k) {
        const double v = std::abs(curve[static_cast<std::size_t>(k - 1)]);
        if (v > best) {
            best = v;
            arg = k;
        }
    }
    if (arg == 0) return {};
    return {true, s + arg - 1};
}

inline void binary_segment_recurse(const TimeSeries& x, const std::vector<double>& global_phi,
                                   int p, int s, int e, int min_len,
                                   const SegmentationParams& params, double critical,
                                   std::vector<int>& found) {
    if (e - s + 1 < 2 * min_len) return;
    const SegmentTest t = scusum_segment(x, global_phi, p, s, e, min_len, params, critical);
    if (!t.reject) return;
    found.push_back(t.split);
    binary_segment_recurse(x, global_phi, p, s, t.split, min_len, params, critical, found);
    binary_segment_recurse(x, global_phi, p, t.split + 1, e, min_len, params, critical, found);
}

} // namespace detail

/// Recursive binary segmentation driven by the residual SCUSUM test; each
/// subsegment is tested as a self-contained series (recentered, residual
/// recursion restarted, null fit re-estimated by default). Deterministic.
inline ChangepointConfig binary_segment(const TimeSeries& x, int p,
                                        const SegmentationParams& params = {}) {
    const int n = x.size();
    const int min_len = params.resolve_min_len(p);
    if (n <= 2 * min_len) throw std::invalid_argument("binary_segment: series too short");
    detail::check_alpha(params.alpha);

    std::vector<double> global_phi(static_cast<std::size_t>(p), 0.0);
    if (!params.refit_per_segment) {
        global_phi = fit_ar_differenced(x, p).model.phi();
    }
    const double critical =
        CriticalValueCache::instance().quantile(LimitLaw::int_sq_bridge(), 1.0 - params.alpha,
                                                params.mc);
    std::vector<int> found;
    detail::binary_segment_recurse(x, global_phi, p, 1, n, min_len, params, critical, found);
    std::sort(found.begin(), found.end());
    return ChangepointConfig(std::move(found));
}

/// M intervals (start, end), 0-based half-open, drawn uniformly from all
/// pairs with end - start >= min_len. Deterministic in the seed.
inline std::vector<std::pair<int, int>> sample_intervals(int n, int m_count, int min_len,
                                                         std::uint64_t seed) {
    if (min_len < 4) throw std::invalid_argument("sample_intervals: min_len must be >= 4");
    if (min_len > n) throw std::invalid_argument("sample_intervals: min_len exceeds the series length");
    std::vector<std::pair<int, int>> out;
    out.reserve(static_cast<std::size_t>(std::max(0, m_count)));
    GaussianSampler rng(seed);
    while (static_cast<int>(out.size()) < m_count) {
        const int a = static_cast<int>(rng.below(static_cast<std::uint64_t>(n) + 1));
        const int b = static_cast<int>(rng.below(static_cast<std::uint64_t>(n) + 1));
        if (b - a >= min_len) {
            out.emplace_back(a, b);
        } else if (a - b >= min_len) {
            out.emplace_back(b, a);
        }
    }
    return out;
}

namespace detail {

/// Max over admissible splits of the two-sample mean contrast
///   sqrt(n_left n_right / len) * (mean_left - mean_right),
/// which is N(0, sigma^2) per split under the null. prefix holds cumulative
/// sums of the residual sequence; interval and feasibility bounds are 1-based
/// inclusive.
struct ContrastMax {
    double value = -1.0;
    int split = 0;
};

inline ContrastMax max_mean_contrast(const std::vector<double>& prefix, int lo, int hi, int feas_lo,
                                     int feas_hi) {
    ContrastMax best;
    const double total = prefix[static_cast<std::size_t>(hi)] - prefix[static_cast<std::size_t>(lo - 1)];
    const double len = static_cast<double>(hi - lo + 1);
    for (int t = std::max(lo, feas_lo); t <= std::min(hi - 1, feas_hi); ++t) {
        const double nl = static_cast<double>(t - lo + 1);
        const double nr = len - nl;
        const double sl = prefix[static_cast<std::size_t>(t)] - prefix[static_cast<std::size_t>(lo - 1)];
        const double contrast =
            std::sqrt(nl * nr / len) * (sl / nl - (total - sl) / nr);
        if (std::abs(contrast) > best.value) {
            best.value = std::abs(contrast);
            best.split = t;
        }
    }
    return best;
}

struct WbsState {
    const std::vector<double>* prefix;
    const std::vector<std::pair<int, int>>* intervals; // 1-based inclusive
    double threshold;
    int min_len;
};

inline void wbs_recurse(const WbsState& st, int s, int e, std::vector<int>& found) {
    if (e - s + 1 < 2 * st.min_len) return;
    const int feas_lo = s + st.min_len - 1;
    const int feas_hi = e - st.min_len;

    ContrastMax best = max_mean_contrast(*st.prefix, s, e, feas_lo, feas_hi);
    for (const auto& [lo, hi] : *st.intervals) {
        if (lo < s || hi > e) continue;
        const ContrastMax c = max_mean_contrast(*st.prefix, lo, hi, feas_lo, feas_hi);
        if (c.value > best.value) best = c;
    }
    if (best.split == 0 || !(best.value > st.threshold)) return;
    found.push_back(best.split);
    wbs_recurse(st, s, best.split, found);
    wbs_recurse(st, best.split + 1, e, found);
}

} // namespace detail

/// The interval count suggested for wild binary segmentation,
/// (9 N^2) log(N^2 / delta) / delta^2, capped so the search stays feasible.
inline int wbs_interval_count(int n, int min_len, int cap = 5000) {
    const double nn = static_cast<double>(n);
    const double d = static_cast<double>(min_len);
    const double suggested = 9.0 * nn * nn * std::log(nn * nn / d) / (d * d);
    return static_cast<int>(std::min(static_cast<double>(cap), std::ceil(suggested)));
}

/// Wild binary segmentation on globally decorrelated residuals: CUSUM mean
/// contrasts are maximized over randomly sampled subintervals (plus the full
/// segment) and a candidate is accepted while the largest contrast exceeds
/// C * sigma_hat * sqrt(2 ln N). Randomized; deterministic in params.seed.
inline ChangepointConfig wbs(const TimeSeries& x, int p, const SegmentationParams& params = {}) {
    const int n = x.size();
    const int min_len = params.resolve_min_len(p);
    if (n <= 2 * min_len) throw std::invalid_argument("wbs: series too short");

    const ArFit fit = fit_ar_differenced(x, p);
    const std::vector<double> z = one_step_residuals(x, fit.model);
    const double sigma = std::sqrt(residual_variance(z));
    const double threshold = params.wbs_constant * sigma * std::sqrt(2.0 * std::log(n));

    const int m_count =
        params.wbs_intervals > 0 ? params.wbs_intervals : wbs_interval_count(n, min_len);
    std::vector<std::pair<int, int>> intervals =
        sample_intervals(n, m_count, std::max(4, min_len), params.seed);
    for (auto& [a, b] : intervals) {
        a += 1; // to 1-based inclusive
    }

    std::vector<double> prefix(static_cast<std::size_t>(n) + 1, 0.0);
    for (int t = 1; t <= n; ++t) {
        prefix[static_cast<std::size_t>(t)] =
            prefix[static_cast<std::size_t>(t - 1)] + z[static_cast<std::size_t>(t - 1)];
    }

    detail::WbsState st{&prefix, &intervals, threshold, min_len};
    std::vector<int> found;
    detail::wbs_recurse(st, 1, n, found);
    std::sort(found.begin(), found.end());
    return ChangepointConfig(std::move(found));
}

} // namespace cpd
