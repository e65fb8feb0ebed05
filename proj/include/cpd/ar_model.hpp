#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "cpd/linalg.hpp"
#include "cpd/types.hpp"

namespace cpd {

namespace detail {

/// Causality test for X_t = phi_1 X_{t-1} + ... + phi_p X_{t-p} + Z_t via the
/// step-down (reverse Levinson) recursion: the model is causal iff every
/// partial autocorrelation has modulus < 1.
inline bool is_causal(const std::vector<double>& phi) {
    std::vector<double> a = phi;
    for (int k = static_cast<int>(a.size()); k >= 1; --k) {
        const double r = a[static_cast<std::size_t>(k - 1)];
        if (!(std::abs(r) < 1.0)) return false;
        if (k == 1) break;
        std::vector<double> prev(static_cast<std::size_t>(k - 1));
        const double denom = 1.0 - r * r;
        for (int j = 1; j < k; ++j) {
            prev[static_cast<std::size_t>(j - 1)] =
                (a[static_cast<std::size_t>(j - 1)] + r * a[static_cast<std::size_t>(k - 1 - j)]) / denom;
        }
        a = std::move(prev);
    }
    return true;
}

} // namespace detail

/// Causal AR(p) noise model. Construction validates causality (all roots of
/// 1 - phi_1 z - ... - phi_p z^p strictly outside the unit circle) and a
/// positive innovation variance.
class ArModel {
public:
    ArModel() : sigma2_(1.0) {}

    ArModel(std::vector<double> phi, double sigma2) : phi_(std::move(phi)), sigma2_(sigma2) {
        if (!(sigma2_ > 0.0) || !std::isfinite(sigma2_)) {
            throw std::invalid_argument("ArModel: innovation variance must be positive");
        }
        for (double c : phi_) {
            if (!std::isfinite(c)) throw std::invalid_argument("ArModel: non-finite coefficient");
        }
        if (!detail::is_causal(phi_)) {
            throw std::invalid_argument("ArModel: coefficients are not causal");
        }
    }

    static ArModel white_noise(double sigma2) { return ArModel({}, sigma2); }

    int order() const { return static_cast<int>(phi_.size()); }
    const std::vector<double>& phi() const { return phi_; }
    double sigma2() const { return sigma2_; }

    double phi_sum() const { return std::accumulate(phi_.begin(), phi_.end(), 0.0); }

    /// Long-run variance sigma^2 / (1 - sum phi)^2; equals sigma^2 for p = 0.
    double long_run_variance() const {
        const double d = 1.0 - phi_sum();
        return sigma2_ / (d * d);
    }

private:
    std::vector<double> phi_;
    double sigma2_;
};

inline double long_run_variance(const ArModel& model) {
    return model.long_run_variance();
}

/// Theoretical autocorrelations rho(1..max_lag) of a causal AR model, from
/// the Yule-Walker relations rho(h) = sum_j phi_j rho(|h-j|).
inline std::vector<double> theoretical_acf(const ArModel& model, int max_lag) {
    const int p = model.order();
    std::vector<double> rho(static_cast<std::size_t>(max_lag) + 1, 0.0);
    rho[0] = 1.0;
    if (max_lag == 0) return rho;
    if (p == 0) return rho;

    // Linear system in rho(1..p): rho(h) - sum_{j != h} phi_j rho(|h-j|) = phi_h.
    std::vector<std::vector<double>> a(static_cast<std::size_t>(p),
                                       std::vector<double>(static_cast<std::size_t>(p), 0.0));
    std::vector<double> b(static_cast<std::size_t>(p), 0.0);
    const auto& phi = model.phi();
    for (int h = 1; h <= p; ++h) {
        a[h - 1][h - 1] += 1.0;
        b[h - 1] = 0.0;
        for (int j = 1; j <= p; ++j) {
            const int lag = std::abs(h - j);
            if (lag == 0) {
                b[h - 1] += phi[static_cast<std::size_t>(j - 1)];
            } else if (lag <= p) {
                a[h - 1][lag - 1] -= phi[static_cast<std::size_t>(j - 1)];
            }
        }
    }
    const std::vector<double> head = detail::solve_dense(a, b);
    for (int h = 1; h <= std::min(p, max_lag); ++h) {
        rho[static_cast<std::size_t>(h)] = head[static_cast<std::size_t>(h - 1)];
    }
    for (int h = p + 1; h <= max_lag; ++h) {
        double s = 0.0;
        for (int j = 1; j <= p; ++j) {
            s += phi[static_cast<std::size_t>(j - 1)] * rho[static_cast<std::size_t>(std::abs(h - j))];
        }
        rho[static_cast<std::size_t>(h)] = s;
    }
    return rho;
}

/// Theoretical autocovariances gamma(0..max_lag).
inline std::vector<double> theoretical_acvf(const ArModel& model, int max_lag) {
    const int p = model.order();
    std::vector<double> rho = theoretical_acf(model, std::max(max_lag, p));
    double denom = 1.0;
    for (int j = 1; j <= p; ++j) {
        denom -= model.phi()[static_cast<std::size_t>(j - 1)] * rho[static_cast<std::size_t>(j)];
    }
    if (denom <= 0.0) {
        throw numeric_error("theoretical_acvf: invalid variance denominator");
    }
    const double gamma0 = model.sigma2() / denom;
    std::vector<double> gamma(static_cast<std::size_t>(max_lag) + 1);
    for (int h = 0; h <= max_lag; ++h) {
        gamma[static_cast<std::size_t>(h)] = gamma0 * rho[static_cast<std::size_t>(h)];
    }
    return gamma;
}

} // namespace cpd
