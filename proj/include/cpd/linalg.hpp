#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "cpd/types.hpp"

namespace cpd::detail {

/// Solve A x = b by Gaussian elimination with partial pivoting.
/// Orders here are tiny (AR orders), so no fancier factorization is needed.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (std::abs(a[pivot][col]) < 1e-14) {
            throw numeric_error("solve_dense: singular system");
        }
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
        x[i] = s / a[i][i];
    }
    return x;
}

struct LevinsonResult {
    std::vector<double> phi;        // order-p coefficients
    double sigma2 = 0.0;            // final prediction error variance
    std::vector<double> reflection; // partial autocorrelations k = 1..p
};

/// Levinson-Durbin recursion on an autocovariance sequence acvf[0..p].
inline LevinsonResult levinson_durbin(const std::vector<double>& acvf, int p) {
    if (static_cast<int>(acvf.size()) < p + 1) {
        throw std::invalid_argument("levinson_durbin: need acvf up to lag p");
    }
    if (acvf[0] <= 0.0) {
        throw numeric_error("levinson_durbin: nonpositive lag-0 autocovariance");
    }
    LevinsonResult out;
    out.sigma2 = acvf[0];
    std::vector<double> phi;
    for (int k = 1; k <= p; ++k) {
        double num = acvf[static_cast<std::size_t>(k)];
        for (int j = 1; j < k; ++j) {
            num -= phi[static_cast<std::size_t>(j - 1)] * acvf[static_cast<std::size_t>(k - j)];
        }
        const double refl = num / out.sigma2;
        std::vector<double> next(static_cast<std::size_t>(k));
        for (int j = 1; j < k; ++j) {
            next[static_cast<std::size_t>(j - 1)] =
                phi[static_cast<std::size_t>(j - 1)] - refl * phi[static_cast<std::size_t>(k - 1 - j)];
        }
        next[static_cast<std::size_t>(k - 1)] = refl;
        phi = std::move(next);
        out.sigma2 *= (1.0 - refl * refl);
        out.reflection.push_back(refl);
        if (out.sigma2 <= 0.0) {
            throw numeric_error("levinson_durbin: prediction variance collapsed");
        }
    }
    out.phi = std::move(phi);
    return out;
}

} // namespace cpd::detail
