#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cpd/types.hpp"

namespace cpd {

struct Assignment {
    double cost = 0.0;
    std::vector<int> row_of_col; // row index matched to each column
};

/// Minimum-cost assignment of every column to a distinct row (rows >= cols),
/// by the shortest-augmenting-path algorithm with dual potentials. Exact up
/// to floating-point arithmetic.
inline Assignment assignment_min_cost(const std::vector<std::vector<double>>& cost) {
    const int rows = static_cast<int>(cost.size());
    const int cols = rows == 0 ? 0 : static_cast<int>(cost[0].size());
    if (cols == 0) return {};
    if (rows < cols) throw std::invalid_argument("assignment_min_cost: need rows >= cols");
    for (const auto& r : cost) {
        if (static_cast<int>(r.size()) != cols) {
            throw std::invalid_argument("assignment_min_cost: ragged cost matrix");
        }
    }

    constexpr double inf = std::numeric_limits<double>::infinity();
    // Augment one column at a time; "targets" are the rows (1-based, 0 is the
    // virtual start).
    std::vector<double> u(static_cast<std::size_t>(cols) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(rows) + 1, 0.0);
    std::vector<int> matched_col(static_cast<std::size_t>(rows) + 1, 0); // row -> column
    std::vector<int> way(static_cast<std::size_t>(rows) + 1, 0);

    for (int c = 1; c <= cols; ++c) {
        matched_col[0] = c;
        int r0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(rows) + 1, inf);
        std::vector<bool> used(static_cast<std::size_t>(rows) + 1, false);
        do {
            used[static_cast<std::size_t>(r0)] = true;
            const int c0 = matched_col[static_cast<std::size_t>(r0)];
            double delta = inf;
            int r1 = 0;
            for (int r = 1; r <= rows; ++r) {
                if (used[static_cast<std::size_t>(r)]) continue;
                const double cur = cost[static_cast<std::size_t>(r - 1)][static_cast<std::size_t>(c0 - 1)] -
                                   u[static_cast<std::size_t>(c0)] - v[static_cast<std::size_t>(r)];
                if (cur < minv[static_cast<std::size_t>(r)]) {
                    minv[static_cast<std::size_t>(r)] = cur;
                    way[static_cast<std::size_t>(r)] = r0;
                }
                if (minv[static_cast<std::size_t>(r)] < delta) {
                    delta = minv[static_cast<std::size_t>(r)];
                    r1 = r;
                }
            }
            for (int r = 0; r <= rows; ++r) {
                if (used[static_cast<std::size_t>(r)]) {
                    u[static_cast<std::size_t>(matched_col[static_cast<std::size_t>(r)])] += delta;
                    v[static_cast<std::size_t>(r)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(r)] -= delta;
                }
            }
            r0 = r1;
        } while (matched_col[static_cast<std::size_t>(r0)] != 0);
        // unwind the augmenting path
        while (r0 != 0) {
            const int r1 = way[static_cast<std::size_t>(r0)];
            matched_col[static_cast<std::size_t>(r0)] = matched_col[static_cast<std::size_t>(r1)];
            r0 = r1;
        }
    }

    Assignment out;
    out.row_of_col.assign(static_cast<std::size_t>(cols), -1);
    for (int r = 1; r <= rows; ++r) {
        const int c = matched_col[static_cast<std::size_t>(r)];
        if (c != 0) out.row_of_col[static_cast<std::size_t>(c - 1)] = r - 1;
    }
    for (int c = 0; c < cols; ++c) {
        out.cost += cost[static_cast<std::size_t>(out.row_of_col[static_cast<std::size_t>(c)])]
                        [static_cast<std::size_t>(c)];
    }
    return out;
}

struct ConfigDistanceResult {
    double distance = 0.0;
    int count_gap = 0;
    double assignment_cost = 0.0;
    /// Matched changepoint times as (time in first config, time in second).
    std::vector<std::pair<int, int>> matching;
};

/// Distance between two changepoint configurations: the difference in counts
/// plus the minimum-cost matching of the smaller configuration's times into
/// the larger one, at cost |tau - eta| / N per pair. Matching the smaller
/// side into the larger keeps the definition symmetric and the constraints
/// feasible. Zero iff the configurations are identical.
inline ConfigDistanceResult config_distance_full(const ChangepointConfig& c1,
                                                 const ChangepointConfig& c2, int n) {
    c1.require_valid_for(n);
    c2.require_valid_for(n);
    ConfigDistanceResult out;
    out.count_gap = std::abs(c1.count() - c2.count());
    out.distance = static_cast<double>(out.count_gap);
    if (c1.empty() || c2.empty()) return out;

    const bool first_is_larger = c1.count() >= c2.count();
    const auto& large = first_is_larger ? c1.taus : c2.taus;
    const auto& small = first_is_larger ? c2.taus : c1.taus;

    std::vector<std::vector<double>> cost(large.size(), std::vector<double>(small.size()));
    for (std::size_t i = 0; i < large.size(); ++i) {
        for (std::size_t j = 0; j < small.size(); ++j) {
            cost[i][j] = std::abs(static_cast<double>(large[i] - small[j])) / static_cast<double>(n);
        }
    }
    const Assignment a = assignment_min_cost(cost);
    out.assignment_cost = a.cost;
    out.distance += a.cost;
    for (std::size_t j = 0; j < small.size(); ++j) {
        const int li = a.row_of_col[j];
        const int t_large = large[static_cast<std::size_t>(li)];
        const int t_small = small[j];
        if (first_is_larger) {
            out.matching.emplace_back(t_large, t_small);
        } else {
            out.matching.emplace_back(t_small, t_large);
        }
    }
    return out;
}

inline double config_distance(const ChangepointConfig& c1, const ChangepointConfig& c2, int n) {
    return config_distance_full(c1, c2, n).distance;
}

} // namespace cpd
