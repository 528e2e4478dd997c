// SPDX-License-Identifier: Apache-2.0
//
// mimo-ee: energy-efficient downlink power allocation for massive MIMO
// Copyright (C) 2026 The mimo-ee authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
//
// Brute-force reference implementations. Test and validation code only;
// cost grows exponentially with the number of users.

#ifndef MIMO_EE_ORACLE_HPP
#define MIMO_EE_ORACLE_HPP

#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mimo_ee/channel.hpp"
#include "mimo_ee/link_metrics.hpp"
#include "mimo_ee/qos.hpp"

namespace mimo_ee {

/// Sequential QoS floor evaluated at an arbitrary power vector: what each
/// user would minimally need given the powers the stronger users hold now.
inline Eigen::VectorXd qos_requirement_at(const ChannelState& channel, const QosSpec& qos,
                                          const std::vector<int>& order,
                                          const Eigen::VectorXd& powers) {
    const int num_users = channel.num_users();
    if (qos.size() != num_users || powers.size() != num_users)
        throw std::invalid_argument("qos_requirement_at: dimension mismatch");
    Eigen::VectorXd required(num_users);
    double cumulative = 0.0;
    for (int idx : order) {
        const double gain = channel.composite_gain[idx];
        if (!(gain > 0.0)) throw std::invalid_argument("qos_requirement_at: composite gain must be positive");
        required[idx] = (qos.omega[idx] - 1.0) * (cumulative + 1.0 / (qos.qos_snr * gain));
        cumulative += powers[idx];
    }
    return required;
}

struct GridSpec {
    int points_per_dim = 200;
    bool log_spaced = true;
    double min_power_w = 1e-6;
    double max_power_w = 1.0;

    void validate() const {
        if (points_per_dim < 2) throw std::invalid_argument("GridSpec: points_per_dim must be >= 2");
        if (!(min_power_w > 0.0) || !(min_power_w < max_power_w))
            throw std::invalid_argument("GridSpec: need 0 < min_power_w < max_power_w");
    }
};

struct GridSearchResult {
    bool found = false;  // false: no feasible grid point
    Eigen::VectorXd powers_w;
    double ee = -std::numeric_limits<double>::infinity();
};

namespace detail {

inline std::vector<double> grid_axis(double lo, double hi, int n, bool log_spaced) {
    std::vector<double> axis(n);
    if (log_spaced) {
        const double llo = std::log(lo), lhi = std::log(hi);
        for (int i = 0; i < n; ++i) axis[i] = std::exp(llo + (lhi - llo) * i / (n - 1));
    } else {
        for (int i = 0; i < n; ++i) axis[i] = lo + (hi - lo) * i / (n - 1);
    }
    return axis;
}

// Exhaustive scan of the cartesian product of per-dimension axes. Ties on
// the objective break toward lexicographically smaller power vectors so the
// result does not depend on evaluation order.
inline void grid_scan(const std::vector<std::vector<double>>& axes, const ChannelState& channel,
                      const QosSpec& qos, const LinkParams& params, double max_power_w,
                      const std::vector<int>& order, GridSearchResult& best,
                      std::vector<int>& best_idx) {
    const int num_users = static_cast<int>(axes.size());
    std::vector<int> idx(num_users, 0);
    PowerAllocation alloc;
    alloc.powers_w.resize(num_users);
    while (true) {
        double total = 0.0;
        for (int k = 0; k < num_users; ++k) {
            alloc.powers_w[k] = axes[k][idx[k]];
            total += alloc.powers_w[k];
        }
        alloc.total_w = total;
        if (total <= max_power_w) {
            const Eigen::VectorXd required = qos_requirement_at(channel, qos, order, alloc.powers_w);
            bool ok = true;
            for (int k = 0; k < num_users; ++k)
                if (alloc.powers_w[k] < required[k]) {
                    ok = false;
                    break;
                }
            if (ok) {
                const double ee = lower_bound_ee(alloc, channel, params);
                bool better = false;
                if (!best.found || ee > best.ee) {
                    better = true;
                } else if (ee == best.ee) {
                    for (int k = 0; k < num_users; ++k) {
                        if (alloc.powers_w[k] != best.powers_w[k]) {
                            better = alloc.powers_w[k] < best.powers_w[k];
                            break;
                        }
                    }
                }
                if (better) {
                    best.found = true;
                    best.ee = ee;
                    best.powers_w = alloc.powers_w;
                    best_idx = idx;
                }
            }
        }
        int dim = num_users - 1;
        while (dim >= 0 && ++idx[dim] == static_cast<int>(axes[dim].size())) {
            idx[dim] = 0;
            --dim;
        }
        if (dim < 0) break;
    }
}

}  // namespace detail

/// Exhaustive scan of the K-dimensional power box for the best lower-bound
/// EE subject to the budget and sequential QoS floors, with one refinement
/// pass re-gridding a two-cell neighborhood of the incumbent.
inline GridSearchResult grid_search_ee(const ChannelState& channel, const QosSpec& qos,
                                       const LinkParams& params, double max_power_w,
                                       const GridSpec& grid) {
    grid.validate();
    const int num_users = channel.num_users();
    if (num_users > 4) throw std::invalid_argument("grid_search_ee: supports at most 4 users");
    const std::vector<int> order = decode_order(channel);

    std::vector<std::vector<double>> axes(
        num_users, detail::grid_axis(grid.min_power_w, grid.max_power_w, grid.points_per_dim,
                                     grid.log_spaced));
    GridSearchResult best;
    std::vector<int> best_idx;
    detail::grid_scan(axes, channel, qos, params, max_power_w, order, best, best_idx);
    if (!best.found) return best;

    // Refinement: re-grid [i-2, i+2] around the incumbent in every dimension.
    std::vector<std::vector<double>> fine(num_users);
    for (int k = 0; k < num_users; ++k) {
        const auto& axis = axes[k];
        const int i = best_idx[k];
        const double lo = axis[std::max(0, i - 2)];
        const double hi = axis[std::min<int>(static_cast<int>(axis.size()) - 1, i + 2)];
        fine[k] = detail::grid_axis(lo, hi, grid.points_per_dim, grid.log_spaced);
    }
    std::vector<int> fine_idx;
    detail::grid_scan(fine, channel, qos, params, max_power_w, order, best, fine_idx);

    // The winner must still satisfy everything it was filtered on.
    const Eigen::VectorXd required = qos_requirement_at(channel, qos, order, best.powers_w);
    for (int k = 0; k < num_users; ++k)
        if (best.powers_w[k] < required[k])
            throw std::logic_error("grid_search_ee: incumbent violates a QoS floor");
    if (best.powers_w.sum() > max_power_w)
        throw std::logic_error("grid_search_ee: incumbent violates the power budget");
    return best;
}

/// One-dimensional golden-section maximization of the single-user
/// lower-bound EE over [min_power_w, max_power_w]. The objective is
/// unimodal there, so this is an independent check on both the grid oracle
/// and the solver at K=1.
inline GridSearchResult golden_section_ee(const ChannelState& channel, const QosSpec& qos,
                                          const LinkParams& params, double max_power_w,
                                          double min_power_w = 1e-9, double rel_tol = 1e-12) {
    if (channel.num_users() != 1)
        throw std::invalid_argument("golden_section_ee: single-user instances only");
    const std::vector<int> order{0};
    const double qos_floor = qos_requirement_at(channel, qos, order, Eigen::VectorXd::Zero(1))[0];
    double lo = std::max(min_power_w, qos_floor);
    double hi = max_power_w;
    if (lo > hi) return {};

    PowerAllocation alloc;
    alloc.powers_w.resize(1);
    const auto ee_at = [&](double p) {
        alloc.powers_w[0] = p;
        alloc.total_w = p;
        return lower_bound_ee(alloc, channel, params);
    };

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = ee_at(c), fd = ee_at(d);
    while (b - a > rel_tol * std::max(1.0, b)) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = ee_at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = ee_at(d);
        }
    }
    GridSearchResult res;
    res.found = true;
    res.powers_w = Eigen::VectorXd::Constant(1, (a + b) / 2.0);
    res.ee = ee_at((a + b) / 2.0);
    return res;
}

/// Optimal admitted-user count by subset enumeration: a subset is feasible
/// when the sequential minimum-power recursion over its members (strongest
/// first) fits the budget.
inline int exhaustive_admission(const ChannelState& channel, const QosSpec& qos, double max_power_w) {
    const int num_users = channel.num_users();
    if (num_users > 12) throw std::invalid_argument("exhaustive_admission: supports at most 12 users");
    if (qos.size() != num_users)
        throw std::invalid_argument("exhaustive_admission: QosSpec length does not match channel");
    if (max_power_w < 0.0)
        throw std::invalid_argument("exhaustive_admission: max_power_w must be nonnegative");
    const std::vector<int> order = decode_order(channel);
    int best = 0;
    for (unsigned mask = 0; mask < (1u << num_users); ++mask) {
        const int count = std::popcount(mask);
        if (count <= best) continue;
        double cumulative = 0.0;
        bool fits = true;
        for (int idx : order) {
            if (!(mask & (1u << idx))) continue;
            const double req = (qos.omega[idx] - 1.0) *
                               (cumulative + 1.0 / (qos.qos_snr * channel.composite_gain[idx]));
            cumulative += req;
            if (cumulative > max_power_w) {
                fits = false;
                break;
            }
        }
        if (fits) best = count;
    }
    return best;
}

}  // namespace mimo_ee

#endif  // MIMO_EE_ORACLE_HPP
