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

#ifndef MIMO_EE_QOS_HPP
#define MIMO_EE_QOS_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mimo_ee/channel.hpp"
#include "mimo_ee/link_metrics.hpp"

namespace mimo_ee {

/// Per-user minimum spectral efficiencies and the rate factors omega_k
/// derived from them. qos_snr is the transmit-SNR scale of the minimum-power
/// recursion; 1/(qos_snr * g_k) is then a power in watts.
struct QosSpec {
    Eigen::VectorXd min_spectral_eff;  // bit/s/Hz
    Eigen::VectorXd omega;             // 2^min_spectral_eff
    double qos_snr = 1.0;

    static QosSpec make(Eigen::VectorXd min_spectral_eff, double qos_snr) {
        if (!(qos_snr > 0.0)) throw std::invalid_argument("QosSpec: qos_snr must be positive");
        QosSpec q;
        q.omega.resize(min_spectral_eff.size());
        for (Eigen::Index k = 0; k < min_spectral_eff.size(); ++k) {
            if (min_spectral_eff[k] < 0.0)
                throw std::invalid_argument("QosSpec: minimum spectral efficiencies must be nonnegative");
            q.omega[k] = std::exp2(min_spectral_eff[k]);
        }
        q.min_spectral_eff = std::move(min_spectral_eff);
        q.qos_snr = qos_snr;
        return q;
    }

    static QosSpec uniform(int num_users, double min_spectral_eff, double qos_snr) {
        return make(Eigen::VectorXd::Constant(num_users, min_spectral_eff), qos_snr);
    }

    int size() const { return static_cast<int>(omega.size()); }
};

/// Default transmit-SNR scale: reciprocal of the noise power, so the
/// per-user floor term 1/(qos_snr*g_k) is noise power over channel gain.
inline double default_qos_snr(const LinkParams& params) { return 1.0 / params.noise_power_w; }

/// Outcome of the minimum-power feasibility test.
struct FeasibilityVerdict {
    bool feasible = false;
    Eigen::VectorXd required_powers_w;  // original user indexing
    double required_total_w = 0.0;
    std::vector<int> order;  // decode order used by the recursion
};

/// Users sorted by composite gain, strongest first; ties keep the lower
/// original index first.
inline std::vector<int> decode_order(const ChannelState& channel) {
    std::vector<int> order(channel.num_users());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return channel.composite_gain[a] > channel.composite_gain[b];
    });
    return order;
}

/// Minimum powers meeting the sequential QoS recursion, walking users in
/// `order`: p_(1) = (w_(1)-1)/(qos_snr*g_(1)),
/// p_(k) = (w_(k)-1)*(sum_{j<k} p_(j) + 1/(qos_snr*g_(k))).
/// Returned in original user indexing.
inline Eigen::VectorXd min_required_powers(const ChannelState& channel, const QosSpec& qos,
                                           const std::vector<int>& order) {
    const int num_users = channel.num_users();
    if (qos.size() != num_users)
        throw std::invalid_argument("min_required_powers: QosSpec length does not match channel");
    if (static_cast<int>(order.size()) != num_users)
        throw std::invalid_argument("min_required_powers: order must be a permutation of all users");
    std::vector<bool> seen(num_users, false);
    for (int idx : order) {
        if (idx < 0 || idx >= num_users || seen[idx])
            throw std::invalid_argument("min_required_powers: order must be a permutation of all users");
        seen[idx] = true;
    }
    Eigen::VectorXd required = Eigen::VectorXd::Zero(num_users);
    double cumulative = 0.0;
    for (int idx : order) {
        const double gain = channel.composite_gain[idx];
        if (!(gain > 0.0)) throw std::invalid_argument("min_required_powers: composite gain must be positive");
        const double floor_term = 1.0 / (qos.qos_snr * gain);
        required[idx] = (qos.omega[idx] - 1.0) * (cumulative + floor_term);
        cumulative += required[idx];
    }
    return required;
}

/// Feasibility gate: the constrained EE problem has a solution iff the
/// summed minimum powers fit inside the budget.
inline FeasibilityVerdict check_feasibility(const ChannelState& channel, const QosSpec& qos,
                                            double max_power_w) {
    if (max_power_w < 0.0) throw std::invalid_argument("check_feasibility: max_power_w must be nonnegative");
    FeasibilityVerdict verdict;
    verdict.order = decode_order(channel);
    verdict.required_powers_w = min_required_powers(channel, qos, verdict.order);
    verdict.required_total_w = verdict.required_powers_w.sum();
    verdict.feasible = verdict.required_total_w <= max_power_w;
    return verdict;
}

}  // namespace mimo_ee

#endif  // MIMO_EE_QOS_HPP
