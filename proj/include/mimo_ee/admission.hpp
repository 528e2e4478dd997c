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

#ifndef MIMO_EE_ADMISSION_HPP
#define MIMO_EE_ADMISSION_HPP

#include <stdexcept>
#include <vector>

#include "mimo_ee/channel.hpp"
#include "mimo_ee/qos.hpp"

namespace mimo_ee {

/// Outcome of greedy user admission under a hard power budget.
struct AdmissionResult {
    std::vector<bool> admitted;          // per user
    Eigen::VectorXd powers_w;            // zero for rejected users
    double remaining_w = 0.0;            // budget left after all admissions
    int admitted_count = 0;
    std::vector<int> admission_sequence;  // admitted users, admission order
};

/// Budget left over after allocating a total.
inline double remaining_power(double max_power_w, double allocated_total_w) {
    if (allocated_total_w < 0.0)
        throw std::invalid_argument("remaining_power: allocated_total_w must be nonnegative");
    if (allocated_total_w > max_power_w)
        throw std::invalid_argument("remaining_power: allocated power exceeds the budget");
    return max_power_w - allocated_total_w;
}

/// Greedy admission: walk candidates strongest composite gain first; each
/// candidate is admitted at exactly the power the sequential QoS recursion
/// requires on top of the already-admitted set, or removed for good if the
/// requirement no longer fits the remaining budget. Admitting a candidate at
/// minimum power leaves the most room for the ones after it.
inline AdmissionResult admit_users(const ChannelState& channel, const QosSpec& qos,
                                   double max_power_w) {
    const int num_users = channel.num_users();
    if (num_users < 1) throw std::invalid_argument("admit_users: need at least one user");
    if (qos.size() != num_users)
        throw std::invalid_argument("admit_users: QosSpec length does not match channel");
    if (max_power_w < 0.0) throw std::invalid_argument("admit_users: max_power_w must be nonnegative");

    AdmissionResult result;
    result.admitted.assign(num_users, false);
    result.powers_w = Eigen::VectorXd::Zero(num_users);

    double allocated = 0.0;
    double remaining = remaining_power(max_power_w, allocated);
    for (int idx : decode_order(channel)) {
        const double gain = channel.composite_gain[idx];
        if (!(gain > 0.0)) throw std::invalid_argument("admit_users: composite gain must be positive");
        const double required =
            (qos.omega[idx] - 1.0) * (allocated + 1.0 / (qos.qos_snr * gain));
        if (required <= remaining) {
            result.admitted[idx] = true;
            result.powers_w[idx] = required;
            result.admission_sequence.push_back(idx);
            allocated += required;
            remaining = remaining_power(max_power_w, allocated);
        }
        // else: permanently removed; later candidates may still be cheaper
        // when their rate requirement is lower.
    }
    result.admitted_count = static_cast<int>(result.admission_sequence.size());
    result.remaining_w = remaining;
    return result;
}

}  // namespace mimo_ee

#endif  // MIMO_EE_ADMISSION_HPP
