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

#ifndef MIMO_EE_LINK_METRICS_HPP
#define MIMO_EE_LINK_METRICS_HPP

#include <cmath>
#include <complex>
#include <stdexcept>

#include "mimo_ee/channel.hpp"

namespace mimo_ee {

/// SNR gap mu between Shannon capacity and a practical coded modulation at
/// bit error rate target_ber. Clamped below at 1 so it is always a penalty.
inline double snr_gap_from_ber(double target_ber) {
    if (!(target_ber > 0.0) || target_ber > 0.2)
        throw std::invalid_argument("snr_gap_from_ber: target_ber must lie in (0, 0.2]");
    return std::max(1.0, -(2.0 / 3.0) * std::log(5.0 * target_ber));
}

/// Radio-link constants shared by every rate computation.
struct LinkParams {
    double bandwidth_hz = 120e3;
    double noise_psd_w_per_hz = 1e-20;  // -170 dBm/Hz
    double noise_power_w = 1.2e-15;     // noise_psd * bandwidth
    double circuit_power_per_antenna_w = 2.511886431509580e-3;  // 4 dBm
    int num_antennas = 128;
    double target_ber = 1e-3;
    double snr_gap = 3.5322115776986913;

    static LinkParams make(double bandwidth_hz, double noise_psd_w_per_hz,
                           double circuit_power_per_antenna_w, int num_antennas,
                           double target_ber) {
        LinkParams p;
        p.bandwidth_hz = bandwidth_hz;
        p.noise_psd_w_per_hz = noise_psd_w_per_hz;
        p.noise_power_w = noise_psd_w_per_hz * bandwidth_hz;
        p.circuit_power_per_antenna_w = circuit_power_per_antenna_w;
        p.num_antennas = num_antennas;
        p.target_ber = target_ber;
        p.snr_gap = snr_gap_from_ber(target_ber);
        p.validate();
        return p;
    }

    double total_circuit_power_w() const { return num_antennas * circuit_power_per_antenna_w; }

    void validate() const {
        if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("LinkParams: bandwidth_hz must be positive");
        if (!(noise_psd_w_per_hz > 0.0))
            throw std::invalid_argument("LinkParams: noise_psd_w_per_hz must be positive");
        if (!(noise_power_w > 0.0)) throw std::invalid_argument("LinkParams: noise_power_w must be positive");
        if (std::abs(noise_power_w - noise_psd_w_per_hz * bandwidth_hz) > 1e-12 * noise_power_w)
            throw std::invalid_argument("LinkParams: noise_power_w must equal noise_psd_w_per_hz * bandwidth_hz");
        if (!(circuit_power_per_antenna_w > 0.0))
            throw std::invalid_argument("LinkParams: circuit_power_per_antenna_w must be positive");
        if (num_antennas < 1) throw std::invalid_argument("LinkParams: num_antennas must be >= 1");
        if (!(snr_gap >= 1.0)) throw std::invalid_argument("LinkParams: snr_gap must be >= 1");
    }
};

/// Per-user downlink transmit powers in watts.
struct PowerAllocation {
    Eigen::VectorXd powers_w;
    double total_w = 0.0;

    static PowerAllocation from(Eigen::VectorXd powers) {
        for (Eigen::Index k = 0; k < powers.size(); ++k)
            if (powers[k] < 0.0) throw std::invalid_argument("PowerAllocation: powers must be nonnegative");
        PowerAllocation a;
        a.total_w = powers.sum();
        a.powers_w = std::move(powers);
        return a;
    }

    int size() const { return static_cast<int>(powers_w.size()); }
};

namespace detail {

inline void check_dims(const PowerAllocation& alloc, const ChannelState& channel) {
    if (alloc.powers_w.size() != channel.small_scale.cols())
        throw std::invalid_argument("power allocation length does not match channel user count");
}

}  // namespace detail

/// SINR of user k on the realized channel vectors. The intra-cell
/// interference is a coherent sum over beams with amplitude weights
/// sqrt(p_l), squared afterwards.
inline double exact_sinr(const PowerAllocation& alloc, const ChannelState& channel,
                         const LinkParams& params, int user_index) {
    detail::check_dims(alloc, channel);
    const auto& h = channel.small_scale;
    const int num_users = channel.num_users();
    if (user_index < 0 || user_index >= num_users)
        throw std::invalid_argument("exact_sinr: user_index out of range");
    const double beta = channel.large_scale[user_index];
    const double numerator =
        alloc.powers_w[user_index] * beta * h.col(user_index).squaredNorm();
    std::complex<double> cross(0.0, 0.0);
    for (int l = 0; l < num_users; ++l) {
        if (l == user_index) continue;
        cross += std::sqrt(alloc.powers_w[l]) * h.col(user_index).dot(h.col(l)) / h.col(l).norm();
    }
    const double interference = beta * std::norm(cross);
    return numerator / (interference + params.noise_power_w);
}

/// Large-array SINR of user k: p_k*beta_k*M / (beta_k*sum_{l!=k} p_l + sigma^2).
inline double asymptotic_sinr(const PowerAllocation& alloc, const ChannelState& channel,
                              const LinkParams& params, int user_index) {
    detail::check_dims(alloc, channel);
    if (user_index < 0 || user_index >= channel.num_users())
        throw std::invalid_argument("asymptotic_sinr: user_index out of range");
    const double beta = channel.large_scale[user_index];
    const double p_k = alloc.powers_w[user_index];
    const double other_power = alloc.total_w - p_k;
    return p_k * beta * params.num_antennas / (beta * other_power + params.noise_power_w);
}

/// Rate B*log2(1 + sinr/mu) in bit/s.
inline double user_rate(double sinr, const LinkParams& params) {
    if (sinr < 0.0) throw std::invalid_argument("user_rate: sinr must be nonnegative");
    return params.bandwidth_hz * std::log2(1.0 + sinr / params.snr_gap);
}

/// Sum over users of the large-array rate.
inline double sum_rate(const PowerAllocation& alloc, const ChannelState& channel,
                       const LinkParams& params) {
    detail::check_dims(alloc, channel);
    double total = 0.0;
    for (int k = 0; k < channel.num_users(); ++k)
        total += user_rate(asymptotic_sinr(alloc, channel, params, k), params);
    return total;
}

/// Lower-bound rate B*log2(M*beta_k*p_k / (beta_k*sum_{j!=k} p_j + sigma^2)).
/// Negative when the argument drops below one; callers must not clamp, a
/// negative value marks an infeasible operating point.
inline double lower_bound_rate(const PowerAllocation& alloc, const ChannelState& channel,
                               const LinkParams& params, int user_index) {
    detail::check_dims(alloc, channel);
    if (user_index < 0 || user_index >= channel.num_users())
        throw std::invalid_argument("lower_bound_rate: user_index out of range");
    const double p_k = alloc.powers_w[user_index];
    if (!(p_k > 0.0)) throw std::invalid_argument("lower_bound_rate: power of the queried user must be positive");
    const double beta = channel.large_scale[user_index];
    const double denom = beta * (alloc.total_w - p_k) + params.noise_power_w;
    return params.bandwidth_hz * std::log2(params.num_antennas * beta * p_k / denom);
}

inline double lower_bound_sum_rate(const PowerAllocation& alloc, const ChannelState& channel,
                                   const LinkParams& params) {
    double total = 0.0;
    for (int k = 0; k < channel.num_users(); ++k)
        total += lower_bound_rate(alloc, channel, params, k);
    return total;
}

/// Energy efficiency sum_rate / (sum p_k + M*P_c) in bit/J.
inline double energy_efficiency(const PowerAllocation& alloc, const ChannelState& channel,
                                const LinkParams& params) {
    detail::check_dims(alloc, channel);
    const double consumed = alloc.total_w + params.total_circuit_power_w();
    if (!(consumed > 0.0)) throw std::invalid_argument("energy_efficiency: total consumed power must be positive");
    return sum_rate(alloc, channel, params) / consumed;
}

/// Energy efficiency evaluated with the lower-bound rates; the objective the
/// solver and the grid oracle both maximize.
inline double lower_bound_ee(const PowerAllocation& alloc, const ChannelState& channel,
                             const LinkParams& params) {
    detail::check_dims(alloc, channel);
    const double consumed = alloc.total_w + params.total_circuit_power_w();
    if (!(consumed > 0.0)) throw std::invalid_argument("lower_bound_ee: total consumed power must be positive");
    return lower_bound_sum_rate(alloc, channel, params) / consumed;
}

}  // namespace mimo_ee

#endif  // MIMO_EE_LINK_METRICS_HPP
