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

#ifndef MIMO_EE_CHANNEL_HPP
#define MIMO_EE_CHANNEL_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>

namespace mimo_ee {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

/// Sub-seed for a named random stream, so the geometry, shadowing and fading
/// draws of one master seed never share generator state.
inline std::uint64_t stream_seed(std::uint64_t master_seed, std::string_view stream_label) {
    return detail::splitmix64(master_seed ^ detail::fnv1a(stream_label));
}

/// Cell geometry and large-scale propagation parameters.
struct GeometryConfig {
    double min_distance_m = 35.0;
    double max_distance_m = 250.0;
    double path_loss_exponent = 3.8;
    // Log-normal shadowing: 10*log10(rho) ~ N(0, shadow_std_db^2).
    double shadow_std_db = 3.1622776601683795;  // variance 10 dB
    double carrier_factor = 1.0;

    void validate() const {
        if (!(min_distance_m > 0.0) || !(max_distance_m > 0.0))
            throw std::invalid_argument("GeometryConfig: distances must be positive");
        // A degenerate interval (min == max) is allowed; it pins every user
        // at the same distance.
        if (min_distance_m > max_distance_m)
            throw std::invalid_argument("GeometryConfig: min_distance_m must not exceed max_distance_m");
        if (!(path_loss_exponent > 0.0))
            throw std::invalid_argument("GeometryConfig: path_loss_exponent must be positive");
        if (!(carrier_factor > 0.0))
            throw std::invalid_argument("GeometryConfig: carrier_factor must be positive");
        if (shadow_std_db < 0.0)
            throw std::invalid_argument("GeometryConfig: shadow_std_db must be nonnegative");
    }
};

/// One flat-fading realization: small-scale matrix H (M x K), large-scale
/// gains beta_k, user distances, and the composite gains g_k = beta_k*||h_k||^2.
struct ChannelState {
    Eigen::MatrixXcd small_scale;    // M x K
    Eigen::VectorXd large_scale;     // K
    Eigen::VectorXd distances;       // K (meters)
    Eigen::VectorXd composite_gain;  // K

    int num_antennas() const { return static_cast<int>(small_scale.rows()); }
    int num_users() const { return static_cast<int>(small_scale.cols()); }
};

/// Assembles a ChannelState from raw parts, filling composite gains.
inline ChannelState make_channel_state(Eigen::MatrixXcd small_scale, Eigen::VectorXd large_scale,
                                       Eigen::VectorXd distances = Eigen::VectorXd()) {
    const auto k = small_scale.cols();
    if (large_scale.size() != k)
        throw std::invalid_argument("make_channel_state: large_scale length must match columns of small_scale");
    if (distances.size() == 0) distances = Eigen::VectorXd::Ones(k);
    if (distances.size() != k)
        throw std::invalid_argument("make_channel_state: distances length must match columns of small_scale");
    ChannelState state;
    state.small_scale = std::move(small_scale);
    state.large_scale = std::move(large_scale);
    state.distances = std::move(distances);
    state.composite_gain.resize(k);
    for (Eigen::Index i = 0; i < k; ++i)
        state.composite_gain[i] = state.large_scale[i] * state.small_scale.col(i).squaredNorm();
    return state;
}

/// Draws user distances uniformly over [min_distance_m, max_distance_m].
inline Eigen::VectorXd sample_geometry(const GeometryConfig& geom, int num_users, std::uint64_t rng_seed) {
    geom.validate();
    if (num_users < 1) throw std::invalid_argument("sample_geometry: num_users must be >= 1");
    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> dist(geom.min_distance_m, geom.max_distance_m);
    Eigen::VectorXd d(num_users);
    for (int k = 0; k < num_users; ++k) d[k] = dist(rng);
    return d;
}

/// Large-scale gain beta_k = carrier_factor * rho_k / d_k^epsilon with
/// 10*log10(rho_k) ~ N(0, shadow_std_db^2), independent across users.
inline Eigen::VectorXd large_scale_gain(const Eigen::VectorXd& distances, const GeometryConfig& geom,
                                        std::uint64_t rng_seed) {
    geom.validate();
    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> shadow_db(0.0, geom.shadow_std_db > 0.0 ? geom.shadow_std_db : 1.0);
    Eigen::VectorXd beta(distances.size());
    for (Eigen::Index k = 0; k < distances.size(); ++k) {
        if (!(distances[k] > 0.0))
            throw std::invalid_argument("large_scale_gain: distances must be positive");
        const double x_db = geom.shadow_std_db > 0.0 ? shadow_db(rng) : 0.0;
        const double rho = std::pow(10.0, x_db / 10.0);
        beta[k] = geom.carrier_factor * rho / std::pow(distances[k], geom.path_loss_exponent);
    }
    return beta;
}

/// i.i.d. circularly-symmetric complex Gaussian matrix, unit entry variance
/// (real and imaginary parts each with variance 1/2). Column-major fill, so
/// the first K columns coincide across draws with larger K and equal seed.
inline Eigen::MatrixXcd sample_small_scale(int num_antennas, int num_users, std::uint64_t rng_seed) {
    if (num_antennas < 1 || num_users < 1)
        throw std::invalid_argument("sample_small_scale: dimensions must be >= 1");
    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> comp(0.0, 1.0 / std::sqrt(2.0));
    Eigen::MatrixXcd h(num_antennas, num_users);
    for (int k = 0; k < num_users; ++k)
        for (int m = 0; m < num_antennas; ++m) {
            const double re = comp(rng);
            const double im = comp(rng);
            h(m, k) = std::complex<double>(re, im);
        }
    return h;
}

/// Full channel draw: geometry, shadowing and fading from independent
/// sub-streams of the master seed.
inline ChannelState build_channel(const GeometryConfig& geom, int num_antennas, int num_users,
                                  std::uint64_t rng_seed) {
    Eigen::VectorXd d = sample_geometry(geom, num_users, stream_seed(rng_seed, "geometry"));
    Eigen::VectorXd beta = large_scale_gain(d, geom, stream_seed(rng_seed, "shadow"));
    Eigen::MatrixXcd h = sample_small_scale(num_antennas, num_users, stream_seed(rng_seed, "fading"));
    return make_channel_state(std::move(h), std::move(beta), std::move(d));
}

}  // namespace mimo_ee

#endif  // MIMO_EE_CHANNEL_HPP
