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

#ifndef MIMO_EE_SERIALIZATION_HPP
#define MIMO_EE_SERIALIZATION_HPP

#include <json.hpp>

#include "mimo_ee/admission.hpp"
#include "mimo_ee/channel.hpp"
#include "mimo_ee/ee_solver.hpp"
#include "mimo_ee/qos.hpp"

namespace mimo_ee {

namespace detail {

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& arr) {
    Eigen::VectorXd v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    return v;
}

}  // namespace detail

// Complex entries serialize as [re, im] pairs; the matrix as rows of pairs.
inline void to_json(nlohmann::json& j, const ChannelState& state) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index m = 0; m < state.small_scale.rows(); ++m) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index k = 0; k < state.small_scale.cols(); ++k) {
            const auto& z = state.small_scale(m, k);
            row.push_back(nlohmann::json::array({z.real(), z.imag()}));
        }
        rows.push_back(std::move(row));
    }
    j = nlohmann::json{{"small_scale", std::move(rows)},
                       {"large_scale", detail::vector_to_json(state.large_scale)},
                       {"distances", detail::vector_to_json(state.distances)},
                       {"composite_gain", detail::vector_to_json(state.composite_gain)}};
}

inline void from_json(const nlohmann::json& j, ChannelState& state) {
    const auto& rows = j.at("small_scale");
    const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index k = m > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
    state.small_scale.resize(m, k);
    for (Eigen::Index r = 0; r < m; ++r)
        for (Eigen::Index c = 0; c < k; ++c) {
            const auto& pair = rows[r][c];
            state.small_scale(r, c) =
                std::complex<double>(pair[0].get<double>(), pair[1].get<double>());
        }
    state.large_scale = detail::vector_from_json(j.at("large_scale"));
    state.distances = detail::vector_from_json(j.at("distances"));
    state.composite_gain = detail::vector_from_json(j.at("composite_gain"));
}

inline void to_json(nlohmann::json& j, const FeasibilityVerdict& v) {
    j = nlohmann::json{{"feasible", v.feasible},
                       {"required_powers_w", detail::vector_to_json(v.required_powers_w)},
                       {"required_total_w", v.required_total_w},
                       {"order", v.order}};
}

inline void to_json(nlohmann::json& j, const BisectionStep& s) {
    j = nlohmann::json{{"u", s.lower}, {"v", s.upper}, {"realized_ee", s.realized_ee}};
}

inline void from_json(const nlohmann::json& j, BisectionStep& s) {
    s.lower = j.at("u").get<double>();
    s.upper = j.at("v").get<double>();
    s.realized_ee = j.at("realized_ee").get<double>();
}

inline void to_json(nlohmann::json& j, const SolverResult& r) {
    j = nlohmann::json{{"powers_w", detail::vector_to_json(r.powers_w)},
                       {"achieved_ee_bit_per_j", r.achieved_ee},
                       {"theta", r.theta},
                       {"lambda", detail::vector_to_json(r.lambda)},
                       {"converged", r.converged},
                       {"parametric_residual", r.parametric_residual},
                       {"bisection_trace", r.bisection_trace}};
}

inline void from_json(const nlohmann::json& j, SolverResult& r) {
    r.powers_w = detail::vector_from_json(j.at("powers_w"));
    r.achieved_ee = j.at("achieved_ee_bit_per_j").get<double>();
    r.theta = j.at("theta").get<double>();
    r.lambda = detail::vector_from_json(j.at("lambda"));
    r.converged = j.at("converged").get<bool>();
    r.parametric_residual = j.at("parametric_residual").get<double>();
    r.bisection_trace = j.at("bisection_trace").get<std::vector<BisectionStep>>();
}

inline void to_json(nlohmann::json& j, const AdmissionResult& r) {
    j = nlohmann::json{{"admitted", r.admitted},
                       {"powers_w", detail::vector_to_json(r.powers_w)},
                       {"remaining_w", r.remaining_w},
                       {"admitted_count", r.admitted_count},
                       {"admission_sequence", r.admission_sequence}};
}

inline void from_json(const nlohmann::json& j, AdmissionResult& r) {
    r.admitted = j.at("admitted").get<std::vector<bool>>();
    r.powers_w = detail::vector_from_json(j.at("powers_w"));
    r.remaining_w = j.at("remaining_w").get<double>();
    r.admitted_count = j.at("admitted_count").get<int>();
    r.admission_sequence = j.at("admission_sequence").get<std::vector<int>>();
}

}  // namespace mimo_ee

#endif  // MIMO_EE_SERIALIZATION_HPP
