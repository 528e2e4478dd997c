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
// Energy-efficiency maximization for the feasible case: bisection over
// candidate EE values (fractional programming), with an inner Lagrangian
// power fixed point and projected-subgradient multiplier updates.

#ifndef MIMO_EE_EE_SOLVER_HPP
#define MIMO_EE_EE_SOLVER_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mimo_ee/channel.hpp"
#include "mimo_ee/link_metrics.hpp"
#include "mimo_ee/oracle.hpp"
#include "mimo_ee/qos.hpp"

namespace mimo_ee {

class InfeasibleInput : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct SolverConfig {
    // Bisection stops once the EE bracket is narrower than this (bit/J).
    // Unset: 1e-4 times a per-instance EE scale taken from the equal-split
    // allocation, so the bracket actually isolates the optimum regardless of
    // how loose the initial upper bound is.
    std::optional<double> bisection_tol;
    double fixed_point_tol_w = 1e-8;
    int max_bisection_iters = 60;
    int max_inner_iters = 500;        // Jacobi sweeps per fixed-point solve
    int max_multiplier_iters = 200;   // subgradient steps per candidate EE
    double step_theta = 0.1;          // relative to the candidate EE scale
    double step_lambda = 0.1;
    double power_floor_w = 1e-12;
    // Couple each user's price term to the users ordered before it instead
    // of after it. Differentiating the Lagrangian yields the after-k form
    // (p_k appears in the floors of later-ordered users); the before-k
    // variant is kept for comparison runs.
    bool chi_couples_earlier_users = false;

    void validate() const {
        if (bisection_tol && !(*bisection_tol > 0.0))
            throw std::invalid_argument("SolverConfig: bisection_tol must be positive");
        if (!(fixed_point_tol_w > 0.0))
            throw std::invalid_argument("SolverConfig: fixed_point_tol_w must be positive");
        if (max_bisection_iters < 1 || max_inner_iters < 1 || max_multiplier_iters < 1)
            throw std::invalid_argument("SolverConfig: iteration caps must be >= 1");
        if (!(step_theta > 0.0) || !(step_lambda > 0.0))
            throw std::invalid_argument("SolverConfig: subgradient steps must be positive");
        if (!(power_floor_w > 0.0))
            throw std::invalid_argument("SolverConfig: power_floor_w must be positive");
    }
};

struct BisectionStep {
    double lower = 0.0;
    double upper = 0.0;
    double realized_ee = 0.0;
};

struct SolverResult {
    Eigen::VectorXd powers_w;
    double achieved_ee = 0.0;  // lower-bound EE of powers_w, bit/J
    double theta = 0.0;
    Eigen::VectorXd lambda;
    bool converged = false;
    std::vector<BisectionStep> bisection_trace;
    double parametric_residual = 0.0;  // sum r~ - q_final*(sum p + M*P_c)
};

/// Dinkelbach objective: sum of lower-bound rates minus q times consumed power.
inline double parametric_objective(double q, const PowerAllocation& alloc,
                                   const ChannelState& channel, const LinkParams& params) {
    if (q < 0.0) throw std::invalid_argument("parametric_objective: q must be nonnegative");
    return lower_bound_sum_rate(alloc, channel, params) -
           q * (alloc.total_w + params.total_circuit_power_w());
}

/// Price coupling of user k's power in the stationarity condition:
/// its own multiplier minus the (omega_j - 1)-weighted multipliers of the
/// users whose QoS floor contains p_k. Differentiating the Lagrangian, those
/// are the users ordered after k; the alternative sums the users before k.
inline double chi_term(int user_index, const Eigen::VectorXd& lambda, const Eigen::VectorXd& omega,
                       const std::vector<int>& order, bool couple_earlier_users = false) {
    const int num_users = static_cast<int>(order.size());
    if (lambda.size() != num_users || omega.size() != num_users)
        throw std::invalid_argument("chi_term: dimension mismatch");
    int position = -1;
    for (int pos = 0; pos < num_users; ++pos)
        if (order[pos] == user_index) {
            position = pos;
            break;
        }
    if (position < 0) throw std::invalid_argument("chi_term: user_index not present in order");
    double coupled = 0.0;
    if (couple_earlier_users) {
        for (int pos = 0; pos < position; ++pos) {
            const int j = order[pos];
            coupled += (omega[j] - 1.0) * lambda[j];
        }
    } else {
        for (int pos = position + 1; pos < num_users; ++pos) {
            const int j = order[pos];
            coupled += (omega[j] - 1.0) * lambda[j];
        }
    }
    return lambda[user_index] - coupled;
}

struct FixedPointResult {
    Eigen::VectorXd powers;
    bool converged = false;
    // False when some stationarity denominator went nonpositive: no positive
    // power satisfies the condition at this (q, theta, lambda).
    bool attainable = true;
    int iterations = 0;
};

/// Jacobi iteration of the stationarity fixed point
///   p_k = B / ( ln2*(q + theta + chi_k) + sum_{j!=k} B/(sum_{i!=j} p_i + sigma^2/beta_j) ),
/// all users updated from the previous iterate, clamped below at the power
/// floor, until the largest componentwise change drops under the tolerance.
inline FixedPointResult fixed_point_power_update(double q, double theta,
                                                 const Eigen::VectorXd& lambda,
                                                 const ChannelState& channel, const QosSpec& qos,
                                                 const LinkParams& params,
                                                 const Eigen::VectorXd& initial_powers,
                                                 const SolverConfig& config,
                                                 const std::vector<int>& order) {
    if (q < 0.0 || theta < 0.0) throw std::invalid_argument("fixed_point_power_update: q and theta must be nonnegative");
    for (Eigen::Index k = 0; k < lambda.size(); ++k)
        if (lambda[k] < 0.0) throw std::invalid_argument("fixed_point_power_update: lambda must be nonnegative");
    const int num_users = channel.num_users();
    if (initial_powers.size() != num_users || lambda.size() != num_users)
        throw std::invalid_argument("fixed_point_power_update: dimension mismatch");
    for (int k = 0; k < num_users; ++k)
        if (!(initial_powers[k] > 0.0))
            throw std::invalid_argument("fixed_point_power_update: initial powers must be positive");

    constexpr double kPowerCeiling = 1e18;  // divergence guard at tiny prices
    const double ln2 = std::numbers::ln2_v<double>;
    const double bandwidth = params.bandwidth_hz;

    Eigen::VectorXd chi(num_users);
    for (int k = 0; k < num_users; ++k)
        chi[k] = chi_term(k, lambda, qos.omega, order, config.chi_couples_earlier_users);

    FixedPointResult result;
    Eigen::VectorXd powers = initial_powers.cwiseMax(config.power_floor_w);
    Eigen::VectorXd next(num_users);
    for (int it = 1; it <= config.max_inner_iters; ++it) {
        const double total = powers.sum();
        for (int k = 0; k < num_users; ++k) {
            double interference_price = 0.0;
            for (int j = 0; j < num_users; ++j) {
                if (j == k) continue;
                interference_price +=
                    bandwidth / ((total - powers[j]) + params.noise_power_w / channel.large_scale[j]);
            }
            const double denom = ln2 * (q + theta + chi[k]) + interference_price;
            if (!(denom > 0.0)) {
                result.powers = powers;
                result.attainable = false;
                result.iterations = it;
                return result;
            }
            next[k] = std::clamp(bandwidth / denom, config.power_floor_w, kPowerCeiling);
        }
        const double delta = (next - powers).cwiseAbs().maxCoeff();
        powers = next;
        result.iterations = it;
        if (delta < config.fixed_point_tol_w) {
            result.converged = true;
            break;
        }
    }
    result.powers = std::move(powers);
    return result;
}

/// Projected subgradient step on the budget and QoS multipliers, with a
/// diminishing step s_n = step*step_scale/sqrt(n). step_scale carries the EE
/// scale of the instance so the default steps are usable in SI units.
inline std::pair<double, Eigen::VectorXd> update_multipliers(
    double theta, const Eigen::VectorXd& lambda, const Eigen::VectorXd& powers,
    const ChannelState& channel, const QosSpec& qos, const std::vector<int>& order,
    double max_power_w, const SolverConfig& config, int iteration, double step_scale = 1.0) {
    if (iteration < 1) throw std::invalid_argument("update_multipliers: iteration must be >= 1");
    const double root_n = std::sqrt(static_cast<double>(iteration));
    const double step_theta = config.step_theta * step_scale / root_n;
    const double step_lambda = config.step_lambda * step_scale / root_n;

    const double next_theta = std::max(0.0, theta - step_theta * (max_power_w - powers.sum()));
    const Eigen::VectorXd required = qos_requirement_at(channel, qos, order, powers);
    Eigen::VectorXd next_lambda(lambda.size());
    for (Eigen::Index k = 0; k < lambda.size(); ++k)
        next_lambda[k] = std::max(0.0, lambda[k] - step_lambda * (powers[k] - required[k]));
    return {next_theta, next_lambda};
}

namespace detail {

// Pull every iterate back into the feasible set: scale down into the budget,
// then raise to the sequential QoS floors walking the decode order, and if
// the raises broke the budget fall back to the bare minimum-power solution
// (which fits whenever the feasibility gate passed).
inline Eigen::VectorXd project_feasible(Eigen::VectorXd powers, const ChannelState& channel,
                                        const QosSpec& qos, const std::vector<int>& order,
                                        double max_power_w, double power_floor_w) {
    const int num_users = channel.num_users();
    powers = powers.cwiseMax(power_floor_w);
    const double total = powers.sum();
    if (total > max_power_w && total > 0.0) powers *= max_power_w / total;

    double cumulative = 0.0;
    for (int idx : order) {
        const double req = (qos.omega[idx] - 1.0) *
                           (cumulative + 1.0 / (qos.qos_snr * channel.composite_gain[idx]));
        if (powers[idx] < req) powers[idx] = req;
        cumulative += powers[idx];
    }
    if (powers.sum() > max_power_w * (1.0 + 1e-9))
        powers = min_required_powers(channel, qos, order);
    return powers.cwiseMax(power_floor_w);
}

struct DualSolveOut {
    Eigen::VectorXd powers;
    double theta = 0.0;
    Eigen::VectorXd lambda;
    bool fixed_point_converged = false;
    // The loop reached an allocation that further price updates do not move
    // (either the multipliers stalled or the powers did).
    bool stationary = false;
};

// Multiplier loop around the power fixed point at one candidate EE value.
// Exits once the prices stop changing or stop moving the allocation; the
// iteration cap is a budget for the subgradient steps, not a convergence
// criterion.
inline DualSolveOut dual_solve(double q, const ChannelState& channel, const QosSpec& qos,
                               const LinkParams& params, double max_power_w,
                               const SolverConfig& config, const std::vector<int>& order) {
    const int num_users = channel.num_users();
    DualSolveOut out;
    out.theta = 0.0;
    out.lambda = Eigen::VectorXd::Zero(num_users);
    out.powers = Eigen::VectorXd::Constant(num_users, std::max(max_power_w / num_users,
                                                               config.power_floor_w));
    const double step_scale = std::max(q, 1e-30);
    const double stall_tol = 1e-12 * std::max(q, 1.0);
    bool have_previous = false;
    Eigen::VectorXd previous_powers;
    for (int n = 1; n <= config.max_multiplier_iters; ++n) {
        const FixedPointResult fp = fixed_point_power_update(q, out.theta, out.lambda, channel, qos,
                                                             params, out.powers, config, order);
        if (!fp.attainable) break;  // candidate unattainable at these prices
        out.powers = fp.powers;
        out.fixed_point_converged = fp.converged;
        if (have_previous &&
            (out.powers - previous_powers).cwiseAbs().maxCoeff() < config.fixed_point_tol_w) {
            out.stationary = true;
            break;
        }
        previous_powers = out.powers;
        have_previous = true;
        auto [next_theta, next_lambda] =
            update_multipliers(out.theta, out.lambda, out.powers, channel, qos, order, max_power_w,
                               config, n, step_scale);
        const double move = std::max(std::abs(next_theta - out.theta),
                                     (next_lambda - out.lambda).cwiseAbs().maxCoeff());
        out.theta = next_theta;
        out.lambda = next_lambda;
        if (move <= stall_tol) {
            out.stationary = true;
            break;
        }
    }
    return out;
}

}  // namespace detail

/// Feasible-case EE maximization. Bisection on the candidate EE over
/// [0, v] with v = B*min_k(g_k)/(mu*sigma^2*ln2); at each candidate the dual
/// loop produces powers, which are projected into the feasible set and
/// scored by their realized lower-bound EE. The candidate bracket side is
/// chosen by comparing realized EE against the candidate; the best feasible
/// iterate seen anywhere (including the equal-split start) is returned.
inline SolverResult solve_ee(const ChannelState& channel, const QosSpec& qos,
                             const LinkParams& params, double max_power_w,
                             const SolverConfig& config = {}) {
    config.validate();
    params.validate();
    if (!(max_power_w > 0.0)) throw std::invalid_argument("solve_ee: max_power_w must be positive");
    const FeasibilityVerdict verdict = check_feasibility(channel, qos, max_power_w);
    if (!verdict.feasible)
        throw InfeasibleInput("solve_ee: summed QoS minimum powers exceed the power budget");
    const std::vector<int>& order = verdict.order;
    const int num_users = channel.num_users();
    const double ln2 = std::numbers::ln2_v<double>;

    const auto realized_ee = [&](const Eigen::VectorXd& p) {
        PowerAllocation alloc;
        alloc.powers_w = p;
        alloc.total_w = p.sum();
        return lower_bound_ee(alloc, channel, params);
    };

    SolverResult result;
    result.lambda = Eigen::VectorXd::Zero(num_users);

    // Equal split is the initial iterate; its projection seeds the incumbent.
    Eigen::VectorXd best_powers = detail::project_feasible(
        Eigen::VectorXd::Constant(num_users, max_power_w / num_users), channel, qos, order,
        max_power_w, config.power_floor_w);
    double best_ee = realized_ee(best_powers);
    double best_theta = 0.0;
    Eigen::VectorXd best_lambda = Eigen::VectorXd::Zero(num_users);
    bool best_inner_ok = true;

    const double v_init =
        params.bandwidth_hz * channel.composite_gain.minCoeff() /
        (params.snr_gap * params.noise_power_w * ln2);
    const double tol =
        config.bisection_tol ? *config.bisection_tol
                             : 1e-4 * std::max(best_ee, 1e-5 * v_init);

    double u = 0.0, v = v_init, q_final = v_init / 2.0;
    bool bracket_closed = false;
    bool bracket_saturated = false;
    bool final_inner_ok = true;

    for (int attempt = 0; attempt < 4; ++attempt) {
        // Any realized EE is achievable, so it lower-bounds the optimum and
        // may tighten u directly; the midpoint test still drives v down.
        u = std::max(0.0, best_ee);
        v = v_init * std::pow(10.0, attempt);
        const double v_start = v;
        bracket_saturated = u >= v;
        result.bisection_trace.clear();
        for (int it = 0; it < config.max_bisection_iters && !bracket_saturated && (v - u) >= tol;
             ++it) {
            const double q = 0.5 * (u + v);
            const detail::DualSolveOut inner =
                detail::dual_solve(q, channel, qos, params, max_power_w, config, order);
            const Eigen::VectorXd projected = detail::project_feasible(
                inner.powers, channel, qos, order, max_power_w, config.power_floor_w);
            const double realized = realized_ee(projected);
            result.bisection_trace.push_back({u, v, realized});
            if (realized > best_ee) {
                best_ee = realized;
                best_powers = projected;
                best_theta = inner.theta;
                best_lambda = inner.lambda;
                best_inner_ok = inner.fixed_point_converged;
            }
            if (realized >= v) {
                bracket_saturated = true;  // v was not an upper bound
                break;
            }
            u = std::max(u, realized);
            if (realized < q) v = q;
        }
        bracket_closed = (v - u) < tol;
        q_final = 0.5 * (u + v);

        if (!bracket_saturated) {
            // Polish at the terminal candidate.
            const detail::DualSolveOut inner =
                detail::dual_solve(q_final, channel, qos, params, max_power_w, config, order);
            final_inner_ok = inner.fixed_point_converged && inner.stationary;
            const Eigen::VectorXd projected = detail::project_feasible(
                inner.powers, channel, qos, order, max_power_w, config.power_floor_w);
            const double realized = realized_ee(projected);
            result.bisection_trace.push_back({u, v, realized});
            if (realized > best_ee) {
                best_ee = realized;
                best_powers = projected;
                best_theta = inner.theta;
                best_lambda = inner.lambda;
                best_inner_ok = inner.fixed_point_converged;
            }
            if (realized < v) {
                u = std::max(u, realized);
                q_final = 0.5 * (u + v);
            }
        }

        // Either the lower edge climbed to the initial upper bound or some
        // iterate beat it outright; widen and redo.
        bracket_saturated = bracket_saturated || u >= v_start - tol;
        if (!bracket_saturated) break;
    }

    result.powers_w = best_powers;
    result.achieved_ee = best_ee;
    result.theta = best_theta;
    result.lambda = best_lambda;
    result.converged = bracket_closed && final_inner_ok && best_inner_ok && !bracket_saturated;
    PowerAllocation final_alloc;
    final_alloc.powers_w = result.powers_w;
    final_alloc.total_w = result.powers_w.sum();
    result.parametric_residual =
        lower_bound_sum_rate(final_alloc, channel, params) -
        q_final * (final_alloc.total_w + params.total_circuit_power_w());
    return result;
}

}  // namespace mimo_ee

#endif  // MIMO_EE_EE_SOLVER_HPP
