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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "mimo_ee/channel.hpp"
#include "mimo_ee/ee_solver.hpp"
#include "mimo_ee/oracle.hpp"

using namespace mimo_ee;

namespace {

struct Instance {
    ChannelState channel;
    LinkParams params;
    QosSpec qos;
    double max_power_w;
};

Instance baseline_instance(int num_users, std::uint64_t seed, double min_rate = 1.0) {
    GeometryConfig geom;
    Instance in{build_channel(geom, 128, num_users, seed), LinkParams{}, {}, 1.0};
    in.qos = QosSpec::uniform(num_users, min_rate, default_qos_snr(in.params));
    return in;
}

// Small synthetic instance in friendly units: B = 1 Hz, sigma^2 = 1 W.
Instance synthetic_instance(int num_users, std::uint64_t seed, double min_rate = 0.5) {
    Instance in{make_channel_state(sample_small_scale(64, num_users, seed),
                                   Eigen::VectorXd::Ones(num_users)),
                LinkParams::make(1.0, 1.0, 0.05, 64, 0.2), {}, 2.0};
    in.qos = QosSpec::uniform(num_users, min_rate, default_qos_snr(in.params));
    return in;
}

double stationarity_residual(double q, double theta, const Eigen::VectorXd& chi,
                             const Eigen::VectorXd& p, const ChannelState& channel,
                             const LinkParams& params, int k) {
    const double ln2 = std::numbers::ln2_v<double>;
    const double total = p.sum();
    double interference_price = 0.0;
    for (int j = 0; j < channel.num_users(); ++j) {
        if (j == k) continue;
        interference_price +=
            params.bandwidth_hz / ((total - p[j]) + params.noise_power_w / channel.large_scale[j]);
    }
    return interference_price / ln2 - params.bandwidth_hz / (p[k] * ln2) + q + theta + chi[k];
}

}  // namespace

TEST_CASE("parametric_objective") {
    const auto in = synthetic_instance(2, 7);
    const auto alloc = PowerAllocation::from((Eigen::VectorXd(2) << 0.4, 0.3).finished());

    SECTION("q = 0 collapses to the lower-bound sum rate") {
        CHECK(parametric_objective(0.0, alloc, in.channel, in.params) ==
              Catch::Approx(lower_bound_sum_rate(alloc, in.channel, in.params)).epsilon(1e-12));
    }
    SECTION("strictly decreasing in q at fixed powers") {
        const double f1 = parametric_objective(0.5, alloc, in.channel, in.params);
        const double f2 = parametric_objective(1.5, alloc, in.channel, in.params);
        CHECK(f1 > f2);
    }
    SECTION("rejects negative q") {
        CHECK_THROWS_AS(parametric_objective(-1.0, alloc, in.channel, in.params),
                        std::invalid_argument);
    }
}

TEST_CASE("chi_term") {
    const std::vector<int> order{0, 1};
    const Eigen::VectorXd omega = (Eigen::VectorXd(2) << 2.0, 2.0).finished();

    SECTION("zero multipliers give zero") {
        CHECK(chi_term(0, Eigen::VectorXd::Zero(2), omega, order) == 0.0);
        CHECK(chi_term(1, Eigen::VectorXd::Zero(2), omega, order) == 0.0);
    }
    SECTION("last user in the order keeps only its own multiplier") {
        const Eigen::VectorXd lambda = (Eigen::VectorXd(2) << 0.7, 0.3).finished();
        CHECK(chi_term(1, lambda, omega, order) == Catch::Approx(0.3).epsilon(1e-15));
    }
    SECTION("two-user hand differentiation") {
        const Eigen::VectorXd lambda = Eigen::VectorXd::Ones(2);
        CHECK(chi_term(0, lambda, omega, order) == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("alternative index range couples the earlier users instead") {
        const Eigen::VectorXd lambda = (Eigen::VectorXd(2) << 0.5, 1.0).finished();
        CHECK(chi_term(0, lambda, omega, order, true) == Catch::Approx(0.5).epsilon(1e-15));
        CHECK(chi_term(1, lambda, omega, order, true) == Catch::Approx(1.0 - 0.5).epsilon(1e-15));
    }
}

TEST_CASE("fixed_point_power_update") {
    SECTION("single user closed form reproduces itself in one step") {
        Eigen::MatrixXcd h = Eigen::MatrixXcd::Ones(1, 1);
        const auto channel = make_channel_state(h, Eigen::VectorXd::Ones(1));
        const auto params = LinkParams::make(1.0, 1.0, 1.0, 128, 0.2);
        const auto qos = QosSpec::uniform(1, 0.0, 1.0);
        const double q = params.bandwidth_hz / std::numbers::ln2_v<double>;  // fixed point at 1 W
        SolverConfig config;
        const auto res =
            fixed_point_power_update(q, 0.0, Eigen::VectorXd::Zero(1), channel, qos, params,
                                     Eigen::VectorXd::Ones(1), config, {0});
        CHECK(res.converged);
        CHECK(res.iterations == 1);
        CHECK(res.powers[0] == Catch::Approx(1.0).epsilon(1e-12));
    }
    SECTION("fixed points satisfy the stationarity equation") {
        SolverConfig config;
        config.fixed_point_tol_w = 1e-13;
        config.max_inner_iters = 5000;
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> q_draw(0.2, 3.0);
        for (int trial = 0; trial < 100; ++trial) {
            const auto in = synthetic_instance(3, 600 + trial);
            const auto order = decode_order(in.channel);
            const double q = q_draw(rng);
            const Eigen::VectorXd lambda = Eigen::VectorXd::Zero(3);
            const auto res = fixed_point_power_update(q, 0.0, lambda, in.channel, in.qos, in.params,
                                                      Eigen::VectorXd::Constant(3, 0.5), config, order);
            REQUIRE(res.attainable);
            REQUIRE(res.converged);
            Eigen::VectorXd chi(3);
            for (int k = 0; k < 3; ++k) chi[k] = chi_term(k, lambda, in.qos.omega, order);
            for (int k = 0; k < 3; ++k) {
                const double residual =
                    stationarity_residual(q, 0.0, chi, res.powers, in.channel, in.params, k);
                CHECK(std::abs(residual) <= 1e-6 * (q + 1.0));
            }
        }
    }
    SECTION("larger q prices power down componentwise") {
        SolverConfig config;
        std::mt19937_64 rng(13);
        std::uniform_real_distribution<double> q_draw(0.1, 2.0);
        for (int trial = 0; trial < 100; ++trial) {
            const auto in = synthetic_instance(3, 900 + trial);
            const auto order = decode_order(in.channel);
            const double q1 = q_draw(rng);
            const double q2 = q1 + q_draw(rng);
            const auto lo = fixed_point_power_update(q2, 0.0, Eigen::VectorXd::Zero(3), in.channel,
                                                     in.qos, in.params,
                                                     Eigen::VectorXd::Constant(3, 0.5), config, order);
            const auto hi = fixed_point_power_update(q1, 0.0, Eigen::VectorXd::Zero(3), in.channel,
                                                     in.qos, in.params,
                                                     Eigen::VectorXd::Constant(3, 0.5), config, order);
            REQUIRE(lo.converged);
            REQUIRE(hi.converged);
            for (int k = 0; k < 3; ++k) CHECK(lo.powers[k] <= hi.powers[k] * (1.0 + 1e-9));
        }
    }
    SECTION("rejects nonpositive initial powers") {
        const auto in = synthetic_instance(2, 3);
        SolverConfig config;
        CHECK_THROWS_AS(
            fixed_point_power_update(1.0, 0.0, Eigen::VectorXd::Zero(2), in.channel, in.qos,
                                     in.params, Eigen::VectorXd::Zero(2), config, decode_order(in.channel)),
            std::invalid_argument);
    }
}

TEST_CASE("update_multipliers") {
    const auto in = synthetic_instance(2, 21, 1.0);
    const auto order = decode_order(in.channel);
    SolverConfig config;

    SECTION("slack constraints with zero prices stay at zero") {
        const Eigen::VectorXd p = min_required_powers(in.channel, in.qos, order) * 2.0 +
                                  Eigen::VectorXd::Constant(2, 0.05);
        REQUIRE(p.sum() < in.max_power_w);
        const auto [theta, lambda] = update_multipliers(0.0, Eigen::VectorXd::Zero(2), p, in.channel,
                                                        in.qos, order, in.max_power_w, config, 1);
        CHECK(theta == 0.0);
        CHECK(lambda[0] == 0.0);
        CHECK(lambda[1] == 0.0);
    }
    SECTION("budget violation raises the budget price") {
        const Eigen::VectorXd p = Eigen::VectorXd::Constant(2, in.max_power_w);
        const auto [theta, lambda] =
            update_multipliers(0.1, Eigen::VectorXd::Zero(2), p, in.channel, in.qos, order,
                               in.max_power_w, config, 1);
        CHECK(theta > 0.1);
    }
    SECTION("QoS violation raises that user's price") {
        const auto req = min_required_powers(in.channel, in.qos, order);
        Eigen::VectorXd p = req;
        const int weakest = order.back();
        p[weakest] = req[weakest] / 2.0;
        const auto [theta, lambda] = update_multipliers(0.0, Eigen::VectorXd::Constant(2, 0.2), p,
                                                        in.channel, in.qos, order, in.max_power_w,
                                                        config, 1);
        CHECK(lambda[weakest] > 0.2);
    }
}

TEST_CASE("solve_ee") {
    SECTION("rejects infeasible instances") {
        Eigen::MatrixXcd h = Eigen::MatrixXcd::Ones(1, 2);
        const auto channel = make_channel_state(h, Eigen::VectorXd::Ones(2));
        const auto qos = QosSpec::uniform(2, 1.0, 1.0);  // needs 3 W total
        const auto params = LinkParams::make(1.0, 1.0, 1.0, 4, 0.2);
        CHECK_THROWS_AS(solve_ee(channel, qos, params, 1.0), InfeasibleInput);
    }
    SECTION("matches the golden-section oracle at K=1") {
        for (std::uint64_t seed : {11ULL, 12ULL, 13ULL, 14ULL, 15ULL}) {
            const auto in = baseline_instance(1, seed);
            const auto res = solve_ee(in.channel, in.qos, in.params, in.max_power_w);
            const auto golden = golden_section_ee(in.channel, in.qos, in.params, in.max_power_w);
            REQUIRE(golden.found);
            CHECK(std::abs(res.achieved_ee - golden.ee) <= 5e-3 * golden.ee);
        }
    }
    SECTION("matches the grid oracle at K=2") {
        for (std::uint64_t seed : {21ULL, 22ULL, 23ULL, 24ULL, 25ULL, 26ULL, 27ULL, 28ULL}) {
            const auto in = baseline_instance(2, seed);
            REQUIRE(check_feasibility(in.channel, in.qos, in.max_power_w).feasible);
            const auto res = solve_ee(in.channel, in.qos, in.params, in.max_power_w);
            GridSpec grid;
            grid.points_per_dim = 200;
            grid.max_power_w = in.max_power_w;
            const auto ref = grid_search_ee(in.channel, in.qos, in.params, in.max_power_w, grid);
            REQUIRE(ref.found);
            CHECK(std::abs(res.achieved_ee - ref.ee) <= 0.01 * ref.ee);
        }
    }
    SECTION("deterministic") {
        const auto in = baseline_instance(3, 77);
        const auto a = solve_ee(in.channel, in.qos, in.params, in.max_power_w);
        const auto b = solve_ee(in.channel, in.qos, in.params, in.max_power_w);
        CHECK(a.powers_w == b.powers_w);
        CHECK(a.achieved_ee == b.achieved_ee);
        CHECK(a.bisection_trace.size() == b.bisection_trace.size());
    }
    SECTION("bracket bookkeeping") {
        const auto in = baseline_instance(3, 31);
        const auto res = solve_ee(in.channel, in.qos, in.params, in.max_power_w);
        REQUIRE(res.converged);
        REQUIRE(res.bisection_trace.size() >= 2);
        for (std::size_t i = 0; i < res.bisection_trace.size(); ++i) {
            CHECK(res.bisection_trace[i].lower <= res.bisection_trace[i].upper);
            if (i > 0) {
                CHECK(res.bisection_trace[i].lower >= res.bisection_trace[i - 1].lower);
                CHECK(res.bisection_trace[i].upper <= res.bisection_trace[i - 1].upper);
            }
        }
        // Width at least halves each iteration (realized-EE feedback can
        // tighten the lower edge beyond the midpoint; the final polish row
        // repeats the bracket).
        for (std::size_t i = 1; i + 1 < res.bisection_trace.size(); ++i) {
            const double prev = res.bisection_trace[i - 1].upper - res.bisection_trace[i - 1].lower;
            const double cur = res.bisection_trace[i].upper - res.bisection_trace[i].lower;
            CHECK(cur <= prev / 2.0 * (1.0 + 1e-9));
        }
    }
    SECTION("terminal residual satisfies the root condition") {
        SolverConfig config;
        config.bisection_tol = 1.0;  // bit/J
        for (std::uint64_t seed : {41ULL, 42ULL, 43ULL}) {
            const auto in = baseline_instance(3, seed);
            const auto res = solve_ee(in.channel, in.qos, in.params, in.max_power_w, config);
            REQUIRE(res.converged);
            const double consumed = res.powers_w.sum() + in.params.total_circuit_power_w();
            CHECK(std::abs(res.parametric_residual) <= 10.0 * *config.bisection_tol * (consumed + 1.0));
            CHECK(std::abs(res.parametric_residual) / (res.achieved_ee * consumed + 1.0) <=
                  10.0 * *config.bisection_tol);
        }
    }
    SECTION("respects an explicit bisection tolerance") {
        const auto in = baseline_instance(2, 55);
        SolverConfig config;
        config.bisection_tol = 50.0;  // bit/J
        const auto res = solve_ee(in.channel, in.qos, in.params, in.max_power_w, config);
        REQUIRE(res.converged);
        const auto& last = res.bisection_trace.back();
        CHECK(last.upper - last.lower < 50.0);
    }
    SECTION("returned powers satisfy every constraint") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> rate(0.2, 3.0);
        std::uniform_real_distribution<double> budget(0.2, 3.0);
        for (int trial = 0; trial < 60; ++trial) {
            Instance in = baseline_instance(3, 7000 + trial, rate(rng));
            in.max_power_w = budget(rng);
            if (!check_feasibility(in.channel, in.qos, in.max_power_w).feasible) continue;
            const auto res = solve_ee(in.channel, in.qos, in.params, in.max_power_w);
            CHECK(res.powers_w.sum() <= in.max_power_w * (1.0 + 1e-9));
            CHECK(res.powers_w.minCoeff() >= SolverConfig{}.power_floor_w);
            const auto order = decode_order(in.channel);
            const auto need = qos_requirement_at(in.channel, in.qos, order, res.powers_w);
            for (int k = 0; k < 3; ++k) CHECK(res.powers_w[k] >= need[k] - 1e-6);
        }
    }
    SECTION("alternative chi index range still yields a feasible solution") {
        const auto in = baseline_instance(3, 91);
        SolverConfig alt;
        alt.chi_couples_earlier_users = true;
        const auto res = solve_ee(in.channel, in.qos, in.params, in.max_power_w, alt);
        CHECK(res.powers_w.sum() <= in.max_power_w * (1.0 + 1e-9));
        const auto order = decode_order(in.channel);
        const auto need = qos_requirement_at(in.channel, in.qos, order, res.powers_w);
        for (int k = 0; k < 3; ++k) CHECK(res.powers_w[k] >= need[k] - 1e-6);
        const auto base = solve_ee(in.channel, in.qos, in.params, in.max_power_w);
        CHECK(res.achieved_ee == Catch::Approx(base.achieved_ee).epsilon(1e-3));
    }
    SECTION("never loses to a feasible equal split") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> rate(0.2, 2.0);
        for (int trial = 0; trial < 60; ++trial) {
            const auto in = baseline_instance(3, 8000 + trial, rate(rng));
            const Eigen::VectorXd equal = Eigen::VectorXd::Constant(3, in.max_power_w / 3.0);
            const auto order = decode_order(in.channel);
            const auto need = qos_requirement_at(in.channel, in.qos, order, equal);
            bool equal_feasible = true;
            for (int k = 0; k < 3; ++k) equal_feasible = equal_feasible && equal[k] >= need[k];
            if (!equal_feasible) continue;
            const auto res = solve_ee(in.channel, in.qos, in.params, in.max_power_w);
            const double equal_ee =
                lower_bound_ee(PowerAllocation::from(equal), in.channel, in.params);
            CHECK(res.achieved_ee >= equal_ee - 1e-9 * std::abs(equal_ee));
        }
    }
}
