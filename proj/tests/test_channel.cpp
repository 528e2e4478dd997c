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

#include "mimo_ee/channel.hpp"
#include "mimo_ee/serialization.hpp"

using namespace mimo_ee;

TEST_CASE("stream seeds separate the named substreams") {
    const std::uint64_t master = 42;
    CHECK(stream_seed(master, "geometry") != stream_seed(master, "shadow"));
    CHECK(stream_seed(master, "geometry") != stream_seed(master, "fading"));
    CHECK(stream_seed(master, "shadow") != stream_seed(master, "fading"));
    CHECK(stream_seed(master, "geometry") == stream_seed(master, "geometry"));
    CHECK(stream_seed(master, "geometry") != stream_seed(master + 1, "geometry"));
}

TEST_CASE("sample_geometry") {
    GeometryConfig geom;

    SECTION("degenerate interval pins every user") {
        geom.min_distance_m = 100.0;
        geom.max_distance_m = 100.0;
        const auto d = sample_geometry(geom, 4, 9);
        for (int k = 0; k < 4; ++k) CHECK(d[k] == 100.0);
    }
    SECTION("deterministic given the seed") {
        const auto a = sample_geometry(geom, 3, 1234);
        const auto b = sample_geometry(geom, 3, 1234);
        CHECK(a == b);
        const auto c = sample_geometry(geom, 3, 1235);
        CHECK(a != c);
    }
    SECTION("sample mean matches the uniform law") {
        const int n = 100000;
        const auto d = sample_geometry(geom, n, 7);
        const double mean = d.mean();
        CHECK(std::abs(mean - 142.5) <= 0.01 * 142.5);
        CHECK(d.minCoeff() >= 35.0);
        CHECK(d.maxCoeff() <= 250.0);
    }
    SECTION("rejects zero users") {
        CHECK_THROWS_AS(sample_geometry(geom, 0, 1), std::invalid_argument);
    }
    SECTION("rejects inverted interval") {
        geom.min_distance_m = 300.0;
        CHECK_THROWS_AS(sample_geometry(geom, 1, 1), std::invalid_argument);
    }
}

TEST_CASE("large_scale_gain") {
    GeometryConfig geom;

    SECTION("all factors unity") {
        geom.shadow_std_db = 0.0;
        geom.path_loss_exponent = 3.8;
        geom.carrier_factor = 1.0;
        Eigen::VectorXd d(1);
        d << 1.0;
        CHECK(large_scale_gain(d, geom, 3)[0] == Catch::Approx(1.0).epsilon(1e-15));
    }
    SECTION("inverse square law") {
        geom.shadow_std_db = 0.0;
        geom.path_loss_exponent = 2.0;
        Eigen::VectorXd d(1);
        d << 2.0;
        CHECK(large_scale_gain(d, geom, 3)[0] == Catch::Approx(0.25).epsilon(1e-15));
    }
    SECTION("shadowing is zero-mean in dB") {
        geom.shadow_std_db = 10.0;
        geom.path_loss_exponent = 1.0;
        const int n = 100000;
        const Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
        const auto beta = large_scale_gain(d, geom, 11);
        double acc = 0.0;
        for (int k = 0; k < n; ++k) acc += 10.0 * std::log10(beta[k]);
        CHECK(std::abs(acc / n) <= 0.2);
    }
    SECTION("rejects nonpositive distances") {
        Eigen::VectorXd d(2);
        d << 10.0, 0.0;
        CHECK_THROWS_AS(large_scale_gain(d, geom, 3), std::invalid_argument);
    }
}

TEST_CASE("sample_small_scale") {
    SECTION("column norms concentrate on the antenna count") {
        const int m = 128, draws = 10000;
        double acc = 0.0;
        for (int i = 0; i < draws; ++i) {
            const auto h = sample_small_scale(m, 3, 1000 + i);
            for (int k = 0; k < 3; ++k) acc += h.col(k).squaredNorm();
        }
        const double mean = acc / (3.0 * draws);
        CHECK(std::abs(mean - m) <= 0.02 * m);
    }
    SECTION("single entry has unit variance") {
        const int draws = 100000;
        double acc = 0.0;
        for (int i = 0; i < draws; ++i) acc += sample_small_scale(1, 1, 5000 + i).col(0).squaredNorm();
        CHECK(std::abs(acc / draws - 1.0) <= 0.02);
    }
    SECTION("deterministic given the seed") {
        CHECK(sample_small_scale(8, 2, 77) == sample_small_scale(8, 2, 77));
        CHECK(sample_small_scale(8, 2, 77) != sample_small_scale(8, 2, 78));
    }
    SECTION("nested in the user count at fixed seed") {
        const auto small = sample_small_scale(16, 2, 3);
        const auto big = sample_small_scale(16, 5, 3);
        CHECK(big.leftCols(2) == small);
    }
    SECTION("rejects zero dimensions") {
        CHECK_THROWS_AS(sample_small_scale(0, 1, 1), std::invalid_argument);
        CHECK_THROWS_AS(sample_small_scale(1, 0, 1), std::invalid_argument);
    }
}

TEST_CASE("build_channel") {
    GeometryConfig geom;

    SECTION("unit large-scale chain leaves the small-scale norms") {
        geom.min_distance_m = geom.max_distance_m = 1.0;
        geom.shadow_std_db = 0.0;
        geom.carrier_factor = 1.0;
        const auto state = build_channel(geom, 16, 3, 21);
        for (int k = 0; k < 3; ++k) {
            CHECK(state.large_scale[k] == 1.0);
            CHECK(state.composite_gain[k] ==
                  Catch::Approx(state.small_scale.col(k).squaredNorm()).epsilon(1e-12));
        }
    }
    SECTION("dimensions from the arguments") {
        const auto state = build_channel(geom, 128, 3, 5);
        CHECK(state.num_antennas() == 128);
        CHECK(state.num_users() == 3);
        CHECK(state.distances.size() == 3);
    }
    SECTION("bit-identical on repeated builds, including serialized form") {
        const auto a = build_channel(geom, 32, 4, 99);
        const auto b = build_channel(geom, 32, 4, 99);
        CHECK(a.small_scale == b.small_scale);
        CHECK(a.large_scale == b.large_scale);
        CHECK(a.distances == b.distances);
        CHECK(a.composite_gain == b.composite_gain);
        CHECK(nlohmann::json(a).dump() == nlohmann::json(b).dump());
    }
    SECTION("positivity holds for any seed") {
        for (std::uint64_t seed : {0ULL, 1ULL, 123456789ULL}) {
            const auto state = build_channel(geom, 8, 5, seed);
            CHECK(state.large_scale.minCoeff() > 0.0);
            CHECK(state.composite_gain.minCoeff() > 0.0);
        }
    }
}

TEST_CASE("channel JSON round-trip is exact") {
    GeometryConfig geom;
    const auto state = build_channel(geom, 8, 3, 2024);
    const nlohmann::json j = state;
    const auto back = j.get<ChannelState>();
    CHECK(back.small_scale == state.small_scale);
    CHECK(back.large_scale == state.large_scale);
    CHECK(back.distances == state.distances);
    CHECK(back.composite_gain == state.composite_gain);
}

TEST_CASE("beam cross-talk has the unit-mean gamma statistics") {
    // E[ |h_k . h_l / ||h_l|| |^2 ] = 1 for l != k.
    const int draws = 10000;
    double acc = 0.0;
    for (int i = 0; i < draws; ++i) {
        const auto h = sample_small_scale(64, 2, 40000 + i);
        acc += std::norm(h.col(0).dot(h.col(1))) / h.col(1).squaredNorm();
    }
    const double mean = acc / draws;
    CHECK(mean >= 0.95);
    CHECK(mean <= 1.05);
}
