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
// Command-line driver: solve one instance, admit users on one instance,
// run a Monte-Carlo sweep, or cross-check the solver against the
// brute-force oracles.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "mimo_ee/admission.hpp"
#include "mimo_ee/channel.hpp"
#include "mimo_ee/config.hpp"
#include "mimo_ee/ee_solver.hpp"
#include "mimo_ee/experiment.hpp"
#include "mimo_ee/oracle.hpp"
#include "mimo_ee/serialization.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfigError = 2;

struct InstanceInputs {
    mimo_ee::ChannelState channel;
    mimo_ee::LinkParams params;
    mimo_ee::QosSpec qos;
    double max_power_w = 0.0;
    mimo_ee::SolverConfig solver;
};

InstanceInputs build_instance(const mimo_ee::SystemConfig& sys, std::uint64_t seed) {
    InstanceInputs in{
        mimo_ee::build_channel(sys.geometry, sys.num_antennas, sys.num_users, seed),
        sys.link(),
        {},
        sys.max_power_w,
        sys.solver,
    };
    in.qos = sys.qos_spec(in.params);
    return in;
}

std::string resolve_output_path(const std::string& cli_out, const std::string& config_out) {
    if (!cli_out.empty()) return cli_out;
    if (const char* dir = std::getenv("MIMO_EE_OUT_DIR"); dir && *dir != '\0' &&
        !std::filesystem::path(config_out).is_absolute())
        return (std::filesystem::path(dir) / config_out).string();
    return config_out;
}

int run_solve(const std::string& config_path, std::uint64_t seed) {
    const auto cfg = mimo_ee::parse_config_file(config_path);
    const auto in = build_instance(cfg.system, seed);
    const auto verdict = mimo_ee::check_feasibility(in.channel, in.qos, in.max_power_w);
    if (!verdict.feasible) {
        std::cerr << "instance infeasible: required " << verdict.required_total_w
                  << " W > budget " << in.max_power_w << " W (try `admit`)\n";
        return kExitFailure;
    }
    const auto result = mimo_ee::solve_ee(in.channel, in.qos, in.params, in.max_power_w, in.solver);
    std::cout << nlohmann::json(result).dump(2) << "\n";
    return kExitOk;
}

int run_admit(const std::string& config_path, std::uint64_t seed) {
    const auto cfg = mimo_ee::parse_config_file(config_path);
    const auto in = build_instance(cfg.system, seed);
    const auto result = mimo_ee::admit_users(in.channel, in.qos, in.max_power_w);
    std::cout << nlohmann::json(result).dump(2) << "\n";
    return kExitOk;
}

int run_sweep_cmd(const std::string& config_path, int trials_override, const std::string& out_override) {
    const auto cfg = mimo_ee::parse_config_file(config_path);
    if (!cfg.sweep) {
        std::cerr << "config error: no sweep section (sweep_variable/sweep_values) in '"
                  << config_path << "'\n";
        return kExitConfigError;
    }
    auto experiment = mimo_ee::ExperimentConfig::from(cfg.system, *cfg.sweep);
    if (trials_override > 0) experiment.num_trials = trials_override;
    experiment.output_path = resolve_output_path(out_override, experiment.output_path);
    const auto rows = mimo_ee::run_sweep(experiment);
    std::cerr << "wrote " << rows.size() << " sweep rows to " << experiment.output_path << "\n";
    for (const auto& row : rows)
        std::cout << row.sweep_value << ": mean_ee=" << row.mean_ee_bit_per_j
                  << " mean_admitted=" << row.mean_admitted
                  << " feasibility_rate=" << row.feasibility_rate << "\n";
    return kExitOk;
}

bool report(const char* name, bool ok, const std::string& detail) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << ": " << detail << "\n";
    return ok;
}

// Oracle cross-checks on small instances; the same checks the test suite
// runs, here for quick field validation of a build.
int run_validate(std::uint64_t seed) {
    using namespace mimo_ee;
    SystemConfig sys;  // library defaults: 128 antennas, 3 users, 120 kHz
    bool all_ok = true;

    {
        SystemConfig single = sys;
        single.num_users = 1;
        bool ok = true;
        double worst = 0.0;
        for (int i = 0; i < 5; ++i) {
            const auto in = build_instance(single, seed + i);
            const auto res = solve_ee(in.channel, in.qos, in.params, in.max_power_w, in.solver);
            const auto golden = golden_section_ee(in.channel, in.qos, in.params, in.max_power_w);
            const double gap = std::abs(res.achieved_ee - golden.ee) / golden.ee;
            worst = std::max(worst, gap);
            ok = ok && gap <= 5e-3;
        }
        all_ok &= report("solver vs golden-section (K=1, 5 seeds)", ok,
                         "worst relative gap " + std::to_string(worst));
    }
    {
        SystemConfig pair = sys;
        pair.num_users = 2;
        bool ok = true;
        double worst = 0.0;
        for (int i = 0; i < 5; ++i) {
            const auto in = build_instance(pair, seed + 100 + i);
            if (!check_feasibility(in.channel, in.qos, in.max_power_w).feasible) continue;
            const auto res = solve_ee(in.channel, in.qos, in.params, in.max_power_w, in.solver);
            GridSpec grid;
            grid.points_per_dim = 200;
            grid.max_power_w = in.max_power_w;
            const auto ref = grid_search_ee(in.channel, in.qos, in.params, in.max_power_w, grid);
            const double gap = std::abs(res.achieved_ee - ref.ee) / ref.ee;
            worst = std::max(worst, gap);
            ok = ok && ref.found && gap <= 1e-2;
        }
        all_ok &= report("solver vs grid search (K=2, 5 seeds)", ok,
                         "worst relative gap " + std::to_string(worst));
    }
    {
        SystemConfig adm = sys;
        adm.num_users = 3;
        adm.min_spectral_eff = {6.0};
        adm.max_power_w = 1e-3;
        bool ok = true;
        int matches = 0, total = 0;
        for (int i = 0; i < 50; ++i) {
            const auto in = build_instance(adm, seed + 200 + i);
            const auto greedy = admit_users(in.channel, in.qos, in.max_power_w);
            const int best = exhaustive_admission(in.channel, in.qos, in.max_power_w);
            ok = ok && greedy.admitted_count <= best;
            matches += (greedy.admitted_count == best);
            ++total;
        }
        all_ok &= report("greedy vs exhaustive admission (K=3, 50 seeds)", ok,
                         std::to_string(matches) + "/" + std::to_string(total) + " exact matches");
    }
    {
        const int num_draws = 2000;
        const int m = 128;
        double acc = 0.0;
        for (int i = 0; i < num_draws; ++i) {
            const auto h = sample_small_scale(m, 1, seed + 300 + i);
            acc += h.col(0).squaredNorm();
        }
        const double mean = acc / num_draws;
        const bool ok = std::abs(mean - m) <= 0.02 * m;
        all_ok &= report("channel norm statistics", ok,
                         "mean ||h||^2 = " + std::to_string(mean) + " (expect ~128)");
    }
    return all_ok ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Energy-efficient massive MIMO downlink power allocation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::uint64_t seed = 1;
    int trials = 0;

    auto* solve = app.add_subcommand("solve", "Solve one feasible instance, print SolverResult JSON");
    solve->add_option("--config", config_path, "Config file")->required();
    solve->add_option("--seed", seed, "Channel seed");

    auto* admit = app.add_subcommand("admit", "Greedy admission on one instance, print AdmissionResult JSON");
    admit->add_option("--config", config_path, "Config file")->required();
    admit->add_option("--seed", seed, "Channel seed");

    auto* sweep = app.add_subcommand("sweep", "Run the Monte-Carlo sweep from the config");
    sweep->add_option("--config", config_path, "Config file")->required();
    sweep->add_option("--trials", trials, "Override num_trials");
    sweep->add_option("--out", out_path, "Override output CSV path");

    auto* validate = app.add_subcommand("validate", "Cross-check solver and admission against oracles");
    validate->add_option("--seed", seed, "Base seed for the checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (solve->parsed()) return run_solve(config_path, seed);
        if (admit->parsed()) return run_admit(config_path, seed);
        if (sweep->parsed()) return run_sweep_cmd(config_path, trials, out_path);
        if (validate->parsed()) return run_validate(seed);
    } catch (const mimo_ee::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitConfigError;
}
