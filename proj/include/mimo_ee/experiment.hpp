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
// Monte-Carlo sweep harness: per-trial two-branch evaluation (EE solve when
// the QoS gate passes, greedy admission when it does not) aggregated into
// CSV rows.

#ifndef MIMO_EE_EXPERIMENT_HPP
#define MIMO_EE_EXPERIMENT_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mimo_ee/admission.hpp"
#include "mimo_ee/channel.hpp"
#include "mimo_ee/config.hpp"
#include "mimo_ee/ee_solver.hpp"
#include "mimo_ee/qos.hpp"

namespace mimo_ee {

struct ExperimentConfig {
    SystemConfig base;
    SweepVariable sweep_variable = SweepVariable::circuit_power;
    std::vector<double> sweep_values;
    int num_trials = 200;
    std::uint64_t master_seed = 1;
    std::string output_path = "sweep.csv";

    void validate() const {
        if (sweep_values.empty())
            throw std::invalid_argument("ExperimentConfig: sweep_values must be nonempty");
        if (sweep_values.size() > 1) {
            const bool increasing = sweep_values[1] > sweep_values[0];
            for (std::size_t i = 1; i < sweep_values.size(); ++i) {
                const bool step_up = sweep_values[i] > sweep_values[i - 1];
                if (sweep_values[i] == sweep_values[i - 1] || step_up != increasing)
                    throw std::invalid_argument("ExperimentConfig: sweep_values must be strictly monotone");
            }
        }
        if (num_trials < 1) throw std::invalid_argument("ExperimentConfig: num_trials must be >= 1");
    }

    static ExperimentConfig from(const SystemConfig& system, const SweepSettings& sweep) {
        ExperimentConfig cfg;
        cfg.base = system;
        cfg.sweep_variable = sweep.variable;
        cfg.sweep_values = sweep.values;
        cfg.num_trials = sweep.num_trials;
        cfg.master_seed = sweep.master_seed;
        cfg.output_path = sweep.output_path;
        cfg.validate();
        return cfg;
    }
};

struct SweepRow {
    double sweep_value = 0.0;
    double mean_ee_bit_per_j = 0.0;   // over trials on the EE branch; 0 if none
    double mean_admitted = 0.0;       // over trials on the admission branch; 0 if none
    double feasibility_rate = 0.0;
    int num_trials = 0;
    double ci95_halfwidth = 0.0;      // normal-approximation CI of mean_ee

    friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct TrialRecord {
    bool feasible = false;
    double ee = 0.0;
    int admitted = 0;
    bool solver_converged = true;  // flagged false instead of raising
};

/// Applies one sweep value to a scenario. Power-type values are in dBm,
/// matching how the sweeps are specified in config files.
inline SystemConfig apply_sweep_value(SystemConfig base, SweepVariable variable, double value) {
    switch (variable) {
        case SweepVariable::circuit_power:
            base.circuit_power_per_antenna_w = dbm_to_watt(value);
            break;
        case SweepVariable::num_antennas:
            base.num_antennas = static_cast<int>(std::llround(value));
            break;
        case SweepVariable::max_power:
            base.max_power_w = dbm_to_watt(value);
            break;
        case SweepVariable::num_requesting_users:
            base.num_users = static_cast<int>(std::llround(value));
            break;
        case SweepVariable::min_rate:
            base.min_spectral_eff = {value};
            break;
    }
    return base;
}

/// One Monte-Carlo trial: draw a channel, gate on feasibility, then either
/// maximize EE or admit users. Deterministic in (master_seed, trial_index).
inline TrialRecord run_trial(const SystemConfig& sys, std::uint64_t master_seed, int trial_index) {
    const std::uint64_t seed = master_seed ^ static_cast<std::uint64_t>(trial_index);
    const ChannelState channel = build_channel(sys.geometry, sys.num_antennas, sys.num_users, seed);
    const LinkParams params = sys.link();
    const QosSpec qos = sys.qos_spec(params);
    const FeasibilityVerdict verdict = check_feasibility(channel, qos, sys.max_power_w);

    TrialRecord rec;
    rec.feasible = verdict.feasible;
    if (verdict.feasible) {
        const SolverResult res = solve_ee(channel, qos, params, sys.max_power_w, sys.solver);
        rec.ee = res.achieved_ee;
        rec.solver_converged = res.converged;
    } else {
        rec.admitted = admit_users(channel, qos, sys.max_power_w).admitted_count;
    }
    return rec;
}

namespace detail {

inline SweepRow aggregate_trials(double sweep_value, const std::vector<TrialRecord>& records) {
    SweepRow row;
    row.sweep_value = sweep_value;
    row.num_trials = static_cast<int>(records.size());
    double ee_sum = 0.0, adm_sum = 0.0;
    int n_feasible = 0, n_admission = 0;
    for (const TrialRecord& r : records) {
        if (r.feasible) {
            ++n_feasible;
            ee_sum += r.ee;
        } else {
            ++n_admission;
            adm_sum += r.admitted;
        }
    }
    row.feasibility_rate = records.empty() ? 0.0 : static_cast<double>(n_feasible) / records.size();
    if (n_feasible > 0) row.mean_ee_bit_per_j = ee_sum / n_feasible;
    if (n_admission > 0) row.mean_admitted = adm_sum / n_admission;
    if (n_feasible > 1) {
        double ss = 0.0;
        for (const TrialRecord& r : records)
            if (r.feasible) {
                const double d = r.ee - row.mean_ee_bit_per_j;
                ss += d * d;
            }
        const double stddev = std::sqrt(ss / (n_feasible - 1));
        row.ci95_halfwidth = 1.96 * stddev / std::sqrt(static_cast<double>(n_feasible));
    }
    return row;
}

inline void append_number(std::string& out, double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    out.append(buf, ptr);
    (void)ec;
}

}  // namespace detail

inline std::string sweep_csv_header() {
    return "sweep_value,mean_ee_bit_per_j,ci95,mean_admitted,feasibility_rate,num_trials";
}

/// Serializes rows to CSV. Doubles use shortest round-trip formatting, so
/// parsing the file back reproduces the rows exactly.
inline std::string format_sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = sweep_csv_header();
    out.push_back('\n');
    for (const SweepRow& row : rows) {
        detail::append_number(out, row.sweep_value);
        out.push_back(',');
        detail::append_number(out, row.mean_ee_bit_per_j);
        out.push_back(',');
        detail::append_number(out, row.ci95_halfwidth);
        out.push_back(',');
        detail::append_number(out, row.mean_admitted);
        out.push_back(',');
        detail::append_number(out, row.feasibility_rate);
        out.push_back(',');
        out += std::to_string(row.num_trials);
        out.push_back('\n');
    }
    return out;
}

inline std::vector<SweepRow> parse_sweep_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != sweep_csv_header())
        throw std::invalid_argument("parse_sweep_csv: missing or unexpected header row");
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string_view> fields;
        std::string_view rest = line;
        while (true) {
            const auto comma = rest.find(',');
            fields.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (fields.size() != 6) throw std::invalid_argument("parse_sweep_csv: expected 6 columns");
        const auto num = [&](int i) {
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(fields[i].data(), fields[i].data() + fields[i].size(), v);
            if (ec != std::errc() || ptr != fields[i].data() + fields[i].size())
                throw std::invalid_argument("parse_sweep_csv: malformed number");
            return v;
        };
        SweepRow row;
        row.sweep_value = num(0);
        row.mean_ee_bit_per_j = num(1);
        row.ci95_halfwidth = num(2);
        row.mean_admitted = num(3);
        row.feasibility_rate = num(4);
        row.num_trials = static_cast<int>(num(5));
        rows.push_back(row);
    }
    return rows;
}

/// Runs the whole sweep; trial seeds depend only on (master_seed, trial
/// index), so records are reproducible and aggregation order-independent.
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& config) {
    config.validate();
    std::vector<SweepRow> rows;
    rows.reserve(config.sweep_values.size());
    for (const double value : config.sweep_values) {
        const SystemConfig sys = apply_sweep_value(config.base, config.sweep_variable, value);
        std::vector<TrialRecord> records(config.num_trials);
        for (int t = 0; t < config.num_trials; ++t) records[t] = run_trial(sys, config.master_seed, t);
        rows.push_back(detail::aggregate_trials(value, records));
    }
    if (!config.output_path.empty()) {
        std::ofstream out(config.output_path, std::ios::binary);
        if (!out) throw std::runtime_error("run_sweep: cannot open output path '" + config.output_path + "'");
        out << format_sweep_csv(rows);
        if (!out) throw std::runtime_error("run_sweep: write failed for '" + config.output_path + "'");
    }
    return rows;
}

}  // namespace mimo_ee

#endif  // MIMO_EE_EXPERIMENT_HPP
