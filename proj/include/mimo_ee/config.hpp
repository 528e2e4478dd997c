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

#ifndef MIMO_EE_CONFIG_HPP
#define MIMO_EE_CONFIG_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mimo_ee/channel.hpp"
#include "mimo_ee/ee_solver.hpp"
#include "mimo_ee/link_metrics.hpp"
#include "mimo_ee/qos.hpp"

namespace mimo_ee {

inline double dbm_to_watt(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
inline double watt_to_dbm(double watt) { return 10.0 * std::log10(watt / 1e-3); }

enum class SweepVariable {
    circuit_power,
    num_antennas,
    max_power,
    num_requesting_users,
    min_rate,
};

inline const char* to_string(SweepVariable v) {
    switch (v) {
        case SweepVariable::circuit_power: return "circuit_power";
        case SweepVariable::num_antennas: return "num_antennas";
        case SweepVariable::max_power: return "max_power";
        case SweepVariable::num_requesting_users: return "num_requesting_users";
        case SweepVariable::min_rate: return "min_rate";
    }
    return "?";
}

/// Full scenario description: geometry, link constants, QoS and solver knobs.
struct SystemConfig {
    GeometryConfig geometry;
    int num_antennas = 128;
    int num_users = 3;
    double bandwidth_hz = 120e3;
    double noise_psd_w_per_hz = 1e-20;  // -170 dBm/Hz
    double circuit_power_per_antenna_w = dbm_to_watt(4.0);
    double target_ber = 1e-3;
    double max_power_w = 1.0;
    // One entry broadcasts to every user; otherwise one entry per user.
    std::vector<double> min_spectral_eff{1.0};
    std::optional<double> qos_snr;  // unset: 1/noise_power
    SolverConfig solver;

    LinkParams link() const {
        return LinkParams::make(bandwidth_hz, noise_psd_w_per_hz, circuit_power_per_antenna_w,
                                num_antennas, target_ber);
    }

    QosSpec qos_spec(const LinkParams& params) const {
        const double snr = qos_snr ? *qos_snr : default_qos_snr(params);
        if (min_spectral_eff.size() == 1)
            return QosSpec::uniform(num_users, min_spectral_eff[0], snr);
        if (static_cast<int>(min_spectral_eff.size()) != num_users)
            throw std::invalid_argument(
                "SystemConfig: min_spectral_eff must be a scalar or one entry per user");
        Eigen::VectorXd r(num_users);
        for (int k = 0; k < num_users; ++k) r[k] = min_spectral_eff[k];
        return QosSpec::make(std::move(r), snr);
    }
};

/// Sweep section of a config file.
struct SweepSettings {
    SweepVariable variable = SweepVariable::circuit_power;
    std::vector<double> values;  // dBm for power sweeps, counts/rates otherwise
    int num_trials = 200;
    std::uint64_t master_seed = 1;
    std::string output_path = "sweep.csv";
};

struct ParsedConfig {
    SystemConfig system;
    std::optional<SweepSettings> sweep;
};

/// Config file error with the offending line and field.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

struct ConfigEntry {
    std::string value;
    int line = 0;
    bool used = false;
};

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline double parse_double(const std::string& key, const ConfigEntry& e) {
    const std::string_view v = trim(e.value);
    double out = 0.0;
    const char* begin = v.data();
    const char* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc() || ptr != end)
        throw ConfigError("line " + std::to_string(e.line) + ": field '" + key +
                          "': expected a number, got '" + std::string(v) + "'");
    return out;
}

inline long long parse_int(const std::string& key, const ConfigEntry& e) {
    const std::string_view v = trim(e.value);
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError("line " + std::to_string(e.line) + ": field '" + key +
                          "': expected an integer, got '" + std::string(v) + "'");
    return out;
}

inline bool parse_bool(const std::string& key, const ConfigEntry& e) {
    const std::string_view v = trim(e.value);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("line " + std::to_string(e.line) + ": field '" + key +
                      "': expected true/false, got '" + std::string(v) + "'");
}

inline std::vector<double> parse_list(const std::string& key, const ConfigEntry& e) {
    std::vector<double> out;
    std::string_view rest = e.value;
    while (true) {
        const auto comma = rest.find(',');
        const std::string_view item = trim(rest.substr(0, comma));
        if (item.empty())
            throw ConfigError("line " + std::to_string(e.line) + ": field '" + key +
                              "': empty list element");
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
        if (ec != std::errc() || ptr != item.data() + item.size())
            throw ConfigError("line " + std::to_string(e.line) + ": field '" + key +
                              "': expected a number, got '" + std::string(item) + "'");
        out.push_back(value);
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return out;
}

}  // namespace detail

/// Parses the flat key-value config format: one `key = value` per line,
/// `#` comments, UTF-8. Unknown keys and unit-duplicate keys are errors.
inline ParsedConfig parse_config_text(const std::string& text) {
    std::map<std::string, detail::ConfigEntry> entries;
    {
        std::istringstream in(text);
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            std::string_view s = line;
            const auto hash = s.find('#');
            if (hash != std::string_view::npos) s = s.substr(0, hash);
            s = detail::trim(s);
            if (s.empty()) continue;
            const auto eq = s.find('=');
            if (eq == std::string_view::npos)
                throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
            const std::string key{detail::trim(s.substr(0, eq))};
            const std::string value{detail::trim(s.substr(eq + 1))};
            if (key.empty())
                throw ConfigError("line " + std::to_string(line_no) + ": empty key");
            if (entries.count(key))
                throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
            entries[key] = {value, line_no, false};
        }
    }

    const auto take = [&](const char* key) -> detail::ConfigEntry* {
        auto it = entries.find(key);
        if (it == entries.end()) return nullptr;
        it->second.used = true;
        return &it->second;
    };
    const auto reject_both = [&](const char* a, const char* b) {
        if (entries.count(a) && entries.count(b))
            throw ConfigError("line " + std::to_string(entries.find(b)->second.line) + ": field '" +
                              b + "' conflicts with '" + a + "'");
    };

    ParsedConfig cfg;
    SystemConfig& sys = cfg.system;

    if (auto* e = take("num_users")) sys.num_users = static_cast<int>(detail::parse_int("num_users", *e));
    if (auto* e = take("num_antennas"))
        sys.num_antennas = static_cast<int>(detail::parse_int("num_antennas", *e));
    if (auto* e = take("bandwidth_hz")) sys.bandwidth_hz = detail::parse_double("bandwidth_hz", *e);
    if (auto* e = take("target_ber")) sys.target_ber = detail::parse_double("target_ber", *e);

    reject_both("noise_psd_dbm_per_hz", "noise_psd_w_per_hz");
    if (auto* e = take("noise_psd_dbm_per_hz"))
        sys.noise_psd_w_per_hz = dbm_to_watt(detail::parse_double("noise_psd_dbm_per_hz", *e));
    if (auto* e = take("noise_psd_w_per_hz"))
        sys.noise_psd_w_per_hz = detail::parse_double("noise_psd_w_per_hz", *e);

    reject_both("circuit_power_per_antenna_dbm", "circuit_power_per_antenna_w");
    if (auto* e = take("circuit_power_per_antenna_dbm"))
        sys.circuit_power_per_antenna_w =
            dbm_to_watt(detail::parse_double("circuit_power_per_antenna_dbm", *e));
    if (auto* e = take("circuit_power_per_antenna_w"))
        sys.circuit_power_per_antenna_w = detail::parse_double("circuit_power_per_antenna_w", *e);

    reject_both("max_power_dbm", "max_power_w");
    if (auto* e = take("max_power_dbm"))
        sys.max_power_w = dbm_to_watt(detail::parse_double("max_power_dbm", *e));
    if (auto* e = take("max_power_w")) sys.max_power_w = detail::parse_double("max_power_w", *e);

    if (auto* e = take("min_distance_m")) sys.geometry.min_distance_m = detail::parse_double("min_distance_m", *e);
    if (auto* e = take("max_distance_m")) sys.geometry.max_distance_m = detail::parse_double("max_distance_m", *e);
    if (auto* e = take("path_loss_exponent"))
        sys.geometry.path_loss_exponent = detail::parse_double("path_loss_exponent", *e);
    if (auto* e = take("shadow_std_db")) sys.geometry.shadow_std_db = detail::parse_double("shadow_std_db", *e);
    if (auto* e = take("carrier_factor")) sys.geometry.carrier_factor = detail::parse_double("carrier_factor", *e);

    if (auto* e = take("min_spectral_eff")) sys.min_spectral_eff = detail::parse_list("min_spectral_eff", *e);
    if (auto* e = take("qos_snr")) sys.qos_snr = detail::parse_double("qos_snr", *e);

    if (auto* e = take("bisection_tol")) sys.solver.bisection_tol = detail::parse_double("bisection_tol", *e);
    if (auto* e = take("fixed_point_tol_w"))
        sys.solver.fixed_point_tol_w = detail::parse_double("fixed_point_tol_w", *e);
    if (auto* e = take("max_bisection_iters"))
        sys.solver.max_bisection_iters = static_cast<int>(detail::parse_int("max_bisection_iters", *e));
    if (auto* e = take("max_inner_iters"))
        sys.solver.max_inner_iters = static_cast<int>(detail::parse_int("max_inner_iters", *e));
    if (auto* e = take("max_multiplier_iters"))
        sys.solver.max_multiplier_iters = static_cast<int>(detail::parse_int("max_multiplier_iters", *e));
    if (auto* e = take("step_theta")) sys.solver.step_theta = detail::parse_double("step_theta", *e);
    if (auto* e = take("step_lambda")) sys.solver.step_lambda = detail::parse_double("step_lambda", *e);
    if (auto* e = take("power_floor_w")) sys.solver.power_floor_w = detail::parse_double("power_floor_w", *e);
    if (auto* e = take("chi_couples_earlier_users")) sys.solver.chi_couples_earlier_users = detail::parse_bool("chi_couples_earlier_users", *e);

    const bool has_sweep = entries.count("sweep_variable") || entries.count("sweep_values");
    if (has_sweep) {
        SweepSettings sweep;
        auto* var = take("sweep_variable");
        auto* vals = take("sweep_values");
        if (!var)
            throw ConfigError("field 'sweep_variable' is required when sweeping");
        if (!vals)
            throw ConfigError("field 'sweep_values' is required when sweeping");
        const std::string_view name = detail::trim(var->value);
        if (name == "circuit_power") sweep.variable = SweepVariable::circuit_power;
        else if (name == "num_antennas") sweep.variable = SweepVariable::num_antennas;
        else if (name == "max_power") sweep.variable = SweepVariable::max_power;
        else if (name == "num_requesting_users") sweep.variable = SweepVariable::num_requesting_users;
        else if (name == "min_rate") sweep.variable = SweepVariable::min_rate;
        else
            throw ConfigError("line " + std::to_string(var->line) +
                              ": field 'sweep_variable': unknown variable '" + std::string(name) + "'");
        sweep.values = detail::parse_list("sweep_values", *vals);
        if (auto* e = take("num_trials")) sweep.num_trials = static_cast<int>(detail::parse_int("num_trials", *e));
        if (auto* e = take("master_seed"))
            sweep.master_seed = static_cast<std::uint64_t>(detail::parse_int("master_seed", *e));
        if (auto* e = take("output_path")) sweep.output_path = std::string(detail::trim(e->value));
        cfg.sweep = std::move(sweep);
    }

    for (const auto& [key, entry] : entries)
        if (!entry.used)
            throw ConfigError("line " + std::to_string(entry.line) + ": unknown field '" + key + "'");

    try {
        sys.geometry.validate();
        sys.solver.validate();
        (void)sys.link();
    } catch (const std::invalid_argument& err) {
        throw ConfigError(std::string("invalid configuration: ") + err.what());
    }
    if (sys.num_users < 1) throw ConfigError("field 'num_users': must be >= 1");
    if (sys.max_power_w < 0.0) throw ConfigError("field 'max_power_w': must be nonnegative");
    return cfg;
}

inline ParsedConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

}  // namespace mimo_ee

#endif  // MIMO_EE_CONFIG_HPP
