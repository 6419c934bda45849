#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace edgesim {

using WattHours = double;

/// Finite-state Markov chain over an index set; values are kept by the owner.
struct ChainSpec {
    std::vector<std::vector<double>> matrix;

    bool operator==(const ChainSpec&) const = default;
};

struct GreenClass {
    WattHours mean = 0.0;
    WattHours stddev = 0.0;

    bool operator==(const GreenClass&) const = default;
};

/// Conditional green-energy distribution: one normal per environment class,
/// discretized onto {0, step, ..., cap}.
struct GreenSpec {
    std::vector<GreenClass> classes;
    WattHours cap = 0.0;

    bool operator==(const GreenSpec&) const = default;
};

struct Location {
    double fraction = 1.0;
    double theta = 1.0;  // wireless rate, units/second

    bool operator==(const Location&) const = default;
};

/// Raw power figures as written in the config file (watts).
struct PowerSpec {
    double base_station_w = 800.0;
    double dynamic_w_per_unit = 10.0;
    double server_idle_w = 100.0;
    double server_peak_w = 200.0;
    double server_rate = 10.0;
    int max_servers = 3;

    bool operator==(const PowerSpec&) const = default;
};

/// Per-slot energy coefficients derived from PowerSpec.
struct PowerParams {
    WattHours e_static = 0.0;
    WattHours kappa_dyn = 0.0;
    WattHours e_idle = 0.0;
    WattHours e_peak = 0.0;
    double k_srv = 1.0;
    int m_max = 0;
};

struct CostParams {
    double omega = 0.2;
    double phi = 10.0;
    double d0 = 0.03;

    bool operator==(const CostParams&) const = default;
};

enum class DepreciationBasis { total_demand, computing_only };

struct PdsLearnerParams {
    double rate_coeff = 0.01;  // rho, alpha = 1 / (1 + rate_coeff * n)
    double epsilon = 0.0;

    bool operator==(const PdsLearnerParams&) const = default;
};

struct QLearnerParams {
    double epsilon_start = 1.0;
    double epsilon_min = 0.05;
    double decay_fraction = 0.2;
    double rate_exponent = 0.7;

    bool operator==(const QLearnerParams&) const = default;
};

struct OracleParams {
    double tol = 1e-9;
    int max_iterations = 100000;

    bool operator==(const OracleParams&) const = default;
};

struct InitialState {
    double workload = 10.0;
    std::string env = "Low";
    double congestion = 0.05;
    WattHours battery = 500.0;

    bool operator==(const InitialState&) const = default;
};

/// Full experiment configuration. Fields above the derived block mirror the
/// JSON file; the derived block is filled by validate_config.
struct Config {
    double slot_hours = 0.25;
    std::vector<double> workloads;           // Lambda, units/second, ascending
    std::vector<std::string> envs;           // E
    std::vector<double> congestions;         // H, seconds
    ChainSpec workload_chain;
    ChainSpec env_chain;
    ChainSpec congestion_chain;
    WattHours battery_capacity = 1000.0;
    WattHours battery_step = 25.0;
    std::vector<WattHours> actions;          // ActionGrid, Wh/slot
    std::vector<Location> locations;
    PowerSpec power;
    CostParams cost;
    GreenSpec green;
    double discount = 0.9;
    DepreciationBasis depreciation_basis = DepreciationBasis::total_demand;
    InitialState initial;
    PdsLearnerParams pds;
    QLearnerParams q;
    OracleParams oracle;

    // Derived (materialized by validate_config).
    PowerParams pw;
    int battery_levels = 0;                  // |B| = capacity / step + 1
    std::vector<int> op_steps;               // d_op(lambda) in battery steps
    std::vector<int> action_steps;           // action levels in battery steps
    int green_levels = 0;                    // support size of g

    std::size_t n_workloads() const { return workloads.size(); }
    std::size_t n_envs() const { return envs.size(); }
    std::size_t n_congestions() const { return congestions.size(); }
    std::size_t n_actions() const { return actions.size(); }
    std::size_t n_exogenous() const { return workloads.size() * envs.size() * congestions.size(); }
    std::size_t n_states() const { return n_exogenous() * static_cast<std::size_t>(battery_levels); }

    WattHours battery_wh(int level) const { return level * battery_step; }
    WattHours green_wh(int level) const { return level * battery_step; }

    /// Field-by-field equality of the file-backed part.
    bool same_inputs(const Config& other) const;
};

enum class ViolationKind {
    EmptySet,
    UtilizationOverload,
    GridMisaligned,
    NonStochastic,
    InvalidValue,
    UnknownKey,
};

std::string to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    std::string message;
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<Violation> violations);
    const std::vector<Violation>& violations() const { return violations_; }

private:
    std::vector<Violation> violations_;
};

/// Every violated invariant of `raw`, in a fixed order. Empty when valid.
std::vector<Violation> check_config(const Config& raw);

/// Normalizes `raw` and materializes the derived grids. Throws ConfigError
/// carrying the complete violation list.
Config validate_config(Config raw);

/// The repository's default experiment setup (validated).
Config default_config();

/// Eleven-level battery variant used for convergence checks (validated).
Config reduced_config();

Config parse_config(const nlohmann::json& doc);
nlohmann::json serialize_config(const Config& cfg);
Config load_config(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// State space

struct SystemState {
    int workload = 0;    // index into Lambda
    int env = 0;         // index into E
    int congestion = 0;  // index into H
    int battery = 0;     // battery grid level

    bool operator==(const SystemState&) const = default;
};

/// Canonical (lambda, e, h, b) lexicographic ordering of the state space.
class StateSpace {
public:
    explicit StateSpace(const Config& cfg);

    std::size_t size() const { return n_exo_ * nb_; }
    std::size_t battery_levels() const { return nb_; }
    std::size_t exogenous_size() const { return n_exo_; }

    std::size_t index_of(const SystemState& s) const
    {
        return exogenous_index(s) * nb_ + static_cast<std::size_t>(s.battery);
    }
    std::size_t exogenous_index(const SystemState& s) const
    {
        return (static_cast<std::size_t>(s.workload) * ne_ + s.env) * nh_ + s.congestion;
    }
    SystemState state_of(std::size_t index) const;

private:
    std::size_t nl_, ne_, nh_, nb_, n_exo_;
};

std::vector<SystemState> enumerate_states(const Config& cfg);

/// Looks up a state by physical values; throws std::out_of_range if any value
/// is not on its grid.
SystemState make_state(const Config& cfg, double workload, const std::string& env, double congestion,
                       WattHours battery);

int workload_index(const Config& cfg, double value);
int env_index(const Config& cfg, const std::string& name);
int congestion_index(const Config& cfg, double value);
int battery_level(const Config& cfg, WattHours value);
int action_index(const Config& cfg, WattHours level);

}  // namespace edgesim
