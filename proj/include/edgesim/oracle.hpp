#pragma once

#include <stdexcept>
#include <vector>

#include "edgesim/config.hpp"
#include "edgesim/env.hpp"
#include "edgesim/models.hpp"

namespace edgesim {

class NonConvergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Post-decision state: the exogenous triple is carried over and only the
/// battery moves (virtually) by the decided demand.
struct PdsState {
    int workload = 0;
    int env = 0;
    int congestion = 0;
    int battery_post = 0;

    bool operator==(const PdsState&) const = default;
};

PdsState pds_of(const Config& cfg, const SystemState& s, int action);

/// Everything the exact solver needs, precomputed once from a Config:
/// cached allocations, green pmfs, the joint exogenous kernel and the
/// expected one-slot cost table. Immutable; safe to share across threads.
class Dynamics {
public:
    explicit Dynamics(const Config& cfg);

    const Config& config() const { return costs_.config(); }
    const CostModel& costs() const { return costs_; }
    const StateSpace& space() const { return space_; }
    const std::vector<double>& green(int env) const { return green_[static_cast<std::size_t>(env)]; }
    double exo(std::size_t from, std::size_t to) const { return exo_[from * space_.exogenous_size() + to]; }

    std::size_t n_states() const { return space_.size(); }
    std::size_t n_actions() const { return na_; }
    int feasible_count(std::size_t s) const { return feasible_[s]; }
    double expected_cost(std::size_t s, int action) const { return cost_[s * na_ + action]; }
    std::size_t pds_index(std::size_t s, int action) const { return pds_[s * na_ + action]; }

private:
    CostModel costs_;
    StateSpace space_;
    std::size_t na_;
    std::vector<std::vector<double>> green_;
    std::vector<double> exo_;
    std::vector<int> feasible_;
    std::vector<double> cost_;
    std::vector<std::size_t> pds_;
};

/// c(s, a): optimal delay cost plus the expected depreciation under P_g(.|e).
double expected_cost(const Dynamics& dyn, const SystemState& s, int action);

/// Dense next-state distribution P(.|s, a) in canonical state order.
std::vector<double> transition_kernel(const Dynamics& dyn, const SystemState& s, int action);

struct ValueTables {
    std::vector<double> cost_to_go;   // C*(s)
    std::vector<double> post_value;   // V*(s~), indexed like states
    std::vector<int> policy;          // greedy action index per state
    int iterations = 0;
    double last_change = 0.0;
};

/// One synchronous Bellman sweep: out = T(in), greedy actions in `policy`.
/// Returns the sup-norm change. Parallel over states with OpenMP.
double bellman_sweep(const Dynamics& dyn, const std::vector<double>& in, std::vector<double>& out,
                     std::vector<int>& policy);

/// Literal sum over the full transition kernel; serial. Kept as the reference
/// for bellman_sweep.
double bellman_sweep_reference(const Dynamics& dyn, const std::vector<double>& in, std::vector<double>& out,
                               std::vector<int>& policy);

/// Iterates the Bellman operator until the sup-norm change drops below
/// tol * (1 - delta) / (2 * delta), then fills the policy and V*.
/// Throws NonConvergence after max_iterations sweeps.
ValueTables value_iteration(const Dynamics& dyn, double tol, int max_iterations);
ValueTables value_iteration(const Dynamics& dyn);

/// V*(s~) = sum_{s'} P(s'|s~) C*(s') with the action-independent kernel.
std::vector<double> pds_value(const Dynamics& dyn, const std::vector<double>& cost_to_go);
std::vector<double> pds_value_reference(const Dynamics& dyn, const std::vector<double>& cost_to_go);

/// Per-state |C*(s) - min_a (c(s,a) + delta V*(pds(s,a)))|.
std::vector<double> pds_residuals(const Dynamics& dyn, const std::vector<double>& cost_to_go,
                                  const std::vector<double>& post_value);

}  // namespace edgesim
