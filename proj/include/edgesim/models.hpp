#pragma once

#include <stdexcept>
#include <vector>

#include "edgesim/config.hpp"

namespace edgesim {

class UnstableQueue : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct DelayBreakdown {
    double wireless = 0.0;   // c_wi
    double local = 0.0;      // c_lo
    double offload = 0.0;    // c_off
    double total = 0.0;
};

struct Allocation {
    int servers = 0;         // m
    int local_rate = 0;      // mu, units/second
    double delay_cost = 0.0;

    bool operator==(const Allocation&) const = default;
};

/// Basic operation demand d_op = e_static + kappa_dyn * lambda, Wh per slot.
WattHours op_demand(const Config& cfg, int workload);

/// Computing demand of m servers processing mu units/second, Wh per slot.
WattHours com_demand(const Config& cfg, int servers, double local_rate);

/// Base-station access delay; depends only on the workload.
double wireless_delay(const Config& cfg, double lambda);

/// Delay cost of serving lambda with m servers and mu local units/second.
/// Throws UnstableQueue when mu >= m * k_srv with m > 0.
DelayBreakdown delay_cost(const Config& cfg, double congestion, double lambda, int servers, double local_rate);

/// Exhaustive search over m in {0..M}, mu in {0..lambda} with
/// com_demand(m, mu) <= budget and a stable local queue. Ties go to smaller m,
/// then smaller mu.
Allocation solve_allocation(const Config& cfg, const SystemState& s, int action);

/// True when the battery cannot cover basic operation and the backup supply
/// must run the base station.
bool needs_backup(const Config& cfg, const SystemState& s);

/// Next battery level (grid index) given the action index and green level.
int battery_next(const Config& cfg, const SystemState& s, int action, int green);

/// Realized one-slot cost given the green level actually harvested.
double realized_cost(const Config& cfg, const SystemState& s, int action, int green);

/// Same arithmetic as the free functions with the allocation optimum cached
/// per (workload, congestion, action). Immutable after construction.
class CostModel {
public:
    explicit CostModel(const Config& cfg);

    const Config& config() const { return cfg_; }

    const Allocation& allocation(const SystemState& s, int action) const
    {
        return alloc_[(static_cast<std::size_t>(s.workload) * nh_ + s.congestion) * na_ + action];
    }
    double backup_cost(const SystemState& s) const
    {
        return backup_[static_cast<std::size_t>(s.workload) * nh_ + s.congestion];
    }
    bool needs_backup(const SystemState& s) const { return cfg_.op_steps[s.workload] > s.battery; }

    /// Energy (Wh) that the depreciation term is charged against.
    WattHours depreciable_demand(const SystemState& s, int action) const;

    double realized_cost(const SystemState& s, int action, int green) const;
    int battery_next(const SystemState& s, int action, int green) const;

private:
    Config cfg_;
    std::size_t nh_, na_;
    std::vector<Allocation> alloc_;
    std::vector<double> backup_;
};

}  // namespace edgesim
