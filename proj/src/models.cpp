#include "edgesim/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace edgesim {

namespace {
// Candidates whose demand exceeds the budget by less than this are treated as
// within budget (guards the affine demand against rounding).
constexpr double kBudgetSlack = 1e-9;
}  // namespace

WattHours op_demand(const Config& cfg, int workload)
{
    return cfg.pw.e_static + cfg.pw.kappa_dyn * cfg.workloads[workload];
}

WattHours com_demand(const Config& cfg, int servers, double local_rate)
{
    const auto& p = cfg.pw;
    return servers * p.e_idle + local_rate / p.k_srv * (p.e_peak - p.e_idle);
}

double wireless_delay(const Config& cfg, double lambda)
{
    double rho = 0.0;
    for (const auto& loc : cfg.locations) rho += loc.fraction * lambda / loc.theta;
    double c = 0.0;
    for (const auto& loc : cfg.locations) c += loc.fraction * lambda / (loc.theta * (1.0 - rho));
    return c;
}

DelayBreakdown delay_cost(const Config& cfg, double congestion, double lambda, int servers, double local_rate)
{
    DelayBreakdown d;
    d.wireless = wireless_delay(cfg, lambda);
    if (servers > 0 || local_rate > 0.0) {
        const double load = local_rate / cfg.pw.k_srv;
        if (!(load < servers)) throw UnstableQueue("local queue unstable: load >= active servers");
        d.local = load / (servers - load);
    }
    d.offload = (lambda - local_rate) * std::max(congestion - cfg.cost.d0, 0.0);
    d.total = d.wireless + d.local + d.offload;
    return d;
}

Allocation solve_allocation(const Config& cfg, const SystemState& s, int action)
{
    const double lambda = cfg.workloads[s.workload];
    const double h = cfg.congestions[s.congestion];
    const double budget = cfg.actions[action];
    const double c_wi = wireless_delay(cfg, lambda);
    const double per_unit_offload = std::max(h - cfg.cost.d0, 0.0);
    const int max_mu = static_cast<int>(std::lround(lambda));
    const double k = cfg.pw.k_srv;

    Allocation best{0, 0, c_wi + lambda * per_unit_offload};
    for (int m = 1; m <= cfg.pw.m_max; ++m) {
        for (int mu = 0; mu <= max_mu; ++mu) {
            const double load = mu / k;
            if (!(load < m)) break;
            if (com_demand(cfg, m, mu) > budget + kBudgetSlack) break;
            const double cost = c_wi + load / (m - load) + (lambda - mu) * per_unit_offload;
            if (cost < best.delay_cost) best = {m, mu, cost};
        }
    }
    return best;
}

bool needs_backup(const Config& cfg, const SystemState& s) { return cfg.op_steps[s.workload] > s.battery; }

int battery_next(const Config& cfg, const SystemState& s, int action, int green)
{
    const int cap = cfg.battery_levels - 1;
    const int raw = needs_backup(cfg, s) ? s.battery + green
                                         : s.battery - cfg.op_steps[s.workload] - cfg.action_steps[action] + green;
    return std::clamp(raw, 0, cap);
}

namespace {
WattHours depreciable(const Config& cfg, const SystemState& s, int action)
{
    return cfg.depreciation_basis == DepreciationBasis::total_demand ? op_demand(cfg, s.workload) + cfg.actions[action]
                                                                     : cfg.actions[action];
}
}  // namespace

double realized_cost(const Config& cfg, const SystemState& s, int action, int green)
{
    const double lambda = cfg.workloads[s.workload];
    const double h = cfg.congestions[s.congestion];
    if (needs_backup(cfg, s))
        return delay_cost(cfg, h, lambda, 0, 0.0).total + cfg.cost.phi * op_demand(cfg, s.workload) / 1000.0;
    const double deficit = std::max(depreciable(cfg, s, action) - cfg.green_wh(green), 0.0);
    return solve_allocation(cfg, s, action).delay_cost + cfg.cost.omega * deficit / 1000.0;
}

CostModel::CostModel(const Config& cfg)
    : cfg_(cfg), nh_(cfg.n_congestions()), na_(cfg.n_actions())
{
    const std::size_t nl = cfg.n_workloads();
    alloc_.resize(nl * nh_ * na_);
    backup_.resize(nl * nh_);
    for (std::size_t l = 0; l < nl; ++l)
        for (std::size_t h = 0; h < nh_; ++h) {
            SystemState s{static_cast<int>(l), 0, static_cast<int>(h), 0};
            for (std::size_t a = 0; a < na_; ++a) alloc_[(l * nh_ + h) * na_ + a] = solve_allocation(cfg, s, static_cast<int>(a));
            backup_[l * nh_ + h] = delay_cost(cfg, cfg.congestions[h], cfg.workloads[l], 0, 0.0).total +
                                   cfg.cost.phi * op_demand(cfg, static_cast<int>(l)) / 1000.0;
        }
}

WattHours CostModel::depreciable_demand(const SystemState& s, int action) const
{
    return depreciable(cfg_, s, action);
}

double CostModel::realized_cost(const SystemState& s, int action, int green) const
{
    if (needs_backup(s)) return backup_cost(s);
    const double deficit = std::max(depreciable(cfg_, s, action) - cfg_.green_wh(green), 0.0);
    return allocation(s, action).delay_cost + cfg_.cost.omega * deficit / 1000.0;
}

int CostModel::battery_next(const SystemState& s, int action, int green) const
{
    return edgesim::battery_next(cfg_, s, action, green);
}

}  // namespace edgesim
