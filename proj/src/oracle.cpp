#include "edgesim/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace edgesim {

PdsState pds_of(const Config& cfg, const SystemState& s, int action)
{
    const int post = needs_backup(cfg, s)
                         ? s.battery
                         : std::max(s.battery - cfg.op_steps[s.workload] - cfg.action_steps[action], 0);
    return {s.workload, s.env, s.congestion, post};
}

Dynamics::Dynamics(const Config& cfg)
    : costs_(cfg), space_(costs_.config()), na_(cfg.n_actions()), exo_(exogenous_kernel(cfg))
{
    const Config& c = costs_.config();
    for (std::size_t e = 0; e < c.n_envs(); ++e) green_.push_back(green_pmf(c, static_cast<int>(e)));

    const std::size_t n = space_.size();
    feasible_.resize(n);
    cost_.assign(n * na_, std::numeric_limits<double>::infinity());
    pds_.assign(n * na_, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const SystemState s = space_.state_of(i);
        feasible_[i] = feasible_action_count(c, s);
        const auto& pmf = green_[static_cast<std::size_t>(s.env)];
        for (int a = 0; a < feasible_[i]; ++a) {
            double c_sa;
            if (costs_.needs_backup(s)) {
                c_sa = costs_.backup_cost(s);
            } else {
                const double demand = costs_.depreciable_demand(s, a);
                double dep = 0.0;
                for (std::size_t g = 0; g < pmf.size(); ++g)
                    dep += pmf[g] * std::max(demand - c.green_wh(static_cast<int>(g)), 0.0);
                c_sa = costs_.allocation(s, a).delay_cost + c.cost.omega * dep / 1000.0;
            }
            cost_[i * na_ + a] = c_sa;
            const PdsState p = pds_of(c, s, a);
            pds_[i * na_ + a] = space_.index_of({p.workload, p.env, p.congestion, p.battery_post});
        }
    }
}

double expected_cost(const Dynamics& dyn, const SystemState& s, int action)
{
    return dyn.expected_cost(dyn.space().index_of(s), action);
}

std::vector<double> transition_kernel(const Dynamics& dyn, const SystemState& s, int action)
{
    const Config& cfg = dyn.config();
    const StateSpace& space = dyn.space();
    std::vector<double> p(space.size(), 0.0);
    const std::size_t x = space.exogenous_index(s);
    const auto& pmf = dyn.green(s.env);
    for (std::size_t g = 0; g < pmf.size(); ++g) {
        if (pmf[g] == 0.0) continue;
        const int b_next = battery_next(cfg, s, action, static_cast<int>(g));
        for (std::size_t y = 0; y < space.exogenous_size(); ++y)
            p[y * space.battery_levels() + static_cast<std::size_t>(b_next)] += dyn.exo(x, y) * pmf[g];
    }
    return p;
}

namespace {

// W[x * nb + b'] = sum_y P(y | x) C(y, b'): expected cost-to-go one slot
// ahead from exogenous context x when the battery lands on b'.
std::vector<double> exogenous_expectation(const Dynamics& dyn, const std::vector<double>& values)
{
    const std::size_t nx = dyn.space().exogenous_size();
    const std::size_t nb = dyn.space().battery_levels();
    std::vector<double> w(nx * nb, 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t xi = 0; xi < static_cast<std::ptrdiff_t>(nx); ++xi) {
        const auto x = static_cast<std::size_t>(xi);
        double* row = &w[x * nb];
        for (std::size_t y = 0; y < nx; ++y) {
            const double p = dyn.exo(x, y);
            if (p == 0.0) continue;
            const double* src = &values[y * nb];
            for (std::size_t b = 0; b < nb; ++b) row[b] += p * src[b];
        }
    }
    return w;
}

// Expected W over the green draw from post-decision battery `post`.
double green_average(const Dynamics& dyn, const double* w_row, int env, int post)
{
    const auto& pmf = dyn.green(env);
    const int cap = dyn.config().battery_levels - 1;
    double v = 0.0;
    for (std::size_t g = 0; g < pmf.size(); ++g) v += pmf[g] * w_row[std::min(post + static_cast<int>(g), cap)];
    return v;
}

}  // namespace

double bellman_sweep(const Dynamics& dyn, const std::vector<double>& in, std::vector<double>& out,
                     std::vector<int>& policy)
{
    const std::size_t n = dyn.n_states();
    const std::size_t nb = dyn.space().battery_levels();
    const double delta = dyn.config().discount;
    const auto w = exogenous_expectation(dyn, in);
    out.resize(n);
    policy.resize(n);

    double change = 0.0;
#pragma omp parallel for schedule(static) reduction(max : change)
    for (std::ptrdiff_t si = 0; si < static_cast<std::ptrdiff_t>(n); ++si) {
        const auto i = static_cast<std::size_t>(si);
        const SystemState s = dyn.space().state_of(i);
        const double* w_row = &w[(i / nb) * nb];
        double best = std::numeric_limits<double>::infinity();
        int best_a = 0;
        for (int a = 0; a < dyn.feasible_count(i); ++a) {
            const int post = static_cast<int>(dyn.pds_index(i, a) % nb);
            const double q = dyn.expected_cost(i, a) + delta * green_average(dyn, w_row, s.env, post);
            if (q < best) {
                best = q;
                best_a = a;
            }
        }
        out[i] = best;
        policy[i] = best_a;
        change = std::max(change, std::abs(best - in[i]));
    }
    return change;
}

double bellman_sweep_reference(const Dynamics& dyn, const std::vector<double>& in, std::vector<double>& out,
                               std::vector<int>& policy)
{
    const std::size_t n = dyn.n_states();
    const double delta = dyn.config().discount;
    out.resize(n);
    policy.resize(n);
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const SystemState s = dyn.space().state_of(i);
        double best = std::numeric_limits<double>::infinity();
        int best_a = 0;
        for (int a = 0; a < dyn.feasible_count(i); ++a) {
            const auto p = transition_kernel(dyn, s, a);
            double future = 0.0;
            for (std::size_t j = 0; j < n; ++j) future += p[j] * in[j];
            const double q = expected_cost(dyn, s, a) + delta * future;
            if (q < best) {
                best = q;
                best_a = a;
            }
        }
        out[i] = best;
        policy[i] = best_a;
        change = std::max(change, std::abs(best - in[i]));
    }
    return change;
}

ValueTables value_iteration(const Dynamics& dyn, double tol, int max_iterations)
{
    if (!(tol > 0.0)) throw std::invalid_argument("value_iteration: tol must be positive");
    const double delta = dyn.config().discount;
    const double threshold =
        delta > 0.0 ? tol * (1.0 - delta) / (2.0 * delta) : std::numeric_limits<double>::infinity();

    ValueTables t;
    std::vector<double> current(dyn.n_states(), 0.0), next;
    for (int it = 1; it <= max_iterations; ++it) {
        t.last_change = bellman_sweep(dyn, current, next, t.policy);
        current.swap(next);
        t.iterations = it;
        if (t.last_change < threshold) {
            t.cost_to_go = std::move(current);
            // Greedy policy with respect to the returned table.
            bellman_sweep(dyn, t.cost_to_go, next, t.policy);
            t.post_value = pds_value(dyn, t.cost_to_go);
            return t;
        }
    }
    throw NonConvergence("value iteration did not converge within " + std::to_string(max_iterations) +
                         " sweeps (last change " + std::to_string(t.last_change) + ")");
}

ValueTables value_iteration(const Dynamics& dyn)
{
    return value_iteration(dyn, dyn.config().oracle.tol, dyn.config().oracle.max_iterations);
}

std::vector<double> pds_value(const Dynamics& dyn, const std::vector<double>& cost_to_go)
{
    const std::size_t n = dyn.n_states();
    const std::size_t nb = dyn.space().battery_levels();
    const auto w = exogenous_expectation(dyn, cost_to_go);
    std::vector<double> v(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t si = 0; si < static_cast<std::ptrdiff_t>(n); ++si) {
        const auto i = static_cast<std::size_t>(si);
        const SystemState s = dyn.space().state_of(i);
        v[i] = green_average(dyn, &w[(i / nb) * nb], s.env, s.battery);
    }
    return v;
}

std::vector<double> pds_value_reference(const Dynamics& dyn, const std::vector<double>& cost_to_go)
{
    const StateSpace& space = dyn.space();
    const int cap = dyn.config().battery_levels - 1;
    std::vector<double> v(space.size(), 0.0);
    for (std::size_t i = 0; i < space.size(); ++i) {
        const SystemState post = space.state_of(i);
        const std::size_t x = space.exogenous_index(post);
        const auto& pmf = dyn.green(post.env);
        double acc = 0.0;
        for (std::size_t j = 0; j < space.size(); ++j) {
            const SystemState s = space.state_of(j);
            double pg = 0.0;
            for (std::size_t g = 0; g < pmf.size(); ++g)
                if (s.battery == std::min(post.battery + static_cast<int>(g), cap)) pg += pmf[g];
            acc += dyn.exo(x, space.exogenous_index(s)) * pg * cost_to_go[j];
        }
        v[i] = acc;
    }
    return v;
}

std::vector<double> pds_residuals(const Dynamics& dyn, const std::vector<double>& cost_to_go,
                                  const std::vector<double>& post_value)
{
    const double delta = dyn.config().discount;
    std::vector<double> r(dyn.n_states());
    for (std::size_t i = 0; i < dyn.n_states(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (int a = 0; a < dyn.feasible_count(i); ++a)
            best = std::min(best, dyn.expected_cost(i, a) + delta * post_value[dyn.pds_index(i, a)]);
        r[i] = std::abs(cost_to_go[i] - best);
    }
    return r;
}

}  // namespace edgesim
