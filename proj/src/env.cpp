#include "edgesim/env.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace edgesim {

namespace {
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
}  // namespace

std::vector<double> green_pmf(const Config& cfg, int env)
{
    const auto& cls = cfg.green.classes.at(static_cast<std::size_t>(env));
    const int n = cfg.green_levels;
    const double step = cfg.battery_step;
    std::vector<double> pmf(static_cast<std::size_t>(n), 0.0);

    if (cls.stddev == 0.0) {
        const double q = cls.mean / step;
        const long k = std::lround(q);
        if (std::abs(q - static_cast<double>(k)) > 1e-9 || k < 0 || k >= n)
            throw DegenerateSpec("point-mass green mean " + std::to_string(cls.mean) + " is off the support grid");
        pmf[static_cast<std::size_t>(k)] = 1.0;
        return pmf;
    }
    if (n == 1) {
        pmf[0] = 1.0;
        return pmf;
    }

    // Cell edges at k*step +- step/2; the outer edges extend to infinity.
    double lower = 0.0;
    for (int k = 0; k < n; ++k) {
        const double upper = k == n - 1 ? 1.0 : normal_cdf(((k + 0.5) * step - cls.mean) / cls.stddev);
        pmf[static_cast<std::size_t>(k)] = upper - lower;
        lower = upper;
    }
    return pmf;
}

std::vector<double> exogenous_kernel(const Config& cfg)
{
    const std::size_t nl = cfg.n_workloads(), ne = cfg.n_envs(), nh = cfg.n_congestions();
    const std::size_t n = nl * ne * nh;
    std::vector<double> k(n * n);
    for (std::size_t l = 0; l < nl; ++l)
        for (std::size_t e = 0; e < ne; ++e)
            for (std::size_t h = 0; h < nh; ++h) {
                const std::size_t x = (l * ne + e) * nh + h;
                for (std::size_t l2 = 0; l2 < nl; ++l2)
                    for (std::size_t e2 = 0; e2 < ne; ++e2)
                        for (std::size_t h2 = 0; h2 < nh; ++h2) {
                            const std::size_t y = (l2 * ne + e2) * nh + h2;
                            k[x * n + y] = cfg.workload_chain.matrix[l][l2] * cfg.env_chain.matrix[e][e2] *
                                           cfg.congestion_chain.matrix[h][h2];
                        }
            }
    return k;
}

int feasible_action_count(const Config& cfg, const SystemState& s)
{
    const int bound = std::max(s.battery - cfg.op_steps[s.workload], 0);
    const auto& steps = cfg.action_steps;
    return static_cast<int>(std::upper_bound(steps.begin(), steps.end(), bound) - steps.begin());
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t replica, StreamId id)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(replica), static_cast<std::uint32_t>(replica >> 32),
                      static_cast<std::uint32_t>(id)};
    engine_.seed(seq);
}

int RandomStream::categorical(const std::vector<double>& pmf)
{
    const double u = uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < pmf.size(); ++i) {
        acc += pmf[i];
        if (u < acc) return static_cast<int>(i);
    }
    // Remaining mass (including rounding) belongs to the last positive entry.
    for (std::size_t i = pmf.size(); i-- > 0;)
        if (pmf[i] > 0.0) return static_cast<int>(i);
    return 0;
}

World::World(const CostModel& model, std::uint64_t seed, std::uint64_t replica)
    : World(model, seed, replica,
            make_state(model.config(), model.config().initial.workload, model.config().initial.env,
                       model.config().initial.congestion, model.config().initial.battery))
{
}

World::World(const CostModel& model, std::uint64_t seed, std::uint64_t replica, SystemState start)
    : model_(&model),
      state_(start),
      green_rng_(seed, replica, StreamId::green),
      workload_rng_(seed, replica, StreamId::workload),
      env_rng_(seed, replica, StreamId::env),
      congestion_rng_(seed, replica, StreamId::congestion)
{
    const Config& cfg = model.config();
    for (std::size_t e = 0; e < cfg.n_envs(); ++e) green_.push_back(green_pmf(cfg, static_cast<int>(e)));
}

StepResult World::step(int action)
{
    const Config& cfg = model_->config();
    if (action < 0 || action >= feasible_action_count(cfg, state_))
        throw InfeasibleAction("action index " + std::to_string(action) + " violates the conservative constraint");

    StepResult r;
    r.draw.green = green_rng_.categorical(green_[static_cast<std::size_t>(state_.env)]);
    r.draw.workload = workload_rng_.categorical(cfg.workload_chain.matrix[static_cast<std::size_t>(state_.workload)]);
    r.draw.env = env_rng_.categorical(cfg.env_chain.matrix[static_cast<std::size_t>(state_.env)]);
    r.draw.congestion =
        congestion_rng_.categorical(cfg.congestion_chain.matrix[static_cast<std::size_t>(state_.congestion)]);

    r.green = r.draw.green;
    r.backup = model_->needs_backup(state_);
    r.cost = model_->realized_cost(state_, action, r.green);
    r.next = {r.draw.workload, r.draw.env, r.draw.congestion, model_->battery_next(state_, action, r.green)};
    state_ = r.next;
    return r;
}

}  // namespace edgesim
