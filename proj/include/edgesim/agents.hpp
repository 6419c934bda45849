#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgesim/config.hpp"
#include "edgesim/env.hpp"
#include "edgesim/models.hpp"

namespace edgesim {

class StaleRecord : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Conservative feasible set: grid levels a <= max{b - d_op(lambda), 0},
/// as ascending action indices. Never empty.
std::vector<int> feasible_actions(const Config& cfg, const SystemState& s);

/// What the agent sees after each slot.
struct Transition {
    std::uint64_t slot = 0;
    SystemState state;
    int action = 0;
    int green = 0;
    double cost = 0.0;
    SystemState next;
};

class Agent {
public:
    virtual ~Agent() = default;

    /// Action index for the current slot; always feasible.
    virtual int select(const SystemState& s) = 0;
    /// Called exactly once per slot, after the environment step.
    virtual void observe(const Transition& t) = 0;
    /// Current greedy decision without exploration (used for policy export).
    virtual int greedy(const SystemState& s) const = 0;
};

/// Learning-rate schedule 1 / (1 + coeff * n) over a per-context visit count.
/// For coeff > 0 the rates sum to infinity while their squares sum to at most
/// 1 + pi^2 / (6 coeff^2).
struct HarmonicSchedule {
    double coeff = 0.01;

    double rate(std::uint64_t visits) const { return 1.0 / (1.0 + coeff * static_cast<double>(visits)); }
    /// Closed-form bound on sum_n rate(n)^2.
    double square_sum_bound() const;
};

/// One-slot cost estimates c^(s, a), batch-updated over every state that
/// shares the observed environment class.
class CostEstimator {
public:
    CostEstimator(const CostModel& model, HarmonicSchedule schedule);

    double estimate(std::size_t state, int action) const { return table_[state * na_ + action]; }
    const std::vector<double>& table() const { return table_; }
    std::uint64_t env_visits(int env) const { return visits_[static_cast<std::size_t>(env)]; }

    /// Batch cost-estimate update for environment `env` and green level `green`.
    void update(int env, int green);
    void assign(std::size_t state, int action, double value) { table_[state * na_ + action] = value; }

    const CostModel& model() const { return *model_; }
    const StateSpace& space() const { return space_; }

private:
    const CostModel* model_;
    StateSpace space_;
    std::size_t na_;
    HarmonicSchedule schedule_;
    std::vector<double> table_;
    std::vector<std::uint64_t> visits_;
};

/// Online learner over post-decision states.
class PdsLearner final : public Agent {
public:
    PdsLearner(const CostModel& model, std::uint64_t seed = 0, std::uint64_t replica = 0);

    int select(const SystemState& s) override;
    void observe(const Transition& t) override;
    int greedy(const SystemState& s) const override;

    const std::vector<double>& cost_estimates() const { return costs_.table(); }
    const std::vector<double>& state_values() const { return state_value_; }  // C^
    const std::vector<double>& post_values() const { return post_value_; }    // V^
    std::uint64_t slot() const { return slot_; }
    const HarmonicSchedule& cost_schedule() const { return cost_schedule_; }
    const HarmonicSchedule& value_schedule() const { return value_schedule_; }

    /// Direct table access for hand-built scenarios.
    std::vector<double>& mutable_post_values() { return post_value_; }
    CostEstimator& estimator() { return costs_; }

private:
    double q_value(std::size_t state, int action) const;

    const CostModel* model_;
    StateSpace space_;
    std::size_t na_;
    double delta_;
    double epsilon_;
    HarmonicSchedule cost_schedule_, value_schedule_;
    CostEstimator costs_;
    std::vector<double> state_value_;
    std::vector<double> post_value_;
    std::vector<std::size_t> post_index_;          // per (state, action)
    std::vector<std::uint64_t> context_visits_;    // per exogenous triple
    std::uint64_t slot_ = 0;
    RandomStream rng_;
};

/// Minimizes the learned one-slot cost only; shares CostEstimator with the
/// PDS learner.
class MyopicAgent final : public Agent {
public:
    explicit MyopicAgent(const CostModel& model);

    int select(const SystemState& s) override { return greedy(s); }
    void observe(const Transition& t) override;
    int greedy(const SystemState& s) const override;

    CostEstimator& estimator() { return costs_; }

private:
    CostEstimator costs_;
    std::uint64_t slot_ = 0;
};

/// (1 - beta) q + beta (cost + delta * next_min).
double q_update(double q, double cost, double next_min, double delta, double beta);

/// Tabular Q-learning with epsilon-greedy exploration over feasible actions.
class QLearner final : public Agent {
public:
    QLearner(const CostModel& model, std::uint64_t horizon, std::uint64_t seed = 0, std::uint64_t replica = 0);

    int select(const SystemState& s) override;
    void observe(const Transition& t) override;
    int greedy(const SystemState& s) const override;

    double epsilon() const;
    double q(std::size_t state, int action) const { return q_[state * na_ + action]; }
    void set_q(std::size_t state, int action, double value) { q_[state * na_ + action] = value; }
    void set_visits(std::size_t state, int action, std::uint64_t n) { visits_[state * na_ + action] = n; }
    /// Overrides the epsilon schedule (negative restores it).
    void force_epsilon(double eps) { forced_epsilon_ = eps; }
    double step_size(std::size_t state, int action) const;

private:
    double min_q(const SystemState& s) const;

    const CostModel* model_;
    StateSpace space_;
    std::size_t na_;
    QLearnerParams params_;
    double delta_;
    std::uint64_t horizon_;
    std::vector<double> q_;
    std::vector<std::uint64_t> visits_;
    std::uint64_t slot_ = 0;
    double forced_epsilon_ = -1.0;
    RandomStream rng_;
};

/// Spends a fixed computing budget whenever the battery allows it.
class FixedAgent final : public Agent {
public:
    FixedAgent(const Config& cfg, WattHours level);

    int select(const SystemState& s) override { return greedy(s); }
    void observe(const Transition&) override {}
    int greedy(const SystemState& s) const override;

private:
    const Config* cfg_;
    int level_;
};

/// Replays a precomputed policy table (e.g. the value-iteration optimum).
class PolicyAgent final : public Agent {
public:
    PolicyAgent(const Config& cfg, std::vector<int> policy);

    int select(const SystemState& s) override { return greedy(s); }
    void observe(const Transition&) override {}
    int greedy(const SystemState& s) const override { return policy_[space_.index_of(s)]; }

private:
    StateSpace space_;
    std::vector<int> policy_;
};

}  // namespace edgesim
