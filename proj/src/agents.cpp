#include "edgesim/agents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "edgesim/oracle.hpp"

namespace edgesim {

std::vector<int> feasible_actions(const Config& cfg, const SystemState& s)
{
    std::vector<int> out(static_cast<std::size_t>(feasible_action_count(cfg, s)));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<int>(i);
    return out;
}

double HarmonicSchedule::square_sum_bound() const
{
    if (coeff <= 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 + std::numbers::pi * std::numbers::pi / (6.0 * coeff * coeff);
}

// ---------------------------------------------------------------------------

CostEstimator::CostEstimator(const CostModel& model, HarmonicSchedule schedule)
    : model_(&model),
      space_(model.config()),
      na_(model.config().n_actions()),
      schedule_(schedule),
      table_(space_.size() * na_, 0.0),
      visits_(model.config().n_envs(), 0)
{
}

void CostEstimator::update(int env, int green)
{
    const Config& cfg = model_->config();
    const double rho = schedule_.rate(visits_[static_cast<std::size_t>(env)]++);
    const int nl = static_cast<int>(cfg.n_workloads());
    const int nh = static_cast<int>(cfg.n_congestions());
    for (int l = 0; l < nl; ++l)
        for (int h = 0; h < nh; ++h)
            for (int b = 0; b < cfg.battery_levels; ++b) {
                const SystemState s{l, env, h, b};
                double* row = &table_[space_.index_of(s) * na_];
                for (std::size_t a = 0; a < na_; ++a)
                    row[a] = (1.0 - rho) * row[a] + rho * model_->realized_cost(s, static_cast<int>(a), green);
            }
}

// ---------------------------------------------------------------------------

PdsLearner::PdsLearner(const CostModel& model, std::uint64_t seed, std::uint64_t replica)
    : model_(&model),
      space_(model.config()),
      na_(model.config().n_actions()),
      delta_(model.config().discount),
      epsilon_(model.config().pds.epsilon),
      cost_schedule_{model.config().pds.rate_coeff},
      value_schedule_{model.config().pds.rate_coeff},
      costs_(model, cost_schedule_),
      state_value_(space_.size(), 0.0),
      post_value_(space_.size(), 0.0),
      post_index_(space_.size() * na_, 0),
      context_visits_(space_.exogenous_size(), 0),
      rng_(seed, replica, StreamId::agent)
{
    const Config& cfg = model.config();
    for (std::size_t i = 0; i < space_.size(); ++i) {
        const SystemState s = space_.state_of(i);
        for (std::size_t a = 0; a < na_; ++a) {
            const PdsState p = pds_of(cfg, s, static_cast<int>(a));
            post_index_[i * na_ + a] = space_.index_of({p.workload, p.env, p.congestion, p.battery_post});
        }
    }
}

double PdsLearner::q_value(std::size_t state, int action) const
{
    return costs_.estimate(state, action) + delta_ * post_value_[post_index_[state * na_ + action]];
}

int PdsLearner::greedy(const SystemState& s) const
{
    const std::size_t i = space_.index_of(s);
    const int n = feasible_action_count(model_->config(), s);
    int best_a = 0;
    double best = q_value(i, 0);
    for (int a = 1; a < n; ++a) {
        const double v = q_value(i, a);
        if (v < best) {
            best = v;
            best_a = a;
        }
    }
    return best_a;
}

int PdsLearner::select(const SystemState& s)
{
    if (epsilon_ > 0.0 && rng_.uniform() < epsilon_)
        return rng_.uniform_int(feasible_action_count(model_->config(), s));
    return greedy(s);
}

void PdsLearner::observe(const Transition& t)
{
    if (t.slot != slot_)
        throw StaleRecord("record for slot " + std::to_string(t.slot) + " but learner is at slot " +
                          std::to_string(slot_));
    const Config& cfg = model_->config();
    const int env = t.state.env;

    // Cost estimates for every (s, a) with e = e(t).
    costs_.update(env, t.green);

    // Normal values for every s with e = e(t), against V^ of slot t.
    const int nl = static_cast<int>(cfg.n_workloads());
    const int nh = static_cast<int>(cfg.n_congestions());
    for (int l = 0; l < nl; ++l)
        for (int h = 0; h < nh; ++h)
            for (int b = 0; b < cfg.battery_levels; ++b) {
                const SystemState s{l, env, h, b};
                const std::size_t i = space_.index_of(s);
                double best = q_value(i, 0);
                const int n = feasible_action_count(cfg, s);
                for (int a = 1; a < n; ++a) best = std::min(best, q_value(i, a));
                state_value_[i] = best;
            }

    // Post-decision values: every battery level of the visited exogenous
    // triple moves toward C^(lambda', e', h', min(b~ + g, B)).
    const std::size_t nb = space_.battery_levels();
    const std::size_t x = space_.exogenous_index(t.state);
    const std::size_t x_next = space_.exogenous_index(t.next);
    const double alpha = value_schedule_.rate(context_visits_[x]++);
    const int cap = cfg.battery_levels - 1;
    for (std::size_t b = 0; b < nb; ++b) {
        const auto landed = static_cast<std::size_t>(std::min(static_cast<int>(b) + t.green, cap));
        double& v = post_value_[x * nb + b];
        v = (1.0 - alpha) * v + alpha * state_value_[x_next * nb + landed];
    }
    ++slot_;
}

// ---------------------------------------------------------------------------

MyopicAgent::MyopicAgent(const CostModel& model)
    : costs_(model, HarmonicSchedule{model.config().pds.rate_coeff})
{
}

void MyopicAgent::observe(const Transition& t)
{
    if (t.slot != slot_) throw StaleRecord("myopic agent received an out-of-order record");
    costs_.update(t.state.env, t.green);
    ++slot_;
}

int MyopicAgent::greedy(const SystemState& s) const
{
    const std::size_t i = costs_.space().index_of(s);
    const int n = feasible_action_count(costs_.model().config(), s);
    int best_a = 0;
    for (int a = 1; a < n; ++a)
        if (costs_.estimate(i, a) < costs_.estimate(i, best_a)) best_a = a;
    return best_a;
}

// ---------------------------------------------------------------------------

double q_update(double q, double cost, double next_min, double delta, double beta)
{
    return (1.0 - beta) * q + beta * (cost + delta * next_min);
}

QLearner::QLearner(const CostModel& model, std::uint64_t horizon, std::uint64_t seed, std::uint64_t replica)
    : model_(&model),
      space_(model.config()),
      na_(model.config().n_actions()),
      params_(model.config().q),
      delta_(model.config().discount),
      horizon_(horizon),
      q_(space_.size() * na_, 0.0),
      visits_(space_.size() * na_, 0),
      rng_(seed, replica, StreamId::agent)
{
}

double QLearner::epsilon() const
{
    if (forced_epsilon_ >= 0.0) return forced_epsilon_;
    const double span = params_.decay_fraction * static_cast<double>(horizon_);
    const double frac = span > 0.0 ? std::min(static_cast<double>(slot_) / span, 1.0) : 1.0;
    return params_.epsilon_start - (params_.epsilon_start - params_.epsilon_min) * frac;
}

double QLearner::step_size(std::size_t state, int action) const
{
    return 1.0 / std::pow(1.0 + static_cast<double>(visits_[state * na_ + action]), params_.rate_exponent);
}

int QLearner::greedy(const SystemState& s) const
{
    const std::size_t i = space_.index_of(s);
    const int n = feasible_action_count(model_->config(), s);
    int best_a = 0;
    for (int a = 1; a < n; ++a)
        if (q_[i * na_ + a] < q_[i * na_ + best_a]) best_a = a;
    return best_a;
}

int QLearner::select(const SystemState& s)
{
    const double u = rng_.uniform();
    if (u < epsilon()) return rng_.uniform_int(feasible_action_count(model_->config(), s));
    return greedy(s);
}

double QLearner::min_q(const SystemState& s) const
{
    const std::size_t i = space_.index_of(s);
    const int n = feasible_action_count(model_->config(), s);
    double best = q_[i * na_];
    for (int a = 1; a < n; ++a) best = std::min(best, q_[i * na_ + a]);
    return best;
}

void QLearner::observe(const Transition& t)
{
    if (t.slot != slot_) throw StaleRecord("Q-learner received an out-of-order record");
    const std::size_t i = space_.index_of(t.state);
    const double beta = step_size(i, t.action);
    double& q = q_[i * na_ + t.action];
    q = q_update(q, t.cost, min_q(t.next), delta_, beta);
    ++visits_[i * na_ + t.action];
    ++slot_;
}

// ---------------------------------------------------------------------------

FixedAgent::FixedAgent(const Config& cfg, WattHours level) : cfg_(&cfg), level_(action_index(cfg, level)) {}

int FixedAgent::greedy(const SystemState& s) const
{
    return std::min(level_, feasible_action_count(*cfg_, s) - 1);
}

PolicyAgent::PolicyAgent(const Config& cfg, std::vector<int> policy) : space_(cfg), policy_(std::move(policy))
{
    if (policy_.size() != space_.size()) throw std::invalid_argument("policy table size does not match state space");
}

}  // namespace edgesim
