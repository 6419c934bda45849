#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "edgesim/config.hpp"
#include "edgesim/models.hpp"

namespace edgesim {

class DegenerateSpec : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InfeasibleAction : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Discretized truncated normal for environment class `env` over the green
/// support {0, step, ..., cap}. Tails collapse onto the end points.
std::vector<double> green_pmf(const Config& cfg, int env);

/// Dense joint kernel over the exogenous triple in canonical order:
/// entry [x * n + y] = P_lambda * P_e * P_h for x -> y.
std::vector<double> exogenous_kernel(const Config& cfg);

/// Number of feasible actions at s; the feasible set is always the prefix
/// {0, ..., count - 1} of the ascending action grid.
int feasible_action_count(const Config& cfg, const SystemState& s);

enum class StreamId : std::uint64_t { green = 1, workload = 2, env = 3, congestion = 4, agent = 5 };

/// Independent, named random stream. Uniforms are built from the top 53 bits
/// of a 64-bit Mersenne Twister so draws are identical across standard
/// libraries.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t replica, StreamId id);

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    int categorical(const std::vector<double>& pmf);
    int uniform_int(int n) { return std::min(static_cast<int>(uniform() * n), n - 1); }

private:
    std::mt19937_64 engine_;
};

struct ExogenousDraw {
    int green = 0;
    int workload = 0;
    int env = 0;
    int congestion = 0;
};

struct StepResult {
    int green = 0;            // green level (battery grid steps)
    double cost = 0.0;
    bool backup = false;
    SystemState next;
    ExogenousDraw draw;
};

/// The ground-truth world for one replica. Single owner; replicas are
/// independent and may live on different threads.
class World {
public:
    World(const CostModel& model, std::uint64_t seed, std::uint64_t replica);
    World(const CostModel& model, std::uint64_t seed, std::uint64_t replica, SystemState start);

    const SystemState& state() const { return state_; }

    /// Draws g ~ P_g(.|e), settles cost and battery, then advances the
    /// chains. Draw order is (g, lambda, e, h), each from its own stream.
    StepResult step(int action);

private:
    const CostModel* model_;
    std::vector<std::vector<double>> green_;
    SystemState state_;
    RandomStream green_rng_, workload_rng_, env_rng_, congestion_rng_;
};

}  // namespace edgesim
