#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgesim/agents.hpp"
#include "edgesim/config.hpp"
#include "edgesim/models.hpp"
#include "edgesim/oracle.hpp"

namespace edgesim {

class UnknownScheme : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class SchemeKind { pds, q, myopic, fixed, oracle };

struct Scheme {
    SchemeKind kind = SchemeKind::pds;
    WattHours level = 0.0;  // fixed only
    std::string name;       // as given on the command line, e.g. "fixed:50"
};

/// Parses pds | q | myopic | oracle | fixed:<Wh>. The fixed level must be on
/// the action grid.
Scheme parse_scheme(const Config& cfg, const std::string& text);

/// Config plus everything derived from it that runs share: the cached cost
/// model and (solved on first use) the exact oracle tables.
class Experiment {
public:
    explicit Experiment(Config cfg);
    Experiment(const Experiment&) = delete;
    Experiment& operator=(const Experiment&) = delete;

    const Config& config() const { return model_.config(); }
    const CostModel& model() const { return model_; }
    const Dynamics& dynamics() const;
    const ValueTables& oracle() const;

    std::unique_ptr<Agent> make_agent(const Scheme& scheme, std::uint64_t horizon, std::uint64_t seed,
                                      std::uint64_t replica) const;

private:
    CostModel model_;
    mutable std::unique_ptr<Dynamics> dynamics_;
    mutable std::unique_ptr<ValueTables> oracle_;
};

struct SlotRecord {
    std::uint64_t slot = 0;
    SystemState state;
    int action = 0;
    int green = 0;
    double cost = 0.0;
    bool backup = false;
    int battery_after = 0;
    ExogenousDraw draw;
};

struct RunOptions {
    std::uint64_t slots = 1000;
    std::uint64_t runs = 30;
    std::uint64_t seed = 1;
};

struct SchemeResult {
    Scheme scheme;
    std::vector<std::vector<SlotRecord>> records;  // [run][slot]
    std::vector<double> running_average;           // per slot, averaged over runs
    std::vector<double> mean_cost;                 // per slot, averaged over runs
    std::vector<double> discounted_running;        // per slot, mean discounted cumulative cost
    std::vector<double> discounted;                // per run
    std::vector<std::uint64_t> battery_hist;       // per battery level, b(t) at slot start
    std::vector<int> policy;                       // replica 0's greedy policy after the run
    double wall_seconds = 0.0;

    double final_running_average() const { return running_average.empty() ? 0.0 : running_average.back(); }
    double battery_mean_wh(const Config& cfg) const;
    double fraction_at_capacity() const;
};

/// Runs `runs` replicas seeded (seed, replica) in parallel; replica r of every
/// scheme sees the same exogenous draws. Results are merged in replica order.
SchemeResult simulate(const Experiment& exp, const Scheme& scheme, const RunOptions& opts);

struct Comparison {
    std::vector<SchemeResult> results;
    std::size_t best = 0;
    std::vector<double> reduction;  // (other - best) / other at the final slot
};

Comparison compare_schemes(const Experiment& exp, const std::vector<Scheme>& schemes, const RunOptions& opts);

// -- file output -------------------------------------------------------------

struct OutputOptions {
    bool trace = false;
    bool records = true;
};

/// Writes runtime_costs.csv, discounted_costs.csv, battery_hist.csv,
/// policy.csv (first scheme; policy_<name>.csv for the others),
/// records_<name>.csv, summary.json and, with trace, trace.csv.
void write_results(const Experiment& exp, const std::vector<SchemeResult>& results, const RunOptions& opts,
                   const OutputOptions& out_opts, const std::filesystem::path& dir,
                   const Comparison* comparison = nullptr);

SchemeResult run_experiment(const Experiment& exp, const Scheme& scheme, const RunOptions& opts,
                            const OutputOptions& out_opts, const std::filesystem::path& dir);

Comparison compare(const Experiment& exp, const std::vector<Scheme>& schemes, const RunOptions& opts,
                   const OutputOptions& out_opts, const std::filesystem::path& dir);

/// Solves the oracle and writes C_star.csv (with the post-decision residual
/// column), V_star.csv and policy_star.csv.
const ValueTables& solve(const Experiment& exp, const std::filesystem::path& dir);

/// File-safe form of a scheme name ("fixed:50" -> "fixed-50").
std::string file_tag(const std::string& scheme_name);

}  // namespace edgesim
