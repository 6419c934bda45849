#include "edgesim/harness.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace edgesim {

Scheme parse_scheme(const Config& cfg, const std::string& text)
{
    Scheme s;
    s.name = text;
    if (text == "pds") {
        s.kind = SchemeKind::pds;
    } else if (text == "q" || text == "q-learning") {
        s.kind = SchemeKind::q;
    } else if (text == "myopic") {
        s.kind = SchemeKind::myopic;
    } else if (text == "oracle") {
        s.kind = SchemeKind::oracle;
    } else if (text.rfind("fixed:", 0) == 0) {
        s.kind = SchemeKind::fixed;
        const std::string num = text.substr(6);
        double level = 0.0;
        const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), level);
        if (ec != std::errc{} || ptr != num.data() + num.size())
            throw UnknownScheme("bad fixed level in scheme '" + text + "'");
        if (std::find(cfg.actions.begin(), cfg.actions.end(), level) == cfg.actions.end())
            throw UnknownScheme("fixed level " + num + " is not on the action grid");
        s.level = level;
    } else {
        throw UnknownScheme("unknown scheme '" + text + "' (expected pds, q, myopic, oracle or fixed:<Wh>)");
    }
    return s;
}

std::string file_tag(const std::string& name)
{
    std::string out = name;
    for (char& c : out)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '-';
    return out;
}

// ---------------------------------------------------------------------------

Experiment::Experiment(Config cfg) : model_(cfg) {}

const Dynamics& Experiment::dynamics() const
{
    if (!dynamics_) dynamics_ = std::make_unique<Dynamics>(config());
    return *dynamics_;
}

const ValueTables& Experiment::oracle() const
{
    if (!oracle_) oracle_ = std::make_unique<ValueTables>(value_iteration(dynamics()));
    return *oracle_;
}

std::unique_ptr<Agent> Experiment::make_agent(const Scheme& scheme, std::uint64_t horizon, std::uint64_t seed,
                                              std::uint64_t replica) const
{
    switch (scheme.kind) {
    case SchemeKind::pds: return std::make_unique<PdsLearner>(model_, seed, replica);
    case SchemeKind::q: return std::make_unique<QLearner>(model_, horizon, seed, replica);
    case SchemeKind::myopic: return std::make_unique<MyopicAgent>(model_);
    case SchemeKind::fixed: return std::make_unique<FixedAgent>(model_.config(), scheme.level);
    case SchemeKind::oracle: return std::make_unique<PolicyAgent>(model_.config(), oracle().policy);
    }
    throw UnknownScheme("unhandled scheme kind");
}

// ---------------------------------------------------------------------------

double SchemeResult::battery_mean_wh(const Config& cfg) const
{
    std::uint64_t total = 0;
    double acc = 0.0;
    for (std::size_t b = 0; b < battery_hist.size(); ++b) {
        total += battery_hist[b];
        acc += static_cast<double>(battery_hist[b]) * cfg.battery_wh(static_cast<int>(b));
    }
    return total ? acc / static_cast<double>(total) : 0.0;
}

double SchemeResult::fraction_at_capacity() const
{
    std::uint64_t total = 0;
    for (auto c : battery_hist) total += c;
    return total ? static_cast<double>(battery_hist.back()) / static_cast<double>(total) : 0.0;
}

SchemeResult simulate(const Experiment& exp, const Scheme& scheme, const RunOptions& opts)
{
    if (opts.runs < 1) throw std::invalid_argument("runs must be >= 1");
    const Config& cfg = exp.config();
    const auto t0 = std::chrono::steady_clock::now();
    if (scheme.kind == SchemeKind::oracle) exp.oracle();  // solve before going parallel

    SchemeResult r;
    r.scheme = scheme;
    r.records.resize(opts.runs);
    std::vector<std::vector<int>> policies(opts.runs);
    const std::int64_t runs = static_cast<std::int64_t>(opts.runs);

    // Exceptions must not escape an OpenMP region; collect and rethrow.
    std::vector<std::exception_ptr> errors(opts.runs);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t ri = 0; ri < runs; ++ri) {
        const auto run = static_cast<std::uint64_t>(ri);
        try {
            World world(exp.model(), opts.seed, run);
            auto agent = exp.make_agent(scheme, opts.slots, opts.seed, run);
            auto& recs = r.records[run];
            recs.reserve(opts.slots);
            for (std::uint64_t t = 0; t < opts.slots; ++t) {
                const SystemState s = world.state();
                const int a = agent->select(s);
                const StepResult step = world.step(a);
                agent->observe({t, s, a, step.green, step.cost, step.next});
                recs.push_back({t, s, a, step.green, step.cost, step.backup, step.next.battery, step.draw});
            }
            if (run == 0) {
                const StateSpace space(cfg);
                policies[0].resize(space.size());
                for (std::size_t i = 0; i < space.size(); ++i) policies[0][i] = agent->greedy(space.state_of(i));
            }
        } catch (...) {
            errors[run] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    // Merge in replica order so results do not depend on scheduling.
    const std::size_t n = opts.slots;
    r.running_average.assign(n, 0.0);
    r.mean_cost.assign(n, 0.0);
    r.discounted_running.assign(n, 0.0);
    r.discounted.assign(opts.runs, 0.0);
    r.battery_hist.assign(static_cast<std::size_t>(cfg.battery_levels), 0);
    for (std::uint64_t run = 0; run < opts.runs; ++run) {
        double prefix = 0.0, disc = 0.0, weight = 1.0;
        for (std::size_t t = 0; t < n; ++t) {
            const auto& rec = r.records[run][t];
            prefix += rec.cost;
            disc += weight * rec.cost;
            weight *= cfg.discount;
            r.mean_cost[t] += rec.cost;
            r.running_average[t] += prefix / static_cast<double>(t + 1);
            r.discounted_running[t] += disc;
            ++r.battery_hist[static_cast<std::size_t>(rec.state.battery)];
        }
        r.discounted[run] = disc;
    }
    const double inv = 1.0 / static_cast<double>(opts.runs);
    for (std::size_t t = 0; t < n; ++t) {
        r.mean_cost[t] *= inv;
        r.running_average[t] *= inv;
        r.discounted_running[t] *= inv;
    }
    r.policy = std::move(policies[0]);
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

Comparison compare_schemes(const Experiment& exp, const std::vector<Scheme>& schemes, const RunOptions& opts)
{
    if (schemes.size() < 2) throw std::invalid_argument("compare needs at least two schemes");
    Comparison c;
    for (const auto& s : schemes) c.results.push_back(simulate(exp, s, opts));
    for (std::size_t i = 1; i < c.results.size(); ++i)
        if (c.results[i].final_running_average() < c.results[c.best].final_running_average()) c.best = i;
    const double best = c.results[c.best].final_running_average();
    for (const auto& r : c.results) {
        const double other = r.final_running_average();
        c.reduction.push_back(other > 0.0 ? (other - best) / other : 0.0);
    }
    return c;
}

// ---------------------------------------------------------------------------

namespace {

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path) : out_(path, std::ios::binary)
    {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
    }
    void row(const std::vector<std::string>& fields)
    {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << csv_field(fields[i]);
        }
        out_ << "\r\n";
    }

private:
    std::ofstream out_;
};

std::vector<std::string> state_fields(const Config& cfg, std::size_t index, const SystemState& s)
{
    return {std::to_string(index), num(cfg.workloads[s.workload]), cfg.envs[s.env], num(cfg.congestions[s.congestion]),
            num(cfg.battery_wh(s.battery))};
}

void write_policy(const Experiment& exp, const std::vector<int>& policy, const std::filesystem::path& path)
{
    const Config& cfg = exp.config();
    const StateSpace space(cfg);
    CsvWriter w(path);
    w.row({"state", "workload", "env", "congestion", "battery_wh", "action_wh", "servers", "local_rate"});
    for (std::size_t i = 0; i < policy.size(); ++i) {
        const SystemState s = space.state_of(i);
        const int a = policy[i];
        const Allocation alloc = exp.model().needs_backup(s) ? Allocation{} : exp.model().allocation(s, a);
        auto f = state_fields(cfg, i, s);
        f.push_back(num(cfg.actions[a]));
        f.push_back(std::to_string(alloc.servers));
        f.push_back(std::to_string(alloc.local_rate));
        w.row(f);
    }
}

}  // namespace

void write_results(const Experiment& exp, const std::vector<SchemeResult>& results, const RunOptions& opts,
                   const OutputOptions& out_opts, const std::filesystem::path& dir, const Comparison* comparison)
{
    const Config& cfg = exp.config();
    std::filesystem::create_directories(dir);

    std::vector<std::string> header{"slot"};
    for (const auto& r : results) header.push_back(r.scheme.name);

    {
        CsvWriter w(dir / "runtime_costs.csv");
        w.row(header);
        for (std::size_t t = 0; t < opts.slots; ++t) {
            std::vector<std::string> row{std::to_string(t + 1)};
            for (const auto& r : results) row.push_back(num(r.running_average[t]));
            w.row(row);
        }
    }
    {
        CsvWriter w(dir / "discounted_costs.csv");
        w.row(header);
        for (std::size_t t = 0; t < opts.slots; ++t) {
            std::vector<std::string> row{std::to_string(t + 1)};
            for (const auto& r : results) row.push_back(num(r.discounted_running[t]));
            w.row(row);
        }
    }
    {
        CsvWriter w(dir / "battery_hist.csv");
        std::vector<std::string> h{"battery_wh"};
        for (const auto& r : results) h.push_back(r.scheme.name);
        w.row(h);
        for (int b = 0; b < cfg.battery_levels; ++b) {
            std::vector<std::string> row{num(cfg.battery_wh(b))};
            for (const auto& r : results) row.push_back(std::to_string(r.battery_hist[static_cast<std::size_t>(b)]));
            w.row(row);
        }
    }
    for (std::size_t k = 0; k < results.size(); ++k) {
        const auto& r = results[k];
        const std::string tag = file_tag(r.scheme.name);
        write_policy(exp, r.policy, dir / (k == 0 ? std::string("policy.csv") : "policy_" + tag + ".csv"));
        if (out_opts.records) {
            CsvWriter w(dir / ("records_" + tag + ".csv"));
            w.row({"run", "slot", "workload", "env", "congestion", "battery_wh", "action_wh", "green_wh", "cost",
                   "backup", "battery_after_wh"});
            for (std::size_t run = 0; run < r.records.size(); ++run)
                for (const auto& rec : r.records[run]) {
                    const auto& s = rec.state;
                    w.row({std::to_string(run), std::to_string(rec.slot), num(cfg.workloads[s.workload]), cfg.envs[s.env],
                           num(cfg.congestions[s.congestion]), num(cfg.battery_wh(s.battery)),
                           num(cfg.actions[rec.action]), num(cfg.green_wh(rec.green)), num(rec.cost),
                           rec.backup ? "1" : "0", num(cfg.battery_wh(rec.battery_after))});
                }
        }
    }
    if (out_opts.trace && !results.empty()) {
        // Exogenous draws are shared by every scheme under common random
        // numbers; each scheme gets its own file so equality can be audited.
        for (const auto& r : results) {
            CsvWriter w(dir / ("trace_" + file_tag(r.scheme.name) + ".csv"));
            w.row({"run", "slot", "green_wh", "next_workload", "next_env", "next_congestion"});
            for (std::size_t run = 0; run < r.records.size(); ++run)
                for (const auto& rec : r.records[run])
                    w.row({std::to_string(run), std::to_string(rec.slot), num(cfg.green_wh(rec.draw.green)),
                           num(cfg.workloads[rec.draw.workload]), cfg.envs[rec.draw.env],
                           num(cfg.congestions[rec.draw.congestion])});
        }
    }

    nlohmann::json summary;
    summary["schema_version"] = 1;
    summary["slots"] = opts.slots;
    summary["runs"] = opts.runs;
    summary["seed"] = opts.seed;
    summary["discount"] = cfg.discount;
    nlohmann::json schemes = nlohmann::json::array();
    for (std::size_t k = 0; k < results.size(); ++k) {
        const auto& r = results[k];
        double disc_mean = 0.0;
        for (double d : r.discounted) disc_mean += d;
        disc_mean /= static_cast<double>(r.discounted.size());
        std::uint64_t backups = 0;
        for (const auto& run : r.records)
            for (const auto& rec : run) backups += rec.backup ? 1 : 0;
        nlohmann::json j{{"name", r.scheme.name},
                         {"final_running_average_cost", r.final_running_average()},
                         {"mean_discounted_cost", disc_mean},
                         {"discounted_cost_per_run", r.discounted},
                         {"battery_mean_wh", r.battery_mean_wh(cfg)},
                         {"fraction_at_capacity", r.fraction_at_capacity()},
                         {"backup_slots", backups},
                         {"battery_histogram", r.battery_hist},
                         {"wall_seconds", r.wall_seconds}};
        if (comparison) j["reduction_by_best"] = comparison->reduction[k];
        schemes.push_back(std::move(j));
    }
    summary["schemes"] = std::move(schemes);
    if (comparison) summary["best"] = results[comparison->best].scheme.name;
    std::ofstream(dir / "summary.json", std::ios::binary) << summary.dump(2) << "\n";
}

SchemeResult run_experiment(const Experiment& exp, const Scheme& scheme, const RunOptions& opts,
                            const OutputOptions& out_opts, const std::filesystem::path& dir)
{
    std::vector<SchemeResult> results;
    results.push_back(simulate(exp, scheme, opts));
    write_results(exp, results, opts, out_opts, dir);
    return std::move(results.front());
}

Comparison compare(const Experiment& exp, const std::vector<Scheme>& schemes, const RunOptions& opts,
                   const OutputOptions& out_opts, const std::filesystem::path& dir)
{
    Comparison c = compare_schemes(exp, schemes, opts);
    write_results(exp, c.results, opts, out_opts, dir, &c);
    CsvWriter w(dir / "comparison.csv");
    w.row({"scheme", "final_running_average_cost", "reduction_by_best"});
    for (std::size_t k = 0; k < c.results.size(); ++k)
        w.row({c.results[k].scheme.name, num(c.results[k].final_running_average()), num(c.reduction[k])});
    return c;
}

const ValueTables& solve(const Experiment& exp, const std::filesystem::path& dir)
{
    const ValueTables& t = exp.oracle();
    const Dynamics& dyn = exp.dynamics();
    const Config& cfg = exp.config();
    const StateSpace& space = dyn.space();
    const auto residual = pds_residuals(dyn, t.cost_to_go, t.post_value);
    std::filesystem::create_directories(dir);

    {
        CsvWriter w(dir / "C_star.csv");
        w.row({"state", "workload", "env", "congestion", "battery_wh", "cost_to_go", "pds_residual"});
        for (std::size_t i = 0; i < space.size(); ++i) {
            auto f = state_fields(cfg, i, space.state_of(i));
            f.push_back(num(t.cost_to_go[i]));
            f.push_back(num(residual[i]));
            w.row(f);
        }
    }
    {
        CsvWriter w(dir / "V_star.csv");
        w.row({"state", "workload", "env", "congestion", "battery_post_wh", "post_value"});
        for (std::size_t i = 0; i < space.size(); ++i) {
            auto f = state_fields(cfg, i, space.state_of(i));
            f.push_back(num(t.post_value[i]));
            w.row(f);
        }
    }
    write_policy(exp, t.policy, dir / "policy_star.csv");
    return t;
}

}  // namespace edgesim
