#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"
#include "edgesim/harness.hpp"
#include "json.hpp"

using namespace edgesim;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("edgesim_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const fs::path& p)
{
    std::vector<std::string> out;
    std::istringstream in(slurp(p));
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(EDGESIM_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("scheme names")
{
    const Config c = default_config();
    CHECK(parse_scheme(c, "pds").kind == SchemeKind::pds);
    CHECK(parse_scheme(c, "q-learning").kind == SchemeKind::q);
    CHECK(parse_scheme(c, "fixed:100").level == 100.0);
    CHECK_THROWS_AS(parse_scheme(c, "fixed:60"), UnknownScheme);
    CHECK_THROWS_AS(parse_scheme(c, "sarsa"), UnknownScheme);
    CHECK(file_tag("fixed:50") == "fixed-50");
}

TEST_CASE("zero slots yields empty series and valid files")
{
    const Experiment exp(default_config());
    const auto dir = scratch("empty");
    const auto r = run_experiment(exp, parse_scheme(exp.config(), "pds"), {0, 3, 1}, {}, dir);
    CHECK(r.running_average.empty());
    CHECK(r.final_running_average() == 0.0);
    const auto rt = lines(dir / "runtime_costs.csv");
    REQUIRE(rt.size() == 1);
    CHECK(rt[0] == "slot,pds\r");
    const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    CHECK(summary["schema_version"] == 1);
    CHECK(fs::exists(dir / "battery_hist.csv"));
    CHECK(fs::exists(dir / "policy.csv"));
}

TEST_CASE("reruns are byte-identical")
{
    const Experiment exp(default_config());
    const RunOptions opts{300, 4, 9};
    const OutputOptions out{true, true};
    const auto a = scratch("rerun_a"), b = scratch("rerun_b");
    const std::vector<Scheme> schemes{parse_scheme(exp.config(), "pds"), parse_scheme(exp.config(), "q"),
                                      parse_scheme(exp.config(), "fixed:50")};
    compare(exp, schemes, opts, out, a);
    compare(exp, schemes, opts, out, b);
    int files = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
        const auto name = entry.path().filename();
        if (name == "summary.json") continue;  // carries wall-clock timings
        CHECK_MESSAGE(slurp(entry.path()) == slurp(b / name), name.string());
        ++files;
    }
    CHECK(files >= 10);
    auto sa = nlohmann::json::parse(slurp(a / "summary.json"));
    auto sb = nlohmann::json::parse(slurp(b / "summary.json"));
    for (auto* s : {&sa, &sb})
        for (auto& scheme : (*s)["schemes"]) scheme.erase("wall_seconds");
    CHECK(sa == sb);
}

TEST_CASE("common random numbers across schemes")
{
    const Experiment exp(default_config());
    const RunOptions opts{400, 3, 21};
    const auto c = compare_schemes(exp, {parse_scheme(exp.config(), "pds"), parse_scheme(exp.config(), "pds")}, opts);
    CHECK(c.reduction[0] == 0.0);
    CHECK(c.reduction[1] == 0.0);

    const auto p = simulate(exp, parse_scheme(exp.config(), "pds"), opts);
    const auto f = simulate(exp, parse_scheme(exp.config(), "fixed:150"), opts);
    for (std::size_t run = 0; run < opts.runs; ++run)
        for (std::size_t t = 0; t < opts.slots; ++t) {
            const auto& x = p.records[run][t].draw;
            const auto& y = f.records[run][t].draw;
            CHECK(x.green == y.green);
            CHECK(x.workload == y.workload);
            CHECK(x.env == y.env);
            CHECK(x.congestion == y.congestion);
        }

    const auto dir = scratch("trace");
    run_experiment(exp, parse_scheme(exp.config(), "myopic"), opts, {true, false}, dir / "m");
    run_experiment(exp, parse_scheme(exp.config(), "q"), opts, {true, false}, dir / "q");
    CHECK(slurp(dir / "m" / "trace_myopic.csv") == slurp(dir / "q" / "trace_q.csv"));
}

TEST_CASE("series are recomputable from the records")
{
    const Config cfg = default_config();
    const Experiment exp(cfg);
    const RunOptions opts{250, 5, 4};
    const auto r = simulate(exp, parse_scheme(cfg, "myopic"), opts);
    for (std::size_t t = 0; t < opts.slots; ++t) {
        double avg = 0.0;
        for (const auto& run : r.records) {
            double s = 0.0;
            for (std::size_t k = 0; k <= t; ++k) s += run[k].cost;
            avg += s / static_cast<double>(t + 1);
        }
        CHECK(r.running_average[t] == doctest::Approx(avg / opts.runs).epsilon(1e-12));
    }
    std::uint64_t total = 0;
    for (auto n : r.battery_hist) total += n;
    CHECK(total == opts.slots * opts.runs);

    for (const auto& run : r.records)
        for (std::size_t t = 0; t + 1 < run.size(); ++t) {
            CHECK(run[t].battery_after == run[t + 1].state.battery);
            CHECK(run[t].battery_after >= 0);
            CHECK(run[t].battery_after < cfg.battery_levels);
        }

    const auto dir = scratch("hist");
    write_results(exp, {r}, opts, {}, dir);
    const auto rows = lines(dir / "battery_hist.csv");
    CHECK(rows.size() == static_cast<std::size_t>(cfg.battery_levels) + 1);
}

TEST_CASE("oracle dominates myopic under discounting")
{
    const Experiment exp(default_config());
    const RunOptions opts{200, 30, 1};
    const auto o = simulate(exp, parse_scheme(exp.config(), "oracle"), opts);
    const auto m = simulate(exp, parse_scheme(exp.config(), "myopic"), opts);
    double so = 0.0, sm = 0.0;
    for (std::size_t i = 0; i < opts.runs; ++i) so += o.discounted[i], sm += m.discounted[i];
    CHECK(sm >= so);
}

TEST_CASE("solve writes the oracle tables")
{
    const Experiment exp(default_config());
    const auto a = scratch("solve_a"), b = scratch("solve_b");
    solve(exp, a);
    solve(exp, b);
    for (const char* name : {"C_star.csv", "V_star.csv", "policy_star.csv"}) {
        REQUIRE(fs::exists(a / name));
        CHECK(slurp(a / name) == slurp(b / name));
    }
    const auto rows = lines(a / "C_star.csv");
    CHECK(rows.size() == 1108);
    double worst = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto pos = rows[i].find_last_of(',');
        worst = std::max(worst, std::stod(rows[i].substr(pos + 1)));
    }
    CHECK(worst < 1e-8);

    // Zero discount: the exported policy is the per-state myopic argmin.
    Config c0 = default_config();
    c0.discount = 0.0;
    const Experiment e0(validate_config(c0));
    const auto& t = solve(e0, scratch("solve_zero"));
    const Dynamics& dyn = e0.dynamics();
    for (std::size_t i = 0; i < dyn.n_states(); ++i) {
        int arg = 0;
        for (int k = 1; k < dyn.feasible_count(i); ++k)
            if (dyn.expected_cost(i, k) < dyn.expected_cost(i, arg)) arg = k;
        CHECK(t.policy[i] == arg);
    }
}

TEST_CASE("command-line exit codes")
{
    const auto dir = scratch("cli");
    CHECK(run_cli("run --scheme pds --slots 20 --runs 2 --out " + (dir / "ok").string()) == 0);
    CHECK(fs::exists(dir / "ok" / "runtime_costs.csv"));
    CHECK(run_cli("run --scheme sarsa --out " + (dir / "bad").string()) == 1);

    auto doc = serialize_config(default_config());
    doc["locations"] = nlohmann::json::array({{{"fraction", 1.0}, {"theta", 20.0}}});
    std::ofstream(dir / "overload.json") << doc.dump();
    CHECK(run_cli("solve --config " + (dir / "overload.json").string() + " --out " + (dir / "x").string()) == 1);

    auto slow = serialize_config(default_config());
    slow["oracle"]["max_iterations"] = 2;
    std::ofstream(dir / "slow.json") << slow.dump();
    CHECK(run_cli("solve --config " + (dir / "slow.json").string() + " --out " + (dir / "y").string()) == 2);

    CHECK(run_cli("solve --config " + std::string(EDGESIM_SOURCE_DIR) + "/configs/reduced.json --out " +
                  (dir / "z").string()) == 0);
}
