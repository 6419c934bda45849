// edgesim: solve, run and compare offloading/autoscaling schemes.
//
//   edgesim solve   --config <file> --out <dir>
//   edgesim run     --config <file> --scheme <name> --slots N --runs R --seed S --out <dir> [--trace]
//   edgesim compare --config <file> --schemes a,b,c --slots N --runs R --seed S --out <dir> [--trace]
//
// Exit codes: 0 success, 1 validation/usage error, 2 solver non-convergence.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "edgesim/harness.hpp"

namespace {

edgesim::Config load(const std::string& path)
{
    return path.empty() ? edgesim::default_config() : edgesim::load_config(path);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Renewable-powered edge offloading and autoscaling simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", scheme_name = "pds", scheme_list = "pds,q,myopic,fixed:50,fixed:100,fixed:150";
    edgesim::RunOptions opts;
    bool trace = false, no_records = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file (default: built-in default config)");
        cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();
    };
    auto add_run = [&](CLI::App* cmd) {
        cmd->add_option("--slots", opts.slots, "Slots per run")->capture_default_str();
        cmd->add_option("--runs", opts.runs, "Independent replicas")->capture_default_str()->check(CLI::PositiveNumber);
        cmd->add_option("--seed", opts.seed, "Base seed")->capture_default_str();
        cmd->add_flag("--trace", trace, "Dump per-slot exogenous draws");
        cmd->add_flag("--no-records", no_records, "Skip the per-slot records CSV");
    };

    auto* solve_cmd = app.add_subcommand("solve", "Exact value iteration; dumps C*, V* and the optimal policy");
    add_common(solve_cmd);

    auto* run_cmd = app.add_subcommand("run", "Simulate one scheme");
    add_common(run_cmd);
    add_run(run_cmd);
    run_cmd->add_option("--scheme", scheme_name, "pds | q | myopic | oracle | fixed:<Wh>")->capture_default_str();

    auto* cmp_cmd = app.add_subcommand("compare", "Simulate several schemes under common random numbers");
    add_common(cmp_cmd);
    add_run(cmp_cmd);
    cmp_cmd->add_option("--schemes", scheme_list, "Comma-separated scheme list")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        edgesim::Experiment exp(load(config_path));
        const edgesim::OutputOptions out_opts{trace, !no_records};

        if (*solve_cmd) {
            const auto& t = edgesim::solve(exp, out_dir);
            std::printf("solved %zu states in %d sweeps (last change %.3g); tables in %s\n", t.cost_to_go.size(),
                        t.iterations, t.last_change, out_dir.c_str());
        } else if (*run_cmd) {
            const auto scheme = edgesim::parse_scheme(exp.config(), scheme_name);
            const auto r = edgesim::run_experiment(exp, scheme, opts, out_opts, out_dir);
            std::printf("%s: running-average cost at slot %llu = %.6f (%.2f s)\n", scheme.name.c_str(),
                        static_cast<unsigned long long>(opts.slots), r.final_running_average(), r.wall_seconds);
        } else if (*cmp_cmd) {
            std::vector<edgesim::Scheme> schemes;
            for (const auto& name : CLI::detail::split(scheme_list, ','))
                schemes.push_back(edgesim::parse_scheme(exp.config(), name));
            const auto c = edgesim::compare(exp, schemes, opts, out_opts, out_dir);
            std::printf("%-12s %14s %12s\n", "scheme", "avg cost", "best saves");
            for (std::size_t k = 0; k < c.results.size(); ++k)
                std::printf("%-12s %14.6f %11.2f%%\n", c.results[k].scheme.name.c_str(),
                            c.results[k].final_running_average(), 100.0 * c.reduction[k]);
            std::printf("best: %s\n", c.results[c.best].scheme.name.c_str());
        }
    } catch (const edgesim::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const edgesim::UnknownScheme& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const edgesim::NonConvergence& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
