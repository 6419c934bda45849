#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "edgesim/oracle.hpp"

using namespace edgesim;
using doctest::Approx;

namespace {

const std::vector<std::vector<double>> kIdentity{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

Config with_green(Config c, std::vector<GreenClass> classes)
{
    c.green.classes = std::move(classes);
    return validate_config(c);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("post-decision states")
{
    const Config c = default_config();
    const auto p = pds_of(c, make_state(c, 10, "Medium", 0.2, 500), action_index(c, 75));
    CHECK(c.battery_wh(p.battery_post) == 200.0);
    CHECK(p.workload == 0);
    CHECK(p.env == 1);
    CHECK(p.congestion == 1);
    CHECK(c.battery_wh(pds_of(c, make_state(c, 30, "Low", 0.2, 100), 0).battery_post) == 100.0);
    CHECK(pds_of(c, make_state(c, 10, "Low", 0.2, 225), 0).battery_post == 0);
}

TEST_CASE("expected cost")
{
    const Config c = default_config();
    const SystemState s = make_state(c, 30, "Low", 0.2, 500);
    const int a = action_index(c, 75);

    // Point masses at 0 and 300 Wh; the 50/50 mixture is their average.
    const Dynamics at0(with_green(c, {{0, 0}, {150, 50}, {300, 75}}));
    const Dynamics at300(with_green(c, {{300, 0}, {150, 50}, {300, 75}}));
    CHECK(expected_cost(at0, s, a) == Approx(realized_cost(c, s, a, 0)));
    CHECK(expected_cost(at300, s, a) == Approx(realized_cost(c, s, a, 12)));
    const double delay = solve_allocation(c, s, a).delay_cost;
    const double mix = 0.5 * expected_cost(at0, s, a) + 0.5 * expected_cost(at300, s, a);
    CHECK(mix == Approx(delay + 0.2 * (0.5 * 0.350 + 0.5 * 0.050)));

    // Finite sum against the green pmf, written out independently.
    const Dynamics dyn(c);
    for (const auto& st : enumerate_states(c))
        for (int act = 0; act < feasible_action_count(c, st); ++act) {
            const auto pmf = green_pmf(c, st.env);
            double want = 0.0;
            for (int g = 0; g < c.green_levels; ++g) want += pmf[g] * realized_cost(c, st, act, g);
            CHECK(dyn.expected_cost(dyn.space().index_of(st), act) == Approx(want).epsilon(1e-12));
        }

    // Monte Carlo over 10^6 green draws.
    for (int e = 0; e < 3; ++e) {
        const SystemState se{2, e, 1, 20};
        RandomStream rng(17, static_cast<std::uint64_t>(e), StreamId::green);
        const auto pmf = green_pmf(c, e);
        const int n = 1000000;
        double sum = 0.0, sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = realized_cost(c, se, a, rng.categorical(pmf));
            sum += x;
            sq += x * x;
        }
        const double mean = sum / n;
        const double sd = std::sqrt(std::max(sq / n - mean * mean, 0.0) / n);
        CHECK(std::abs(mean - expected_cost(dyn, se, a)) < 3 * sd + 1e-12);
    }
}

TEST_CASE("transition kernel")
{
    const Config c = default_config();
    const Dynamics dyn(c);
    for (std::size_t i = 0; i < dyn.n_states(); i += 7) {
        const SystemState s = dyn.space().state_of(i);
        for (int a = 0; a < dyn.feasible_count(i); ++a) {
            const auto row = transition_kernel(dyn, s, a);
            CHECK(std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0) < 1e-12);
        }
    }

    Config det = c;
    det.workload_chain.matrix = det.env_chain.matrix = det.congestion_chain.matrix = kIdentity;
    det = with_green(det, {{150, 0}, {150, 0}, {150, 0}});
    const Dynamics ddyn(det);
    const SystemState s = make_state(det, 10, "Low", 0.05, 500);
    const auto row = transition_kernel(ddyn, s, action_index(det, 75));
    const std::size_t target = ddyn.space().index_of(make_state(det, 10, "Low", 0.05, 350));
    for (std::size_t j = 0; j < row.size(); ++j) CHECK(row[j] == (j == target ? 1.0 : 0.0));
}

TEST_CASE("kernel matches simulated next states")
{
    const Config c = default_config();
    const Dynamics dyn(c);
    const CostModel model(c);
    const SystemState s = make_state(c, 20, "Medium", 0.2, 400);
    const int a = action_index(c, 50);
    const auto row = transition_kernel(dyn, s, a);
    const int trials = 100000;
    std::vector<double> freq(row.size(), 0.0);
    for (int t = 0; t < trials; ++t) {
        World w(model, 3, static_cast<std::uint64_t>(t), s);
        freq[dyn.space().index_of(w.step(a).next)] += 1.0;
    }
    // Per-cell 3-SE checks on the battery and exogenous marginals, and a
    // chi-square test over the joint cells.
    const std::size_t nb = dyn.space().battery_levels();
    const std::size_t nx = dyn.space().exogenous_size();
    auto check_marginal = [&](std::size_t cells, auto key) {
        std::vector<double> p(cells, 0.0), f(cells, 0.0);
        for (std::size_t j = 0; j < row.size(); ++j) {
            p[key(j)] += row[j];
            f[key(j)] += freq[j];
        }
        for (std::size_t k = 0; k < cells; ++k) {
            const double se = std::sqrt(p[k] * (1 - p[k]) / trials);
            CHECK(std::abs(f[k] / trials - p[k]) <= 3 * se + 1e-9);
        }
    };
    check_marginal(nb, [&](std::size_t j) { return j % nb; });
    check_marginal(nx, [&](std::size_t j) { return j / nb; });

    double chi2 = 0.0;
    int cells = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (row[j] == 0.0) {
            CHECK(freq[j] == 0.0);
            continue;
        }
        const double expect = row[j] * trials;
        chi2 += (freq[j] - expect) * (freq[j] - expect) / expect;
        ++cells;
    }
    // Wilson-Hilferty 0.99 quantile.
    const double k = cells - 1;
    const double q99 = k * std::pow(1.0 - 2.0 / (9.0 * k) + 2.326347874040841 * std::sqrt(2.0 / (9.0 * k)), 3);
    CHECK(chi2 < q99);
}

TEST_CASE("parallel sweep equals the serial reference")
{
    const Config c = default_config();
    const Dynamics dyn(c);
    std::vector<double> in(dyn.n_states());
    for (std::size_t i = 0; i < in.size(); ++i) in[i] = std::sin(0.37 * static_cast<double>(i)) * 5.0;
    std::vector<double> out1, out2;
    std::vector<int> p1, p2;
    const double d1 = bellman_sweep(dyn, in, out1, p1);
    const double d2 = bellman_sweep_reference(dyn, in, out2, p2);
    CHECK(max_abs_diff(out1, out2) < 1e-10);
    CHECK(d1 == Approx(d2).epsilon(1e-10));
    CHECK(p1 == p2);

    const auto t = value_iteration(dyn);
    CHECK(max_abs_diff(pds_value(dyn, t.cost_to_go), pds_value_reference(dyn, t.cost_to_go)) < 1e-10);
}

TEST_CASE("value iteration on the default config")
{
    const Config c = default_config();
    const Dynamics dyn(c);
    const auto start = std::chrono::steady_clock::now();
    const auto t = value_iteration(dyn);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(secs < 30.0);

    const auto r = pds_residuals(dyn, t.cost_to_go, t.post_value);
    CHECK(*std::max_element(r.begin(), r.end()) < 1e-8);

    std::vector<double> next;
    std::vector<int> policy;
    CHECK(bellman_sweep_reference(dyn, t.cost_to_go, next, policy) < 1e-8);
    CHECK(policy == t.policy);

    for (std::size_t i = 0; i < dyn.n_states(); ++i) {
        const SystemState s = dyn.space().state_of(i);
        CHECK(t.policy[i] < feasible_action_count(c, s));
        CHECK(c.action_steps[t.policy[i]] <= std::max(s.battery - c.op_steps[s.workload], 0));
    }

    // V* nonincreasing in the post-decision battery.
    const std::size_t nb = dyn.space().battery_levels();
    for (std::size_t x = 0; x < dyn.space().exogenous_size(); ++x)
        for (std::size_t b = 1; b < nb; ++b) CHECK(t.post_value[x * nb + b] <= t.post_value[x * nb + b - 1] + 1e-9);

    const auto again = value_iteration(dyn);
    CHECK(again.cost_to_go == t.cost_to_go);
    CHECK(again.post_value == t.post_value);
    CHECK(again.policy == t.policy);
}

TEST_CASE("zero discount gives the myopic minimum")
{
    Config c = default_config();
    c.discount = 0.0;
    c = validate_config(c);
    const Dynamics dyn(c);
    const auto t = value_iteration(dyn);
    for (std::size_t i = 0; i < dyn.n_states(); ++i) {
        double best = dyn.expected_cost(i, 0);
        int arg = 0;
        for (int a = 1; a < dyn.feasible_count(i); ++a)
            if (dyn.expected_cost(i, a) < best) best = dyn.expected_cost(i, a), arg = a;
        CHECK(t.cost_to_go[i] == best);
        CHECK(t.policy[i] == arg);
    }
}

TEST_CASE("single-action config equals direct policy evaluation")
{
    Config c = default_config();
    c.actions = {0.0};
    c = validate_config(c);
    const Dynamics dyn(c);
    const auto t = value_iteration(dyn);

    // C = c + delta P C, with P assembled from the chains, the green pmf and
    // the battery rule.
    const StateSpace space(c);
    const std::size_t n = space.size();
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const SystemState s = space.state_of(i);
        const auto pmf = green_pmf(c, s.env);
        double cost = 0.0;
        for (int g = 0; g < c.green_levels; ++g) {
            cost += pmf[g] * realized_cost(c, s, 0, g);
            const int b2 = battery_next(c, s, 0, g);
            for (int l = 0; l < 3; ++l)
                for (int e = 0; e < 3; ++e)
                    for (int h = 0; h < 3; ++h) {
                        const double p = pmf[g] * c.workload_chain.matrix[s.workload][l] *
                                         c.env_chain.matrix[s.env][e] * c.congestion_chain.matrix[s.congestion][h];
                        A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(space.index_of({l, e, h, b2}))) -=
                            c.discount * p;
                    }
        }
        rhs(static_cast<Eigen::Index>(i)) = cost;
    }
    const Eigen::VectorXd direct = A.partialPivLu().solve(rhs);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(direct(static_cast<Eigen::Index>(i)) - t.cost_to_go[i]));
    CHECK(err < 1e-8);
}

TEST_CASE("degenerate post-decision kernel")
{
    Config c = default_config();
    c.workload_chain.matrix = c.env_chain.matrix = c.congestion_chain.matrix = kIdentity;
    c = with_green(c, {{0, 0}, {0, 0}, {0, 0}});
    const Dynamics dyn(c);
    const auto t = value_iteration(dyn);
    CHECK(max_abs_diff(t.post_value, t.cost_to_go) < 1e-12);
}

TEST_CASE("iteration cap")
{
    const Dynamics dyn(default_config());
    CHECK_THROWS_AS(value_iteration(dyn, 1e-9, 3), NonConvergence);
}
