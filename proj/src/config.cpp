#include "edgesim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace edgesim {

namespace {

constexpr double kGridTol = 1e-9;
constexpr double kStochasticTol = 1e-12;

bool on_grid(double value, double step)
{
    const double q = value / step;
    return std::abs(q - std::round(q)) <= kGridTol * std::max(1.0, std::abs(q));
}

int grid_steps(double value, double step) { return static_cast<int>(std::lround(value / step)); }

std::string fmt(double v)
{
    std::ostringstream os;
    os << v;
    return os.str();
}

void check_chain(const ChainSpec& chain, std::size_t n, const std::string& name, std::vector<Violation>& out)
{
    if (chain.matrix.size() != n) {
        out.push_back({ViolationKind::NonStochastic,
                       name + " transition matrix has " + std::to_string(chain.matrix.size()) + " rows, expected " +
                           std::to_string(n)});
        return;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = chain.matrix[i];
        if (row.size() != n) {
            out.push_back({ViolationKind::NonStochastic, name + " transition row " + std::to_string(i) +
                                                             " has " + std::to_string(row.size()) + " entries"});
            continue;
        }
        double sum = 0.0;
        bool negative = false;
        for (double p : row) {
            negative |= !(p >= 0.0);
            sum += p;
        }
        if (negative || std::abs(sum - 1.0) > kStochasticTol)
            out.push_back({ViolationKind::NonStochastic,
                           name + " transition row " + std::to_string(i) + " is not a probability vector (sum " +
                               fmt(sum) + ")"});
    }
}

PowerParams derive_power(const Config& c)
{
    PowerParams p;
    p.e_static = c.power.base_station_w * c.slot_hours;
    p.kappa_dyn = c.power.dynamic_w_per_unit * c.slot_hours;
    p.e_idle = c.power.server_idle_w * c.slot_hours;
    p.e_peak = c.power.server_peak_w * c.slot_hours;
    p.k_srv = c.power.server_rate;
    p.m_max = c.power.max_servers;
    return p;
}

ChainSpec sticky_chain(std::size_t n, double self)
{
    ChainSpec c;
    const double cross = n > 1 ? (1.0 - self) / static_cast<double>(n - 1) : 0.0;
    c.matrix.assign(n, std::vector<double>(n, cross));
    for (std::size_t i = 0; i < n; ++i) c.matrix[i][i] = n > 1 ? self : 1.0;
    return c;
}

// -- JSON helpers -----------------------------------------------------------

class Reader {
public:
    std::vector<Violation> errors;

    void allow_only(const nlohmann::json& obj, std::initializer_list<const char*> keys, const std::string& where)
    {
        if (!obj.is_object()) {
            errors.push_back({ViolationKind::InvalidValue, where + " must be an object"});
            return;
        }
        std::set<std::string> allowed(keys.begin(), keys.end());
        for (const auto& [k, v] : obj.items())
            if (!allowed.count(k))
                errors.push_back({ViolationKind::UnknownKey, "unknown key '" + k + "' in " + where});
    }

    template <class T>
    void get(const nlohmann::json& obj, const char* key, T& dst, const std::string& where, bool required = true)
    {
        if (!obj.is_object() || !obj.contains(key)) {
            if (required) errors.push_back({ViolationKind::InvalidValue, "missing key '" + std::string(key) + "' in " + where});
            return;
        }
        try {
            dst = obj.at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            errors.push_back({ViolationKind::InvalidValue, where + "." + key + ": " + e.what()});
        }
    }
};

}  // namespace

std::string to_string(ViolationKind kind)
{
    switch (kind) {
    case ViolationKind::EmptySet: return "EmptySet";
    case ViolationKind::UtilizationOverload: return "UtilizationOverload";
    case ViolationKind::GridMisaligned: return "GridMisaligned";
    case ViolationKind::NonStochastic: return "NonStochastic";
    case ViolationKind::InvalidValue: return "InvalidValue";
    case ViolationKind::UnknownKey: return "UnknownKey";
    }
    return "Unknown";
}

namespace {
std::string join_violations(const std::vector<Violation>& vs)
{
    std::string msg = "invalid config:";
    for (const auto& v : vs) msg += "\n  " + to_string(v.kind) + ": " + v.message;
    return msg;
}
}  // namespace

ConfigError::ConfigError(std::vector<Violation> violations)
    : std::runtime_error(join_violations(violations)), violations_(std::move(violations))
{
}

bool Config::same_inputs(const Config& o) const
{
    return slot_hours == o.slot_hours && workloads == o.workloads && envs == o.envs &&
           congestions == o.congestions && workload_chain == o.workload_chain && env_chain == o.env_chain &&
           congestion_chain == o.congestion_chain && battery_capacity == o.battery_capacity &&
           battery_step == o.battery_step && actions == o.actions && locations == o.locations &&
           power == o.power && cost == o.cost && green == o.green && discount == o.discount &&
           depreciation_basis == o.depreciation_basis && initial == o.initial && pds == o.pds && q == o.q &&
           oracle == o.oracle;
}

std::vector<Violation> check_config(const Config& c)
{
    std::vector<Violation> out;
    auto add = [&](ViolationKind k, std::string m) { out.push_back({k, std::move(m)}); };

    if (c.workloads.empty()) add(ViolationKind::EmptySet, "workload set is empty");
    if (c.envs.empty()) add(ViolationKind::EmptySet, "environment set is empty");
    if (c.congestions.empty()) add(ViolationKind::EmptySet, "congestion set is empty");
    if (c.actions.empty()) add(ViolationKind::EmptySet, "action grid is empty");
    if (c.locations.empty()) add(ViolationKind::EmptySet, "location profile is empty");

    if (!(c.slot_hours > 0.0)) add(ViolationKind::InvalidValue, "slot_hours must be positive");
    if (!(c.discount >= 0.0 && c.discount < 1.0)) add(ViolationKind::InvalidValue, "discount must lie in [0, 1)");

    for (std::size_t i = 0; i < c.workloads.size(); ++i) {
        if (!(c.workloads[i] > 0.0)) add(ViolationKind::InvalidValue, "workload values must be positive");
        if (std::abs(c.workloads[i] - std::round(c.workloads[i])) > kGridTol)
            add(ViolationKind::InvalidValue, "workload " + fmt(c.workloads[i]) + " is not an integer rate");
        if (i > 0 && !(c.workloads[i] > c.workloads[i - 1]))
            add(ViolationKind::InvalidValue, "workload values must be strictly ascending");
    }
    for (std::size_t i = 0; i < c.congestions.size(); ++i) {
        if (!(c.congestions[i] > 0.0)) add(ViolationKind::InvalidValue, "congestion values must be positive");
        if (i > 0 && !(c.congestions[i] > c.congestions[i - 1]))
            add(ViolationKind::InvalidValue, "congestion values must be strictly ascending");
    }
    if (std::set<std::string>(c.envs.begin(), c.envs.end()).size() != c.envs.size())
        add(ViolationKind::InvalidValue, "environment names must be distinct");

    check_chain(c.workload_chain, c.workloads.size(), "workload", out);
    check_chain(c.env_chain, c.envs.size(), "environment", out);
    check_chain(c.congestion_chain, c.congestions.size(), "congestion", out);

    // Location profile and base-station utilization.
    double fsum = 0.0;
    bool theta_ok = true;
    for (const auto& loc : c.locations) {
        if (!(loc.fraction >= 0.0)) add(ViolationKind::InvalidValue, "location fractions must be nonnegative");
        if (!(loc.theta > 0.0)) {
            add(ViolationKind::InvalidValue, "location theta must be positive");
            theta_ok = false;
        }
        fsum += loc.fraction;
    }
    if (!c.locations.empty() && std::abs(fsum - 1.0) > kStochasticTol)
        add(ViolationKind::InvalidValue, "location fractions sum to " + fmt(fsum) + ", expected 1");
    if (theta_ok)
        for (double lam : c.workloads) {
            double rho = 0.0;
            for (const auto& loc : c.locations) rho += loc.fraction * lam / loc.theta;
            if (rho >= 1.0)
                add(ViolationKind::UtilizationOverload,
                    "base-station utilization " + fmt(rho) + " >= 1 at workload " + fmt(lam));
        }

    // Power and cost parameters.
    const auto& p = c.power;
    if (!(p.server_idle_w > 0.0)) add(ViolationKind::InvalidValue, "server_idle_w must be positive");
    if (!(p.server_peak_w >= p.server_idle_w)) add(ViolationKind::InvalidValue, "server_peak_w must be >= server_idle_w");
    if (!(p.server_rate > 0.0)) add(ViolationKind::InvalidValue, "server_rate must be positive");
    if (p.max_servers < 1) add(ViolationKind::InvalidValue, "max_servers must be >= 1");
    if (!(p.base_station_w >= 0.0) || !(p.dynamic_w_per_unit >= 0.0))
        add(ViolationKind::InvalidValue, "base-station power terms must be nonnegative");
    if (!(c.cost.omega >= 0.0) || !(c.cost.phi >= 0.0) || !(c.cost.d0 >= 0.0))
        add(ViolationKind::InvalidValue, "omega, phi and d0 must be nonnegative");

    // Battery grid and everything that must land on it.
    const bool grid_ok = c.battery_step > 0.0 && c.battery_capacity > 0.0;
    if (!grid_ok) add(ViolationKind::InvalidValue, "battery capacity and step must be positive");
    if (grid_ok) {
        if (!on_grid(c.battery_capacity, c.battery_step))
            add(ViolationKind::GridMisaligned, "battery capacity " + fmt(c.battery_capacity) +
                                                   " is not a multiple of step " + fmt(c.battery_step));
        const PowerParams pw = derive_power(c);
        for (double lam : c.workloads) {
            const double dop = pw.e_static + pw.kappa_dyn * lam;
            if (!on_grid(dop, c.battery_step))
                add(ViolationKind::GridMisaligned, "d_op(" + fmt(lam) + ") = " + fmt(dop) +
                                                       " Wh is not a multiple of " + fmt(c.battery_step));
        }
        for (double a : c.actions)
            if (!on_grid(a, c.battery_step))
                add(ViolationKind::GridMisaligned, "action level " + fmt(a) + " is off the battery grid");
        if (!on_grid(c.green.cap, c.battery_step))
            add(ViolationKind::GridMisaligned, "green support cap " + fmt(c.green.cap) + " is off the battery grid");
        for (std::size_t i = 0; i < c.green.classes.size(); ++i) {
            const auto& g = c.green.classes[i];
            if (g.stddev == 0.0 && !on_grid(g.mean, c.battery_step))
                add(ViolationKind::GridMisaligned,
                    "degenerate green class " + std::to_string(i) + " has off-grid mean " + fmt(g.mean));
        }
    }
    if (!(c.green.cap >= 0.0)) add(ViolationKind::InvalidValue, "green cap must be nonnegative");
    if (c.green.classes.size() != c.envs.size())
        add(ViolationKind::InvalidValue, "green spec needs one class per environment state");
    for (const auto& g : c.green.classes)
        if (!(g.mean >= 0.0) || !(g.stddev >= 0.0))
            add(ViolationKind::InvalidValue, "green mean and stddev must be nonnegative");

    // Action grid shape.
    if (!c.actions.empty()) {
        if (c.actions.front() != 0.0) add(ViolationKind::InvalidValue, "action grid must start at 0");
        for (std::size_t i = 1; i < c.actions.size(); ++i)
            if (!(c.actions[i] > c.actions[i - 1]))
                add(ViolationKind::InvalidValue, "action levels must be distinct and ascending");
    }

    // Learner and oracle knobs.
    if (!(c.pds.rate_coeff >= 0.0)) add(ViolationKind::InvalidValue, "pds.rate_coeff must be nonnegative");
    if (!(c.pds.epsilon >= 0.0 && c.pds.epsilon <= 1.0)) add(ViolationKind::InvalidValue, "pds.epsilon must be in [0, 1]");
    if (!(c.q.epsilon_min >= 0.0 && c.q.epsilon_min <= c.q.epsilon_start && c.q.epsilon_start <= 1.0))
        add(ViolationKind::InvalidValue, "q epsilon schedule must satisfy 0 <= min <= start <= 1");
    if (!(c.q.decay_fraction > 0.0 && c.q.decay_fraction <= 1.0))
        add(ViolationKind::InvalidValue, "q.decay_fraction must be in (0, 1]");
    if (!(c.q.rate_exponent > 0.5 && c.q.rate_exponent <= 1.0))
        add(ViolationKind::InvalidValue, "q.rate_exponent must be in (0.5, 1]");
    if (!(c.oracle.tol > 0.0)) add(ViolationKind::InvalidValue, "oracle.tol must be positive");
    if (c.oracle.max_iterations < 1) add(ViolationKind::InvalidValue, "oracle.max_iterations must be >= 1");

    // Initial state must be on the grids.
    if (std::find(c.workloads.begin(), c.workloads.end(), c.initial.workload) == c.workloads.end())
        add(ViolationKind::InvalidValue, "initial workload is not in the workload set");
    if (std::find(c.envs.begin(), c.envs.end(), c.initial.env) == c.envs.end())
        add(ViolationKind::InvalidValue, "initial environment is not in the environment set");
    if (std::find(c.congestions.begin(), c.congestions.end(), c.initial.congestion) == c.congestions.end())
        add(ViolationKind::InvalidValue, "initial congestion is not in the congestion set");
    if (grid_ok && (!on_grid(c.initial.battery, c.battery_step) || c.initial.battery < 0.0 ||
                    c.initial.battery > c.battery_capacity))
        add(ViolationKind::GridMisaligned, "initial battery " + fmt(c.initial.battery) + " is off the battery grid");

    return out;
}

Config validate_config(Config c)
{
    auto violations = check_config(c);
    if (!violations.empty()) throw ConfigError(std::move(violations));

    c.pw = derive_power(c);
    c.battery_levels = grid_steps(c.battery_capacity, c.battery_step) + 1;
    c.op_steps.clear();
    for (double lam : c.workloads) c.op_steps.push_back(grid_steps(c.pw.e_static + c.pw.kappa_dyn * lam, c.battery_step));
    c.action_steps.clear();
    for (double a : c.actions) c.action_steps.push_back(grid_steps(a, c.battery_step));
    c.green_levels = grid_steps(c.green.cap, c.battery_step) + 1;
    return c;
}

Config default_config()
{
    Config c;
    c.slot_hours = 0.25;
    c.workloads = {10.0, 20.0, 30.0};
    c.envs = {"Low", "Medium", "High"};
    c.congestions = {0.05, 0.2, 0.8};
    c.workload_chain = sticky_chain(3, 0.6);
    c.env_chain = sticky_chain(3, 0.6);
    c.congestion_chain = sticky_chain(3, 0.6);
    c.battery_capacity = 1000.0;
    c.battery_step = 25.0;
    c.actions = {0.0, 25.0, 50.0, 75.0, 100.0, 125.0, 150.0};
    c.locations = {{1.0, 60.0}};
    c.power = PowerSpec{};
    c.cost = CostParams{};
    c.green.classes = {{25.0, 25.0}, {150.0, 50.0}, {300.0, 75.0}};
    c.green.cap = 500.0;
    c.discount = 0.9;
    return validate_config(std::move(c));
}

Config reduced_config()
{
    Config c = default_config();
    c.battery_step = 100.0;
    c.power.dynamic_w_per_unit = 40.0;  // d_op = 300, 400, 500 Wh
    c.actions = {0.0, 100.0, 200.0};
    c.green.classes = {{100.0, 50.0}, {300.0, 100.0}, {500.0, 150.0}};
    c.green.cap = 800.0;
    c.initial.battery = 500.0;
    return validate_config(std::move(c));
}

// ---------------------------------------------------------------------------
// JSON

namespace {

nlohmann::json chain_json(const std::vector<nlohmann::json>& values, const ChainSpec& chain)
{
    return {{"values", values}, {"transition", chain.matrix}};
}

}  // namespace

nlohmann::json serialize_config(const Config& c)
{
    using nlohmann::json;
    std::vector<json> lam(c.workloads.begin(), c.workloads.end());
    std::vector<json> env(c.envs.begin(), c.envs.end());
    std::vector<json> con(c.congestions.begin(), c.congestions.end());
    json locs = json::array();
    for (const auto& l : c.locations) locs.push_back({{"fraction", l.fraction}, {"theta", l.theta}});
    json classes = json::array();
    for (const auto& g : c.green.classes) classes.push_back({{"mean_wh", g.mean}, {"std_wh", g.stddev}});

    return {
        {"schema_version", 1},
        {"slot_hours", c.slot_hours},
        {"workload", chain_json(lam, c.workload_chain)},
        {"environment", chain_json(env, c.env_chain)},
        {"congestion", chain_json(con, c.congestion_chain)},
        {"battery", {{"capacity_wh", c.battery_capacity}, {"step_wh", c.battery_step}}},
        {"actions_wh", c.actions},
        {"locations", locs},
        {"power",
         {{"base_station_w", c.power.base_station_w},
          {"dynamic_w_per_unit", c.power.dynamic_w_per_unit},
          {"server_idle_w", c.power.server_idle_w},
          {"server_peak_w", c.power.server_peak_w},
          {"server_rate", c.power.server_rate},
          {"max_servers", c.power.max_servers}}},
        {"cost", {{"omega", c.cost.omega}, {"phi", c.cost.phi}, {"d0", c.cost.d0}}},
        {"green", {{"cap_wh", c.green.cap}, {"classes", classes}}},
        {"discount", c.discount},
        {"depreciation_basis",
         c.depreciation_basis == DepreciationBasis::total_demand ? "total_demand" : "computing_only"},
        {"initial_state",
         {{"workload", c.initial.workload},
          {"env", c.initial.env},
          {"congestion", c.initial.congestion},
          {"battery_wh", c.initial.battery}}},
        {"learners",
         {{"pds", {{"rate_coeff", c.pds.rate_coeff}, {"epsilon", c.pds.epsilon}}},
          {"q",
           {{"epsilon_start", c.q.epsilon_start},
            {"epsilon_min", c.q.epsilon_min},
            {"decay_fraction", c.q.decay_fraction},
            {"rate_exponent", c.q.rate_exponent}}}}},
        {"oracle", {{"tol", c.oracle.tol}, {"max_iterations", c.oracle.max_iterations}}},
    };
}

Config parse_config(const nlohmann::json& doc)
{
    Reader r;
    Config c;
    r.allow_only(doc,
                 {"schema_version", "slot_hours", "workload", "environment", "congestion", "battery", "actions_wh",
                  "locations", "power", "cost", "green", "discount", "depreciation_basis", "initial_state",
                  "learners", "oracle"},
                 "config");
    if (!r.errors.empty() && !doc.is_object()) throw ConfigError(r.errors);

    int version = 0;
    r.get(doc, "schema_version", version, "config");
    if (doc.contains("schema_version") && version != 1)
        r.errors.push_back({ViolationKind::InvalidValue, "unsupported schema_version " + std::to_string(version)});
    r.get(doc, "slot_hours", c.slot_hours, "config");

    auto chain = [&](const char* key, auto& values, ChainSpec& spec) {
        if (!doc.contains(key)) {
            r.errors.push_back({ViolationKind::InvalidValue, std::string("missing key '") + key + "' in config"});
            return;
        }
        const auto& node = doc.at(key);
        r.allow_only(node, {"values", "transition"}, key);
        r.get(node, "values", values, key);
        r.get(node, "transition", spec.matrix, key);
    };
    chain("workload", c.workloads, c.workload_chain);
    chain("environment", c.envs, c.env_chain);
    chain("congestion", c.congestions, c.congestion_chain);

    if (doc.contains("battery")) {
        const auto& b = doc.at("battery");
        r.allow_only(b, {"capacity_wh", "step_wh"}, "battery");
        r.get(b, "capacity_wh", c.battery_capacity, "battery");
        r.get(b, "step_wh", c.battery_step, "battery");
    } else {
        r.errors.push_back({ViolationKind::InvalidValue, "missing key 'battery' in config"});
    }
    r.get(doc, "actions_wh", c.actions, "config");

    c.locations.clear();
    if (doc.contains("locations") && doc.at("locations").is_array()) {
        for (const auto& l : doc.at("locations")) {
            r.allow_only(l, {"fraction", "theta"}, "locations[]");
            Location loc;
            r.get(l, "fraction", loc.fraction, "locations[]");
            r.get(l, "theta", loc.theta, "locations[]");
            c.locations.push_back(loc);
        }
    } else {
        r.errors.push_back({ViolationKind::InvalidValue, "'locations' must be an array"});
    }

    if (doc.contains("power")) {
        const auto& p = doc.at("power");
        r.allow_only(p,
                     {"base_station_w", "dynamic_w_per_unit", "server_idle_w", "server_peak_w", "server_rate",
                      "max_servers"},
                     "power");
        r.get(p, "base_station_w", c.power.base_station_w, "power");
        r.get(p, "dynamic_w_per_unit", c.power.dynamic_w_per_unit, "power");
        r.get(p, "server_idle_w", c.power.server_idle_w, "power");
        r.get(p, "server_peak_w", c.power.server_peak_w, "power");
        r.get(p, "server_rate", c.power.server_rate, "power");
        r.get(p, "max_servers", c.power.max_servers, "power");
    } else {
        r.errors.push_back({ViolationKind::InvalidValue, "missing key 'power' in config"});
    }

    if (doc.contains("cost")) {
        const auto& k = doc.at("cost");
        r.allow_only(k, {"omega", "phi", "d0"}, "cost");
        r.get(k, "omega", c.cost.omega, "cost");
        r.get(k, "phi", c.cost.phi, "cost");
        r.get(k, "d0", c.cost.d0, "cost");
    } else {
        r.errors.push_back({ViolationKind::InvalidValue, "missing key 'cost' in config"});
    }

    if (doc.contains("green")) {
        const auto& g = doc.at("green");
        r.allow_only(g, {"cap_wh", "classes"}, "green");
        r.get(g, "cap_wh", c.green.cap, "green");
        if (g.contains("classes") && g.at("classes").is_array()) {
            for (const auto& cl : g.at("classes")) {
                r.allow_only(cl, {"mean_wh", "std_wh"}, "green.classes[]");
                GreenClass gc;
                r.get(cl, "mean_wh", gc.mean, "green.classes[]");
                r.get(cl, "std_wh", gc.stddev, "green.classes[]");
                c.green.classes.push_back(gc);
            }
        } else {
            r.errors.push_back({ViolationKind::InvalidValue, "'green.classes' must be an array"});
        }
    } else {
        r.errors.push_back({ViolationKind::InvalidValue, "missing key 'green' in config"});
    }

    r.get(doc, "discount", c.discount, "config");

    std::string basis = "total_demand";
    r.get(doc, "depreciation_basis", basis, "config", false);
    if (basis == "total_demand")
        c.depreciation_basis = DepreciationBasis::total_demand;
    else if (basis == "computing_only")
        c.depreciation_basis = DepreciationBasis::computing_only;
    else
        r.errors.push_back({ViolationKind::InvalidValue, "depreciation_basis must be total_demand or computing_only"});

    if (doc.contains("initial_state")) {
        const auto& s = doc.at("initial_state");
        r.allow_only(s, {"workload", "env", "congestion", "battery_wh"}, "initial_state");
        r.get(s, "workload", c.initial.workload, "initial_state");
        r.get(s, "env", c.initial.env, "initial_state");
        r.get(s, "congestion", c.initial.congestion, "initial_state");
        r.get(s, "battery_wh", c.initial.battery, "initial_state");
    }

    if (doc.contains("learners")) {
        const auto& l = doc.at("learners");
        r.allow_only(l, {"pds", "q"}, "learners");
        if (l.contains("pds")) {
            const auto& p = l.at("pds");
            r.allow_only(p, {"rate_coeff", "epsilon"}, "learners.pds");
            r.get(p, "rate_coeff", c.pds.rate_coeff, "learners.pds", false);
            r.get(p, "epsilon", c.pds.epsilon, "learners.pds", false);
        }
        if (l.contains("q")) {
            const auto& q = l.at("q");
            r.allow_only(q, {"epsilon_start", "epsilon_min", "decay_fraction", "rate_exponent"}, "learners.q");
            r.get(q, "epsilon_start", c.q.epsilon_start, "learners.q", false);
            r.get(q, "epsilon_min", c.q.epsilon_min, "learners.q", false);
            r.get(q, "decay_fraction", c.q.decay_fraction, "learners.q", false);
            r.get(q, "rate_exponent", c.q.rate_exponent, "learners.q", false);
        }
    }

    if (doc.contains("oracle")) {
        const auto& o = doc.at("oracle");
        r.allow_only(o, {"tol", "max_iterations"}, "oracle");
        r.get(o, "tol", c.oracle.tol, "oracle", false);
        r.get(o, "max_iterations", c.oracle.max_iterations, "oracle", false);
    }

    if (!r.errors.empty()) throw ConfigError(std::move(r.errors));
    return validate_config(std::move(c));
}

Config load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError({{ViolationKind::InvalidValue, "cannot open config file " + path.string()}});
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError({{ViolationKind::InvalidValue, path.string() + ": " + e.what()}});
    }
    return parse_config(doc);
}

// ---------------------------------------------------------------------------
// State space

StateSpace::StateSpace(const Config& cfg)
    : nl_(cfg.n_workloads()),
      ne_(cfg.n_envs()),
      nh_(cfg.n_congestions()),
      nb_(static_cast<std::size_t>(cfg.battery_levels)),
      n_exo_(nl_ * ne_ * nh_)
{
}

SystemState StateSpace::state_of(std::size_t index) const
{
    SystemState s;
    s.battery = static_cast<int>(index % nb_);
    std::size_t rest = index / nb_;
    s.congestion = static_cast<int>(rest % nh_);
    rest /= nh_;
    s.env = static_cast<int>(rest % ne_);
    s.workload = static_cast<int>(rest / ne_);
    return s;
}

std::vector<SystemState> enumerate_states(const Config& cfg)
{
    const StateSpace space(cfg);
    std::vector<SystemState> out;
    out.reserve(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) out.push_back(space.state_of(i));
    return out;
}

namespace {
template <class T>
int find_index(const std::vector<T>& values, const T& v, const char* what)
{
    const auto it = std::find(values.begin(), values.end(), v);
    if (it == values.end()) throw std::out_of_range(std::string(what) + " value not in its set");
    return static_cast<int>(it - values.begin());
}
}  // namespace

int workload_index(const Config& cfg, double value) { return find_index(cfg.workloads, value, "workload"); }
int env_index(const Config& cfg, const std::string& name) { return find_index(cfg.envs, name, "environment"); }
int congestion_index(const Config& cfg, double value) { return find_index(cfg.congestions, value, "congestion"); }

int battery_level(const Config& cfg, WattHours value)
{
    if (!on_grid(value, cfg.battery_step) || value < 0.0 || value > cfg.battery_capacity)
        throw std::out_of_range("battery value off grid");
    return grid_steps(value, cfg.battery_step);
}

int action_index(const Config& cfg, WattHours level) { return find_index(cfg.actions, level, "action"); }

SystemState make_state(const Config& cfg, double workload, const std::string& env, double congestion,
                       WattHours battery)
{
    return {workload_index(cfg, workload), env_index(cfg, env), congestion_index(cfg, congestion),
            battery_level(cfg, battery)};
}

}  // namespace edgesim
