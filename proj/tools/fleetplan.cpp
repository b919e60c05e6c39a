// fleetplan: command-line driver for operational solves, DP, training, evaluation and simulation.

#include "fleetplan/bdp.hpp"
#include "fleetplan/fluid.hpp"
#include "fleetplan/instance.hpp"
#include "fleetplan/plvfa.hpp"
#include "fleetplan/policy.hpp"
#include "fleetplan/queue_sim.hpp"
#include "fleetplan/report.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

namespace fs = std::filesystem;
using namespace fleetplan;

namespace {

struct InstanceArgs {
    std::string spec = "builtin:grubhub18";
    std::vector<std::string> overrides;
    bool strict_relocation = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--instance", spec, "instance file or builtin:grubhub18 / builtin:desk-{constant,growth,peak}")
            ->capture_default_str();
        cmd->add_option("--set", overrides, "parameter override name=value, repeatable");
        cmd->add_flag("--strict-relocation", strict_relocation, "charge relocations per km instead of per hour");
    }

    Instance load() const {
        Instance inst = resolve_instance(spec);
        for (const auto& o : overrides) {
            const auto eq = o.find('=');
            if (eq == std::string::npos) throw std::invalid_argument("--set expects name=value, got '" + o + "'");
            apply_parameter(inst, o.substr(0, eq), std::stod(o.substr(eq + 1)));
        }
        if (strict_relocation) inst.costs.relocation_per_hour = false;
        validate(inst);
        return inst;
    }
};

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return in;
}

// "a:b:step" (inclusive) or "v1,v2,...".
std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::stringstream ss(text);
        for (std::string tok; std::getline(ss, tok, ':');) parts.push_back(std::stod(tok));
        if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0])
            throw std::invalid_argument("range must be lo:hi:step with step > 0");
        const long n = std::lround(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
        for (long k = 0; k <= n; ++k) out.push_back(parts[0] + k * parts[2]);
    } else {
        std::stringstream ss(text);
        for (std::string tok; std::getline(ss, tok, ',');) out.push_back(std::stod(tok));
    }
    if (out.empty()) throw std::invalid_argument("no values given");
    return out;
}

FleetState parse_state(const std::string& text, const Instance& inst) {
    if (text.empty()) return inst.initial;
    FleetState s;
    char c1 = 0, c2 = 0;
    std::stringstream ss(text);
    if (!(ss >> s.n_fd >> c1 >> s.n_gw >> c2 >> s.n_od) || c1 != ',' || c2 != ',')
        throw std::invalid_argument("--start expects fd,gw,od");
    return s;
}

Policy parse_policy(const std::string& text) {
    if (text == "myopic") return Policy::myopic();
    if (text == "fd-only") return Policy::fd_only();
    if (text.starts_with("bdp:")) {
        auto in = open_in(text.substr(4));
        return Policy::from_table(load_value_table(in));
    }
    if (text.starts_with("plvfa:")) {
        auto in = open_in(text.substr(6));
        return Policy::from_slopes(load_slope_table(in));
    }
    throw std::invalid_argument("unknown policy '" + text + "' (myopic, fd-only, bdp:<file>, plvfa:<file>)");
}

struct TrainArgs {
    int episodes = 1000;
    double alpha = 0.01;
    int k_gw = 1, k_od = 1;
    double epsilon = 0.05;
    bool harmonic = false;
    bool strict = false;
    std::string start = "uniform";

    void attach(CLI::App* cmd) {
        cmd->add_option("--episodes", episodes, "training episodes")->capture_default_str()->check(CLI::NonNegativeNumber);
        cmd->add_option("--alpha", alpha, "learning rate")->capture_default_str()->check(CLI::Range(1e-12, 1.0));
        cmd->add_option("--k-gw", k_gw, "GW aggregation factor")->capture_default_str()->check(CLI::PositiveNumber);
        cmd->add_option("--k-od", k_od, "OD aggregation factor")->capture_default_str()->check(CLI::PositiveNumber);
        cmd->add_option("--epsilon", epsilon, "initial exploration probability")->capture_default_str();
        cmd->add_flag("--harmonic", harmonic, "harmonic step sizes, floored at alpha");
        cmd->add_flag("--strict", strict, "pure greedy training, no exploration");
        cmd->add_option("--train-start", start, "initial states: uniform, or point (the instance's initial state)")
            ->capture_default_str()
            ->check(CLI::IsMember({"uniform", "point"}));
    }

    PlvfaConfig config(const Instance& inst, std::uint64_t seed) const {
        PlvfaConfig cfg;
        cfg.episodes = episodes;
        cfg.alpha = alpha;
        cfg.k_gw = k_gw;
        cfg.k_od = k_od;
        cfg.epsilon = strict ? 0.0 : epsilon;
        cfg.rate = harmonic ? PlvfaConfig::Rate::harmonic : PlvfaConfig::Rate::constant;
        cfg.start = start == "point" ? PlvfaConfig::Start::point : PlvfaConfig::Start::uniform;
        cfg.start_state = inst.initial;
        cfg.seed = seed;
        return cfg;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fleet sizing with fixed and crowdsourced drivers"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "show help for every command");

    // ops-cost
    auto* ops = app.add_subcommand("ops-cost", "solve the operational fluid LP for one state");
    InstanceArgs ops_inst;
    ops_inst.attach(ops);
    int nfd = 0, ngw = 0, nod = 0, t = 0;
    std::string ops_out;
    ops->add_option("--nfd", nfd, "fixed drivers")->required()->check(CLI::NonNegativeNumber);
    ops->add_option("--ngw", ngw, "gig workers")->required()->check(CLI::NonNegativeNumber);
    ops->add_option("--nod", nod, "occasional drivers")->required()->check(CLI::NonNegativeNumber);
    ops->add_option("--t", t, "strategic step")->required()->check(CLI::NonNegativeNumber);
    ops->add_option("--out", ops_out, "output directory for fluid.csv and summary.csv");

    // bdp
    auto* bdp = app.add_subcommand("bdp", "exact backward DP over the capped state space");
    InstanceArgs bdp_inst;
    bdp_inst.attach(bdp);
    std::string bdp_out;
    std::size_t max_states = 5'000'000;
    int bdp_jobs = 1;
    bdp->add_option("--out", bdp_out, "value table file")->required();
    bdp->add_option("--max-states", max_states, "enumeration limit")->capture_default_str();
    bdp->add_option("--jobs", bdp_jobs, "worker threads, 0 for all cores")->capture_default_str();

    // train
    auto* train = app.add_subcommand("train", "train PL-VFA slopes");
    InstanceArgs train_inst;
    train_inst.attach(train);
    TrainArgs train_args;
    train_args.attach(train);
    std::uint64_t train_seed = 0;
    std::string train_out, trace_out;
    train->add_option("--seed", train_seed, "random seed")->required();
    train->add_option("--out", train_out, "slope table file")->required();
    train->add_option("--trace", trace_out, "per-episode cost CSV");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Monte Carlo evaluation of a policy");
    InstanceArgs eval_inst;
    eval_inst.attach(eval);
    std::string policy_text = "myopic", eval_out, start_text, oracle_file;
    int rollouts = 50, eval_jobs = 1;
    std::uint64_t eval_seed = 0;
    bool hiring_gap = false;
    eval->add_option("--policy", policy_text, "myopic | fd-only | bdp:<file> | plvfa:<file>")->capture_default_str();
    eval->add_option("--rollouts", rollouts, "rollouts")->capture_default_str()->check(CLI::PositiveNumber);
    eval->add_option("--seed", eval_seed, "master seed")->required();
    eval->add_option("--out", eval_out, "output directory")->required();
    eval->add_option("--start", start_text, "initial state fd,gw,od (default: the instance's)");
    eval->add_option("--oracle", oracle_file, "value table whose V_0(start) is the reference cost");
    eval->add_option("--jobs", eval_jobs, "worker threads, 0 for all cores")->capture_default_str();
    eval->add_flag("--hiring-gap", hiring_gap, "also compute n_fd - n_fd,opt per step");

    // sweep
    auto* sw = app.add_subcommand("sweep", "re-evaluate over a parameter grid with common seeds");
    InstanceArgs sweep_inst;
    sweep_inst.attach(sw);
    std::string param, values_text, sweep_out, sweep_policy = "myopic";
    int sweep_rollouts = 50, sweep_jobs = 1;
    std::uint64_t sweep_seed = 0;
    bool sweep_gap = false;
    TrainArgs sweep_train;
    sweep_train.attach(sw);
    sw->add_option("--param", param, "parameter name")->required();
    sw->add_option("--values", values_text, "lo:hi:step or comma list")->required();
    sw->add_option("--policy", sweep_policy, "myopic, or plvfa trained per cell")
        ->capture_default_str()
        ->check(CLI::IsMember({"myopic", "plvfa"}));
    sw->add_option("--rollouts", sweep_rollouts, "rollouts per cell")->capture_default_str()->check(CLI::PositiveNumber);
    sw->add_option("--seed", sweep_seed, "master seed")->required();
    sw->add_option("--out", sweep_out, "long-format CSV")->required();
    sw->add_option("--jobs", sweep_jobs, "cells evaluated concurrently, 0 for all cores")->capture_default_str();
    sw->add_flag("--hiring-gap", sweep_gap, "include terminal hiring gap");

    // simulate
    auto* sim = app.add_subcommand("simulate", "slot-based queueing simulation of one operational state");
    InstanceArgs sim_inst;
    sim_inst.attach(sim);
    int snfd = 0, sngw = 0, snod = 0, st = 0;
    SimOptions sim_opts;
    std::uint64_t sim_seed = 0;
    std::string sim_out;
    sim->add_option("--nfd", snfd, "fixed drivers")->required()->check(CLI::NonNegativeNumber);
    sim->add_option("--ngw", sngw, "gig workers")->required()->check(CLI::NonNegativeNumber);
    sim->add_option("--nod", snod, "occasional drivers")->required()->check(CLI::NonNegativeNumber);
    sim->add_option("--t", st, "strategic step")->required()->check(CLI::NonNegativeNumber);
    sim->add_option("--hours", sim_opts.hours, "simulated hours")->capture_default_str();
    sim->add_option("--slot-minutes", sim_opts.slot_minutes, "matching slot length")->capture_default_str();
    sim->add_option("--cd-lifetime", sim_opts.cd_lifetime_slots, "slots an unmatched CD waits")->capture_default_str();
    sim->add_flag("--exponential", sim_opts.exponential_travel, "exponential travel times");
    sim->add_option("--seed", sim_seed, "random seed")->required();
    sim->add_option("--out", sim_out, "output directory")->required();

    // validate-instance
    auto* val = app.add_subcommand("validate-instance", "load and check an instance file");
    InstanceArgs val_inst;
    val_inst.attach(val);
    std::string val_write;
    val->add_option("--write", val_write, "write the normalized instance here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ops) {
            const auto inst = ops_inst.load();
            const auto sol = solve_fluid(inst, nfd, ngw, nod, t);
            const auto s = summarize(sol, inst, ngw, nod, t);
            std::ostringstream line;
            line << "cost_rate," << csv_number(sol.cost_rate) << ",cost_per_step," << csv_number(per_step(inst, sol.cost_rate))
                 << ",service_level," << csv_number(s.service_level) << ",unmatched_demand,"
                 << csv_number(sol.unmatched_demand) << ",unmatched_gw," << csv_number(s.shares.gw) << ",unmatched_od,"
                 << csv_number(s.shares.od) << ",lp_iterations," << sol.lp_iterations;
            std::cout << line.str() << '\n';
            if (!ops_out.empty()) {
                fs::create_directories(ops_out);
                auto f = open_out(fs::path(ops_out) / "fluid.csv");
                write_fluid_csv(f, sol);
                auto g = open_out(fs::path(ops_out) / "summary.csv");
                g << "metric,value\n"
                  << "cost_rate," << csv_number(sol.cost_rate) << '\n'
                  << "cost_per_step," << csv_number(per_step(inst, sol.cost_rate)) << '\n'
                  << "fd_serving_rate," << csv_number(sol.fd_serving_rate) << '\n'
                  << "relocation_rate," << csv_number(sol.relocation_rate) << '\n'
                  << "gw_rate," << csv_number(sol.gw_rate) << '\n'
                  << "od_rate," << csv_number(sol.od_rate) << '\n'
                  << "penalty_rate," << csv_number(sol.penalty_rate) << '\n'
                  << "service_level," << csv_number(s.service_level) << '\n'
                  << "unmatched_gw," << csv_number(s.shares.gw) << '\n'
                  << "unmatched_od," << csv_number(s.shares.od) << '\n';
            }
        } else if (*bdp) {
            const auto inst = bdp_inst.load();
            BdpOptions opts;
            opts.max_states = max_states;
            opts.parallel = bdp_jobs != 1;
            if (bdp_jobs > 0) omp_set_num_threads(bdp_jobs);
            const auto table = bdp_solve(inst, opts);
            auto out = open_out(bdp_out);
            save_value_table(table, out);
            std::cout << "V_0(" << inst.initial.n_fd << ',' << inst.initial.n_gw << ',' << inst.initial.n_od
                      << ")," << csv_number(table.value({inst.initial.n_fd, inst.initial.n_gw, inst.initial.n_od, 0}))
                      << '\n';
        } else if (*train) {
            const auto inst = train_inst.load();
            OpsCostCache cache(inst);
            const auto res = plvfa_train(cache, train_args.config(inst, train_seed));
            auto out = open_out(train_out);
            save_slope_table(res.table, out);
            if (!trace_out.empty()) {
                auto tr = open_out(trace_out);
                write_training_csv(tr, res.episode_costs);
            }
            std::cout << "episodes," << res.episode_costs.size() << ",rows," << res.table.rows.size()
                      << ",pair_repairs," << res.pair_repairs << '\n';
        } else if (*eval) {
            const auto inst = eval_inst.load();
            OpsCostCache cache(inst);
            const auto policy = parse_policy(policy_text);
            const auto s0 = parse_state(start_text, inst);
            EvalOptions opts;
            opts.rollouts = rollouts;
            opts.seed = eval_seed;
            opts.jobs = eval_jobs;
            opts.hiring_gap = hiring_gap;
            if (!oracle_file.empty()) {
                auto in = open_in(oracle_file);
                opts.oracle = load_value_table(in).value({s0.n_fd, s0.n_gw, s0.n_od, 0});
            } else if (policy.kind == Policy::Kind::bdp) {
                opts.oracle = policy.table->value({s0.n_fd, s0.n_gw, s0.n_od, 0});
            }
            const auto rep = evaluate(cache, policy, s0, opts);
            fs::create_directories(eval_out);
            auto a = open_out(fs::path(eval_out) / "eval.csv");
            write_eval_csv(a, rep);
            auto b = open_out(fs::path(eval_out) / "steps.csv");
            write_step_means_csv(b, rep);
            auto c = open_out(fs::path(eval_out) / "trajectories.csv");
            write_trajectories_csv(c, rep.policy);
            std::cout << rep.policy.name << ",mean_cost," << csv_number(rep.policy.mean) << ",std_cost,"
                      << csv_number(rep.policy.stddev);
            if (rep.delta_my) std::cout << ",delta_my," << csv_number(*rep.delta_my);
            if (rep.h_bar) std::cout << ",h_bar," << csv_number(*rep.h_bar);
            std::cout << '\n';
        } else if (*sw) {
            const auto inst = sweep_inst.load();
            SweepOptions opts;
            opts.parameter = param;
            opts.values = parse_values(values_text);
            opts.eval.rollouts = sweep_rollouts;
            opts.eval.seed = sweep_seed;
            opts.eval.jobs = sweep_jobs;
            opts.eval.hiring_gap = sweep_gap;
            if (sweep_policy == "plvfa") opts.train = sweep_train.config(inst, sweep_seed);
            const auto rows = sweep(inst, opts);
            auto out = open_out(sweep_out);
            write_sweep_csv(out, rows);
            std::cout << "cells," << opts.values.size() << ",rows," << rows.size() << '\n';
        } else if (*sim) {
            const auto inst = sim_inst.load();
            const auto sol = solve_fluid(inst, snfd, sngw, snod, st);
            const auto stats = simulate(inst, snfd, sngw, snod, st, derive_routing(inst, sol), sim_opts, sim_seed);
            const auto check = fluid_bound_check(stats, sol.cost_rate);
            fs::create_directories(sim_out);
            auto routes = open_out(fs::path(sim_out) / "routes.csv");
            write_sim_csv(routes, stats);
            auto summary = open_out(fs::path(sim_out) / "summary.csv");
            summary << "measured_hours,cost_rate,half_width,lp_rate,margin,bound_holds,relocation_km\n"
                    << csv_number(stats.measured_hours) << ',' << csv_number(stats.cost_rate) << ','
                    << csv_number(stats.half_width) << ',' << csv_number(sol.cost_rate) << ','
                    << csv_number(check.margin) << ',' << (check.holds ? 1 : 0) << ','
                    << csv_number(stats.relocation_km) << '\n';
            std::cout << "cost_rate," << csv_number(stats.cost_rate) << ",half_width," << csv_number(stats.half_width)
                      << ",lp_rate," << csv_number(sol.cost_rate) << ",bound_holds," << (check.holds ? 1 : 0) << '\n';
        } else if (*val) {
            const auto inst = val_inst.load();
            std::cout << "ok," << inst.name << ",zones," << inst.zones << ",horizon," << inst.strategic.horizon << '\n';
            if (!val_write.empty()) {
                auto out = open_out(val_write);
                write_instance(inst, out);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
