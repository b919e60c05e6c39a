#include "fleetplan/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace fleetplan {

std::string csv_number(double v) {
    if (v == 0.0) return "0";  // folds -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_trajectories_csv(std::ostream& out, const PolicyStats& stats) {
    out << "policy,rollout,t,n_fd,n_gw,n_od,action,n_fd_after,ops_cost,fix_cost,sev_cost,total_cost,"
           "fd_variable,gw,od,penalty,service_level,unmatched_gw,unmatched_od\n";
    for (std::size_t i = 0; i < stats.trajectories.size(); ++i)
        for (const auto& r : stats.trajectories[i].steps) {
            out << stats.name << ',' << i << ',' << r.state.t << ',' << r.state.n_fd << ',' << r.state.n_gw << ','
                << r.state.n_od << ',' << r.action << ',' << r.fd_after() << ',' << csv_number(r.cost.ops) << ','
                << csv_number(r.cost.fix) << ',' << csv_number(r.cost.sev) << ',' << csv_number(r.cost.total())
                << ',' << csv_number(r.fd_variable) << ',' << csv_number(r.gw) << ',' << csv_number(r.od) << ','
                << csv_number(r.penalty) << ',' << csv_number(r.service_level) << ','
                << csv_number(r.unmatched.gw) << ',' << csv_number(r.unmatched.od) << '\n';
        }
}

namespace {

void stats_rows(std::ostream& out, const PolicyStats& st) {
    auto row = [&](const char* metric, double v) { out << st.name << ',' << metric << ',' << csv_number(v) << '\n'; };
    row("rollouts", st.rollouts);
    row("mean_cost", st.mean);
    row("std_cost", st.stddev);
    row("mean_discounted_cost", st.discounted_mean);
    row("std_discounted_cost", st.discounted_stddev);
    row("share_fd_fixed", st.shares.fd_fixed);
    row("share_fd_variable", st.shares.fd_variable);
    row("share_gw", st.shares.gw);
    row("share_od", st.shares.od);
    row("share_penalty", st.shares.penalty);
    row("share_severance", st.shares.severance);
    row("terminal_fd", st.mean_fd.back());
    if (!st.hiring_gap.empty()) row("terminal_hiring_gap", st.terminal_gap());
}

}  // namespace

void write_eval_csv(std::ostream& out, const EvalReport& rep) {
    out << "policy,metric,value\n";
    stats_rows(out, rep.policy);
    const auto& name = rep.policy.name;
    auto row = [&](const char* metric, const std::optional<double>& v) {
        if (v) out << name << ',' << metric << ',' << csv_number(*v) << '\n';
    };
    row("delta", rep.delta);
    row("delta_my", rep.delta_my);
    row("h", rep.h);
    row("h_bar", rep.h_bar);
    if (rep.myopic && rep.myopic->name != name) stats_rows(out, *rep.myopic);
    if (rep.fd_only && rep.fd_only->name != name) stats_rows(out, *rep.fd_only);
}

void write_step_means_csv(std::ostream& out, const EvalReport& rep) {
    out << "policy,t,mean_fd,mean_gw,mean_od,service_level,hiring_gap\n";
    auto emit = [&](const PolicyStats& st) {
        for (std::size_t t = 0; t < st.mean_fd.size(); ++t)
            out << st.name << ',' << t << ',' << csv_number(st.mean_fd[t]) << ',' << csv_number(st.mean_gw[t]) << ','
                << csv_number(st.mean_od[t]) << ',' << csv_number(st.service_level[t]) << ','
                << (st.hiring_gap.empty() ? "" : csv_number(st.hiring_gap[t])) << '\n';
    };
    emit(rep.policy);
    if (rep.myopic && rep.myopic->name != rep.policy.name) emit(*rep.myopic);
    if (rep.fd_only && rep.fd_only->name != rep.policy.name) emit(*rep.fd_only);
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "parameter,value,metric,mean,std\n";
    for (const auto& r : rows)
        out << r.parameter << ',' << csv_number(r.value) << ',' << r.metric << ',' << csv_number(r.mean) << ','
            << csv_number(r.std) << '\n';
}

void write_fluid_csv(std::ostream& out, const FluidSolution& sol) {
    out << "i,j,a_fd_i,a_gw,a_od,a_null,e,f,gw_slack,od_slack\n";
    for (int i = 0; i < sol.zones; ++i)
        for (int j = 0; j < sol.zones; ++j)
            out << i << ',' << j << ',' << csv_number(sol.a_fd[i]) << ',' << csv_number(sol.a_gw(i, j)) << ','
                << csv_number(sol.a_od(i, j)) << ',' << csv_number(sol.a_null(i, j)) << ','
                << csv_number(sol.e(i, j)) << ',' << csv_number(sol.f(i, j)) << ','
                << csv_number(sol.gw_slack(i, j)) << ',' << csv_number(sol.od_slack(i, j)) << '\n';
}

void write_training_csv(std::ostream& out, const std::vector<double>& episode_costs) {
    out << "episode,cost\n";
    for (std::size_t e = 0; e < episode_costs.size(); ++e) out << e << ',' << csv_number(episode_costs[e]) << '\n';
}

}  // namespace fleetplan
