#pragma once

#include "fleetplan/fluid.hpp"
#include "fleetplan/policy.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace fleetplan {

/// Ten significant digits, '.' decimal.
std::string csv_number(double v);

/// One row per step of every rollout.
void write_trajectories_csv(std::ostream& out, const PolicyStats& stats);
/// policy,metric,value
void write_eval_csv(std::ostream& out, const EvalReport& rep);
/// Per-step means of each evaluated policy.
void write_step_means_csv(std::ostream& out, const EvalReport& rep);
/// parameter,value,metric,mean,std
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
/// One row per route.
void write_fluid_csv(std::ostream& out, const FluidSolution& sol);
void write_training_csv(std::ostream& out, const std::vector<double>& episode_costs);

}  // namespace fleetplan
