#pragma once

#include "saev/amod.hpp"
#include "saev/demand.hpp"
#include "saev/scenario.hpp"
#include "saev/solver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace saev {

struct SolverStats {
    SolveStatus status = SolveStatus::Optimal;
    double objective = 0.0;
    double bound = 0.0;
    double wall_seconds = 0.0;
};

struct StepKpi {
    int waiting = 0;              // queued passengers at the start of the step
    int pickups = 0;
    double relocation_steps = 0;  // travel steps of relocations launched
    double charge_soc = 0.0;
    double discharge_soc = 0.0;
    double delivered_soc = 0.0;   // after conversion losses
    double requirement_soc = 0.0; // building shortfall this step
};

// Full record of one closed-loop run. Carries enough of the scenario that
// every summary statistic can be recomputed from the trace alone.
struct RunTrace {
    int nodes = 0;
    int vehicles = 0;
    int planned_steps = 0;
    std::uint64_t seed = 0;
    std::uint64_t base_fingerprint = 0;
    std::uint64_t full_fingerprint = 0;

    std::vector<FleetState> states;    // executed_steps + 1 entries
    std::vector<ControlSet> controls;  // executed_steps entries
    std::vector<StepKpi> step_kpis;
    std::vector<SolverStats> solver_stats;

    bool halted = false;
    int halt_step = -1;
    std::string halt_reason;

    // scenario echo
    Eigen::MatrixXi travel;         // node x node steps
    Eigen::MatrixXi outage;         // node x planned_steps mask
    std::vector<double> price_by_step;
    double step_minutes = 6.0;
    double battery_kwh = 85.0;
    double v2b_efficiency = 0.9;
    double cycling_cost_eur_kwh = 0.07974;
    double requirement_soc = 0.0;   // per outage step

    int executed_steps() const { return static_cast<int>(controls.size()); }
};

// Starting fleet: queues empty, everyone parked and fully rested at
// soc_init. Placement follows the scenario's fleet policy; demand-weighted
// placement draws nodes proportional to the realized origin counts.
FleetState initial_state(const Scenario& sc, const ArrivalMatrix& arrivals, std::uint64_t seed);

// Window view of the horizon at one step: realized arrivals inside the
// horizon, zeros past its end, outage flags and prices by absolute step.
PredictionWindow make_window(const ArrivalMatrix& arrivals, const Eigen::MatrixXi& outage,
                             double requirement_soc, const ModelParams& params, int step);

// Receding-horizon loop: at each step solve the window MILP, apply the first
// control, hand the solver's step-1 state forward, and audit that handoff
// against the reference dynamics. An infeasible window halts the run with a
// diagnostic; the partial trace is returned with `halted` set.
RunTrace run(const Scenario& sc, const ArrivalMatrix& arrivals, const SolveOptions& opts,
             std::uint64_t seed);
RunTrace run_from(const Scenario& sc, const FleetState& start, const ArrivalMatrix& arrivals,
                  const SolveOptions& opts, std::uint64_t seed);

// Consecutive days under one scenario. Positions always carry across
// midnight; soc_reset also restores every battery to soc_init and clears
// the queues, as if overnight charging and attrition were free.
RunTrace run_multiday(const Scenario& sc, const std::vector<ArrivalMatrix>& days,
                      bool soc_reset, const SolveOptions& opts, std::uint64_t seed);

void save_trace(const RunTrace& trace, const std::string& path);
RunTrace load_trace(const std::string& path);

} // namespace saev
