#pragma once

#include "saev/mpc.hpp"
#include "saev/scenario.hpp"
#include "saev/solver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace saev {

// Headline numbers of one run, every one recomputable from the trace alone.
struct KpiSummary {
    double waiting_minutes = 0.0;     // passenger-minutes spent queued
    double relocation_minutes = 0.0;  // vehicle-minutes spent on relocation trips
    int pickups = 0;
    double charge_soc = 0.0;
    double discharge_soc = 0.0;
    double energy_cost_eur = 0.0;     // purchases minus backup revenue plus wear
    double q_v2b_kwh = 0.0;           // battery energy drawn during outage steps
    double delivered_kwh = 0.0;       // after conversion losses
    std::vector<double> final_soc;
    std::vector<double> outage_discharge_soc; // per vehicle, outage steps only
    bool halted = false;
    int executed_steps = 0;
    std::uint64_t seed = 0;
    std::uint64_t base_fingerprint = 0;
    std::uint64_t full_fingerprint = 0;
};

KpiSummary summarize(const RunTrace& trace);

// Emergency-vs-normal delta. Both runs must share the base fingerprint and
// seed, so the only difference is the outage schedule.
struct DeltaReport {
    double waiting_minutes = 0.0;
    double relocation_minutes = 0.0;
    double energy_cost_eur = 0.0;
    double q_v2b_kwh = 0.0;
    // a negative relocation delta is legitimate but surprising; flagged for
    // the caller's attention
    bool negative_relocation = false;
};

DeltaReport compare(const KpiSummary& normal, const KpiSummary& emergency);

// One-axis parameter sweep over seeded runs.
struct SweepSpec {
    std::string axis;            // passengers | fleet_size | outage_start |
                                 // outage_node | outage_length | charge_rate
    std::vector<double> values;
    std::vector<std::uint64_t> seeds;
};

struct SweepPoint {
    double value = 0.0;
    std::uint64_t seed = 0;
    bool feasible = true;
    KpiSummary kpis;
    RunTrace trace;
};

struct SweepReport {
    std::string axis;
    std::vector<SweepPoint> points; // ordered by (value, seed)
};

// Runs the scenario once per (value, seed). Demand is realized per seed and,
// except on the demand axis itself, shared across values so points differ
// only in the swept parameter. Infeasible points are recorded, not fatal.
SweepReport sweep(const Scenario& base, const SweepSpec& spec, const SolveOptions& opts,
                  int workers);

// Writes summary.csv, per-point traces, and two-column plot data under
// out_dir; adds cost.csv when the scenario has outages.
void emit_reports(const SweepReport& report, const Scenario& base, const std::string& out_dir);

// Dual-route check: every window of a closed-loop run solved by both the
// MILP backend and the exhaustive reference, verdicts and objectives
// compared. Any disagreement is a finding.
struct OracleCheckRow {
    int step = 0;
    SolveStatus backend_status = SolveStatus::Optimal;
    SolveStatus oracle_status = SolveStatus::Optimal;
    double backend_objective = 0.0;
    double oracle_objective = 0.0;
    bool agree = true;
};

struct OracleCheckReport {
    std::vector<OracleCheckRow> rows;
    bool all_agree = true;
};

OracleCheckReport oracle_check(const Scenario& sc, const ArrivalMatrix& arrivals,
                               const SolveOptions& opts, std::uint64_t seed,
                               double tolerance = 1e-4);

} // namespace saev
