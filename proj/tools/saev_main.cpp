#include "CLI11.hpp"

#include "saev/analytics.hpp"
#include "saev/demand.hpp"
#include "saev/mpc.hpp"
#include "saev/mps.hpp"
#include "saev/resilience.hpp"
#include "saev/scenario.hpp"
#include "saev/solver.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitMismatch = 3;

struct CommonOpts {
    std::string scenario_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::vector<std::string> overrides;
    double gap = 1e-4;
    double time_limit = 0.0;
    int workers = 1;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool scenario_required = true) {
    auto* s = cmd->add_option("--scenario", o.scenario_path, "Scenario config file");
    if (scenario_required)
        s->required();
    cmd->add_option("--out", o.out_dir, "Output directory for report files");
    cmd->add_option("--seed", o.seed, "Demand and placement seed");
    cmd->add_option("--set", o.overrides, "Override section.key=value, repeatable");
    cmd->add_option("--gap", o.gap, "Relative MIP gap");
    cmd->add_option("--time-limit", o.time_limit, "Per-solve wall limit in seconds, 0 = none");
    cmd->add_option("--workers", o.workers, "Concurrent sweep runs");
}

saev::SolveOptions solve_options(const CommonOpts& o) {
    saev::SolveOptions opts;
    opts.rel_gap = o.gap;
    opts.time_limit_s = o.time_limit;
    return opts;
}

const char* status_name(saev::SolveStatus s) {
    switch (s) {
    case saev::SolveStatus::Optimal: return "optimal";
    case saev::SolveStatus::GapFeasible: return "feasible";
    case saev::SolveStatus::Infeasible: return "infeasible";
    case saev::SolveStatus::TimeLimit: return "time-limit";
    }
    return "unknown";
}

void print_summary(std::ostream& os, const saev::KpiSummary& k) {
    os << "status: " << (k.halted ? "halted" : "complete") << '\n'
       << "executed_steps: " << k.executed_steps << '\n'
       << "seed: " << k.seed << '\n'
       << "waiting_minutes: " << k.waiting_minutes << '\n'
       << "relocation_minutes: " << k.relocation_minutes << '\n'
       << "pickups: " << k.pickups << '\n'
       << "charge_soc: " << k.charge_soc << '\n'
       << "discharge_soc: " << k.discharge_soc << '\n'
       << "energy_cost_eur: " << k.energy_cost_eur << '\n'
       << "q_v2b_kwh: " << k.q_v2b_kwh << '\n'
       << "delivered_kwh: " << k.delivered_kwh << '\n';
}

void print_cost(std::ostream& os, const saev::CostBreakdown& cb) {
    os << "install_eur: " << cb.install_eur << '\n'
       << "energy_eur: " << cb.energy_eur << '\n'
       << "relocation_eur: " << cb.relocation_eur << '\n'
       << "per_outage_eur: " << cb.per_outage_eur << '\n';
}

int cmd_validate(const CommonOpts& o) {
    const saev::Scenario sc = saev::load_scenario(o.scenario_path, o.overrides);
    const saev::ValidationReport rep =
        saev::validate_scenario(sc.params, sc.network, sc.outage);
    const char* label = rep.status == saev::ValidationStatus::Ok     ? "ok"
                        : rep.status == saev::ValidationStatus::Warn ? "warn"
                                                                     : "fail";
    std::cout << "validation: " << label << '\n';
    for (const auto& msg : rep.messages)
        std::cout << "  " << msg << '\n';
    return rep.status == saev::ValidationStatus::Fail ? kExitInfeasible : kExitOk;
}

int cmd_ingest(const CommonOpts& o) {
    const saev::Scenario sc = saev::load_scenario(o.scenario_path, o.overrides);
    std::cout << "nodes: " << sc.network.size() << '\n'
              << "step_minutes: " << sc.params.step_minutes << '\n'
              << "max_travel_steps: " << sc.network.max_travel_steps() << '\n';
    if (sc.demand.mode != saev::DemandMode::File && !sc.demand.trips_file.empty()) {
        const saev::TripLoadResult trips = saev::load_trips(sc.demand.trips_file, sc.network);
        std::cout << "trips_kept: " << trips.trips.size() << '\n'
                  << "trips_dropped_walk: " << trips.dropped_walk << '\n'
                  << "trips_dropped_intra: " << trips.dropped_intra << '\n';
    }
    const saev::ArrivalMatrix arrivals = saev::realize_demand(sc, o.seed);
    std::cout << "realized_passengers: " << arrivals.total() << '\n'
              << "horizon_steps: " << arrivals.steps() << '\n';
    if (!o.out_dir.empty()) {
        std::filesystem::create_directories(o.out_dir);
        const auto path = std::filesystem::path(o.out_dir) / "arrivals.csv";
        saev::write_arrivals(arrivals, path.string());
        std::cout << "arrivals_file: " << path.string() << '\n';
    }
    return kExitOk;
}

int cmd_run(const CommonOpts& o, int days, bool soc_reset) {
    const saev::Scenario sc = saev::load_scenario(o.scenario_path, o.overrides);
    const saev::SolveOptions opts = solve_options(o);

    saev::RunTrace trace;
    if (days <= 1) {
        const saev::ArrivalMatrix arrivals = saev::realize_demand(sc, o.seed);
        trace = saev::run(sc, arrivals, opts, o.seed);
    } else {
        std::vector<saev::ArrivalMatrix> day_arrivals;
        day_arrivals.reserve(days);
        for (int d = 0; d < days; ++d)
            day_arrivals.push_back(saev::realize_demand(sc, o.seed + d));
        trace = saev::run_multiday(sc, day_arrivals, soc_reset, opts, o.seed);
    }

    const saev::KpiSummary kpis = saev::summarize(trace);
    std::ostringstream report;
    print_summary(report, kpis);
    if (!sc.outage.empty()) {
        saev::CostInputs in;
        in.fleet_size = sc.params.fleet_size;
        in.energy_kwh = kpis.q_v2b_kwh;
        in.price_eur_kwh = sc.params.price_eur_kwh;
        in.cycling_cost_eur_kwh = sc.params.cycling_cost_eur_kwh;
        in.relocation_minutes = kpis.relocation_minutes;
        in.charge_rate = sc.params.charge_rate;
        in.battery_kwh = sc.params.battery_kwh;
        in.step_minutes = sc.params.step_minutes;
        report << "cost_section: this run's own relocation minutes stand in for the"
                  " emergency-vs-normal delta; use the cost command on a run pair"
                  " for the comparative figure\n";
        print_cost(report, saev::v2b_cost(in));
    }
    std::cout << report.str();

    if (!o.out_dir.empty()) {
        std::filesystem::create_directories(o.out_dir);
        const std::filesystem::path dir(o.out_dir);
        saev::save_trace(trace, (dir / "trace.json").string());
        std::ofstream f(dir / "summary.txt");
        f << report.str();
    }
    if (trace.halted) {
        std::cerr << "run halted at step " << trace.halt_step << ": " << trace.halt_reason
                  << '\n';
        return kExitInfeasible;
    }
    return kExitOk;
}

int cmd_sweep(const CommonOpts& o, const saev::SweepSpec& spec_in) {
    const saev::Scenario sc = saev::load_scenario(o.scenario_path, o.overrides);
    saev::SweepSpec spec = spec_in;
    if (spec.seeds.empty())
        spec.seeds.push_back(o.seed);
    const saev::SweepReport report = saev::sweep(sc, spec, solve_options(o), o.workers);
    for (const auto& pt : report.points)
        std::cout << spec.axis << '=' << pt.value << " seed=" << pt.seed << ' '
                  << (pt.feasible ? "ok" : "infeasible")
                  << " waiting_minutes=" << pt.kpis.waiting_minutes
                  << " relocation_minutes=" << pt.kpis.relocation_minutes << '\n';
    if (!o.out_dir.empty()) {
        saev::emit_reports(report, sc, o.out_dir);
        std::cout << "reports: " << o.out_dir << '\n';
    }
    return kExitOk;
}

struct CostCliOpts {
    std::string normal_trace;
    std::string emergency_trace;
    double relocation_minutes = -1.0;
    double energy_kwh = -1.0;
    double generator_annual = -1.0;
    std::vector<double> f_out;
    bool per_step = false;
};

int cmd_cost(const CommonOpts& o, const CostCliOpts& c) {
    saev::CostInputs in;
    if (!o.scenario_path.empty()) {
        const saev::Scenario sc = saev::load_scenario(o.scenario_path, o.overrides);
        in.fleet_size = sc.params.fleet_size;
        in.price_eur_kwh = sc.params.price_eur_kwh;
        in.cycling_cost_eur_kwh = sc.params.cycling_cost_eur_kwh;
        in.charge_rate = sc.params.charge_rate;
        in.battery_kwh = sc.params.battery_kwh;
        in.step_minutes = sc.params.step_minutes;
    }

    const bool have_pair = !c.normal_trace.empty() && !c.emergency_trace.empty();
    const bool have_explicit = c.relocation_minutes >= 0.0 && c.energy_kwh >= 0.0;
    if (!have_pair && !have_explicit) {
        std::cerr << "cost needs either --normal and --emergency trace files or explicit"
                     " --relocation-minutes and --energy-kwh\n";
        return kExitUsage;
    }
    if (have_pair) {
        const saev::RunTrace normal_trace = saev::load_trace(c.normal_trace);
        const saev::RunTrace emergency_trace = saev::load_trace(c.emergency_trace);
        const saev::KpiSummary normal = saev::summarize(normal_trace);
        const saev::KpiSummary emergency = saev::summarize(emergency_trace);
        const saev::DeltaReport delta = saev::compare(normal, emergency);
        if (o.scenario_path.empty()) {
            in.fleet_size = emergency_trace.vehicles;
            in.battery_kwh = emergency_trace.battery_kwh;
            in.step_minutes = emergency_trace.step_minutes;
            in.cycling_cost_eur_kwh = emergency_trace.cycling_cost_eur_kwh;
            if (!emergency_trace.price_by_step.empty())
                in.price_eur_kwh = emergency_trace.price_by_step.front();
        }
        in.relocation_minutes = delta.relocation_minutes;
        in.energy_kwh = emergency.q_v2b_kwh;
        std::cout << "delta_waiting_minutes: " << delta.waiting_minutes << '\n'
                  << "delta_relocation_minutes: " << delta.relocation_minutes << '\n';
        if (delta.negative_relocation)
            std::cout << "note: emergency run relocated less than the normal run\n";
    } else {
        in.relocation_minutes = c.relocation_minutes;
        in.energy_kwh = c.energy_kwh;
    }

    const saev::CostBreakdown cb =
        saev::v2b_cost(in, c.per_step ? saev::ReloCharging::PerStep
                                      : saev::ReloCharging::PerMinute);
    print_cost(std::cout, cb);
    for (const double f : c.f_out)
        std::cout << "annual_eur_at_f_" << f << ": " << cb.v2b_annual_eur(f) << '\n';
    if (c.generator_annual >= 0.0) {
        std::cout << "generator_annual_eur: " << c.generator_annual << '\n';
        const double f_star = saev::break_even_frequency(cb, c.generator_annual);
        std::cout << "break_even_per_year: " << f_star << '\n';
        if (c.generator_annual < cb.install_eur)
            std::cout << "verdict: generator dominates at every outage frequency\n";
    }
    if (!o.out_dir.empty() && !c.f_out.empty()) {
        std::filesystem::create_directories(o.out_dir);
        const auto path = std::filesystem::path(o.out_dir) / "cost_curve.csv";
        std::ofstream f(path);
        f.precision(12);
        f << "f_out,v2b_annual_eur";
        if (c.generator_annual >= 0.0)
            f << ",generator_annual_eur";
        f << '\n';
        for (const double fo : c.f_out) {
            f << fo << ',' << cb.v2b_annual_eur(fo);
            if (c.generator_annual >= 0.0)
                f << ',' << c.generator_annual;
            f << '\n';
        }
        std::cout << "cost_curve: " << path.string() << '\n';
    }
    return kExitOk;
}

int cmd_export(const CommonOpts& o, const std::string& mps_path) {
    const saev::Scenario sc = saev::load_scenario(o.scenario_path, o.overrides);
    const saev::ArrivalMatrix arrivals = saev::realize_demand(sc, o.seed);
    const saev::FleetState start = saev::initial_state(sc, arrivals, o.seed);
    const auto mask =
        saev::outage_mask(sc.outage, sc.network.size(), sc.params.schedule_steps).mask;
    const double requirement = saev::emergency_requirement(sc.outage);
    const saev::PredictionWindow window =
        saev::make_window(arrivals, mask, requirement, sc.params, 0);
    const saev::AmodInstance inst = saev::assemble(start, window, sc.params, sc.network);
    saev::write_mps(inst.milp, mps_path);
    std::cout << "mps: " << mps_path << '\n'
              << "cols: " << inst.milp.num_cols() << '\n'
              << "rows: " << inst.milp.num_rows() << '\n';
    return kExitOk;
}

int cmd_oracle_check(const CommonOpts& o) {
    const saev::Scenario sc = saev::load_scenario(o.scenario_path, o.overrides);
    const saev::ArrivalMatrix arrivals = saev::realize_demand(sc, o.seed);
    const saev::OracleCheckReport report =
        saev::oracle_check(sc, arrivals, solve_options(o), o.seed, o.gap);
    std::cout << "step backend oracle backend_obj oracle_obj verdict\n";
    for (const auto& row : report.rows)
        std::cout << row.step << ' ' << status_name(row.backend_status) << ' '
                  << status_name(row.oracle_status) << ' ' << row.backend_objective << ' '
                  << row.oracle_objective << ' ' << (row.agree ? "agree" : "MISMATCH") << '\n';
    if (!report.all_agree) {
        std::cerr << "backend and exhaustive reference disagree\n";
        return kExitMismatch;
    }
    std::cout << "all " << report.rows.size() << " iterations agree\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SAEV fleet dispatch simulator with vehicle-to-building backup"};
    app.require_subcommand(1);

    CommonOpts validate_o, ingest_o, run_o, sweep_o, cost_o, oracle_o;

    auto* validate_cmd = app.add_subcommand("validate", "Check a scenario for hazards");
    add_common(validate_cmd, validate_o);

    auto* ingest_cmd =
        app.add_subcommand("ingest", "Load a scenario and report demand statistics");
    add_common(ingest_cmd, ingest_o);

    auto* run_cmd = app.add_subcommand("run", "Execute one receding-horizon run");
    add_common(run_cmd, run_o);
    int run_days = 1;
    bool run_soc_reset = false;
    run_cmd->add_option("--days", run_days, "Consecutive days to simulate");
    run_cmd->add_flag("--soc-reset", run_soc_reset, "Recharge fleet overnight between days");

    auto* sweep_cmd = app.add_subcommand("sweep", "Run a one-axis sensitivity sweep");
    add_common(sweep_cmd, sweep_o);
    saev::SweepSpec spec;
    sweep_cmd
        ->add_option("--axis", spec.axis,
                     "passengers | fleet_size | outage_start | outage_node | outage_length |"
                     " charge_rate")
        ->required();
    sweep_cmd->add_option("--values", spec.values, "Axis values")->required();
    sweep_cmd->add_option("--seeds", spec.seeds, "Demand seeds, defaults to --seed");

    auto* cost_cmd = app.add_subcommand("cost", "Annualized backup cost versus a generator");
    add_common(cost_cmd, cost_o, false);
    CostCliOpts cost_cli;
    cost_cmd->add_option("--normal", cost_cli.normal_trace, "Trace of the no-outage run");
    cost_cmd->add_option("--emergency", cost_cli.emergency_trace, "Trace of the outage run");
    cost_cmd->add_option("--relocation-minutes", cost_cli.relocation_minutes,
                         "Extra fleet relocation minutes attributed to the outage");
    cost_cmd->add_option("--energy-kwh", cost_cli.energy_kwh,
                         "Battery energy delivered over the outage");
    cost_cmd->add_option("--generator-annual", cost_cli.generator_annual,
                         "Yearly cost of the generator bank for the break-even point");
    cost_cmd->add_option("--f-out", cost_cli.f_out, "Outage frequencies per year to tabulate");
    cost_cmd->add_flag("--per-step-relocation", cost_cli.per_step,
                       "Charge relocation time per step instead of per minute");

    auto* oracle_cmd =
        app.add_subcommand("oracle-check", "Cross-check the backend against enumeration");
    add_common(oracle_cmd, oracle_o);

    // the solver-free fallback: hand the first window to any external solver
    CommonOpts export_o;
    auto* export_cmd =
        app.add_subcommand("export", "Write the first window MILP as an MPS file");
    add_common(export_cmd, export_o);
    std::string export_path;
    export_cmd->add_option("--mps", export_path, "Output MPS file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << '\n' << app.help();
        return kExitUsage;
    }

    try {
        if (validate_cmd->parsed())
            return cmd_validate(validate_o);
        if (ingest_cmd->parsed())
            return cmd_ingest(ingest_o);
        if (run_cmd->parsed())
            return cmd_run(run_o, run_days, run_soc_reset);
        if (sweep_cmd->parsed())
            return cmd_sweep(sweep_o, spec);
        if (cost_cmd->parsed())
            return cmd_cost(cost_o, cost_cli);
        if (oracle_cmd->parsed())
            return cmd_oracle_check(oracle_o);
        if (export_cmd->parsed())
            return cmd_export(export_o, export_path);
    } catch (const saev::OracleUnsupported& e) {
        std::cerr << "scenario too large for the exhaustive reference: " << e.what() << '\n';
        return kExitUsage;
    } catch (const saev::BackendUnavailable& e) {
        std::cerr << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
