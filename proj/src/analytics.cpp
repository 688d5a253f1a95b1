#include "saev/analytics.hpp"

#include "saev/resilience.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace saev {

KpiSummary summarize(const RunTrace& trace) {
    KpiSummary out;
    out.halted = trace.halted;
    out.executed_steps = trace.executed_steps();
    out.seed = trace.seed;
    out.base_fingerprint = trace.base_fingerprint;
    out.full_fingerprint = trace.full_fingerprint;

    double waiting_steps = 0.0;
    for (const auto& st : trace.states)
        waiting_steps += st.waiting.sum();
    out.waiting_minutes = trace.step_minutes * waiting_steps;

    const int kk = trace.vehicles;
    out.outage_discharge_soc.assign(kk, 0.0);
    double delivered_soc = 0.0;
    for (int step = 0; step < trace.executed_steps(); ++step) {
        const ControlSet& c = trace.controls[step];
        out.pickups += static_cast<int>(c.pickups.size());
        for (const auto& d : c.relocations)
            out.relocation_minutes += trace.step_minutes * trace.travel(d.origin, d.destination);
        const double e = c.charge.sum();
        const double g = c.discharge.sum();
        out.charge_soc += e;
        out.discharge_soc += g;
        delivered_soc += c.delivered;
        const double price = trace.price_by_step.at(step);
        out.energy_cost_eur +=
            trace.battery_kwh *
            (price * e - trace.v2b_efficiency * price * g + trace.cycling_cost_eur_kwh * g);
        const bool dark = step < trace.outage.cols() && trace.outage.col(step).any();
        if (dark) {
            out.q_v2b_kwh += trace.battery_kwh * g;
            for (int k = 0; k < kk; ++k)
                out.outage_discharge_soc[k] += c.discharge[k];
        }
    }
    out.delivered_kwh = trace.battery_kwh * delivered_soc;
    if (!trace.states.empty()) {
        const auto& soc = trace.states.back().soc;
        out.final_soc.assign(soc.data(), soc.data() + soc.size());
    }
    return out;
}

DeltaReport compare(const KpiSummary& normal, const KpiSummary& emergency) {
    if (normal.base_fingerprint != emergency.base_fingerprint)
        throw std::invalid_argument(
            "compare: runs come from different scenarios (base fingerprints differ)");
    if (normal.seed != emergency.seed)
        throw std::invalid_argument("compare: runs use different demand seeds");
    DeltaReport d;
    d.waiting_minutes = emergency.waiting_minutes - normal.waiting_minutes;
    d.relocation_minutes = emergency.relocation_minutes - normal.relocation_minutes;
    d.energy_cost_eur = emergency.energy_cost_eur - normal.energy_cost_eur;
    d.q_v2b_kwh = emergency.q_v2b_kwh - normal.q_v2b_kwh;
    d.negative_relocation = d.relocation_minutes < 0.0;
    return d;
}

namespace {

Scenario apply_axis(const Scenario& base, const std::string& axis, double value) {
    Scenario sc = base;
    if (axis == "passengers") {
        sc.demand.passenger_target = value;
    } else if (axis == "fleet_size") {
        sc.params.fleet_size = static_cast<int>(std::lround(value));
        sc.params.validate();
        if (sc.fleet.placement == PlacementPolicy::Explicit)
            throw std::invalid_argument(
                "sweep: fleet_size axis cannot be combined with explicit placement");
    } else if (axis == "outage_start") {
        if (sc.outage.events.empty())
            throw std::invalid_argument("sweep: outage_start axis needs an outage in the scenario");
        const int delta = static_cast<int>(std::lround(value)) - sc.outage.events[0].start_step;
        for (auto& ev : sc.outage.events) {
            ev.start_step += delta;
            ev.end_step += delta;
        }
    } else if (axis == "outage_node") {
        if (sc.outage.events.empty())
            throw std::invalid_argument("sweep: outage_node axis needs an outage in the scenario");
        for (auto& ev : sc.outage.events)
            ev.node = static_cast<int>(std::lround(value));
    } else if (axis == "outage_length") {
        if (sc.outage.events.empty())
            throw std::invalid_argument("sweep: outage_length axis needs an outage in the scenario");
        for (auto& ev : sc.outage.events)
            ev.end_step = ev.start_step + static_cast<int>(std::lround(value));
    } else if (axis == "charge_rate") {
        sc.params.charge_rate = value;
        sc.params.validate();
    } else {
        throw std::invalid_argument("sweep: unknown axis '" + axis + "'");
    }
    return sc;
}

} // namespace

SweepReport sweep(const Scenario& base, const SweepSpec& spec, const SolveOptions& opts,
                  int workers) {
    SweepReport report;
    report.axis = spec.axis;
    // nothing to run is a valid, empty request
    if (spec.values.empty() || spec.seeds.empty())
        return report;
    // validate the axis up front so a typo fails before hours of runs
    apply_axis(base, spec.axis, spec.values[0]);

    // demand realizations shared across values except on the demand axis
    const bool demand_axis = spec.axis == "passengers";
    std::map<std::uint64_t, ArrivalMatrix> shared_demand;
    if (!demand_axis)
        for (const auto seed : spec.seeds)
            shared_demand[seed] = realize_demand(base, seed);

    struct Task {
        double value;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (const double v : spec.values)
        for (const auto seed : spec.seeds)
            tasks.push_back({v, seed});
    report.points.resize(tasks.size());

    std::mutex fail_mutex;
    std::exception_ptr first_failure;
    std::size_t cursor = 0;
    std::mutex cursor_mutex;

    auto worker = [&]() {
        for (;;) {
            std::size_t idx;
            {
                std::lock_guard<std::mutex> lock(cursor_mutex);
                if (cursor >= tasks.size())
                    return;
                idx = cursor++;
            }
            try {
                const Task& task = tasks[idx];
                const Scenario sc = apply_axis(base, spec.axis, task.value);
                const ArrivalMatrix arrivals = demand_axis
                                                   ? realize_demand(sc, task.seed)
                                                   : shared_demand.at(task.seed);
                SweepPoint& point = report.points[idx];
                point.trace = run(sc, arrivals, opts, task.seed);
                point.value = task.value;
                point.seed = task.seed;
                point.feasible = !point.trace.halted;
                point.kpis = summarize(point.trace);
            } catch (...) {
                std::lock_guard<std::mutex> lock(fail_mutex);
                if (!first_failure)
                    first_failure = std::current_exception();
                return;
            }
        }
    };

    const int thread_count =
        std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (int w = 0; w < thread_count; ++w)
        pool.emplace_back(worker);
    for (auto& th : pool)
        th.join();
    if (first_failure)
        std::rethrow_exception(first_failure);
    return report;
}

namespace {

std::string format_value(double v) {
    std::ostringstream ss;
    ss << v;
    std::string s = ss.str();
    for (auto& c : s)
        if (c == '.')
            c = 'p';
    return s;
}

} // namespace

void emit_reports(const SweepReport& report, const Scenario& base, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    {
        std::ofstream f(fs::path(out_dir) / "summary.csv");
        if (!f)
            throw std::runtime_error("emit_reports: cannot write summary.csv");
        f.precision(12);
        f << "axis,value,seed,status,executed_steps,waiting_minutes,relocation_minutes,"
             "pickups,charge_soc,discharge_soc,energy_cost_eur,q_v2b_kwh,delivered_kwh\n";
        for (const auto& pt : report.points) {
            f << report.axis << ',' << pt.value << ',' << pt.seed << ','
              << (pt.feasible ? "ok" : "infeasible") << ',' << pt.kpis.executed_steps << ','
              << pt.kpis.waiting_minutes << ',' << pt.kpis.relocation_minutes << ','
              << pt.kpis.pickups << ',' << pt.kpis.charge_soc << ',' << pt.kpis.discharge_soc
              << ',' << pt.kpis.energy_cost_eur << ',' << pt.kpis.q_v2b_kwh << ','
              << pt.kpis.delivered_kwh << '\n';
        }
    }

    for (const auto& pt : report.points) {
        std::ostringstream name;
        name << "trace_" << report.axis << '_' << format_value(pt.value) << '_' << pt.seed
             << ".json";
        save_trace(pt.trace, (fs::path(out_dir) / name.str()).string());
    }

    // mean waiting and relocation per axis value, feasible points only
    auto write_plot = [&](const std::string& name, auto metric) {
        std::ofstream f(fs::path(out_dir) / name);
        if (!f)
            throw std::runtime_error("emit_reports: cannot write " + name);
        f << "# " << report.axis << " mean\n";
        std::map<double, std::pair<double, int>> agg;
        for (const auto& pt : report.points) {
            if (!pt.feasible)
                continue;
            auto& [sum, count] = agg[pt.value];
            sum += metric(pt.kpis);
            ++count;
        }
        for (const auto& [value, sc] : agg)
            if (sc.second > 0)
                f << value << ' ' << sc.first / sc.second << '\n';
    };
    write_plot("plot_waiting.dat", [](const KpiSummary& k) { return k.waiting_minutes; });
    write_plot("plot_relocation.dat", [](const KpiSummary& k) { return k.relocation_minutes; });

    if (!base.outage.empty()) {
        std::ofstream f(fs::path(out_dir) / "cost.csv");
        if (!f)
            throw std::runtime_error("emit_reports: cannot write cost.csv");
        f << "axis,value,seed,q_v2b_kwh,install_eur,energy_eur,relocation_eur,per_outage_eur\n";
        for (const auto& pt : report.points) {
            if (!pt.feasible)
                continue;
            CostInputs in;
            in.fleet_size = base.params.fleet_size;
            in.energy_kwh = pt.kpis.q_v2b_kwh;
            in.price_eur_kwh = base.params.price_eur_kwh;
            in.cycling_cost_eur_kwh = base.params.cycling_cost_eur_kwh;
            in.relocation_minutes = pt.kpis.relocation_minutes;
            in.charge_rate = base.params.charge_rate;
            in.battery_kwh = base.params.battery_kwh;
            in.step_minutes = base.params.step_minutes;
            const CostBreakdown cb = v2b_cost(in);
            f << report.axis << ',' << pt.value << ',' << pt.seed << ',' << pt.kpis.q_v2b_kwh
              << ',' << cb.install_eur << ',' << cb.energy_eur << ',' << cb.relocation_eur << ','
              << cb.per_outage_eur << '\n';
        }
    }
}

OracleCheckReport oracle_check(const Scenario& sc, const ArrivalMatrix& arrivals,
                               const SolveOptions& opts, std::uint64_t seed, double tolerance) {
    const ModelParams& p = sc.params;
    const Network& net = sc.network;
    const int L = p.schedule_steps;
    const Eigen::MatrixXi mask = outage_mask(sc.outage, net.size(), L).mask;
    const double requirement = emergency_requirement(sc.outage);

    OracleCheckReport report;
    FleetState state = initial_state(sc, arrivals, seed);
    for (int step = 0; step < L; ++step) {
        const PredictionWindow window = make_window(arrivals, mask, requirement, p, step);
        const AmodInstance inst = assemble(state, window, p, net);
        const Solution backend = solve(inst.milp, opts);
        const Solution oracle = oracle_solve(inst);

        OracleCheckRow row;
        row.step = step;
        row.backend_status = backend.status;
        row.oracle_status = oracle.status;
        row.backend_objective = backend.objective;
        row.oracle_objective = oracle.objective;
        const bool backend_feasible = backend.status != SolveStatus::Infeasible;
        const bool oracle_feasible = oracle.status != SolveStatus::Infeasible;
        row.agree = backend_feasible == oracle_feasible;
        if (row.agree && backend_feasible) {
            const double scale = std::max(1.0, std::abs(oracle.objective));
            row.agree = std::abs(backend.objective - oracle.objective) <= tolerance * scale;
        }
        report.rows.push_back(row);
        if (!row.agree) {
            report.all_agree = false;
            return report;
        }
        if (!backend_feasible)
            return report; // both infeasible: agreement, but the loop cannot continue
        state = extract_next_state(inst, backend.values);
    }
    return report;
}

} // namespace saev
