#include "saev/mpc.hpp"

#include "saev/prng.hpp"
#include "saev/resilience.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace saev {

namespace {

using nlohmann::json;

FleetState place_fleet(const Scenario& sc, const ArrivalMatrix& arrivals, std::uint64_t seed) {
    const int n = sc.network.size();
    const int kk = sc.params.fleet_size;
    FleetState st = make_state(sc.network, kk, sc.params);
    st.parked.setZero();
    switch (sc.fleet.placement) {
    case PlacementPolicy::Explicit:
        for (int k = 0; k < kk; ++k)
            st.parked(k, sc.fleet.positions.at(k)) = 1;
        break;
    case PlacementPolicy::Uniform:
        for (int k = 0; k < kk; ++k)
            st.parked(k, counter_uniform_int(n, seed ^ 0x706c616365ULL, k)) = 1;
        break;
    case PlacementPolicy::DemandWeighted: {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
        for (const auto& m : arrivals.per_step)
            w += m.cast<double>().rowwise().sum();
        const double total = w.sum();
        if (total <= 0.0) {
            for (int k = 0; k < kk; ++k)
                st.parked(k, counter_uniform_int(n, seed ^ 0x706c616365ULL, k)) = 1;
            break;
        }
        for (int k = 0; k < kk; ++k) {
            const double u = counter_uniform(seed ^ 0x706c616365ULL, k) * total;
            double cum = 0.0;
            int at = n - 1;
            for (int i = 0; i < n; ++i) {
                cum += w[i];
                if (u < cum) {
                    at = i;
                    break;
                }
            }
            st.parked(k, at) = 1;
        }
        break;
    }
    }
    return st;
}

std::string describe_active_outage(const Eigen::MatrixXi& mask, int step) {
    if (step >= mask.cols())
        return "no outage active";
    std::ostringstream ss;
    bool any = false;
    for (int i = 0; i < mask.rows(); ++i) {
        if (mask(i, step) != 0) {
            ss << (any ? ", " : "") << "node " << i;
            any = true;
        }
    }
    if (!any)
        return "no outage active";
    return "outage active at " + ss.str();
}

void audit_handoff(const FleetState& expect, const FleetState& got, int step) {
    auto complain = [&](const std::string& what) {
        throw std::logic_error("handoff audit failed at step " + std::to_string(step) + ": " +
                               what + "; the solver state disagrees with the dynamics");
    };
    if (expect.waiting != got.waiting)
        complain("queue table");
    if (expect.parked != got.parked)
        complain("parked table");
    for (std::size_t k = 0; k < expect.transit.size(); ++k)
        if (expect.transit[k] != got.transit[k])
            complain("transit table of vehicle " + std::to_string(k));
    for (int k = 0; k < expect.soc.size(); ++k)
        if (std::abs(expect.soc[k] - got.soc[k]) > 1e-6)
            complain("state of charge of vehicle " + std::to_string(k));
}

} // namespace

FleetState initial_state(const Scenario& sc, const ArrivalMatrix& arrivals, std::uint64_t seed) {
    return place_fleet(sc, arrivals, seed);
}

PredictionWindow make_window(const ArrivalMatrix& arrivals, const Eigen::MatrixXi& outage,
                             double requirement_soc, const ModelParams& params, int step) {
    const int n = arrivals.nodes();
    const int T = params.prediction_steps;
    const int L = static_cast<int>(outage.cols());
    PredictionWindow window;
    window.arrivals.reserve(T);
    window.outage = Eigen::MatrixXi::Zero(n, T);
    window.requirement = Eigen::VectorXd::Zero(T);
    window.price = Eigen::VectorXd::Zero(T);
    const Eigen::MatrixXi zero_arrivals = Eigen::MatrixXi::Zero(n, n);
    const int demand_end = std::min(arrivals.steps(), L);
    for (int t = 0; t < T; ++t) {
        const int abs_t = step + t;
        window.arrivals.push_back(abs_t < demand_end ? arrivals.at(abs_t) : zero_arrivals);
        if (abs_t < L) {
            window.outage.col(t) = outage.col(abs_t);
            if (window.outage.col(t).any())
                window.requirement[t] = requirement_soc;
        }
        window.price[t] = params.price_at(abs_t);
    }
    return window;
}

RunTrace run_from(const Scenario& sc, const FleetState& start, const ArrivalMatrix& arrivals,
                  const SolveOptions& opts, std::uint64_t seed) {
    const ModelParams& p = sc.params;
    const Network& net = sc.network;
    const int n = net.size();
    const int L = p.schedule_steps;
    if (arrivals.steps() < L)
        throw std::invalid_argument("run: arrival table shorter than the horizon");
    if (arrivals.steps() > 0 && arrivals.nodes() != n)
        throw std::invalid_argument("run: arrival table does not match the network");
    start.validate(net, p);

    RunTrace trace;
    trace.nodes = n;
    trace.vehicles = start.num_vehicles();
    trace.planned_steps = L;
    trace.seed = seed;
    trace.base_fingerprint = sc.base_fingerprint();
    trace.full_fingerprint = sc.full_fingerprint();
    trace.travel = net.travel_table();
    trace.outage = outage_mask(sc.outage, n, L).mask;
    trace.step_minutes = p.step_minutes;
    trace.battery_kwh = p.battery_kwh;
    trace.v2b_efficiency = p.v2b_efficiency;
    trace.cycling_cost_eur_kwh = p.cycling_cost_eur_kwh;
    trace.requirement_soc = emergency_requirement(sc.outage);
    trace.price_by_step.resize(L);
    for (int t = 0; t < L; ++t)
        trace.price_by_step[t] = p.price_at(t);

    trace.states.push_back(start);

    for (int step = 0; step < L; ++step) {
        const PredictionWindow window =
            make_window(arrivals, trace.outage, trace.requirement_soc, p, step);

        AmodInstance inst = assemble(trace.states.back(), window, p, net);
        const Solution sol = solve(inst.milp, opts);

        SolverStats stats;
        stats.status = sol.status;
        stats.objective = sol.objective;
        stats.bound = sol.bound;
        stats.wall_seconds = sol.wall_seconds;
        trace.solver_stats.push_back(stats);

        if (!sol.has_values) {
            trace.halted = true;
            trace.halt_step = step;
            std::ostringstream ss;
            ss << (sol.status == SolveStatus::Infeasible ? "window MILP infeasible"
                                                         : "no solution within the time limit")
               << " at step " << step << " (" << describe_active_outage(trace.outage, step) << ")";
            trace.halt_reason = ss.str();
            return trace;
        }

        const ControlSet controls = extract_controls(inst, sol.values);
        const FleetState next = extract_next_state(inst, sol.values);
        const FleetState reference =
            propagate_step(trace.states.back(), controls, window.arrivals[0], p, net);
        audit_handoff(reference, next, step);

        StepKpi kpi;
        kpi.waiting = trace.states.back().waiting.sum();
        kpi.pickups = static_cast<int>(controls.pickups.size());
        for (const auto& d : controls.relocations)
            kpi.relocation_steps += trace.travel(d.origin, d.destination);
        kpi.charge_soc = controls.charge.sum();
        kpi.discharge_soc = controls.discharge.sum();
        kpi.delivered_soc = controls.delivered;
        kpi.requirement_soc = window.outage.col(0).any() ? trace.requirement_soc : 0.0;
        trace.step_kpis.push_back(kpi);

        trace.controls.push_back(controls);
        trace.states.push_back(next);
    }
    return trace;
}

RunTrace run(const Scenario& sc, const ArrivalMatrix& arrivals, const SolveOptions& opts,
             std::uint64_t seed) {
    return run_from(sc, initial_state(sc, arrivals, seed), arrivals, opts, seed);
}

RunTrace run_multiday(const Scenario& sc, const std::vector<ArrivalMatrix>& days,
                      bool soc_reset, const SolveOptions& opts, std::uint64_t seed) {
    if (days.empty())
        throw std::invalid_argument("run_multiday: no days given");
    RunTrace combined;
    FleetState state = initial_state(sc, days[0], seed);
    for (std::size_t day = 0; day < days.size(); ++day) {
        RunTrace t = run_from(sc, state, days[day], opts, seed);
        if (day == 0) {
            combined = t;
        } else {
            // drop the duplicated boundary state, then append
            combined.states.insert(combined.states.end(), t.states.begin() + 1, t.states.end());
            combined.controls.insert(combined.controls.end(), t.controls.begin(),
                                     t.controls.end());
            combined.step_kpis.insert(combined.step_kpis.end(), t.step_kpis.begin(),
                                      t.step_kpis.end());
            combined.solver_stats.insert(combined.solver_stats.end(), t.solver_stats.begin(),
                                         t.solver_stats.end());
            const int prior = combined.planned_steps;
            combined.planned_steps += t.planned_steps;
            Eigen::MatrixXi mask(combined.nodes, combined.planned_steps);
            mask << combined.outage, t.outage;
            combined.outage = mask;
            combined.price_by_step.insert(combined.price_by_step.end(), t.price_by_step.begin(),
                                          t.price_by_step.end());
            if (t.halted) {
                combined.halted = true;
                combined.halt_step = prior + t.halt_step;
                combined.halt_reason = t.halt_reason;
            }
        }
        if (combined.halted)
            return combined;
        state = combined.states.back();
        if (soc_reset && day + 1 < days.size()) {
            state.soc.setConstant(sc.params.soc_init);
            state.waiting.setZero();
            combined.states.back() = state;
        }
    }
    return combined;
}

// Trace files are JSON: compact enough at these sizes, self-describing, and
// loadable without the scenario that produced them.

namespace {

json state_to_json(const FleetState& st) {
    json j;
    json waiting = json::array();
    for (int i = 0; i < st.waiting.rows(); ++i)
        for (int jj = 0; jj < st.waiting.cols(); ++jj)
            if (st.waiting(i, jj) != 0)
                waiting.push_back({i, jj, st.waiting(i, jj)});
    j["waiting"] = std::move(waiting);
    json parked = json::array();
    json transit = json::array();
    for (int k = 0; k < st.num_vehicles(); ++k) {
        parked.push_back(st.parked_node(k));
        const auto [dest, theta] = st.transit_target(k);
        transit.push_back({dest, theta});
    }
    j["parked"] = std::move(parked);
    j["transit"] = std::move(transit);
    j["soc"] = std::vector<double>(st.soc.data(), st.soc.data() + st.soc.size());
    return j;
}

FleetState state_from_json(const json& j, int nodes, int max_theta_cap) {
    FleetState st;
    st.waiting = Eigen::MatrixXi::Zero(nodes, nodes);
    for (const auto& cell : j.at("waiting"))
        st.waiting(cell.at(0).get<int>(), cell.at(1).get<int>()) = cell.at(2).get<int>();
    const auto& parked = j.at("parked");
    const auto& transit = j.at("transit");
    const auto soc = j.at("soc").get<std::vector<double>>();
    const int kk = static_cast<int>(soc.size());
    st.parked = Eigen::MatrixXi::Zero(kk, nodes);
    st.transit.assign(kk, Eigen::MatrixXi::Zero(nodes, max_theta_cap + 1));
    st.soc = Eigen::Map<const Eigen::VectorXd>(soc.data(), kk);
    for (int k = 0; k < kk; ++k) {
        const int at = parked.at(k).get<int>();
        if (at >= 0) {
            st.parked(k, at) = 1;
        } else {
            const int dest = transit.at(k).at(0).get<int>();
            const int theta = transit.at(k).at(1).get<int>();
            st.transit[k](dest, theta) = 1;
        }
    }
    return st;
}

json controls_to_json(const ControlSet& c) {
    json j;
    json pickups = json::array();
    for (const auto& d : c.pickups)
        pickups.push_back({d.vehicle, d.origin, d.destination});
    json relocations = json::array();
    for (const auto& d : c.relocations)
        relocations.push_back({d.vehicle, d.origin, d.destination});
    j["pickups"] = std::move(pickups);
    j["relocations"] = std::move(relocations);
    j["charge"] = std::vector<double>(c.charge.data(), c.charge.data() + c.charge.size());
    j["discharge"] =
        std::vector<double>(c.discharge.data(), c.discharge.data() + c.discharge.size());
    j["delivered"] = c.delivered;
    return j;
}

ControlSet controls_from_json(const json& j) {
    ControlSet c;
    for (const auto& d : j.at("pickups"))
        c.pickups.push_back({d.at(0).get<int>(), d.at(1).get<int>(), d.at(2).get<int>()});
    for (const auto& d : j.at("relocations"))
        c.relocations.push_back({d.at(0).get<int>(), d.at(1).get<int>(), d.at(2).get<int>()});
    const auto charge = j.at("charge").get<std::vector<double>>();
    const auto discharge = j.at("discharge").get<std::vector<double>>();
    c.charge = Eigen::Map<const Eigen::VectorXd>(charge.data(), static_cast<long>(charge.size()));
    c.discharge =
        Eigen::Map<const Eigen::VectorXd>(discharge.data(), static_cast<long>(discharge.size()));
    c.delivered = j.at("delivered").get<double>();
    return c;
}

json matrix_to_json(const Eigen::MatrixXi& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j)
            row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXi matrix_from_json(const json& j) {
    const int rows = static_cast<int>(j.size());
    const int cols = rows == 0 ? 0 : static_cast<int>(j.at(0).size());
    Eigen::MatrixXi m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int c = 0; c < cols; ++c)
            m(i, c) = j.at(i).at(c).get<int>();
    return m;
}

} // namespace

void save_trace(const RunTrace& trace, const std::string& path) {
    json j;
    j["version"] = 1;
    j["nodes"] = trace.nodes;
    j["vehicles"] = trace.vehicles;
    j["planned_steps"] = trace.planned_steps;
    j["seed"] = trace.seed;
    j["base_fingerprint"] = trace.base_fingerprint;
    j["full_fingerprint"] = trace.full_fingerprint;
    j["halted"] = trace.halted;
    j["halt_step"] = trace.halt_step;
    j["halt_reason"] = trace.halt_reason;
    j["travel_steps"] = matrix_to_json(trace.travel);
    j["outage_mask"] = matrix_to_json(trace.outage);
    j["price_by_step"] = trace.price_by_step;
    j["step_minutes"] = trace.step_minutes;
    j["battery_kwh"] = trace.battery_kwh;
    j["v2b_efficiency"] = trace.v2b_efficiency;
    j["cycling_cost_eur_kwh"] = trace.cycling_cost_eur_kwh;
    j["requirement_soc"] = trace.requirement_soc;
    json states = json::array();
    for (const auto& st : trace.states)
        states.push_back(state_to_json(st));
    j["states"] = std::move(states);
    json controls = json::array();
    for (const auto& c : trace.controls)
        controls.push_back(controls_to_json(c));
    j["controls"] = std::move(controls);
    json kpis = json::array();
    for (const auto& k : trace.step_kpis)
        kpis.push_back({{"waiting", k.waiting},
                        {"pickups", k.pickups},
                        {"relocation_steps", k.relocation_steps},
                        {"charge_soc", k.charge_soc},
                        {"discharge_soc", k.discharge_soc},
                        {"delivered_soc", k.delivered_soc},
                        {"requirement_soc", k.requirement_soc}});
    j["step_kpis"] = std::move(kpis);
    json stats = json::array();
    for (const auto& s : trace.solver_stats)
        stats.push_back({{"status", static_cast<int>(s.status)},
                         {"objective", s.objective},
                         {"bound", s.bound},
                         {"wall_seconds", s.wall_seconds}});
    j["solver_stats"] = std::move(stats);

    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("save_trace: cannot open " + path);
    out << j.dump() << '\n';
}

RunTrace load_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("load_trace: cannot open " + path);
    json j;
    in >> j;
    RunTrace trace;
    trace.nodes = j.at("nodes").get<int>();
    trace.vehicles = j.at("vehicles").get<int>();
    trace.planned_steps = j.at("planned_steps").get<int>();
    trace.seed = j.at("seed").get<std::uint64_t>();
    trace.base_fingerprint = j.at("base_fingerprint").get<std::uint64_t>();
    trace.full_fingerprint = j.at("full_fingerprint").get<std::uint64_t>();
    trace.halted = j.at("halted").get<bool>();
    trace.halt_step = j.at("halt_step").get<int>();
    trace.halt_reason = j.at("halt_reason").get<std::string>();
    trace.travel = matrix_from_json(j.at("travel_steps"));
    trace.outage = matrix_from_json(j.at("outage_mask"));
    trace.price_by_step = j.at("price_by_step").get<std::vector<double>>();
    trace.step_minutes = j.at("step_minutes").get<double>();
    trace.battery_kwh = j.at("battery_kwh").get<double>();
    trace.v2b_efficiency = j.at("v2b_efficiency").get<double>();
    trace.cycling_cost_eur_kwh = j.at("cycling_cost_eur_kwh").get<double>();
    trace.requirement_soc = j.at("requirement_soc").get<double>();

    int max_theta_cap = 0;
    for (int i = 0; i < trace.nodes; ++i) {
        int inbound = 0;
        for (int jj = 0; jj < trace.nodes; ++jj)
            if (jj != i)
                inbound = std::max(inbound, trace.travel(jj, i));
        max_theta_cap = std::max(max_theta_cap, inbound - 1);
    }
    for (const auto& st : j.at("states"))
        trace.states.push_back(state_from_json(st, trace.nodes, max_theta_cap));
    for (const auto& c : j.at("controls"))
        trace.controls.push_back(controls_from_json(c));
    for (const auto& k : j.at("step_kpis")) {
        StepKpi kpi;
        kpi.waiting = k.at("waiting").get<int>();
        kpi.pickups = k.at("pickups").get<int>();
        kpi.relocation_steps = k.at("relocation_steps").get<double>();
        kpi.charge_soc = k.at("charge_soc").get<double>();
        kpi.discharge_soc = k.at("discharge_soc").get<double>();
        kpi.delivered_soc = k.at("delivered_soc").get<double>();
        kpi.requirement_soc = k.at("requirement_soc").get<double>();
        trace.step_kpis.push_back(kpi);
    }
    for (const auto& s : j.at("solver_stats")) {
        SolverStats stats;
        stats.status = static_cast<SolveStatus>(s.at("status").get<int>());
        stats.objective = s.at("objective").get<double>();
        stats.bound = s.at("bound").get<double>();
        stats.wall_seconds = s.at("wall_seconds").get<double>();
        trace.solver_stats.push_back(stats);
    }
    return trace;
}

} // namespace saev
