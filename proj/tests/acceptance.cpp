#include "saev/analytics.hpp"
#include "saev/amod.hpp"
#include "saev/demand.hpp"
#include "saev/mpc.hpp"
#include "saev/prng.hpp"
#include "saev/resilience.hpp"
#include "saev/scenario.hpp"
#include "saev/solver.hpp"

#include <Eigen/Dense>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

// Release gate: each check below prints exactly one PASS/FAIL line and the
// process exits nonzero when any gating check fails. The full-scale stretch
// run is reported but never gates; it only runs when SAEV_RUN_STRETCH=1.

using namespace saev;

namespace {

const std::string kData = SAEV_DATA_DIR;

struct Verdict {
    bool pass = false;
    bool skipped = false;
    std::string detail;
};

Verdict good(std::string detail) { return {true, false, std::move(detail)}; }
Verdict bad(std::string detail) { return {false, false, std::move(detail)}; }
Verdict skip(std::string detail) { return {false, true, std::move(detail)}; }

template <class... Ts>
std::string cat(const Ts&... parts) {
    std::ostringstream out;
    (out << ... << parts);
    return out.str();
}

std::string num(double v, int prec = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Network triangle() {
    return build_network({{0, 0.0, 0.0, "a"}, {1, 5000.0, 0.0, "b"}, {2, 0.0, 5000.0, "c"}},
                         60.0, 6.0);
}

Network pairnet() {
    return build_network({{0, 0.0, 0.0, "a"}, {1, 6000.0, 0.0, "b"}}, 60.0, 6.0);
}

Scenario toy(const Network& net, int lookahead, int horizon, int vehicles) {
    Scenario sc;
    sc.network = net;
    sc.params.prediction_steps = lookahead;
    sc.params.schedule_steps = horizon;
    sc.params.fleet_size = vehicles;
    return sc;
}

ArrivalMatrix poisson_demand(int nodes, int steps, double rate, std::uint64_t seed) {
    ArrivalMatrix out;
    std::uint64_t ctr = 0;
    for (int t = 0; t < steps; ++t) {
        Eigen::MatrixXi m = Eigen::MatrixXi::Zero(nodes, nodes);
        for (int i = 0; i < nodes; ++i)
            for (int j = 0; j < nodes; ++j)
                if (i != j)
                    m(i, j) = counter_poisson(rate, seed, ctr++);
        out.per_step.push_back(m);
    }
    return out;
}

// 1. The annualized backup cost model reproduces the reference figures and
//    the break-even outage frequency against a generator bank.
Verdict criterion_cost_model() {
    CostInputs in;
    in.relocation_minutes = 654.0;
    in.energy_kwh = 139.74;
    const CostBreakdown bd = v2b_cost(in);
    const double generator = 13367.0;
    const double f = break_even_frequency(bd, generator);
    const std::string detail =
        cat("install ", num(bd.install_eur), " EUR, energy ", num(bd.energy_eur),
            " EUR, relocation ", num(bd.relocation_eur), " EUR, break-even ", num(f),
            "/yr against a ", num(generator, 0), " EUR/yr generator bank");
    if (std::abs(bd.install_eur - 1350.00) > 0.005)
        return bad("install cost off target; " + detail);
    if (std::abs(bd.energy_eur - 29.19) > 0.01)
        return bad("energy cost off target; " + detail);
    if (std::abs(bd.relocation_eur - 71.82) > 0.01)
        return bad("relocation cost off target; " + detail);
    if (f < 118.0 || f > 122.0)
        return bad("break-even frequency outside [118, 122]; " + detail);
    return good(detail);
}

// 2. The per-step emergency requirement helpers reproduce the reference
//    building demand, the net shortfall, and the discharger head count.
Verdict criterion_requirement() {
    const double battery = 85.0;
    const double step_minutes = 6.0;
    const double demand_soc = building_step_demand(228.2, 120000.0, step_minutes, battery);
    const double demand_kwh = demand_soc * battery;
    const double backup_soc = generator_step_supply(6 * 500.0, step_minutes, battery);
    OutageSchedule sch;
    sch.events = {{0, 0, 1}};
    sch.q_demand = demand_soc;
    sch.q_backup = backup_soc;
    const double requirement = emergency_requirement(sch);
    const int heads = min_dischargers(requirement, 0.01, 0.9);
    const std::string detail =
        cat("building ", num(demand_kwh, 1), " kWh/step = ", num(demand_soc, 4),
            " SOC, shortfall net of generators ", num(requirement, 4), " SOC, ", heads,
            " simultaneous dischargers");
    if (std::abs(demand_kwh - 312.6) > 0.1)
        return bad("per-step building demand off target; " + detail);
    if (std::abs(demand_soc - 3.678) > 0.001)
        return bad("SOC-denominated demand off target; " + detail);
    if (std::abs(requirement - 0.1486) > 0.001)
        return bad("net shortfall off target; " + detail);
    if (heads != 17)
        return bad("discharger head count off target; " + detail);
    return good(detail);
}

// 3. Backend and exhaustive reference agree, verdict and objective, on every
//    window of a randomized suite of enumerable scenarios.
Verdict criterion_oracle_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    const SolveOptions opts;
    const int scenarios = 24;
    int windows = 0;
    for (int s = 0; s < scenarios; ++s) {
        const int nodes = 2 + (s % 2);
        const int vehicles = 1 + ((s / 2) % 2);
        const int lookahead = 3 + ((s / 4) % 2);
        const int horizon = (s % 3 == 0) ? 4 : 6;
        Scenario sc = toy(nodes == 2 ? pairnet() : triangle(), lookahead, horizon, vehicles);
        if (s % 2 == 1) {
            // the cover demand starts at the earliest step a relocating
            // vehicle can be parked at the dark node, so feasible and
            // infeasible windows both occur across the suite
            sc.outage.events = {{nodes - 1, horizon == 4 ? 3 : 4, horizon}};
            sc.outage.q_demand = 0.004;
            sc.outage.q_backup = 0.001;
        }
        const double rate = 0.15 + 0.05 * (s % 4);
        const ArrivalMatrix demand = poisson_demand(nodes, horizon, rate, 1000 + s);
        const OracleCheckReport report = oracle_check(sc, demand, opts, s);
        windows += static_cast<int>(report.rows.size());
        if (!report.all_agree) {
            const OracleCheckRow& row = report.rows.back();
            return bad(cat("scenario ", s, " step ", row.step, ": backend ",
                           num(row.backend_objective, 6), " vs reference ",
                           num(row.oracle_objective, 6)));
        }
    }
    return good(cat(scenarios, " scenarios, ", windows, " windows agree, ",
                    num(elapsed_s(t0), 1), " s"));
}

// 4. A mid-scale emergency day holds every model invariant: one-hot vehicle
//    location, SOC bounds, charge and discharge locality, conversion-exact
//    delivery, cover on every dark step, and replayable dynamics. Each window
//    is also re-solved and the raw solution vector checked row by row.
Verdict criterion_invariants() {
    const auto t0 = std::chrono::steady_clock::now();
    const Scenario sc = load_scenario(kData + "/midscale8/scenario.cfg");
    const ArrivalMatrix demand = realize_demand(sc, 3);
    const SolveOptions opts;
    const RunTrace tr = run(sc, demand, opts, 3);
    if (tr.halted)
        return bad("emergency run halted at step " + std::to_string(tr.halt_step) + ": " +
                   tr.halt_reason);
    const int steps = tr.executed_steps();
    if (steps != sc.params.schedule_steps)
        return bad(cat("expected ", sc.params.schedule_steps, " steps, got ", steps));

    const Network& net = sc.network;
    const ModelParams& par = sc.params;
    const double requirement = tr.requirement_soc;

    for (int t = 0; t <= steps; ++t)
        tr.states[t].validate(net, par);

    for (int t = 0; t < steps; ++t) {
        const FleetState& st = tr.states[t];
        const ControlSet& u = tr.controls[t];
        for (int k = 0; k < tr.vehicles; ++k) {
            const double c = u.charge[k];
            const double d = u.discharge[k];
            if (c < -1e-12 || d < -1e-12)
                return bad(cat("negative energy control at step ", t));
            if (c > 1e-12 && d > 1e-12)
                return bad(cat("vehicle ", k, " charges and discharges at step ", t));
            if (c > par.charge_rate + 1e-9 || d > par.discharge_rate + 1e-9)
                return bad(cat("rate limit exceeded at step ", t));
            const int node = st.parked_node(k);
            if (c > 1e-12 && (node < 0 || tr.outage(node, t) != 0))
                return bad(cat("vehicle ", k, " charges away from a powered node, step ", t));
            if (d > 1e-12 && (node < 0 || tr.outage(node, t) == 0))
                return bad(cat("vehicle ", k, " discharges away from a dark node, step ", t));
        }
        const double expected = par.v2b_efficiency * u.discharge.sum();
        if (std::abs(u.delivered - expected) > 1e-6 * std::max(1.0, std::abs(expected)))
            return bad(cat("delivery is not conversion-exact at step ", t));
        if (std::abs(tr.step_kpis[t].delivered_soc - u.delivered) > 1e-9)
            return bad(cat("trace KPI disagrees with controls at step ", t));
        if (tr.outage.col(t).sum() > 0 &&
            u.delivered < requirement - 1e-6 * std::max(1.0, requirement))
            return bad(cat("cover requirement missed at dark step ", t));

        const FleetState next = propagate_step(st, u, demand.at(t), par, net);
        const FleetState& recorded = tr.states[t + 1];
        bool same = (next.waiting == recorded.waiting) && (next.parked == recorded.parked);
        for (int k = 0; same && k < tr.vehicles; ++k)
            same = (next.transit[k] == recorded.transit[k]);
        if (!same || (next.soc - recorded.soc).cwiseAbs().maxCoeff() > 1e-9)
            return bad(cat("propagation audit failed across step ", t));
    }

    // second pass: re-solve each window from the recorded state and inspect
    // the raw solution vector, not just the extracted controls
    for (int t = 0; t < steps; ++t) {
        const PredictionWindow w = make_window(demand, tr.outage, requirement, par, t);
        const AmodInstance inst = assemble(tr.states[t], w, par, net);
        const Solution sol = solve(inst.milp, opts);
        if (sol.status == SolveStatus::Infeasible || !sol.has_values)
            return bad(cat("window at step ", t, " did not solve on re-visit"));
        if (inst.milp.max_violation(sol.values) > 1e-6)
            return bad(cat("solution violates a row or bound at step ", t));
        const VariableLayout& lay = inst.layout;
        for (int k = 0; k < tr.vehicles; ++k) {
            for (int rt = 0; rt < w.steps(); ++rt) {
                double mass = 0.0;
                double powered = 0.0;
                double dark = 0.0;
                for (int i = 0; i < net.size(); ++i) {
                    const double parked = sol.values[lay.park_col(k, i, rt)];
                    mass += parked;
                    (w.outage(i, rt) != 0 ? dark : powered) += parked;
                    for (int th = 0; th <= lay.theta_cap(i); ++th)
                        mass += sol.values[lay.move_col(k, i, th, rt)];
                }
                if (std::abs(mass - 1.0) > 1e-6)
                    return bad(cat("one-hot mass ", num(mass, 8), " for vehicle ", k,
                                   " at step ", t, "+", rt));
                const double soc = sol.values[lay.soc_col(k, rt)];
                if (soc < par.soc_min - 1e-9 || soc > par.soc_max + 1e-9)
                    return bad(cat("SOC out of band for vehicle ", k, " at step ", t, "+", rt));
                if (sol.values[lay.chg_col(k, rt)] > par.charge_rate * powered + 1e-7)
                    return bad(cat("charge exceeds parked powered capacity at step ", t, "+", rt));
                if (sol.values[lay.dis_col(k, rt)] > par.discharge_rate * dark + 1e-7)
                    return bad(cat("discharge exceeds parked dark capacity at step ", t, "+", rt));
            }
        }
        for (int rt = 0; rt < w.steps(); ++rt) {
            if (w.requirement[rt] <= 0.0)
                continue;
            double fed = 0.0;
            for (int k = 0; k < tr.vehicles; ++k)
                fed += sol.values[lay.dis_col(k, rt)];
            if (par.v2b_efficiency * fed < w.requirement[rt] - 1e-7)
                return bad(cat("cover row short at step ", t, "+", rt));
        }
    }
    return good(cat(steps, " steps, ", steps, " windows re-checked, ",
                    num(elapsed_s(t0), 1), " s"));
}

// 5. Directional reproductions on the mid-scale day with fixed replay demand,
//    asserted on three seeds each.
Verdict criterion_directional() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<std::uint64_t> seeds{3, 5, 9};

    const Scenario normal = load_scenario(kData + "/midscale8/scenario_normal.cfg");
    const Scenario dominant = load_scenario(kData + "/midscale8/scenario.cfg");
    Scenario remote = dominant;
    remote.outage.events.at(0).node = 6;
    Scenario fast = dominant;
    fast.params.charge_rate = 0.1;
    fast.params.discharge_rate = 0.1;
    Scenario small = normal;
    small.params.fleet_size = 6;
    Scenario large = normal;
    large.params.fleet_size = 14;

    const std::vector<const Scenario*> variants{&normal, &dominant, &remote,
                                                &fast,   &small,    &large};
    const std::vector<std::string> names{"normal", "dominant", "remote",
                                         "fast",   "fleet6",   "fleet14"};

    struct Task {
        const Scenario* sc;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (const Scenario* sc : variants)
        for (std::uint64_t s : seeds)
            tasks.push_back({sc, s});

    std::vector<KpiSummary> out(tasks.size());
    std::vector<std::string> errors(tasks.size());
    std::atomic<std::size_t> cursor{0};
    const unsigned hw = std::thread::hardware_concurrency();
    const std::size_t workers = std::min<std::size_t>(tasks.size(), hw == 0 ? 4 : hw);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i; (i = cursor.fetch_add(1)) < tasks.size();) {
                try {
                    const ArrivalMatrix demand = realize_demand(*tasks[i].sc, tasks[i].seed);
                    out[i] = summarize(run(*tasks[i].sc, demand, SolveOptions{}, tasks[i].seed));
                    if (out[i].halted)
                        errors[i] = "run halted";
                } catch (const std::exception& e) {
                    errors[i] = e.what();
                }
            }
        });
    for (std::thread& th : pool)
        th.join();

    auto kpi = [&](int variant, int seed_index) -> const KpiSummary& {
        return out[static_cast<std::size_t>(variant) * seeds.size() + seed_index];
    };
    for (std::size_t i = 0; i < tasks.size(); ++i)
        if (!errors[i].empty())
            return bad(cat(names[i / seeds.size()], " seed ", tasks[i].seed, ": ", errors[i]));

    auto mean = [&](int variant) {
        double acc = 0.0;
        for (std::size_t s = 0; s < seeds.size(); ++s)
            acc += kpi(variant, static_cast<int>(s)).waiting_minutes;
        return acc / static_cast<double>(seeds.size());
    };

    const double tie = 1e-9;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        const int si = static_cast<int>(s);
        const KpiSummary& base = kpi(0, si);
        const KpiSummary& dom = kpi(1, si);
        const KpiSummary& rem = kpi(2, si);
        const KpiSummary& fst = kpi(3, si);
        const KpiSummary& k6 = kpi(4, si);
        const KpiSummary& k14 = kpi(5, si);
        if (dom.waiting_minutes < base.waiting_minutes - tie)
            return bad(cat("seed ", seeds[s], ": emergency waiting ", num(dom.waiting_minutes),
                           " below normal ", num(base.waiting_minutes)));
        if (dom.relocation_minutes < base.relocation_minutes - tie)
            return bad(cat("seed ", seeds[s], ": emergency relocation ",
                           num(dom.relocation_minutes), " below normal ",
                           num(base.relocation_minutes)));
        if (k6.waiting_minutes < base.waiting_minutes - tie ||
            base.waiting_minutes < k14.waiting_minutes - tie)
            return bad(cat("seed ", seeds[s], ": waiting not monotone in fleet size: ",
                           num(k6.waiting_minutes), " / ", num(base.waiting_minutes), " / ",
                           num(k14.waiting_minutes)));
        if (fst.waiting_minutes > dom.waiting_minutes + tie)
            return bad(cat("seed ", seeds[s], ": fast-charging waiting ",
                           num(fst.waiting_minutes), " above slow emergency ",
                           num(dom.waiting_minutes)));
        if (dom.waiting_minutes > rem.waiting_minutes + tie)
            return bad(cat("seed ", seeds[s], ": dominant-origin outage waiting ",
                           num(dom.waiting_minutes), " above remote-node outage ",
                           num(rem.waiting_minutes)));
    }
    return good(cat("seeds 3/5/9 mean waiting min: normal ", num(mean(0), 1), ", emergency ",
                    num(mean(1), 1), ", remote ", num(mean(2), 1), ", fast ", num(mean(3), 1),
                    ", fleet6 ", num(mean(4), 1), ", fleet14 ", num(mean(5), 1), "; ",
                    num(elapsed_s(t0), 1), " s"));
}

// 6. Full-scale day, reported but never gating. Off by default because it can
//    take hours; SAEV_RUN_STRETCH=1 enables it.
Verdict criterion_stretch() {
    const char* env = std::getenv("SAEV_RUN_STRETCH");
    if (env == nullptr || std::string(env) == "0")
        return skip("set SAEV_RUN_STRETCH=1 to run the 25-node, 30-vehicle day; "
                    "documented reference: seed 1 completes with zero waiting");
    const auto t0 = std::chrono::steady_clock::now();
    const Scenario sc = load_scenario(kData + "/idf25/scenario_normal.cfg");
    const std::uint64_t seed = 1;
    const ArrivalMatrix demand = realize_demand(sc, seed);
    const RunTrace tr = run(sc, demand, SolveOptions{}, seed);
    const KpiSummary k = summarize(tr);
    const double wall = elapsed_s(t0);
    const std::string detail =
        cat("seed ", seed, ", ", demand.total(), " passengers, ", tr.executed_steps(),
            " steps, waiting ", num(k.waiting_minutes, 1), " min, ", num(wall / 3600.0, 2),
            " h");
    if (tr.halted)
        return bad("stretch run halted: " + tr.halt_reason);
    if (wall > 12.0 * 3600.0)
        return bad("stretch run exceeded the 12 h budget; " + detail);
    if (k.waiting_minutes != 0.0)
        return bad("stretch run left passengers waiting; " + detail);
    return good(detail);
}

// Objective of a realized closed-loop trajectory under the same prices and
// weights the window MILP uses, so it is directly comparable with a one-shot
// solve over the whole day.
double realized_cost(const RunTrace& tr, const ModelParams& par) {
    double cost = 0.0;
    for (int t = 0; t < tr.executed_steps(); ++t) {
        cost += static_cast<double>(tr.states[t].waiting.sum());
        const ControlSet& u = tr.controls[t];
        for (const Dispatch& d : u.relocations)
            cost += par.relocation_weight * tr.travel(d.origin, d.destination);
        const double price = tr.price_by_step.at(t);
        cost += par.energy_weight * price * u.charge.sum();
        cost += par.energy_weight * (par.cycling_cost_eur_kwh - par.v2b_efficiency * price) *
                u.discharge.sum();
    }
    return cost;
}

// 7. Receding-horizon cost dominates the single-shot optimum over the whole
//    day, and matches it when the lookahead covers the day.
Verdict criterion_suboptimality() {
    const auto t0 = std::chrono::steady_clock::now();

    struct Probe {
        std::string tag;
        Scenario sc;
        ArrivalMatrix demand;
        std::uint64_t seed = 0;
        bool expect_equal = false;
    };
    std::vector<Probe> probes;

    for (int i = 0; i < 5; ++i) {
        Probe p;
        p.tag = cat("rolling", i);
        p.sc = toy(triangle(), 3, 6, 2);
        p.demand = poisson_demand(3, 6, 0.3, 100 + i);
        p.seed = i;
        probes.push_back(std::move(p));
    }
    {
        // backup duty from the first step, vehicles already parked at the
        // dark node, so the run can never halt
        Probe p;
        p.tag = "outage";
        p.sc = toy(triangle(), 3, 6, 2);
        p.sc.fleet.placement = PlacementPolicy::Explicit;
        p.sc.fleet.positions = {2, 2};
        p.sc.outage.events = {{2, 0, 6}};
        p.sc.outage.q_demand = 0.004;
        p.demand = poisson_demand(3, 6, 0.2, 200);
        p.seed = 7;
        probes.push_back(std::move(p));
    }
    {
        Probe p;
        p.tag = "covering";
        p.sc = toy(pairnet(), 4, 4, 2);
        p.sc.fleet.placement = PlacementPolicy::Explicit;
        p.sc.fleet.positions = {0, 1};
        p.demand.per_step.assign(4, Eigen::MatrixXi::Zero(2, 2));
        p.demand.per_step[0](0, 1) = 1;
        p.demand.per_step[1](1, 0) = 1;
        p.expect_equal = true;
        probes.push_back(std::move(p));
    }
    {
        Probe p;
        p.tag = "covering3";
        p.sc = toy(triangle(), 4, 4, 2);
        p.sc.fleet.placement = PlacementPolicy::Explicit;
        p.sc.fleet.positions = {0, 2};
        p.demand.per_step.assign(4, Eigen::MatrixXi::Zero(3, 3));
        p.demand.per_step[0](0, 1) = 1;
        p.demand.per_step[1](2, 0) = 1;
        p.expect_equal = true;
        probes.push_back(std::move(p));
    }
    {
        Probe p;
        p.tag = "overshoot";
        p.sc = toy(pairnet(), 6, 4, 2);
        p.sc.fleet.placement = PlacementPolicy::Explicit;
        p.sc.fleet.positions = {0, 1};
        p.demand.per_step.assign(4, Eigen::MatrixXi::Zero(2, 2));
        p.demand.per_step[0](0, 1) = 1;
        p.expect_equal = true;
        probes.push_back(std::move(p));
    }

    const SolveOptions opts;
    double worst_shortfall = 0.0;
    for (const Probe& p : probes) {
        const int horizon = p.sc.params.schedule_steps;
        const RunTrace tr = run(p.sc, p.demand, opts, p.seed);
        if (tr.halted)
            return bad(p.tag + " run halted: " + tr.halt_reason);
        const double realized = realized_cost(tr, p.sc.params);

        ModelParams full = p.sc.params;
        full.prediction_steps = horizon;
        const Eigen::MatrixXi mask =
            outage_mask(p.sc.outage, p.sc.network.size(), horizon).mask;
        const double requirement = emergency_requirement(p.sc.outage);
        const PredictionWindow w = make_window(p.demand, mask, requirement, full, 0);
        const FleetState start = initial_state(p.sc, p.demand, p.seed);
        const AmodInstance inst = assemble(start, w, full, p.sc.network);
        const Solution one_shot = solve(inst.milp, opts);
        if (one_shot.status == SolveStatus::Infeasible || !one_shot.has_values)
            return bad(p.tag + ": single-shot model did not solve");

        const double tol = 2.5e-4 * std::max(1.0, std::abs(one_shot.objective));
        const double shortfall = one_shot.objective - realized;
        worst_shortfall = std::max(worst_shortfall, shortfall);
        if (shortfall > tol)
            return bad(cat(p.tag, ": closed-loop cost ", num(realized, 6),
                           " undercuts the single-shot optimum ", num(one_shot.objective, 6)));
        if (p.expect_equal && std::abs(realized - one_shot.objective) > tol)
            return bad(cat(p.tag, ": full lookahead should match the single-shot optimum, got ",
                           num(realized, 6), " vs ", num(one_shot.objective, 6)));
    }
    return good(cat(probes.size(), " scenarios, worst single-shot shortfall ",
                    num(worst_shortfall, 8), ", ", num(elapsed_s(t0), 1), " s"));
}

} // namespace

int main() {
    if (backend_name() == "none") {
        std::printf("no MILP backend available; unset SAEV_SOLVER or rebuild with HiGHS\n");
        return 1;
    }

    struct Entry {
        int id;
        const char* label;
        Verdict (*check)();
        bool gating;
    };
    const Entry entries[] = {
        {1, "cost-model exactness", criterion_cost_model, true},
        {2, "emergency-requirement derivation", criterion_requirement, true},
        {3, "solver-oracle equivalence", criterion_oracle_equivalence, true},
        {4, "invariant suite", criterion_invariants, true},
        {5, "directional reproductions", criterion_directional, true},
        {6, "full-scale stretch", criterion_stretch, false},
        {7, "receding-horizon suboptimality", criterion_suboptimality, true},
    };

    bool all_pass = true;
    for (const Entry& e : entries) {
        Verdict v;
        try {
            v = e.check();
        } catch (const std::exception& ex) {
            v = bad(cat("unexpected exception: ", ex.what()));
        }
        const char* word = v.skipped ? "SKIPPED non-gating" : (v.pass ? "PASS" : "FAIL");
        std::printf("criterion %d (%s): %s; %s\n", e.id, e.label, word, v.detail.c_str());
        std::fflush(stdout);
        if (e.gating && !v.skipped && !v.pass)
            all_pass = false;
    }
    std::printf("%s\n", all_pass ? "all gating criteria passed" : "gating criteria failed");
    return all_pass ? 0 : 1;
}
