#include "doctest.h"

#include "saev/amod.hpp"
#include "saev/solver.hpp"

#include <set>
#include <stdexcept>
#include <string>

using namespace saev;

namespace {

Network line2(double meters = 6000.0) {
    return build_network({{0, 0.0, 0.0, "a"}, {1, meters, 0.0, "b"}}, 60.0, 6.0);
}

Network triangle() {
    return build_network({{0, 0.0, 0.0, "a"}, {1, 5000.0, 0.0, "b"}, {2, 0.0, 5000.0, "c"}},
                         60.0, 6.0);
}

PredictionWindow empty_window(const Network& net, const ModelParams& p) {
    PredictionWindow w;
    const int n = net.size();
    const int T = p.prediction_steps;
    w.arrivals.assign(T, Eigen::MatrixXi::Zero(n, n));
    w.outage = Eigen::MatrixXi::Zero(n, T);
    w.requirement = Eigen::VectorXd::Zero(T);
    w.price = Eigen::VectorXd::Constant(T, p.price_eur_kwh);
    return w;
}

} // namespace

TEST_CASE("column families count out as the index ranges dictate") {
    // two nodes one step apart: every countdown cap is zero, one slot per node
    ModelParams p;
    p.prediction_steps = 2;
    p.fleet_size = 1;
    const Network net = line2();
    const VariableLayout L(net, 1, 2);
    int move_cols = 0, pick_cols = 0;
    for (int c = 0; c < L.total_cols(); ++c) {
        const auto ref = L.decode(c);
        move_cols += ref.family == VariableLayout::Family::Move;
        pick_cols += ref.family == VariableLayout::Family::Pick;
    }
    CHECK(move_cols == 4);  // N * 1 slot * T
    CHECK(pick_cols == 4);  // K * N(N-1) * T

    // three nodes, unit travel, two vehicles, three steps
    const Network tri = build_network(
        {{0, 0.0, 0.0, "a"}, {1, 5000.0, 0.0, "b"}, {2, 0.0, 5000.0, "c"}}, 120.0, 6.0);
    REQUIRE(tri.max_travel_steps() == 1);
    const VariableLayout L2(tri, 2, 3);
    int relo_cols = 0;
    for (int c = 0; c < L2.total_cols(); ++c)
        relo_cols += L2.decode(c).family == VariableLayout::Family::Relo;
    CHECK(relo_cols == 36); // K * N(N-1) * T
}

TEST_CASE("decode inverts every column index and names are unique") {
    const Network net = triangle();
    const VariableLayout L(net, 2, 4);
    std::set<std::string> names;
    for (int c = 0; c < L.total_cols(); ++c) {
        const auto ref = L.decode(c);
        int back = -1;
        switch (ref.family) {
        case VariableLayout::Family::Wait: back = L.wait_col(ref.node_a, ref.node_b, ref.step); break;
        case VariableLayout::Family::Move: back = L.move_col(ref.vehicle, ref.node_a, ref.theta, ref.step); break;
        case VariableLayout::Family::Park: back = L.park_col(ref.vehicle, ref.node_a, ref.step); break;
        case VariableLayout::Family::Soc: back = L.soc_col(ref.vehicle, ref.step); break;
        case VariableLayout::Family::Chg: back = L.chg_col(ref.vehicle, ref.step); break;
        case VariableLayout::Family::Dis: back = L.dis_col(ref.vehicle, ref.step); break;
        case VariableLayout::Family::Pick: back = L.pick_col(ref.vehicle, ref.node_a, ref.node_b, ref.step); break;
        case VariableLayout::Family::Relo: back = L.relo_col(ref.vehicle, ref.node_a, ref.node_b, ref.step); break;
        }
        CHECK(back == c);
        names.insert(L.name(c));
    }
    CHECK(static_cast<int>(names.size()) == L.total_cols());
}

TEST_CASE("an idle fleet with no demand costs nothing") {
    ModelParams p;
    p.prediction_steps = 3;
    p.fleet_size = 1;
    const Network net = line2();
    const FleetState s0 = make_state(net, 1, p);
    const AmodInstance inst = assemble(s0, empty_window(net, p), p, net);

    const Solution sol = solve(inst.milp);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(0.0).epsilon(1e-9));
    const ControlSet c = extract_controls(inst, sol.values);
    CHECK(c.pickups.empty());
    CHECK(c.relocations.empty());
    CHECK(c.charge.sum() == doctest::Approx(0.0));
    CHECK(c.discharge.sum() == doctest::Approx(0.0));
}

TEST_CASE("a lone waiting passenger is picked up immediately") {
    ModelParams p;
    p.prediction_steps = 3;
    p.fleet_size = 1;
    const Network net = line2();
    FleetState s0 = make_state(net, 1, p);
    s0.waiting(0, 1) = 1;
    const AmodInstance inst = assemble(s0, empty_window(net, p), p, net);

    const Solution sol = solve(inst.milp);
    REQUIRE(sol.status == SolveStatus::Optimal);
    // the fixed queue at t=0 contributes exactly one waiting step
    CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-7));
    const ControlSet c = extract_controls(inst, sol.values);
    REQUIRE(c.pickups.size() == 1);
    CHECK(c.pickups[0].vehicle == 0);
    CHECK(c.pickups[0].origin == 0);
    CHECK(c.pickups[0].destination == 1);

    const FleetState s1 = extract_next_state(inst, sol.values);
    CHECK(s1.waiting(0, 1) == 0);
    // a one-step trip is in its arrival slot at step 1 and parks the step after
    CHECK(s1.parked_node(0) == -1);
    const auto [dest, theta] = s1.transit_target(0);
    CHECK(dest == 1);
    CHECK(theta == 0);
}

TEST_CASE("discharge runs at the cap when an outage pins the vehicle") {
    ModelParams p;
    p.prediction_steps = 2;
    p.fleet_size = 1;
    const Network net = line2();
    const FleetState s0 = make_state(net, 1, p);
    PredictionWindow w = empty_window(net, p);
    w.outage.row(0).setOnes();
    w.requirement.setConstant(0.009);
    const AmodInstance inst = assemble(s0, w, p, net);

    const Solution sol = solve(inst.milp);
    REQUIRE(sol.status == SolveStatus::Optimal);
    const ControlSet c = extract_controls(inst, sol.values);
    CHECK(c.discharge(0) == doctest::Approx(0.01).epsilon(1e-6));
    CHECK(c.delivered == doctest::Approx(0.009).epsilon(1e-6));
    CHECK(c.charge(0) == doctest::Approx(0.0));

    const FleetState s1 = extract_next_state(inst, sol.values);
    CHECK(s1.soc(0) == doctest::Approx(p.soc_init - 0.01).epsilon(1e-7));
}

TEST_CASE("charging while parked raises the state of charge by the rate") {
    ModelParams p;
    p.prediction_steps = 2;
    p.fleet_size = 1;
    p.soc_init = 0.5;
    const Network net = line2();
    const FleetState s0 = make_state(net, 1, p);
    PredictionWindow w = empty_window(net, p);
    const AmodInstance inst = assemble(s0, w, p, net);

    // force a full-rate charge at t=0 and solve the rest
    MilpInstance forced = inst.milp;
    forced.fix_col(inst.layout.chg_col(0, 0), p.charge_rate);
    const Solution sol = solve(forced);
    REQUIRE(sol.status == SolveStatus::Optimal);
    const FleetState s1 = extract_next_state(inst, sol.values);
    CHECK(s1.soc(0) == doctest::Approx(0.5 + p.charge_rate).epsilon(1e-9));
}

TEST_CASE("a departure leaves a countdown flag at the destination") {
    ModelParams p;
    p.prediction_steps = 3;
    p.fleet_size = 1;
    const Network net = build_network({{0, 0, 0, "a"}, {1, 11000, 0, "b"}}, 60.0, 6.0);
    REQUIRE(net.travel_steps(0, 1) == 2);
    FleetState s0 = make_state(net, 1, p);
    s0.waiting(0, 1) = 1;
    const AmodInstance inst = assemble(s0, empty_window(net, p), p, net);

    const Solution sol = solve(inst.milp);
    REQUIRE(sol.status == SolveStatus::Optimal);
    const FleetState s1 = extract_next_state(inst, sol.values);
    CHECK(s1.parked_node(0) == -1);
    const auto [dest, theta] = s1.transit_target(0);
    CHECK(dest == 1);
    CHECK(theta == 1);
}

TEST_CASE("charge and discharge on the same vehicle is rejected at extraction") {
    ModelParams p;
    p.prediction_steps = 2;
    p.fleet_size = 1;
    const Network net = line2();
    const FleetState s0 = make_state(net, 1, p);
    const AmodInstance inst = assemble(s0, empty_window(net, p), p, net);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(inst.milp.num_cols());
    for (int t = 0; t < 2; ++t) {
        x[inst.layout.park_col(0, 0, t)] = 1.0;
        x[inst.layout.soc_col(0, t)] = p.soc_init;
    }
    x[inst.layout.chg_col(0, 0)] = 0.005;
    x[inst.layout.dis_col(0, 0)] = 0.005;
    CHECK_THROWS_AS(extract_controls(inst, x), std::runtime_error);
}

TEST_CASE("near-integral binaries are rounded, distant ones rejected") {
    ModelParams p;
    p.prediction_steps = 2;
    p.fleet_size = 1;
    const Network net = line2();
    FleetState s0 = make_state(net, 1, p);
    s0.waiting(0, 1) = 1;
    const AmodInstance inst = assemble(s0, empty_window(net, p), p, net);

    const Solution sol = solve(inst.milp);
    REQUIRE(sol.status == SolveStatus::Optimal);
    Eigen::VectorXd x = sol.values;
    const int pick = inst.layout.pick_col(0, 0, 1, 0);
    REQUIRE(x[pick] > 0.5);
    x[pick] = 0.999995;
    const ControlSet c = extract_controls(inst, x);
    CHECK(c.pickups.size() == 1);

    x[pick] = 0.62;
    CHECK_THROWS_AS(extract_controls(inst, x), std::runtime_error);
}

TEST_CASE("assemble rejects malformed states") {
    ModelParams p;
    p.prediction_steps = 2;
    p.fleet_size = 2;
    const Network net = line2();
    const PredictionWindow w = empty_window(net, p);

    FleetState two_places = make_state(net, 2, p);
    two_places.parked(0, 0) = 1;
    two_places.parked(0, 1) = 1;
    CHECK_THROWS_AS(assemble(two_places, w, p, net), std::invalid_argument);

    FleetState diag = make_state(net, 2, p);
    diag.waiting(1, 1) = 3;
    CHECK_THROWS_AS(assemble(diag, w, p, net), std::invalid_argument);

    FleetState wrong_shape = make_state(net, 2, p);
    wrong_shape.waiting.resize(3, 3);
    wrong_shape.waiting.setZero();
    CHECK_THROWS_AS(assemble(wrong_shape, w, p, net), std::invalid_argument);
}

TEST_CASE("reference dynamics enforce control legality") {
    ModelParams p;
    p.prediction_steps = 3;
    p.fleet_size = 1;
    const Network net = line2();
    FleetState s0 = make_state(net, 1, p);
    const Eigen::MatrixXi no_arrivals = Eigen::MatrixXi::Zero(2, 2);

    ControlSet idle;
    idle.charge = Eigen::VectorXd::Zero(1);
    idle.discharge = Eigen::VectorXd::Zero(1);
    const FleetState s1 = propagate_step(s0, idle, no_arrivals, p, net);
    CHECK(s1.parked_node(0) == 0);
    CHECK(s1.soc(0) == doctest::Approx(p.soc_init));

    // dispatching from a node the vehicle is not at
    ControlSet wrong = idle;
    wrong.relocations.push_back({0, 1, 0});
    CHECK_THROWS_AS(propagate_step(s0, wrong, no_arrivals, p, net), std::invalid_argument);

    // picking up a passenger who is not in the queue
    ControlSet ghost = idle;
    ghost.pickups.push_back({0, 0, 1});
    CHECK_THROWS_AS(propagate_step(s0, ghost, no_arrivals, p, net), std::invalid_argument);

    // a dispatch below the energy floor
    FleetState drained = s0;
    drained.soc(0) = p.soc_min + 1e-4;
    ControlSet relo = idle;
    relo.relocations.push_back({0, 0, 1});
    CHECK_THROWS_AS(propagate_step(drained, relo, no_arrivals, p, net), std::invalid_argument);

    // charging beyond the rate cap
    ControlSet hot = idle;
    hot.charge(0) = p.charge_rate * 2.0;
    CHECK_THROWS_AS(propagate_step(s0, hot, no_arrivals, p, net), std::invalid_argument);
}

TEST_CASE("arrivals join the queue during propagation") {
    ModelParams p;
    p.prediction_steps = 2;
    p.fleet_size = 1;
    const Network net = line2();
    const FleetState s0 = make_state(net, 1, p);
    Eigen::MatrixXi arrivals = Eigen::MatrixXi::Zero(2, 2);
    arrivals(1, 0) = 2;
    ControlSet idle;
    idle.charge = Eigen::VectorXd::Zero(1);
    idle.discharge = Eigen::VectorXd::Zero(1);
    const FleetState s1 = propagate_step(s0, idle, arrivals, p, net);
    CHECK(s1.waiting(1, 0) == 2);
}

TEST_CASE("window solutions satisfy the published constraint set") {
    // one vehicle serving demand while a second sits on outage duty
    ModelParams p;
    p.prediction_steps = 4;
    p.fleet_size = 2;
    const Network net = triangle();
    FleetState s0 = make_state(net, 2, p);
    s0.parked(1, 0) = 0;
    s0.parked(1, 2) = 1;
    s0.waiting(0, 1) = 1;

    PredictionWindow w = empty_window(net, p);
    w.arrivals[1](1, 0) = 1;
    w.outage.row(2).setOnes();
    w.requirement.setConstant(0.008);
    const AmodInstance inst = assemble(s0, w, p, net);

    const Solution sol = solve(inst.milp);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(inst.milp.max_violation(sol.values) < 1e-6);

    const VariableLayout& L = inst.layout;
    for (int t = 0; t < 4; ++t) {
        for (int k = 0; k < 2; ++k) {
            // one-hot location
            double mass = 0.0;
            for (int i = 0; i < 3; ++i) {
                mass += sol.values[L.park_col(k, i, t)];
                for (int th = 0; th <= L.theta_cap(i); ++th)
                    mass += sol.values[L.move_col(k, i, th, t)];
            }
            CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
            // SOC window
            CHECK(sol.values[L.soc_col(k, t)] >= p.soc_min - 1e-9);
            CHECK(sol.values[L.soc_col(k, t)] <= p.soc_max + 1e-9);
            // locality: charging needs a powered parked node, discharging a dark one
            double powered = 0.0, dark = 0.0;
            for (int i = 0; i < 3; ++i) {
                const double u = sol.values[L.park_col(k, i, t)];
                (w.outage(i, t) ? dark : powered) += u;
            }
            CHECK(sol.values[L.chg_col(k, t)] <= p.charge_rate * powered + 1e-9);
            CHECK(sol.values[L.dis_col(k, t)] <= p.discharge_rate * dark + 1e-9);
        }
        // emergency cover with the conversion loss applied
        double g = 0.0;
        for (int k = 0; k < 2; ++k)
            g += sol.values[L.dis_col(k, t)];
        CHECK(p.v2b_efficiency * g >= w.requirement(t) - 1e-9);
    }
}
