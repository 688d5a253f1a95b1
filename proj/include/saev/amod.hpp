#pragma once

#include "saev/milp.hpp"
#include "saev/scenario.hpp"

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace saev {

// Fleet snapshot at the start of a step. A vehicle is either parked at one
// node or in transit toward one node with a countdown of remaining steps.
struct FleetState {
    Eigen::MatrixXi waiting;               // node x node, queued passengers per pair
    Eigen::MatrixXi parked;                // vehicle x node, 0/1
    std::vector<Eigen::MatrixXi> transit;  // per vehicle: node x (max countdown + 1), 0/1
    Eigen::VectorXd soc;                   // per vehicle state of charge

    int num_nodes() const { return static_cast<int>(waiting.rows()); }
    int num_vehicles() const { return static_cast<int>(parked.rows()); }
    // Parked node, or -1 while in transit.
    int parked_node(int k) const;
    // Destination and remaining steps while in transit, or {-1, -1}.
    std::pair<int, int> transit_target(int k) const;
    // Checks the single-location invariant and SOC bounds; throws naming the
    // vehicle on violation.
    void validate(const Network& net, const ModelParams& params) const;
};

// Blank state with every queue empty and every vehicle parked.
FleetState make_state(const Network& net, int vehicles, const ModelParams& params);

// First-step decisions pulled out of a window solution.
struct Dispatch {
    int vehicle = 0;
    int origin = 0;
    int destination = 0;
};

struct ControlSet {
    std::vector<Dispatch> pickups;
    std::vector<Dispatch> relocations;
    Eigen::VectorXd charge;    // per vehicle, SOC added this step
    Eigen::VectorXd discharge; // per vehicle, SOC fed to the building
    double delivered = 0.0;    // energy reaching the building, SOC units
};

// Exogenous data for one prediction window of T steps.
struct PredictionWindow {
    std::vector<Eigen::MatrixXi> arrivals; // T x (node x node) new requests
    Eigen::MatrixXi outage;                // node x T, 1 while the building at that node is dark
    Eigen::VectorXd requirement;           // per step, building shortfall in SOC units
    Eigen::VectorXd price;                 // per step electricity price, EUR/kWh

    int steps() const { return static_cast<int>(arrivals.size()); }
};

// Column numbering for one window MILP. Families, in column order: wait
// (queued passengers), move (transit countdown flags), park, soc, chg, dis,
// pick, relo. Every family spans all T steps; step 0 is fixed to the state.
class VariableLayout {
public:
    VariableLayout() = default;
    VariableLayout(const Network& net, int vehicles, int steps);

    int nodes() const { return nodes_; }
    int vehicles() const { return vehicles_; }
    int steps() const { return steps_; }
    int pairs() const { return nodes_ * (nodes_ - 1); }
    int theta_cap(int node) const { return theta_cap_[node]; }
    int max_theta_cap() const { return max_theta_cap_; }
    int total_cols() const { return total_; }

    int pair_index(int i, int j) const;
    int wait_col(int i, int j, int t) const;
    int move_col(int k, int i, int theta, int t) const;
    int park_col(int k, int i, int t) const;
    int soc_col(int k, int t) const;
    int chg_col(int k, int t) const;
    int dis_col(int k, int t) const;
    int pick_col(int k, int i, int j, int t) const;
    int relo_col(int k, int i, int j, int t) const;

    enum class Family { Wait, Move, Park, Soc, Chg, Dis, Pick, Relo };
    struct VarRef {
        Family family;
        int vehicle = -1; // k, or -1 for wait
        int node_a = -1;  // i (origin for pair families)
        int node_b = -1;  // j (destination), -1 where unused
        int theta = -1;   // countdown slot, move family only
        int step = 0;     // t
    };
    VarRef decode(int col) const;
    std::string name(int col) const;

private:
    int nodes_ = 0;
    int vehicles_ = 0;
    int steps_ = 0;
    int max_theta_cap_ = 0;
    std::vector<int> theta_cap_;  // per node
    std::vector<int> node_off_;   // slot offset of node i inside one vehicle's move block
    int move_per_vehicle_ = 0;    // total countdown slots over all nodes
    int wait_base_ = 0, move_base_ = 0, park_base_ = 0, soc_base_ = 0;
    int chg_base_ = 0, dis_base_ = 0, pick_base_ = 0, relo_base_ = 0;
    int total_ = 0;
};

// One assembled window problem, self-contained: carries everything needed
// to extract controls, audit dynamics, or solve by exhaustive search.
struct AmodInstance {
    MilpInstance milp;
    VariableLayout layout;
    FleetState state0;
    PredictionWindow window;
    ModelParams params;
    Eigen::MatrixXi travel; // node x node, steps
};

// Builds the window MILP from the current state and exogenous forecast.
// Throws std::invalid_argument on malformed state (wrong shapes, queued
// passengers on the diagonal, vehicle in two places).
AmodInstance assemble(const FleetState& state, const PredictionWindow& window,
                      const ModelParams& params, const Network& net);

// Reads the first-step decisions out of a solution vector. Throws if
// binaries are further than `int_tol` from integral or a vehicle both
// charges and discharges.
ControlSet extract_controls(const AmodInstance& inst, const Eigen::VectorXd& x,
                            double int_tol = 1e-5);

// Reads the step-1 state out of a solution vector, with the same rounding
// guards plus a one-hot location check per vehicle.
FleetState extract_next_state(const AmodInstance& inst, const Eigen::VectorXd& x,
                              double int_tol = 1e-5);

// Reference dynamics: advances a state by one step under the given controls
// and realized arrivals. Independent of any MILP solution, used to audit
// solver handoffs. Throws on controls that are illegal from this state.
FleetState propagate_step(const FleetState& state, const ControlSet& controls,
                          const Eigen::MatrixXi& arrivals, const ModelParams& params,
                          const Network& net);

} // namespace saev
