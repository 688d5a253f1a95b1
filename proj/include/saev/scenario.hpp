#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace saev {

struct Node {
    int id = 0;
    double x = 0.0; // meters, planar
    double y = 0.0;
    std::string label;
};

// Station network over demand-cluster centroids. Travel times are whole
// steps, at least 1 between distinct nodes, derived from straight-line
// distance at a constant fleet speed.
class Network {
public:
    Network() = default;
    Network(std::vector<Node> nodes, Eigen::MatrixXi travel_steps,
            Eigen::MatrixXd distance_km);

    int size() const { return static_cast<int>(nodes_.size()); }
    const std::vector<Node>& nodes() const { return nodes_; }
    const Node& node(int i) const { return nodes_.at(i); }

    // Steps to move from node `from` to node `to`. Zero on the diagonal.
    int travel_steps(int from, int to) const { return travel_steps_(from, to); }
    double distance_km(int from, int to) const { return distance_km_(from, to); }
    const Eigen::MatrixXi& travel_table() const { return travel_steps_; }

    // Longest inbound trip to node i, in steps.
    int max_inbound_steps(int i) const;
    // Ring count of the arrival countdown at node i: slots 0..theta_cap(i).
    int theta_cap(int i) const { return max_inbound_steps(i) - 1; }
    int max_travel_steps() const;

    // Nearest node by Euclidean distance to a planar point.
    int nearest(double x, double y) const;

private:
    std::vector<Node> nodes_;
    Eigen::MatrixXi travel_steps_;
    Eigen::MatrixXd distance_km_;
};

// One passenger request after snapping to the network.
struct TripRecord {
    int origin = 0;
    int destination = 0;
    double departure_seconds = 0.0;
};

struct TripLoadResult {
    std::vector<TripRecord> trips;
    int dropped_walk = 0;  // rows whose mode was walking
    int dropped_intra = 0; // rows that snapped to a single node
};

// Operating parameters of the fleet model. SOC quantities are fractions of
// one battery; money is EUR; rates are SOC per step.
struct ModelParams {
    double soc_max = 1.0;
    double soc_min = 0.2;
    double soc_init = 0.8;
    double drive_rate = 0.0092;      // SOC burned per step in motion
    double charge_rate = 0.01;       // max SOC gained per parked step
    double discharge_rate = 0.01;    // max SOC fed to the building per parked step
    double v2b_efficiency = 0.9;     // battery-to-building conversion
    double relocation_weight = 0.01; // objective weight on relocation time
    double energy_weight = 0.001;    // objective weight on energy cost
    double step_minutes = 6.0;
    int prediction_steps = 10;       // MILP lookahead T
    int schedule_steps = 240;        // scheduling horizon L
    double battery_kwh = 85.0;
    double price_eur_kwh = 0.1292;          // electricity price, constant fallback
    std::vector<double> price_schedule;      // optional per-step price, overrides the constant
    double cycling_cost_eur_kwh = 0.07974;   // battery wear per discharged kWh
    int fleet_size = 30;

    // Price at an absolute schedule step; the schedule is held at its last
    // value beyond its end.
    double price_at(int step) const;
    void validate() const; // throws std::invalid_argument on nonsense
};

// A building outage interval on one node, steps [start_step, end_step).
struct OutageEvent {
    int node = 0;
    int start_step = 0;
    int end_step = 0;
};

struct OutageSchedule {
    std::vector<OutageEvent> events;
    double q_demand = 0.0; // building demand per outage step, SOC units
    double q_backup = 0.0; // on-site generator supply per outage step, SOC units
    bool empty() const { return events.empty(); }
};

enum class ValidationStatus { Ok, Warn, Fail };

struct ValidationReport {
    ValidationStatus status = ValidationStatus::Ok;
    std::vector<std::string> messages;
    // Node pairs whose travel time reaches the prediction horizon; trips
    // between them cannot complete inside one MILP window.
    std::vector<std::pair<int, int>> hazard_pairs;
};

enum class DemandMode { Sample, Replay, File };
enum class PlacementPolicy { Uniform, DemandWeighted, Explicit };

struct DemandConfig {
    DemandMode mode = DemandMode::Sample;
    std::string trips_file;    // sample and replay modes
    std::string arrivals_file; // file mode
    int bucket_minutes = 30;
    double passenger_target = 0.0; // 0 disables scaling
};

struct FleetConfig {
    PlacementPolicy placement = PlacementPolicy::Uniform;
    std::vector<int> positions; // explicit mode, one node per vehicle
};

// Everything a run needs, loaded from one config file plus the data files it
// references.
struct Scenario {
    Network network;
    ModelParams params;
    OutageSchedule outage;
    DemandConfig demand;
    FleetConfig fleet;
    double speed_kmh = 60.0;
    std::string config_dir; // directory of the config file, for relative paths

    // Fingerprint of network + params + demand + fleet; `full` also covers
    // the outage schedule. Comparable runs must share the base fingerprint.
    std::uint64_t base_fingerprint() const;
    std::uint64_t full_fingerprint() const;
};

std::vector<Node> load_nodes(const std::string& path);
Network build_network(const std::vector<Node>& nodes, double speed_kmh,
                      double step_minutes);
TripLoadResult load_trips(const std::string& path, const Network& net);
ValidationReport validate_scenario(const ModelParams& params, const Network& net,
                                   const OutageSchedule& outage);

// Strict INI-style config: unknown sections or keys are errors. `overrides`
// are section.key=value pairs applied after the file is read.
Scenario load_scenario(const std::string& path,
                       const std::vector<std::string>& overrides = {});

// Applies one section.key=value override to an already-loaded scenario.
void apply_override(Scenario& sc, const std::string& assignment);

} // namespace saev
