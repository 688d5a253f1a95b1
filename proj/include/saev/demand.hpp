#pragma once

#include "saev/scenario.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace saev {

// Arrival rates per origin-destination pair and time-of-day bucket, in
// expected passengers per step.
struct RateMatrix {
    std::vector<Eigen::MatrixXd> per_bucket; // one NxN matrix per bucket
    int bucket_minutes = 30;

    int buckets() const { return static_cast<int>(per_bucket.size()); }
    int nodes() const { return per_bucket.empty() ? 0 : static_cast<int>(per_bucket[0].rows()); }
    // Minutes of day the table covers (buckets * bucket_minutes).
    double coverage_minutes() const { return buckets() * static_cast<double>(bucket_minutes); }
    // Expected passenger count if sampled over `steps` steps of length
    // `step_minutes` from time zero.
    double expected_total(int steps, double step_minutes) const;
    // Scales all rates so the expected total over the given span hits
    // `target`; no-op when target <= 0.
    void scale_to_target(double target, int steps, double step_minutes);
};

// Realized passenger arrivals per step: count of new requests from origin i
// to destination j at the start of step t.
struct ArrivalMatrix {
    std::vector<Eigen::MatrixXi> per_step; // one NxN matrix per step

    int steps() const { return static_cast<int>(per_step.size()); }
    int nodes() const { return per_step.empty() ? 0 : static_cast<int>(per_step[0].rows()); }
    int total() const;
    const Eigen::MatrixXi& at(int t) const { return per_step.at(t); }
};

// Maximum-likelihood rates from observed trips: count per (origin,
// destination, bucket) divided by the steps that bucket spans.
RateMatrix estimate_rates(const std::vector<TripRecord>& trips, int nodes,
                          int bucket_minutes, double step_minutes);

// Poisson draws per cell and step, reproducible per (seed, cell) through the
// counter generator. Steps map to buckets by time of day; the horizon must
// not run past the table's coverage.
ArrivalMatrix sample_arrivals(const RateMatrix& rates, int steps, double step_minutes,
                              std::uint64_t seed);

// Deterministic replay: each trip lands on the step containing its departure
// time. A trip past the horizon is an error naming the offenders.
ArrivalMatrix replay_arrivals(const std::vector<TripRecord>& trips, int nodes, int steps,
                              double step_minutes);

// Delimited persistence, nonzero cells only, sorted by (step, origin,
// destination). Columns: origin,destination,step,count.
void write_arrivals(const ArrivalMatrix& arrivals, const std::string& path);
ArrivalMatrix read_arrivals(const std::string& path, int nodes, int steps);

// Builds the arrival table a scenario asks for: sample, replay or file mode,
// with optional passenger-target scaling (sample scales rates; replay takes
// a seeded subsample of exact size).
ArrivalMatrix realize_demand(const Scenario& sc, std::uint64_t seed);

// Rates are also the weight source for demand-weighted fleet placement.
Eigen::VectorXd origin_weights(const RateMatrix& rates, int steps, double step_minutes);

} // namespace saev
