#include "saev/demand.hpp"

#include "saev/prng.hpp"
#include "saev/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace saev {

namespace {

int bucket_of_step(int step, double step_minutes, int bucket_minutes, int buckets) {
    const double minute = step * step_minutes;
    const int b = static_cast<int>(minute / bucket_minutes + 1e-9);
    if (b < 0 || b >= buckets)
        throw std::invalid_argument("demand horizon runs past the rate table coverage (step " +
                                    std::to_string(step) + ")");
    return b;
}

} // namespace

double RateMatrix::expected_total(int steps, double step_minutes) const {
    double sum = 0.0;
    for (int t = 0; t < steps; ++t)
        sum += per_bucket[bucket_of_step(t, step_minutes, bucket_minutes, buckets())].sum();
    return sum;
}

void RateMatrix::scale_to_target(double target, int steps, double step_minutes) {
    if (target <= 0.0)
        return;
    const double expected = expected_total(steps, step_minutes);
    if (expected <= 0.0)
        throw std::invalid_argument("cannot scale an all-zero rate table to a passenger target");
    const double factor = target / expected;
    for (auto& m : per_bucket)
        m *= factor;
}

int ArrivalMatrix::total() const {
    int sum = 0;
    for (const auto& m : per_step)
        sum += m.sum();
    return sum;
}

RateMatrix estimate_rates(const std::vector<TripRecord>& trips, int nodes,
                          int bucket_minutes, double step_minutes) {
    if (trips.empty())
        throw std::invalid_argument("estimate_rates: no trips to fit rates from");
    if (nodes < 2)
        throw std::invalid_argument("estimate_rates: need at least two nodes");
    if (bucket_minutes <= 0)
        throw std::invalid_argument("estimate_rates: bucket_minutes must be positive");
    const double steps_per_bucket = bucket_minutes / step_minutes;
    if (std::abs(steps_per_bucket - std::round(steps_per_bucket)) > 1e-9)
        throw std::invalid_argument("estimate_rates: bucket must be a whole number of steps");
    const int buckets = static_cast<int>(std::round(1440.0 / bucket_minutes));
    if (std::abs(buckets * static_cast<double>(bucket_minutes) - 1440.0) > 1e-9)
        throw std::invalid_argument("estimate_rates: buckets must tile a 24 hour day");

    RateMatrix rates;
    rates.bucket_minutes = bucket_minutes;
    rates.per_bucket.assign(buckets, Eigen::MatrixXd::Zero(nodes, nodes));
    for (const auto& trip : trips) {
        const double minute = trip.departure_seconds / 60.0;
        const int b = static_cast<int>(minute / bucket_minutes);
        if (b < 0 || b >= buckets)
            throw std::invalid_argument("estimate_rates: departure at minute " +
                                        std::to_string(minute) + " is outside the 24 hour day");
        if (trip.origin == trip.destination)
            throw std::invalid_argument("estimate_rates: intra-node trip survived filtering");
        rates.per_bucket[b](trip.origin, trip.destination) += 1.0;
    }
    for (auto& m : rates.per_bucket)
        m /= steps_per_bucket;
    return rates;
}

ArrivalMatrix sample_arrivals(const RateMatrix& rates, int steps, double step_minutes,
                              std::uint64_t seed) {
    const int n = rates.nodes();
    if (n < 2)
        throw std::invalid_argument("sample_arrivals: empty rate table");
    ArrivalMatrix out;
    out.per_step.assign(steps, Eigen::MatrixXi::Zero(n, n));
    for (int t = 0; t < steps; ++t) {
        const auto& lam = rates.per_bucket[bucket_of_step(t, step_minutes, rates.bucket_minutes,
                                                          rates.buckets())];
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i == j || lam(i, j) == 0.0)
                    continue;
                const std::uint64_t counter =
                    (static_cast<std::uint64_t>(i) * n + j) * static_cast<std::uint64_t>(steps) + t;
                out.per_step[t](i, j) = counter_poisson(lam(i, j), seed, counter);
            }
        }
    }
    return out;
}

ArrivalMatrix replay_arrivals(const std::vector<TripRecord>& trips, int nodes, int steps,
                              double step_minutes) {
    ArrivalMatrix out;
    out.per_step.assign(steps, Eigen::MatrixXi::Zero(nodes, nodes));
    std::vector<std::string> offenders;
    for (const auto& trip : trips) {
        const int t = static_cast<int>(trip.departure_seconds / (step_minutes * 60.0));
        if (t < 0 || t >= steps) {
            std::ostringstream ss;
            ss << trip.origin << "->" << trip.destination << " at " << trip.departure_seconds << "s";
            offenders.push_back(ss.str());
            continue;
        }
        out.per_step[t](trip.origin, trip.destination) += 1;
    }
    if (!offenders.empty()) {
        std::ostringstream ss;
        ss << "replay_arrivals: " << offenders.size() << " trip(s) fall outside the horizon:";
        for (std::size_t i = 0; i < offenders.size() && i < 5; ++i)
            ss << ' ' << offenders[i];
        if (offenders.size() > 5)
            ss << " ...";
        throw std::invalid_argument(ss.str());
    }
    return out;
}

void write_arrivals(const ArrivalMatrix& arrivals, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw ParseError("cannot write arrivals file: " + path);
    out << "origin,destination,step,count\n";
    for (int t = 0; t < arrivals.steps(); ++t)
        for (int i = 0; i < arrivals.nodes(); ++i)
            for (int j = 0; j < arrivals.nodes(); ++j)
                if (arrivals.per_step[t](i, j) != 0)
                    out << i << ',' << j << ',' << t << ',' << arrivals.per_step[t](i, j) << '\n';
}

ArrivalMatrix read_arrivals(const std::string& path, int nodes, int steps) {
    std::vector<std::string> columns;
    const auto rows = read_table(path, ',', columns);
    const int c_o = column_index(columns, "origin", path);
    const int c_d = column_index(columns, "destination", path);
    const int c_t = column_index(columns, "step", path);
    const int c_n = column_index(columns, "count", path);
    ArrivalMatrix out;
    out.per_step.assign(steps, Eigen::MatrixXi::Zero(nodes, nodes));
    int lineno = 1;
    for (const auto& r : rows) {
        ++lineno;
        const std::string where = path + ":" + std::to_string(lineno);
        const int o = static_cast<int>(parse_long(r[c_o], where));
        const int d = static_cast<int>(parse_long(r[c_d], where));
        const int t = static_cast<int>(parse_long(r[c_t], where));
        const int c = static_cast<int>(parse_long(r[c_n], where));
        if (o < 0 || o >= nodes || d < 0 || d >= nodes)
            throw ParseError(where + ": node outside the network");
        if (o == d)
            throw ParseError(where + ": intra-node arrival");
        if (t < 0 || t >= steps)
            throw ParseError(where + ": step outside the horizon");
        if (c < 0)
            throw ParseError(where + ": negative count");
        out.per_step[t](o, d) += c;
    }
    return out;
}

ArrivalMatrix realize_demand(const Scenario& sc, std::uint64_t seed) {
    const int n = sc.network.size();
    const int L = sc.params.schedule_steps;
    switch (sc.demand.mode) {
    case DemandMode::File:
        return read_arrivals(sc.demand.arrivals_file, n, L);
    case DemandMode::Replay: {
        auto loaded = load_trips(sc.demand.trips_file, sc.network);
        std::vector<TripRecord> trips = std::move(loaded.trips);
        const double target = sc.demand.passenger_target;
        if (target > 0.0 && target < static_cast<double>(trips.size())) {
            // Seeded subsample of exact size: order trips by a per-trip hash
            // and keep the smallest. Stable under reordering of the input.
            std::vector<std::pair<std::uint64_t, std::size_t>> keyed(trips.size());
            for (std::size_t idx = 0; idx < trips.size(); ++idx)
                keyed[idx] = {counter_hash(seed, idx), idx};
            std::sort(keyed.begin(), keyed.end());
            std::vector<TripRecord> kept;
            kept.reserve(static_cast<std::size_t>(target));
            for (std::size_t idx = 0; idx < static_cast<std::size_t>(target); ++idx)
                kept.push_back(trips[keyed[idx].second]);
            trips = std::move(kept);
        }
        return replay_arrivals(trips, n, L, sc.params.step_minutes);
    }
    case DemandMode::Sample: {
        auto loaded = load_trips(sc.demand.trips_file, sc.network);
        RateMatrix rates = estimate_rates(loaded.trips, n, sc.demand.bucket_minutes,
                                          sc.params.step_minutes);
        rates.scale_to_target(sc.demand.passenger_target, L, sc.params.step_minutes);
        return sample_arrivals(rates, L, sc.params.step_minutes, seed);
    }
    }
    throw std::logic_error("realize_demand: unhandled demand mode");
}

Eigen::VectorXd origin_weights(const RateMatrix& rates, int steps, double step_minutes) {
    const int n = rates.nodes();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    for (int t = 0; t < steps; ++t) {
        const auto& lam = rates.per_bucket[bucket_of_step(t, step_minutes, rates.bucket_minutes,
                                                          rates.buckets())];
        w += lam.rowwise().sum();
    }
    return w;
}

} // namespace saev
