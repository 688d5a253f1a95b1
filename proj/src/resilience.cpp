#include "saev/resilience.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace saev {

OutageMask outage_mask(const OutageSchedule& schedule, int nodes, int steps) {
    OutageMask out;
    out.mask = Eigen::MatrixXi::Zero(nodes, steps);
    for (std::size_t e = 0; e < schedule.events.size(); ++e) {
        const OutageEvent& ev = schedule.events[e];
        if (ev.node < 0 || ev.node >= nodes)
            throw std::invalid_argument("outage_mask: event names node " +
                                        std::to_string(ev.node) + " outside the network");
        if (ev.end_step <= ev.start_step)
            throw std::invalid_argument("outage_mask: event has an empty step range");
        const int a = std::max(0, ev.start_step);
        const int b = std::min(steps, ev.end_step);
        bool overlapped = false;
        for (int t = a; t < b; ++t) {
            if (out.mask(ev.node, t) != 0)
                overlapped = true;
            out.mask(ev.node, t) = 1;
        }
        if (overlapped) {
            std::ostringstream ss;
            ss << "outage event " << e << " overlaps an earlier event on node " << ev.node
               << "; the intervals were merged";
            out.warnings.push_back(ss.str());
        }
        if (ev.end_step > steps)
            out.warnings.push_back("outage event past the horizon was clipped at step " +
                                   std::to_string(steps));
    }
    return out;
}

double emergency_requirement(const OutageSchedule& schedule) {
    return std::max(0.0, schedule.q_demand - schedule.q_backup);
}

double building_step_demand(double annual_kwh_per_m2, double floor_area_m2,
                            double step_minutes, double battery_kwh) {
    if (annual_kwh_per_m2 < 0.0 || floor_area_m2 < 0.0)
        throw std::invalid_argument("building_step_demand: negative consumption or area");
    if (step_minutes <= 0.0 || battery_kwh <= 0.0)
        throw std::invalid_argument("building_step_demand: step and battery must be positive");
    const double steps_per_year = 365.0 * 24.0 * 60.0 / step_minutes;
    const double kwh_per_step = annual_kwh_per_m2 * floor_area_m2 / steps_per_year;
    return kwh_per_step / battery_kwh;
}

double generator_step_supply(double total_kw, double step_minutes, double battery_kwh) {
    if (total_kw < 0.0)
        throw std::invalid_argument("generator_step_supply: negative power");
    if (step_minutes <= 0.0 || battery_kwh <= 0.0)
        throw std::invalid_argument("generator_step_supply: step and battery must be positive");
    return total_kw * (step_minutes / 60.0) / battery_kwh;
}

int min_dischargers(double requirement, double discharge_rate, double v2b_efficiency) {
    if (discharge_rate <= 0.0 || v2b_efficiency <= 0.0)
        throw std::invalid_argument("min_dischargers: rates must be positive");
    if (requirement <= 0.0)
        return 0;
    const double per_vehicle = discharge_rate * v2b_efficiency;
    return static_cast<int>(std::ceil(requirement / per_vehicle - 1e-9));
}

CostBreakdown v2b_cost(const CostInputs& in, ReloCharging mode) {
    if (in.fleet_size < 0 || in.per_vehicle_eur < 0.0 || in.energy_kwh < 0.0 ||
        in.relocation_minutes < 0.0)
        throw std::invalid_argument("v2b_cost: negative input");
    if (in.battery_kwh <= 0.0 || in.step_minutes <= 0.0)
        throw std::invalid_argument("v2b_cost: battery and step must be positive");
    CostBreakdown out;
    out.install_eur = in.fleet_size * in.per_vehicle_eur;
    out.energy_eur = (in.price_eur_kwh + in.cycling_cost_eur_kwh) * in.energy_kwh;
    const double relo_time =
        mode == ReloCharging::PerMinute ? in.relocation_minutes
                                        : in.relocation_minutes / in.step_minutes;
    out.relocation_eur = relo_time * in.charge_rate * in.battery_kwh * in.price_eur_kwh;
    out.per_outage_eur = out.energy_eur + out.relocation_eur;
    return out;
}

double break_even_frequency(const CostBreakdown& v2b, double generator_annual_eur) {
    if (v2b.per_outage_eur <= 0.0)
        return v2b.install_eur <= generator_annual_eur
                   ? std::numeric_limits<double>::infinity()
                   : 0.0;
    return std::max(0.0, (generator_annual_eur - v2b.install_eur) / v2b.per_outage_eur);
}

} // namespace saev
