#pragma once

#include "saev/scenario.hpp"

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace saev {

struct OutageMask {
    Eigen::MatrixXi mask; // node x step, 1 while dark
    std::vector<std::string> warnings;
};

// Expands the event list into a per-node, per-step table over `steps` steps.
// Overlapping events on one node merge with a warning; events past the
// horizon are clipped.
OutageMask outage_mask(const OutageSchedule& schedule, int nodes, int steps);

// Backup power the fleet must deliver at an outage step, in SOC units: the
// building's demand net of on-site generation, floored at zero.
double emergency_requirement(const OutageSchedule& schedule);

// Converts a building's annual consumption into per-step demand, SOC units.
double building_step_demand(double annual_kwh_per_m2, double floor_area_m2,
                            double step_minutes, double battery_kwh);

// Converts installed generator power into per-step supply, SOC units.
double generator_step_supply(double total_kw, double step_minutes, double battery_kwh);

// Fewest vehicles that can cover the shortfall each step.
int min_dischargers(double requirement, double discharge_rate, double v2b_efficiency);

// Annualized cost model comparing fleet backup against a generator bank.
struct CostInputs {
    int fleet_size = 30;
    double per_vehicle_eur = 45.0;       // annualized V2B hardware per vehicle
    double energy_kwh = 0.0;             // energy delivered over one outage
    double price_eur_kwh = 0.1292;
    double cycling_cost_eur_kwh = 0.0797;
    double relocation_minutes = 0.0;     // fleet time spent repositioning for the outage
    double charge_rate = 0.01;           // SOC per step, to price the recovery charge
    double battery_kwh = 85.0;
    double step_minutes = 6.0;
    double generator_annual_eur = 0.0;   // yearly cost of the generator bank
};

struct CostBreakdown {
    double install_eur = 0.0;      // fleet_size x per_vehicle_eur, paid yearly
    double energy_eur = 0.0;       // delivered energy valued at price + cycling
    double relocation_eur = 0.0;   // recovery charge for the repositioning time
    double per_outage_eur = 0.0;   // energy + relocation
    double v2b_annual_eur(double outages_per_year) const {
        return install_eur + outages_per_year * per_outage_eur;
    }
};

// The relocation term charges the time at the charging rate. Read literally
// the time enters in minutes; a per-step reading divides by the step length
// first. Both are available; the literal form is the default.
enum class ReloCharging { PerMinute, PerStep };

CostBreakdown v2b_cost(const CostInputs& in, ReloCharging mode = ReloCharging::PerMinute);

// Outage frequency per year at which the fleet and the generator bank cost
// the same; fleet is cheaper below it. Infinite when the per-outage cost is
// zero and install already beats the bank.
double break_even_frequency(const CostBreakdown& v2b, double generator_annual_eur);

} // namespace saev
