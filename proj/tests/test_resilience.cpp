#include "doctest.h"

#include "saev/resilience.hpp"

#include <cmath>
#include <limits>

using namespace saev;

TEST_CASE("building demand per step from annual intensity") {
    // 228.2 kWh/m2/yr over 120000 m2, 6 minute steps, 85 kWh packs
    const double soc = building_step_demand(228.2, 120000.0, 6.0, 85.0);
    CHECK(soc * 85.0 == doctest::Approx(312.6).epsilon(3.2e-4));
    CHECK(soc == doctest::Approx(3.678).epsilon(2.8e-4));
}

TEST_CASE("generator bank supply per step") {
    // six 500 kW generators
    const double soc = generator_step_supply(3000.0, 6.0, 85.0);
    CHECK(soc == doctest::Approx(300.0 / 85.0).epsilon(1e-12));
    CHECK(soc == doctest::Approx(3.5294).epsilon(1e-4));
}

TEST_CASE("emergency requirement is the shortfall, floored at zero") {
    OutageSchedule sched;
    sched.q_demand = 3.678;
    sched.q_backup = 3.5294;
    CHECK(emergency_requirement(sched) == doctest::Approx(0.1486).epsilon(1e-3));

    sched.q_demand = 1.0;
    sched.q_backup = 2.0;
    CHECK(emergency_requirement(sched) == 0.0);
}

TEST_CASE("fewest dischargers covering the shortfall") {
    CHECK(min_dischargers(0.1486, 0.01, 0.9) == 17);
    CHECK(min_dischargers(0.0, 0.01, 0.9) == 0);
    CHECK(min_dischargers(0.009, 0.01, 0.9) == 1);
    // exact multiples stay exact instead of rounding up one vehicle
    CHECK(min_dischargers(0.018, 0.01, 0.9) == 2);
}

TEST_CASE("cost breakdown matches the reference deployment") {
    CostInputs in;
    in.fleet_size = 30;
    in.per_vehicle_eur = 45.0;
    in.energy_kwh = 139.74;
    in.price_eur_kwh = 0.1292;
    in.cycling_cost_eur_kwh = 0.0797;
    in.relocation_minutes = 654.0;
    in.charge_rate = 0.01;
    in.battery_kwh = 85.0;
    in.step_minutes = 6.0;

    const CostBreakdown cb = v2b_cost(in);
    CHECK(cb.install_eur == doctest::Approx(1350.0).epsilon(1e-12));
    CHECK(cb.energy_eur == doctest::Approx(29.19).epsilon(0.01 / 29.19));
    CHECK(cb.relocation_eur == doctest::Approx(71.82).epsilon(0.01 / 71.82));
    CHECK(cb.per_outage_eur == doctest::Approx(cb.energy_eur + cb.relocation_eur).epsilon(1e-12));

    const double f_star = break_even_frequency(cb, 13367.0);
    CHECK(f_star >= 118.0);
    CHECK(f_star <= 122.0);

    // the per-step reading of the relocation charge divides the minutes out
    const CostBreakdown per_step = v2b_cost(in, ReloCharging::PerStep);
    CHECK(per_step.relocation_eur ==
          doctest::Approx(cb.relocation_eur / in.step_minutes).epsilon(1e-12));
}

TEST_CASE("annualized cost identity and break-even edges") {
    CostInputs in;
    in.fleet_size = 10;
    in.per_vehicle_eur = 45.0;
    in.energy_kwh = 50.0;
    in.relocation_minutes = 100.0;
    const CostBreakdown cb = v2b_cost(in);

    for (const double f : {0.0, 1.0, 7.5, 121.0})
        CHECK(cb.v2b_annual_eur(f) ==
              doctest::Approx(cb.install_eur + f * cb.per_outage_eur).epsilon(1e-12));
    CHECK(cb.v2b_annual_eur(0.0) == doctest::Approx(cb.install_eur).epsilon(1e-12));

    // f* falls when outages get dearer and rises with generator cost
    const double base = break_even_frequency(cb, 10000.0);
    CostBreakdown dearer = cb;
    dearer.per_outage_eur *= 2.0;
    CHECK(break_even_frequency(dearer, 10000.0) < base);
    CHECK(break_even_frequency(cb, 20000.0) > base);

    // a generator cheaper than the install fee dominates outright
    CHECK(break_even_frequency(cb, cb.install_eur * 0.5) == 0.0);

    // with no per-outage cost the cheaper install wins at every frequency
    CostBreakdown free_outage = cb;
    free_outage.per_outage_eur = 0.0;
    CHECK(std::isinf(break_even_frequency(free_outage, cb.install_eur * 2.0)));
}

TEST_CASE("outage mask clips, merges and reports") {
    OutageSchedule sched;
    sched.events.push_back({1, 2, 5});
    sched.events.push_back({1, 4, 8});   // overlaps the first
    sched.events.push_back({0, 10, 99}); // runs past the horizon

    const OutageMask om = outage_mask(sched, 3, 12);
    REQUIRE(om.mask.rows() == 3);
    REQUIRE(om.mask.cols() == 12);
    for (int t = 0; t < 12; ++t) {
        CHECK(om.mask(1, t) == ((t >= 2 && t < 8) ? 1 : 0));
        CHECK(om.mask(0, t) == (t >= 10 ? 1 : 0));
        CHECK(om.mask(2, t) == 0);
    }
    CHECK(!om.warnings.empty());
}

TEST_CASE("empty schedule masks nothing") {
    const OutageMask om = outage_mask(OutageSchedule{}, 2, 4);
    CHECK(om.mask.isZero());
    CHECK(om.warnings.empty());
}
