#include "doctest.h"

#include "saev/milp.hpp"

#include <stdexcept>
#include <vector>

using namespace saev;

namespace {

// min -x - y  s.t.  x + y <= 1,  x,y binary
MilpInstance knapsack2() {
    MilpInstance m;
    const int x = m.add_col(VarKind::Binary, 0.0, 1.0, -1.0, "x");
    const int y = m.add_col(VarKind::Binary, 0.0, 1.0, -1.0, "y");
    m.add_row("cap", RowSense::LE, 1.0, {{x, 1.0}, {y, 1.0}});
    return m;
}

} // namespace

TEST_CASE("columns and rows are stored as declared") {
    const MilpInstance m = knapsack2();
    CHECK(m.num_cols() == 2);
    CHECK(m.num_rows() == 1);
    CHECK(m.col_name[0] == "x");
    CHECK(m.kind[1] == VarKind::Binary);
    CHECK(m.cost[0] == -1.0);
    CHECK(m.rhs[0] == 1.0);
    CHECK(m.row_name[0] == "cap");
}

TEST_CASE("duplicate columns within a row are rejected") {
    MilpInstance m;
    const int x = m.add_col(VarKind::Continuous, 0.0, 1.0, 0.0, "x");
    CHECK_THROWS_AS(m.add_row("bad", RowSense::EQ, 0.0, {{x, 1.0}, {x, 2.0}}),
                    std::invalid_argument);
}

TEST_CASE("zero coefficients are dropped from rows") {
    MilpInstance m;
    const int x = m.add_col(VarKind::Continuous, 0.0, 1.0, 0.0, "x");
    const int y = m.add_col(VarKind::Continuous, 0.0, 1.0, 0.0, "y");
    m.add_row("r", RowSense::LE, 1.0, {{x, 0.0}, {y, 2.0}});
    CHECK(m.col_index.size() == 1);
    CHECK(m.coeff[0] == 2.0);
}

TEST_CASE("fixing a column pins both bounds") {
    MilpInstance m = knapsack2();
    m.fix_col(0, 1.0);
    CHECK(m.lower[0] == 1.0);
    CHECK(m.upper[0] == 1.0);
}

TEST_CASE("row activity and objective are plain dot products") {
    const MilpInstance m = knapsack2();
    const Eigen::VectorXd x = (Eigen::VectorXd(2) << 1.0, 0.0).finished();
    CHECK(m.row_activity(0, x) == doctest::Approx(1.0));
    CHECK(m.objective_value(x) == doctest::Approx(-1.0));
}

TEST_CASE("violation scan catches bounds, integrality and rows") {
    const MilpInstance m = knapsack2();
    const Eigen::VectorXd ok = (Eigen::VectorXd(2) << 1.0, 0.0).finished();
    CHECK(m.max_violation(ok) == doctest::Approx(0.0));

    const Eigen::VectorXd frac = (Eigen::VectorXd(2) << 0.5, 0.0).finished();
    CHECK(m.max_violation(frac) >= 0.5);

    const Eigen::VectorXd over = (Eigen::VectorXd(2) << 1.0, 1.0).finished();
    CHECK(m.max_violation(over) >= 1.0); // row cap exceeded by 1

    MilpInstance b;
    b.add_col(VarKind::Continuous, 0.2, 0.8, 0.0, "soc");
    const Eigen::VectorXd low = (Eigen::VectorXd(1) << 0.1).finished();
    CHECK(b.max_violation(low) == doctest::Approx(0.1));
}

TEST_CASE("senses evaluate on the correct side") {
    MilpInstance m;
    const int x = m.add_col(VarKind::Continuous, 0.0, 10.0, 0.0, "x");
    m.add_row("ge", RowSense::GE, 2.0, {{x, 1.0}});
    m.add_row("eq", RowSense::EQ, 5.0, {{x, 1.0}});
    const Eigen::VectorXd v = (Eigen::VectorXd(1) << 5.0).finished();
    CHECK(m.max_violation(v) == doctest::Approx(0.0));
    const Eigen::VectorXd w = (Eigen::VectorXd(1) << 1.0).finished();
    CHECK(m.max_violation(w) == doctest::Approx(4.0)); // eq misses by 4, ge by 1
}
