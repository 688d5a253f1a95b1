#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace saev {

enum class VarKind { Continuous, Binary };
enum class RowSense { LE, EQ, GE };

// Solver-agnostic mixed-integer program: minimize cost'x subject to row
// constraints and column bounds. Rows are stored compressed in insertion
// order; zero coefficients are never stored.
struct MilpInstance {
    // columns
    std::vector<VarKind> kind;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<double> cost;
    std::vector<std::string> col_name;
    // rows, CSR
    std::vector<RowSense> sense;
    std::vector<double> rhs;
    std::vector<std::string> row_name;
    std::vector<int> row_start{0};
    std::vector<int> col_index;
    std::vector<double> coeff;

    int num_cols() const { return static_cast<int>(kind.size()); }
    int num_rows() const { return static_cast<int>(sense.size()); }
    int num_nonzeros() const { return static_cast<int>(coeff.size()); }

    int add_col(VarKind k, double lb, double ub, double obj, std::string name) {
        kind.push_back(k);
        lower.push_back(lb);
        upper.push_back(ub);
        cost.push_back(obj);
        col_name.push_back(std::move(name));
        return num_cols() - 1;
    }

    // Terms with zero coefficient are dropped; duplicate columns in one row
    // are a caller bug and rejected.
    int add_row(std::string name, RowSense s, double rhs_value,
                const std::vector<std::pair<int, double>>& terms);

    // Pins a column to a constant (state handoff into the window).
    void fix_col(int col, double value) {
        lower[col] = value;
        upper[col] = value;
    }

    // Row activity under a full assignment, for audits and tests.
    double row_activity(int row, const Eigen::VectorXd& x) const;
    // Largest violation of any row or bound under x; binaries are also
    // checked for integrality.
    double max_violation(const Eigen::VectorXd& x) const;
    double objective_value(const Eigen::VectorXd& x) const;
};

} // namespace saev
