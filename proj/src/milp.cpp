#include "saev/milp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace saev {

int MilpInstance::add_row(std::string name, RowSense s, double rhs_value,
                          const std::vector<std::pair<int, double>>& terms) {
    for (std::size_t a = 0; a < terms.size(); ++a) {
        if (terms[a].first < 0 || terms[a].first >= num_cols())
            throw std::out_of_range("add_row: column out of range in row " + name);
        for (std::size_t b = a + 1; b < terms.size(); ++b)
            if (terms[a].first == terms[b].first)
                throw std::invalid_argument("add_row: duplicate column in row " + name);
    }
    sense.push_back(s);
    rhs.push_back(rhs_value);
    row_name.push_back(std::move(name));
    for (const auto& [col, v] : terms) {
        if (v == 0.0)
            continue;
        col_index.push_back(col);
        coeff.push_back(v);
    }
    row_start.push_back(static_cast<int>(col_index.size()));
    return num_rows() - 1;
}

double MilpInstance::row_activity(int row, const Eigen::VectorXd& x) const {
    double a = 0.0;
    for (int k = row_start[row]; k < row_start[row + 1]; ++k)
        a += coeff[k] * x[col_index[k]];
    return a;
}

double MilpInstance::max_violation(const Eigen::VectorXd& x) const {
    double worst = 0.0;
    for (int c = 0; c < num_cols(); ++c) {
        worst = std::max(worst, lower[c] - x[c]);
        worst = std::max(worst, x[c] - upper[c]);
        if (kind[c] == VarKind::Binary)
            worst = std::max(worst, std::abs(x[c] - std::round(x[c])));
    }
    for (int r = 0; r < num_rows(); ++r) {
        const double a = row_activity(r, x);
        switch (sense[r]) {
        case RowSense::LE: worst = std::max(worst, a - rhs[r]); break;
        case RowSense::GE: worst = std::max(worst, rhs[r] - a); break;
        case RowSense::EQ: worst = std::max(worst, std::abs(a - rhs[r])); break;
        }
    }
    return worst;
}

double MilpInstance::objective_value(const Eigen::VectorXd& x) const {
    double v = 0.0;
    for (int c = 0; c < num_cols(); ++c)
        v += cost[c] * x[c];
    return v;
}

} // namespace saev
