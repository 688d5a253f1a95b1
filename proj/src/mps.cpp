#include "saev/mps.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace saev {

namespace {

// Shortest round-trip representation keeps files small without losing bits.
std::string num(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    std::string s = ss.str();
    std::ostringstream probe;
    probe.precision(12);
    probe << v;
    double back = 0.0;
    std::istringstream(probe.str()) >> back;
    if (back == v)
        return probe.str();
    return s;
}

} // namespace

std::string mps_string(const MilpInstance& inst) {
    const int ncol = inst.num_cols();
    const int nrow = inst.num_rows();
    for (int c = 0; c < ncol; ++c)
        if (inst.col_name[c].empty())
            throw std::invalid_argument("mps_string: unnamed column " + std::to_string(c));
    for (int r = 0; r < nrow; ++r)
        if (inst.row_name[r].empty())
            throw std::invalid_argument("mps_string: unnamed row " + std::to_string(r));

    // column-major view of the row-major storage
    std::vector<int> col_count(ncol, 0);
    for (const int c : inst.col_index)
        ++col_count[c];
    std::vector<int> col_start(ncol + 1, 0);
    for (int c = 0; c < ncol; ++c)
        col_start[c + 1] = col_start[c] + col_count[c];
    std::vector<int> entry_row(inst.num_nonzeros());
    std::vector<double> entry_val(inst.num_nonzeros());
    {
        std::vector<int> cursor(col_start.begin(), col_start.end() - 1);
        for (int r = 0; r < nrow; ++r) {
            for (int k = inst.row_start[r]; k < inst.row_start[r + 1]; ++k) {
                const int c = inst.col_index[k];
                entry_row[cursor[c]] = r;
                entry_val[cursor[c]] = inst.coeff[k];
                ++cursor[c];
            }
        }
    }

    std::ostringstream out;
    out << "NAME saev_window\n";
    out << "ROWS\n";
    out << " N COST\n";
    for (int r = 0; r < nrow; ++r) {
        char s = 'E';
        if (inst.sense[r] == RowSense::LE)
            s = 'L';
        else if (inst.sense[r] == RowSense::GE)
            s = 'G';
        out << ' ' << s << ' ' << inst.row_name[r] << '\n';
    }

    out << "COLUMNS\n";
    bool in_int = false;
    int marker = 0;
    for (int c = 0; c < ncol; ++c) {
        const bool is_int = inst.kind[c] == VarKind::Binary;
        if (is_int != in_int) {
            out << "    MARKER" << marker << " 'MARKER' " << (is_int ? "'INTORG'" : "'INTEND'")
                << '\n';
            ++marker;
            in_int = is_int;
        }
        if (inst.cost[c] != 0.0)
            out << "    " << inst.col_name[c] << " COST " << num(inst.cost[c]) << '\n';
        for (int k = col_start[c]; k < col_start[c + 1]; ++k)
            out << "    " << inst.col_name[c] << ' ' << inst.row_name[entry_row[k]] << ' '
                << num(entry_val[k]) << '\n';
        // a column with no objective and no rows still needs a presence line
        if (inst.cost[c] == 0.0 && col_start[c] == col_start[c + 1])
            out << "    " << inst.col_name[c] << " COST 0\n";
    }
    if (in_int)
        out << "    MARKER" << marker << " 'MARKER' 'INTEND'\n";

    out << "RHS\n";
    for (int r = 0; r < nrow; ++r)
        if (inst.rhs[r] != 0.0)
            out << "    RHS1 " << inst.row_name[r] << ' ' << num(inst.rhs[r]) << '\n';

    out << "BOUNDS\n";
    const double inf = std::numeric_limits<double>::infinity();
    for (int c = 0; c < ncol; ++c) {
        const double lb = inst.lower[c];
        const double ub = inst.upper[c];
        const std::string& name = inst.col_name[c];
        if (lb == ub) {
            out << " FX BND1 " << name << ' ' << num(lb) << '\n';
            continue;
        }
        if (inst.kind[c] == VarKind::Binary && lb == 0.0 && ub == 1.0) {
            out << " BV BND1 " << name << '\n';
            continue;
        }
        if (lb == -inf && ub == inf) {
            out << " FR BND1 " << name << '\n';
            continue;
        }
        if (lb == -inf)
            out << " MI BND1 " << name << '\n';
        else if (lb != 0.0)
            out << " LO BND1 " << name << ' ' << num(lb) << '\n';
        if (ub != inf)
            out << " UP BND1 " << name << ' ' << num(ub) << '\n';
    }
    out << "ENDATA\n";
    return out.str();
}

void write_mps(const MilpInstance& inst, const std::string& path) {
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("write_mps: cannot open " + path);
    f << mps_string(inst);
}

} // namespace saev
