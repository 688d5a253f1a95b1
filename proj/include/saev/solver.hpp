#pragma once

#include "saev/amod.hpp"
#include "saev/milp.hpp"

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace saev {

enum class SolveStatus { Optimal, GapFeasible, Infeasible, TimeLimit };

struct SolveOptions {
    double rel_gap = 1e-4;      // MIP relative optimality gap
    double time_limit_s = 0.0;  // 0 disables the limit
    int threads = 1;            // single-threaded by default for repeatability
};

struct Solution {
    SolveStatus status = SolveStatus::Infeasible;
    bool has_values = false;
    double objective = 0.0;
    double bound = 0.0;
    Eigen::VectorXd values;
    double wall_seconds = 0.0;
};

// Raised when no MILP backend is compiled in or the requested one is
// unknown. The message tells the caller to export the model instead.
struct BackendUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Name of the active backend: the SAEV_SOLVER environment variable when set
// ("highs" or "none"), otherwise the compiled-in default.
std::string backend_name();

// Solves the instance with the active backend. Infeasibility is a status,
// not an exception; BackendUnavailable is thrown when no backend exists.
Solution solve(const MilpInstance& inst, const SolveOptions& opts = {});

// Restrictions the exhaustive reference solver enforces before it will
// touch an instance; violating any of them raises OracleUnsupported rather
// than silently approximating.
struct OracleLimits {
    // refuse when the count of candidate movement assignments can exceed this
    double max_assignments = 5e7;
};

struct OracleUnsupported : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Independent reference: depth-first enumeration of movement assignments
// with the continuous charge/discharge schedule resolved analytically. Never
// reads the MILP rows, only the window data. Preconditions (checked, refused
// otherwise):
//   - the electricity price is constant across the window;
//   - with any outage in the window, every vehicle has enough charge that
//     the floor can never bind inside the window;
//   - without outages, charging headroom never hits the ceiling.
// Fills Solution::values with a full column assignment on success.
Solution oracle_solve(const AmodInstance& inst, const OracleLimits& limits = {});

} // namespace saev
