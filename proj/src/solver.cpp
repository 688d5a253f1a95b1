#include "saev/solver.hpp"

#include <chrono>
#include <cstdlib>
#include <limits>

#ifdef SAEV_HAVE_HIGHS
#include "Highs.h"
#endif

namespace saev {

std::string backend_name() {
    if (const char* env = std::getenv("SAEV_SOLVER"))
        return env;
#ifdef SAEV_HAVE_HIGHS
    return "highs";
#else
    return "none";
#endif
}

namespace {

[[noreturn]] void no_backend(const std::string& name) {
    throw BackendUnavailable(
        "MILP backend '" + name + "' is not available in this build; " +
        "export the model with write_mps and solve it with an external solver, " +
        "or rebuild with HiGHS installed (see README)");
}

#ifdef SAEV_HAVE_HIGHS

Solution solve_highs(const MilpInstance& inst, const SolveOptions& opts) {
    const double inf = std::numeric_limits<double>::infinity();
    HighsLp lp;
    lp.num_col_ = inst.num_cols();
    lp.num_row_ = inst.num_rows();
    lp.col_cost_ = inst.cost;
    lp.col_lower_ = inst.lower;
    lp.col_upper_ = inst.upper;
    lp.sense_ = ObjSense::kMinimize;
    lp.row_lower_.resize(lp.num_row_);
    lp.row_upper_.resize(lp.num_row_);
    for (int r = 0; r < lp.num_row_; ++r) {
        switch (inst.sense[r]) {
        case RowSense::LE:
            lp.row_lower_[r] = -inf;
            lp.row_upper_[r] = inst.rhs[r];
            break;
        case RowSense::GE:
            lp.row_lower_[r] = inst.rhs[r];
            lp.row_upper_[r] = inf;
            break;
        case RowSense::EQ:
            lp.row_lower_[r] = inst.rhs[r];
            lp.row_upper_[r] = inst.rhs[r];
            break;
        }
    }
    lp.a_matrix_.format_ = MatrixFormat::kRowwise;
    lp.a_matrix_.num_col_ = lp.num_col_;
    lp.a_matrix_.num_row_ = lp.num_row_;
    lp.a_matrix_.start_.assign(inst.row_start.begin(), inst.row_start.end());
    lp.a_matrix_.index_.assign(inst.col_index.begin(), inst.col_index.end());
    lp.a_matrix_.value_ = inst.coeff;
    lp.integrality_.resize(lp.num_col_);
    for (int c = 0; c < lp.num_col_; ++c)
        lp.integrality_[c] = inst.kind[c] == VarKind::Binary ? HighsVarType::kInteger
                                                             : HighsVarType::kContinuous;

    Highs highs;
    highs.setOptionValue("output_flag", false);
    highs.setOptionValue("random_seed", 0);
    highs.setOptionValue("threads", opts.threads);
    highs.setOptionValue("mip_rel_gap", opts.rel_gap);
    if (opts.time_limit_s > 0.0)
        highs.setOptionValue("time_limit", opts.time_limit_s);
    if (highs.passModel(lp) != HighsStatus::kOk)
        throw std::runtime_error("solve: backend rejected the model");

    const auto t0 = std::chrono::steady_clock::now();
    const HighsStatus run_status = highs.run();
    const auto t1 = std::chrono::steady_clock::now();
    if (run_status == HighsStatus::kError)
        throw std::runtime_error("solve: backend reported an internal error");

    Solution out;
    out.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    const HighsModelStatus ms = highs.getModelStatus();
    const HighsInfo& info = highs.getInfo();
    const bool have_primal = info.primal_solution_status == kSolutionStatusFeasible;

    switch (ms) {
    case HighsModelStatus::kOptimal:
        out.status = info.mip_gap > 1e-9 ? SolveStatus::GapFeasible : SolveStatus::Optimal;
        break;
    case HighsModelStatus::kInfeasible:
        out.status = SolveStatus::Infeasible;
        return out;
    case HighsModelStatus::kTimeLimit:
        out.status = SolveStatus::TimeLimit;
        if (!have_primal)
            return out;
        break;
    default:
        throw std::runtime_error("solve: unexpected backend status " +
                                 highs.modelStatusToString(ms));
    }
    if (!have_primal)
        throw std::runtime_error("solve: backend claims success without a solution");
    out.has_values = true;
    out.objective = info.objective_function_value;
    out.bound = info.mip_dual_bound;
    const auto& col = highs.getSolution().col_value;
    out.values = Eigen::Map<const Eigen::VectorXd>(col.data(), static_cast<long>(col.size()));
    return out;
}

#endif // SAEV_HAVE_HIGHS

} // namespace

Solution solve(const MilpInstance& inst, const SolveOptions& opts) {
    const std::string name = backend_name();
    if (name == "none")
        no_backend(name);
#ifdef SAEV_HAVE_HIGHS
    if (name == "highs")
        return solve_highs(inst, opts);
#endif
    no_backend(name);
}

} // namespace saev
