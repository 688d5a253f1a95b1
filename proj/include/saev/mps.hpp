#pragma once

#include "saev/milp.hpp"

#include <string>

namespace saev {

// Writes the instance as free-format MPS: ROWS/COLUMNS/RHS/BOUNDS sections,
// binaries inside INTORG/INTEND markers, zero coefficients omitted, rows and
// columns in model order so the output is deterministic. The objective is a
// minimization row named COST.
void write_mps(const MilpInstance& inst, const std::string& path);

std::string mps_string(const MilpInstance& inst);

} // namespace saev
