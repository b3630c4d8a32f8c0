#pragma once

#include <vector>

namespace conecover {

// Dense row-major n x n solve with partial pivoting. Throws SingularSystem.
std::vector<double> lu_solve(std::vector<double> a, std::vector<double> b);

}  // namespace conecover
