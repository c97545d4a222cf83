#pragma once

#include "lrpopt/placement.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace lrpopt {

/// Minimum-cost assignment of every row of an n x m cost matrix (n <= m) to a
/// distinct column. Among optimal assignments the lexicographically smallest
/// column sequence is returned. Throws Error for empty, tall or non-finite input.
std::vector<std::size_t> hungarian(const Eigen::MatrixXd& cost);

double assignment_cost(const Eigen::MatrixXd& cost, const std::vector<std::size_t>& assignment);

/// Leader reflector coordinates reordered to match the particle's reflectors,
/// pairing them by minimum summed squared distance (within each type when
/// type_constrained). Surplus leader reflectors are dropped; particle
/// reflectors left without a partner get their own coordinates.
std::vector<Vec2> align_leader(const Placement& particle, const Placement& leader, bool type_constrained);

}  // namespace lrpopt
