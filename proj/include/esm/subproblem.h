#pragma once

#include <limits>
#include <span>
#include <vector>

#include "esm/common.h"

namespace esm {

// One Lagrange subproblem per constraint row. Projection rows have all +1
// coefficients and right-hand side 1; boundary rows have mixed signs and
// right-hand side 0 on the full problem (nonzero after variable fixing).
enum class SubproblemKind : std::uint8_t { ProjectionX, ProjectionY, Boundary };

constexpr double kInf = std::numeric_limits<double>::infinity();

// min over assignments selecting exactly one supported variable.
double projection_min(std::span<const double> costs);

// Min-marginal of variable i in a projection row: cost_i minus the cheapest
// alternative. Returns -inf when i is the only supported variable (forced).
double projection_min_marginal(std::span<const double> costs, std::size_t i);

// min over assignments with (#plus selected) - (#minus selected) = rhs.
// Sorts both cost lists ascending and pairs greedily; the mandatory |rhs|
// singles come first. Returns +inf when infeasible.
double boundary_min(std::vector<double> plus, std::vector<double> minus, int rhs);

// Min-marginal for a boundary row via the two restricted minimizations.
// i indexes into plus when i_is_plus, else into minus. Sentinels: +inf when
// the variable cannot be 1, -inf when it cannot be 0.
double boundary_min_marginal(const std::vector<double>& plus, const std::vector<double>& minus,
                             int rhs, bool i_is_plus, std::size_t i);

}  // namespace esm
