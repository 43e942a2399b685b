#pragma once

#include "esm/product_space.h"

namespace esm {

struct EnergyWeights {
    double membrane = 1.0;
    double bend = 1.0;
    double hole = 0.3;
};

struct EnergyVector {
    std::vector<double> costs;  // one nonnegative cost per product triangle
    EnergyWeights weights;
};

constexpr double kAreaEps = 1e-12;

// Per-column cost from the projected element data: areas (zero for degenerate
// elements), mean vertex curvatures and hole-patch membership.
//   membrane = w_m * |Ax-Ay| / (Ax+Ay+eps) * (Ax+Ay)
//   bending  = w_b * (Hx-Hy)^2 * (Ax+Ay)
//   hole     = w_h * A(non-hole side) if exactly one side is in a hole patch,
//              w_h * eps if both, 0 if neither.
double match_cost(double area_x, double area_y, double curv_x, double curv_y, bool hole_x,
                  bool hole_y, const EnergyWeights& w);

// Assembles the full energy vector. Expects shapes normalized to unit surface
// area (see normalize_shapes); throws on negative weights.
EnergyVector compute_energy(const Shape& X, const Shape& Y, const ProductSpace& ps,
                            const EnergyWeights& weights, int threads = 1);

// Per-column element data used by the cost formula; exposed so oracles can
// cost restricted column sets without building the full product space.
struct ElementInfo {
    double area = 0;
    double curvature = 0;
    bool hole = false;
};
ElementInfo element_info(const Shape& s, const Triangle& side);

// Uniformly scales each shape to unit total surface area. Curvatures rescale
// consistently because all derived quantities are rebuilt from the scaled
// positions. Throws on zero-area shapes.
std::pair<Shape, Shape> normalize_shapes(const Shape& X, const Shape& Y);

}  // namespace esm
