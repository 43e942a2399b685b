#include "esm/energy.h"

#include <thread>

namespace esm {

double match_cost(double area_x, double area_y, double curv_x, double curv_y, bool hole_x,
                  bool hole_y, const EnergyWeights& w) {
    double total_area = area_x + area_y;
    double membrane = w.membrane * std::abs(area_x - area_y) / (total_area + kAreaEps) * total_area;
    double dh = curv_x - curv_y;
    double bending = w.bend * dh * dh * total_area;
    double hole = 0;
    if (hole_x && hole_y)
        hole = w.hole * kAreaEps;
    else if (hole_x)
        hole = w.hole * area_y;
    else if (hole_y)
        hole = w.hole * area_x;
    return membrane + bending + hole;
}

ElementInfo element_info(const Shape& s, const Triangle& side) {
    ElementInfo info;
    if (side[0] != side[1] && side[1] != side[2] && side[2] != side[0]) {
        index_t t = s.triangle_index(side);
        if (t == kInvalidIndex) throw error("product side is not a triangle of its shape");
        info.area = s.triangle_areas()[t];
        info.curvature = (s.vertex_curvature()[side[0]] + s.vertex_curvature()[side[1]] +
                          s.vertex_curvature()[side[2]]) /
                         3.0;
        info.hole = s.is_hole_triangle(t);
    } else if (side[0] == side[1] && side[1] == side[2]) {
        info.area = 0;
        info.curvature = s.vertex_curvature()[side[0]];
        info.hole = s.is_hole_vertex(side[0]);
    } else {
        index_t u = side[0], v = side[1] != side[0] ? side[1] : side[2];
        info.area = 0;
        info.curvature = 0.5 * (s.vertex_curvature()[u] + s.vertex_curvature()[v]);
        info.hole = s.is_hole_edge(u, v);
    }
    return info;
}

EnergyVector compute_energy(const Shape& X, const Shape& Y, const ProductSpace& ps,
                            const EnergyWeights& weights, int threads) {
    if (weights.membrane < 0 || weights.bend < 0 || weights.hole < 0)
        throw error("energy weights must be nonnegative");

    EnergyVector e;
    e.weights = weights;
    e.costs.resize(ps.num_columns());

    auto worker = [&](index_t begin, index_t end) {
        for (index_t f = begin; f < end; ++f) {
            const ProductTriangle& pt = ps.product_triangles()[f];
            ElementInfo ix = element_info(X, pt.x_side());
            ElementInfo iy = element_info(Y, pt.y_side());
            e.costs[f] = match_cost(ix.area, iy.area, ix.curvature, iy.curvature, ix.hole, iy.hole,
                                    weights);
        }
    };

    threads = std::max(1, threads);
    index_t n = ps.num_columns();
    if (threads == 1 || n < 4096) {
        worker(0, n);
    } else {
        std::vector<std::thread> pool;
        index_t chunk = (n + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            index_t b = std::min<index_t>(n, t * chunk);
            index_t c = std::min<index_t>(n, b + chunk);
            if (b < c) pool.emplace_back(worker, b, c);
        }
        for (auto& th : pool) th.join();
    }
    return e;
}

std::pair<Shape, Shape> normalize_shapes(const Shape& X, const Shape& Y) {
    auto normalize = [](const Shape& s) {
        double a = s.total_area();
        if (!(a > 0)) throw validation_error("cannot normalize a zero-area shape");
        return s.scaled(1.0 / std::sqrt(a));
    };
    return {normalize(X), normalize(Y)};
}

}  // namespace esm
