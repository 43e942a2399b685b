#pragma once

#include <optional>
#include <unordered_map>
#include <vector>

#include "esm/common.h"

namespace esm {

// Closed oriented triangle mesh with the derived quantities the solver needs:
// directed edge structure, per-triangle areas, discrete mean curvature per
// vertex and hole-patch flags (triangles added by close_holes).
class Shape {
  public:
    Shape() = default;
    // Builds all derived structures. Does not validate; call validate() to
    // check closedness/orientation/manifoldness.
    static Shape build(std::vector<Vec3> vertices, std::vector<Triangle> triangles,
                       std::vector<bool> hole_flags = {});

    index_t num_vertices() const { return static_cast<index_t>(vertices_.size()); }
    index_t num_triangles() const { return static_cast<index_t>(triangles_.size()); }
    index_t num_directed_edges() const { return static_cast<index_t>(directed_edges_.size()); }

    const std::vector<Vec3>& vertices() const { return vertices_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    const std::vector<DirectedEdge>& directed_edges() const { return directed_edges_; }
    const std::vector<bool>& hole_triangle_flags() const { return hole_flags_; }
    const std::vector<double>& triangle_areas() const { return areas_; }
    const std::vector<double>& vertex_curvature() const { return curvature_; }

    bool is_hole_triangle(index_t t) const { return hole_flags_[t]; }
    // A vertex lies in a hole patch iff every incident triangle is a hole
    // triangle (only the fan barycenters qualify).
    bool is_hole_vertex(index_t v) const { return hole_vertex_[v]; }
    // An undirected edge lies in a hole patch iff all adjacent triangles are
    // hole triangles.
    bool is_hole_edge(index_t a, index_t b) const;

    double total_area() const { return total_area_; }
    double mean_triangle_area() const { return total_area_ / std::max<index_t>(1, num_triangles()); }
    double median_abs_curvature() const { return median_abs_curvature_; }

    // Triangle owning the directed edge (a,b), or kInvalidIndex if none.
    index_t triangle_of_directed_edge(index_t a, index_t b) const;
    // Triangle index for an oriented vertex triple (any cyclic rotation), or
    // kInvalidIndex.
    index_t triangle_index(const Triangle& t) const;

    // Undirected edges as (min,max) pairs, each once, sorted.
    const std::vector<DirectedEdge>& undirected_edges() const { return undirected_edges_; }

    // Uniformly rescales positions by s and rebuilds derived quantities.
    Shape scaled(double s) const;

  private:
    std::vector<Vec3> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<bool> hole_flags_;
    std::vector<bool> hole_vertex_;
    std::vector<DirectedEdge> directed_edges_;
    std::vector<DirectedEdge> undirected_edges_;
    std::vector<double> areas_;
    std::vector<double> curvature_;
    std::unordered_map<std::uint64_t, index_t> edge_owner_;  // directed edge -> triangle
    std::unordered_map<std::uint64_t, index_t> triangle_lookup_;  // canonical triple -> index
    double total_area_ = 0;
    double median_abs_curvature_ = 0;
};

struct ValidationReport {
    bool closed = false;
    bool oriented = false;
    bool manifold = false;
    std::vector<std::vector<index_t>> boundary_loops;  // vertex cycles

    bool ok() const { return closed && oriented && manifold; }
};

ValidationReport validate(const Shape& shape);

// Fills every boundary loop with a triangle fan around the loop barycenter
// (one new vertex per hole). Added triangles carry the hole flag. Requires a
// manifold, consistently oriented input; already-closed shapes are returned
// unchanged.
Shape close_holes(const Shape& shape);

struct RegularityConfig {
    double min_angle_deg = 20.0;
    double max_angle_deg = 90.0;
    double curvature_weight = 1.0;
    // When set, skips the angle filter (used as a fallback when every
    // triangle violates it).
    bool ignore_angle_filter = false;
};

// Seed-selection score, lower = more regular. Hole triangles and triangles
// with an interior angle outside [min,max] get +infinity unless the filter is
// disabled.
double triangle_regularity(const Shape& shape, index_t tri, const RegularityConfig& cfg = {});

// All triangles ordered by ascending regularity (ties by index). Falls back
// to the filter-free score when every non-hole triangle hits the sentinel.
std::vector<index_t> triangles_by_regularity(const Shape& shape, const RegularityConfig& cfg = {});

}  // namespace esm
