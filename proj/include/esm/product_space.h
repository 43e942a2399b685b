#pragma once

#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "esm/mesh.h"

namespace esm {

// Which side of a product triangle is degenerate, and how.
enum class Degeneracy : std::uint8_t {
    TT = 0,   // triangle-triangle
    T2E = 1,  // X triangle matched to a Y edge
    T2V = 2,  // X triangle matched to a Y vertex
    E2T = 3,  // X edge matched to a Y triangle
    V2T = 4,  // X vertex matched to a Y triangle
};

const char* degeneracy_name(Degeneracy d);
Degeneracy degeneracy_from_name(const std::string& name);

using VertexPair = std::array<index_t, 2>;  // (vertex of X, vertex of Y)

// One correspondence candidate: three ordered (X,Y) vertex pairs. The
// non-degenerate side is stored in canonical rotation (smallest vertex first).
struct ProductTriangle {
    std::array<VertexPair, 3> pairs;
    Degeneracy degeneracy;

    Triangle x_side() const { return {pairs[0][0], pairs[1][0], pairs[2][0]}; }
    Triangle y_side() const { return {pairs[0][1], pairs[1][1], pairs[2][1]}; }
};

// Ordered pair of vertex pairs; orientation is the pair order.
struct ProductEdge {
    VertexPair a, b;
};

// Sparse constraint systems of the matching ILP, stored row-major and
// column-major. Boundary rows are deduplicated per unordered product edge:
// the row's stored orientation is the lexicographically smaller of the two,
// +1 marks columns containing it in that orientation, -1 the opposite.
struct ConstraintSystem {
    // piX: row j lists all columns whose X side is the non-degenerate
    // triangle j of X. Same for piY.
    std::vector<std::vector<index_t>> pix_rows;
    std::vector<std::vector<index_t>> piy_rows;

    struct BoundaryRow {
        ProductEdge edge;  // canonical orientation
        std::vector<index_t> plus;
        std::vector<index_t> minus;
    };
    std::vector<BoundaryRow> boundary_rows;

    struct ColumnRefs {
        index_t pix = kInvalidIndex;  // row in pix_rows, if X side non-degenerate
        index_t piy = kInvalidIndex;
        std::array<index_t, 3> boundary{};   // row ids, one per product edge of the column
        std::array<std::int8_t, 3> sign{};   // +1 if the column holds the row orientation
    };
    std::vector<ColumnRefs> columns;
};

class ProductSpace {
  public:
    // Enumerates F and E for two closed validated shapes and assembles the
    // constraint systems. Throws validation_error if a shape is open or empty.
    static ProductSpace build(const Shape& X, const Shape& Y);

    index_t num_columns() const { return static_cast<index_t>(triangles_.size()); }
    const std::vector<ProductTriangle>& product_triangles() const { return triangles_; }
    const ConstraintSystem& constraints() const { return constraints_; }

    index_t num_boundary_rows() const {
        return static_cast<index_t>(constraints_.boundary_rows.size());
    }

    // All columns sharing one of f's product edges with reversed orientation;
    // f itself excluded.
    std::vector<index_t> neighbors(index_t f) const;

    // Column index for a product triangle given by its pair list (any joint
    // cyclic rotation), or kInvalidIndex.
    index_t column_index(const std::array<VertexPair, 3>& pairs) const;

    // Exact integer feasibility check: piX*g = 1, piY*g = 1, boundary*g = 0.
    bool is_feasible(const std::vector<std::uint8_t>& gamma) const;
    // Text description of the first violated row, for diagnostics.
    std::string first_violation(const std::vector<std::uint8_t>& gamma) const;

    void dump(std::ostream& out) const;
    static ProductSpace load(std::istream& in, const Shape& X, const Shape& Y);

    // Closed-form |F| for closed shapes; used for count sanity checks.
    static std::size_t expected_size(index_t fx, index_t ex_undirected, index_t vx, index_t fy,
                                     index_t ey_undirected, index_t vy);

  private:
    void index_columns(const Shape& X, const Shape& Y);

    std::vector<ProductTriangle> triangles_;
    ConstraintSystem constraints_;
    std::unordered_multimap<std::uint64_t, index_t> column_lookup_;
};

struct MatchedElement {
    enum class Kind { Vertex, Edge, Triangle } kind;
    std::array<index_t, 3> vertices;  // unused slots = kInvalidIndex
};

struct ProjectedMatching {
    std::vector<MatchedElement> map_x;  // per triangle of X: matched element of Y
    std::vector<MatchedElement> map_y;
};

// Reads off the per-triangle matched elements from a gamma that satisfies
// both projection constraint systems. Throws infeasible_error otherwise.
ProjectedMatching project_matching(const std::vector<std::uint8_t>& gamma, const ProductSpace& ps,
                                   const Shape& X, const Shape& Y);

}  // namespace esm
