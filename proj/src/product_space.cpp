#include "esm/product_space.h"

#include <algorithm>
#include <cstring>
#include <istream>
#include <ostream>
#include <set>

#include "esm/log.h"

namespace esm {

namespace {

// Vertex ids must fit 16 bits so a product edge packs into one uint64 and a
// product triangle pair list into two.
void check_vertex_range(const Shape& s, const char* name) {
    if (s.num_vertices() >= 65536)
        throw validation_error(std::string(name) + ": more than 65535 vertices unsupported");
}

std::uint64_t pack_edge(const VertexPair& a, const VertexPair& b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint16_t>(a[0])) << 48) |
           (static_cast<std::uint64_t>(static_cast<std::uint16_t>(a[1])) << 32) |
           (static_cast<std::uint64_t>(static_cast<std::uint16_t>(b[0])) << 16) |
           static_cast<std::uint64_t>(static_cast<std::uint16_t>(b[1]));
}

std::uint64_t pack_triple_side(index_t v0, index_t v1, index_t v2) {
    return (static_cast<std::uint64_t>(static_cast<std::uint16_t>(v0)) << 32) |
           (static_cast<std::uint64_t>(static_cast<std::uint16_t>(v1)) << 16) |
           static_cast<std::uint64_t>(static_cast<std::uint16_t>(v2));
}

// Canonical key of a product triangle: joint rotation minimizing the packed
// (x-side, y-side) tuple.
std::pair<std::uint64_t, std::uint64_t> column_key(const std::array<VertexPair, 3>& p) {
    std::pair<std::uint64_t, std::uint64_t> best{~0ull, ~0ull};
    for (int r = 0; r < 3; ++r) {
        std::pair<std::uint64_t, std::uint64_t> cand{
            pack_triple_side(p[r][0], p[(r + 1) % 3][0], p[(r + 2) % 3][0]),
            pack_triple_side(p[r][1], p[(r + 1) % 3][1], p[(r + 2) % 3][1])};
        best = std::min(best, cand);
    }
    return best;
}

std::uint64_t mix_key(const std::pair<std::uint64_t, std::uint64_t>& k) {
    // 96 significant bits folded to 64; collisions would only confuse the
    // lookup map, which also stores full columns, so verify on use.
    std::uint64_t h = k.first * 0x9e3779b97f4a7c15ull;
    h ^= k.second + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return h;
}

int distinct_count(const Triangle& t) {
    if (t[0] == t[1] && t[1] == t[2]) return 1;
    if (t[0] == t[1] || t[1] == t[2] || t[2] == t[0]) return 2;
    return 3;
}

}  // namespace

const char* degeneracy_name(Degeneracy d) {
    switch (d) {
        case Degeneracy::TT: return "tt";
        case Degeneracy::T2E: return "t2e";
        case Degeneracy::T2V: return "t2v";
        case Degeneracy::E2T: return "e2t";
        case Degeneracy::V2T: return "v2t";
    }
    return "?";
}

Degeneracy degeneracy_from_name(const std::string& name) {
    if (name == "tt") return Degeneracy::TT;
    if (name == "t2e") return Degeneracy::T2E;
    if (name == "t2v") return Degeneracy::T2V;
    if (name == "e2t") return Degeneracy::E2T;
    if (name == "v2t") return Degeneracy::V2T;
    throw parse_error("unknown degeneracy tag: " + name);
}

ProductSpace ProductSpace::build(const Shape& X, const Shape& Y) {
    if (X.num_triangles() == 0 || Y.num_triangles() == 0)
        throw validation_error("product space requires non-empty shapes");
    check_vertex_range(X, "X");
    check_vertex_range(Y, "Y");
    for (const Shape* s : {&X, &Y}) {
        ValidationReport rep = validate(*s);
        if (!rep.closed)
            throw validation_error("product space requires closed shapes (close holes first)");
    }

    ProductSpace ps;
    auto& F = ps.triangles_;

    // Canonical rotations of the real triangles.
    std::vector<Triangle> fx(X.num_triangles()), fy(Y.num_triangles());
    for (index_t t = 0; t < X.num_triangles(); ++t)
        fx[t] = canonical_rotation(X.triangles()[t]);
    for (index_t t = 0; t < Y.num_triangles(); ++t)
        fy[t] = canonical_rotation(Y.triangles()[t]);

    // The six ordered degenerate triples over an undirected edge {u,v}: the
    // three rotations of (u,u,v) plus the three of (v,v,u).
    auto degenerate_triples = [](index_t u, index_t v) {
        return std::array<Triangle, 6>{{{u, u, v}, {u, v, u}, {v, u, u},
                                        {v, v, u}, {v, u, v}, {u, v, v}}};
    };

    // (a) triangle-triangle: 3 cyclic alignments per ordered pair.
    for (index_t tx = 0; tx < X.num_triangles(); ++tx)
        for (index_t ty = 0; ty < Y.num_triangles(); ++ty)
            for (int r = 0; r < 3; ++r) {
                ProductTriangle pt;
                for (int k = 0; k < 3; ++k) pt.pairs[k] = {fx[tx][k], fy[ty][(k + r) % 3]};
                pt.degeneracy = Degeneracy::TT;
                F.push_back(pt);
            }

    // (b) X triangle vs degenerate Y triangle from an edge.
    for (index_t tx = 0; tx < X.num_triangles(); ++tx)
        for (const DirectedEdge& e : Y.undirected_edges())
            for (const Triangle& c : degenerate_triples(e[0], e[1])) {
                ProductTriangle pt;
                for (int k = 0; k < 3; ++k) pt.pairs[k] = {fx[tx][k], c[k]};
                pt.degeneracy = Degeneracy::T2E;
                F.push_back(pt);
            }

    // (c) X triangle vs Y vertex.
    for (index_t tx = 0; tx < X.num_triangles(); ++tx)
        for (index_t w = 0; w < Y.num_vertices(); ++w) {
            ProductTriangle pt;
            for (int k = 0; k < 3; ++k) pt.pairs[k] = {fx[tx][k], w};
            pt.degeneracy = Degeneracy::T2V;
            F.push_back(pt);
        }

    // (d) degenerate X triangle from an edge vs Y triangle.
    for (index_t ty = 0; ty < Y.num_triangles(); ++ty)
        for (const DirectedEdge& e : X.undirected_edges())
            for (const Triangle& c : degenerate_triples(e[0], e[1])) {
                ProductTriangle pt;
                for (int k = 0; k < 3; ++k) pt.pairs[k] = {c[k], fy[ty][k]};
                pt.degeneracy = Degeneracy::E2T;
                F.push_back(pt);
            }

    // (e) X vertex vs Y triangle.
    for (index_t ty = 0; ty < Y.num_triangles(); ++ty)
        for (index_t x = 0; x < X.num_vertices(); ++x) {
            ProductTriangle pt;
            for (int k = 0; k < 3; ++k) pt.pairs[k] = {x, fy[ty][k]};
            pt.degeneracy = Degeneracy::V2T;
            F.push_back(pt);
        }

    ps.index_columns(X, Y);
    return ps;
}

void ProductSpace::index_columns(const Shape& X, const Shape& Y) {
    auto& C = constraints_;
    C.pix_rows.assign(X.num_triangles(), {});
    C.piy_rows.assign(Y.num_triangles(), {});
    C.columns.resize(triangles_.size());

    std::unordered_map<std::uint64_t, index_t> edge_rows;
    edge_rows.reserve(triangles_.size() * 2);

    for (index_t f = 0; f < num_columns(); ++f) {
        const ProductTriangle& pt = triangles_[f];
        ColumnRefs& refs = C.columns[f];

        Triangle xs = pt.x_side(), ys = pt.y_side();
        if (distinct_count(xs) == 3) {
            index_t tx = X.triangle_index(xs);
            if (tx == kInvalidIndex) throw error("product triangle X side not a triangle of X");
            refs.pix = tx;
            C.pix_rows[tx].push_back(f);
        }
        if (distinct_count(ys) == 3) {
            index_t ty = Y.triangle_index(ys);
            if (ty == kInvalidIndex) throw error("product triangle Y side not a triangle of Y");
            refs.piy = ty;
            C.piy_rows[ty].push_back(f);
        }

        for (int k = 0; k < 3; ++k) {
            VertexPair a = pt.pairs[k], b = pt.pairs[(k + 1) % 3];
            std::uint64_t fwd = pack_edge(a, b), rev = pack_edge(b, a);
            bool canonical_fwd = fwd < rev;
            std::uint64_t key = canonical_fwd ? fwd : rev;
            auto [it, fresh] = edge_rows.try_emplace(
                key, static_cast<index_t>(C.boundary_rows.size()));
            if (fresh) {
                ConstraintSystem::BoundaryRow row;
                row.edge = canonical_fwd ? ProductEdge{a, b} : ProductEdge{b, a};
                C.boundary_rows.push_back(std::move(row));
            }
            index_t row = it->second;
            refs.boundary[k] = row;
            refs.sign[k] = canonical_fwd ? 1 : -1;
            if (canonical_fwd)
                C.boundary_rows[row].plus.push_back(f);
            else
                C.boundary_rows[row].minus.push_back(f);
        }

        auto key = column_key(pt.pairs);
        column_lookup_.emplace(mix_key(key), f);
    }

    // Boundary rows with an empty side would force all their columns to zero;
    // closed inputs never produce them, so just warn loudly.
    std::size_t unbalanced = 0;
    for (const auto& row : C.boundary_rows)
        if (row.plus.empty() || row.minus.empty()) ++unbalanced;
    if (unbalanced > 0)
        log_info("[product-space] warning: ", unbalanced,
                 " boundary rows lack an opposite orientation; their columns are unusable");
}

std::vector<index_t> ProductSpace::neighbors(index_t f) const {
    if (f < 0 || f >= num_columns()) throw error("product triangle index out of range");
    const auto& refs = constraints_.columns[f];
    std::vector<index_t> out;
    for (int k = 0; k < 3; ++k) {
        const auto& row = constraints_.boundary_rows[refs.boundary[k]];
        const auto& opposite = refs.sign[k] > 0 ? row.minus : row.plus;
        out.insert(out.end(), opposite.begin(), opposite.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    out.erase(std::remove(out.begin(), out.end(), f), out.end());
    return out;
}

index_t ProductSpace::column_index(const std::array<VertexPair, 3>& pairs) const {
    auto range = column_lookup_.equal_range(mix_key(column_key(pairs)));
    for (auto it = range.first; it != range.second; ++it) {
        index_t f = it->second;
        if (column_key(triangles_[f].pairs) == column_key(pairs)) return f;
    }
    return kInvalidIndex;
}

bool ProductSpace::is_feasible(const std::vector<std::uint8_t>& gamma) const {
    return first_violation(gamma).empty();
}

std::string ProductSpace::first_violation(const std::vector<std::uint8_t>& gamma) const {
    if (gamma.size() != static_cast<std::size_t>(num_columns())) return "gamma size mismatch";
    const auto& C = constraints_;
    for (std::size_t j = 0; j < C.pix_rows.size(); ++j) {
        long s = 0;
        for (index_t f : C.pix_rows[j]) s += gamma[f];
        if (s != 1) return "piX row " + std::to_string(j) + " sums to " + std::to_string(s);
    }
    for (std::size_t j = 0; j < C.piy_rows.size(); ++j) {
        long s = 0;
        for (index_t f : C.piy_rows[j]) s += gamma[f];
        if (s != 1) return "piY row " + std::to_string(j) + " sums to " + std::to_string(s);
    }
    for (std::size_t j = 0; j < C.boundary_rows.size(); ++j) {
        long s = 0;
        for (index_t f : C.boundary_rows[j].plus) s += gamma[f];
        for (index_t f : C.boundary_rows[j].minus) s -= gamma[f];
        if (s != 0) return "boundary row " + std::to_string(j) + " sums to " + std::to_string(s);
    }
    return {};
}

std::size_t ProductSpace::expected_size(index_t fx, index_t ex_u, index_t vx, index_t fy,
                                        index_t ey_u, index_t vy) {
    return 3ull * fx * fy + 6ull * (static_cast<std::size_t>(fx) * ey_u +
                                    static_cast<std::size_t>(fy) * ex_u) +
           static_cast<std::size_t>(fx) * vy + static_cast<std::size_t>(fy) * vx;
}

namespace {
constexpr char kDumpMagic[8] = {'E', 'S', 'M', 'P', 'S', '0', '0', '1'};

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw parse_error("truncated product space dump");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}
}  // namespace

void ProductSpace::dump(std::ostream& out) const {
    out.write(kDumpMagic, 8);
    write_u32(out, 1);  // version
    write_u32(out, static_cast<std::uint32_t>(num_columns()));
    for (const ProductTriangle& pt : triangles_) {
        for (int k = 0; k < 3; ++k) {
            write_u32(out, static_cast<std::uint32_t>(pt.pairs[k][0]));
            write_u32(out, static_cast<std::uint32_t>(pt.pairs[k][1]));
        }
        write_u32(out, static_cast<std::uint32_t>(pt.degeneracy));
    }
}

ProductSpace ProductSpace::load(std::istream& in, const Shape& X, const Shape& Y) {
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kDumpMagic, 8) != 0)
        throw parse_error("bad product space dump magic");
    std::uint32_t version = read_u32(in);
    if (version != 1) throw parse_error("unsupported product space dump version");
    std::uint32_t n = read_u32(in);
    ProductSpace ps;
    ps.triangles_.resize(n);
    for (std::uint32_t f = 0; f < n; ++f) {
        ProductTriangle& pt = ps.triangles_[f];
        for (int k = 0; k < 3; ++k) {
            pt.pairs[k][0] = static_cast<index_t>(read_u32(in));
            pt.pairs[k][1] = static_cast<index_t>(read_u32(in));
        }
        pt.degeneracy = static_cast<Degeneracy>(read_u32(in));
    }
    ps.index_columns(X, Y);
    return ps;
}

ProjectedMatching project_matching(const std::vector<std::uint8_t>& gamma, const ProductSpace& ps,
                                   const Shape& X, const Shape& Y) {
    const auto& C = ps.constraints();
    ProjectedMatching out;

    auto classify = [](const Triangle& side) {
        MatchedElement el{};
        el.vertices = {kInvalidIndex, kInvalidIndex, kInvalidIndex};
        int d = distinct_count(side);
        if (d == 3) {
            el.kind = MatchedElement::Kind::Triangle;
            el.vertices = side;
        } else if (d == 2) {
            el.kind = MatchedElement::Kind::Edge;
            // the two distinct endpoints
            el.vertices[0] = side[0];
            el.vertices[1] = side[1] != side[0] ? side[1] : side[2];
        } else {
            el.kind = MatchedElement::Kind::Vertex;
            el.vertices[0] = side[0];
        }
        return el;
    };

    auto extract = [&](const std::vector<std::vector<index_t>>& rows, bool from_x) {
        std::vector<MatchedElement> map;
        map.reserve(rows.size());
        for (std::size_t j = 0; j < rows.size(); ++j) {
            index_t hit = kInvalidIndex;
            long s = 0;
            for (index_t f : rows[j]) {
                if (gamma[f]) {
                    ++s;
                    hit = f;
                }
            }
            if (s != 1)
                throw infeasible_error("projection row " + std::to_string(j) + " sums to " +
                                       std::to_string(s));
            const ProductTriangle& pt = ps.product_triangles()[hit];
            map.push_back(classify(from_x ? pt.y_side() : pt.x_side()));
        }
        return map;
    };

    if (gamma.size() != static_cast<std::size_t>(ps.num_columns()))
        throw infeasible_error("gamma size mismatch");
    out.map_x = extract(C.pix_rows, true);
    out.map_y = extract(C.piy_rows, false);
    (void)X;
    (void)Y;
    return out;
}

}  // namespace esm
