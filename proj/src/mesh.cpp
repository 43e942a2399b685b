#include "esm/mesh.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "esm/log.h"

namespace esm {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t edge_key(index_t a, index_t b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

std::uint64_t triple_key(const Triangle& t) {
    Triangle c = canonical_rotation(t);
    // Vertex ids are < 2^21 in any mesh this library targets.
    return (static_cast<std::uint64_t>(c[0]) << 42) | (static_cast<std::uint64_t>(c[1]) << 21) |
           static_cast<std::uint64_t>(c[2]);
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * norm(cross(b - a, c - a));
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::string fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open file for hashing: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes.data(), bytes.size())));
    return buf;
}

Shape Shape::build(std::vector<Vec3> vertices, std::vector<Triangle> triangles,
                   std::vector<bool> hole_flags) {
    Shape s;
    s.vertices_ = std::move(vertices);
    s.triangles_ = std::move(triangles);
    if (hole_flags.empty()) hole_flags.assign(s.triangles_.size(), false);
    if (hole_flags.size() != s.triangles_.size())
        throw error("hole flag count does not match triangle count");
    s.hole_flags_ = std::move(hole_flags);

    const index_t nv = s.num_vertices();
    for (index_t ti = 0; ti < s.num_triangles(); ++ti) {
        const Triangle& t = s.triangles_[ti];
        for (int k = 0; k < 3; ++k) {
            if (t[k] < 0 || t[k] >= nv) throw parse_error("triangle vertex index out of range");
            if (t[k] == t[(k + 1) % 3]) throw parse_error("triangle repeats a vertex");
        }
        auto [it, fresh] = s.triangle_lookup_.emplace(triple_key(t), ti);
        if (!fresh) throw parse_error("duplicate triangle (same vertices up to rotation)");
    }

    std::set<DirectedEdge> undirected;
    for (index_t ti = 0; ti < s.num_triangles(); ++ti) {
        const Triangle& t = s.triangles_[ti];
        for (int k = 0; k < 3; ++k) {
            index_t a = t[k], b = t[(k + 1) % 3];
            s.directed_edges_.push_back({a, b});
            s.edge_owner_.emplace(edge_key(a, b), ti);  // duplicates kept out; validate() reports
            undirected.insert({std::min(a, b), std::max(a, b)});
        }
    }
    s.undirected_edges_.assign(undirected.begin(), undirected.end());

    s.areas_.resize(s.num_triangles());
    s.total_area_ = 0;
    for (index_t ti = 0; ti < s.num_triangles(); ++ti) {
        const Triangle& t = s.triangles_[ti];
        s.areas_[ti] = triangle_area(s.vertices_[t[0]], s.vertices_[t[1]], s.vertices_[t[2]]);
        s.total_area_ += s.areas_[ti];
    }

    // Discrete mean curvature: magnitude of the cotangent-Laplacian mean
    // curvature normal, H = |sum_j (cot a_ij + cot b_ij)(v_i - v_j)| / (4 A_i)
    // with barycentric vertex areas.
    std::vector<Vec3> lap(nv, Vec3{});
    std::vector<double> varea(nv, 0.0);
    for (index_t ti = 0; ti < s.num_triangles(); ++ti) {
        const Triangle& t = s.triangles_[ti];
        double a2 = 2.0 * s.areas_[ti];
        if (a2 <= 0) continue;
        // The cotangent at corner c weights the opposite edge (i,j).
        for (int c = 0; c < 3; ++c) {
            index_t vi = t[(c + 1) % 3], vj = t[(c + 2) % 3];
            const Vec3& pc = s.vertices_[t[c]];
            double cot = dot(s.vertices_[vi] - pc, s.vertices_[vj] - pc) / a2;
            Vec3 d = (s.vertices_[vj] - s.vertices_[vi]) * cot;
            lap[vi] += d;
            lap[vj] += d * -1.0;
        }
        for (int k = 0; k < 3; ++k) varea[t[k]] += s.areas_[ti] / 3.0;
    }
    s.curvature_.resize(nv, 0.0);
    for (index_t v = 0; v < nv; ++v) {
        if (varea[v] > 0) s.curvature_[v] = norm(lap[v]) / (4.0 * varea[v]);
    }
    std::vector<double> absc = s.curvature_;
    for (double& c : absc) c = std::abs(c);
    if (!absc.empty()) {
        auto mid = absc.begin() + absc.size() / 2;
        std::nth_element(absc.begin(), mid, absc.end());
        s.median_abs_curvature_ = *mid;
    }

    s.hole_vertex_.assign(nv, true);
    for (index_t ti = 0; ti < s.num_triangles(); ++ti) {
        if (s.hole_flags_[ti]) continue;
        for (int k = 0; k < 3; ++k) s.hole_vertex_[s.triangles_[ti][k]] = false;
    }
    if (s.num_triangles() == 0) s.hole_vertex_.assign(nv, false);

    return s;
}

bool Shape::is_hole_edge(index_t a, index_t b) const {
    index_t t1 = triangle_of_directed_edge(a, b);
    index_t t2 = triangle_of_directed_edge(b, a);
    bool any = false;
    if (t1 != kInvalidIndex) {
        if (!hole_flags_[t1]) return false;
        any = true;
    }
    if (t2 != kInvalidIndex) {
        if (!hole_flags_[t2]) return false;
        any = true;
    }
    return any;
}

index_t Shape::triangle_of_directed_edge(index_t a, index_t b) const {
    auto it = edge_owner_.find(edge_key(a, b));
    return it == edge_owner_.end() ? kInvalidIndex : it->second;
}

index_t Shape::triangle_index(const Triangle& t) const {
    auto it = triangle_lookup_.find(triple_key(t));
    return it == triangle_lookup_.end() ? kInvalidIndex : it->second;
}

Shape Shape::scaled(double s) const {
    std::vector<Vec3> v = vertices_;
    for (Vec3& p : v) p = p * s;
    return Shape::build(std::move(v), triangles_, hole_flags_);
}

ValidationReport validate(const Shape& shape) {
    ValidationReport rep;
    rep.oriented = true;
    rep.manifold = true;

    // Directed edge multiplicities.
    std::map<DirectedEdge, int> dir_count;
    for (const DirectedEdge& e : shape.directed_edges()) dir_count[e]++;

    std::map<DirectedEdge, int> undir_count;  // (min,max) -> total
    for (const auto& [e, c] : dir_count) {
        undir_count[{std::min(e[0], e[1]), std::max(e[0], e[1])}] += c;
        if (c > 1) {
            // Two triangles induce the same direction: orientation conflict
            // (and the edge pairing cannot be a clean involution).
            rep.oriented = false;
        }
    }
    std::vector<DirectedEdge> boundary;  // directed edges missing their opposite
    for (const auto& [e, c] : undir_count) {
        if (c > 2) rep.manifold = false;
    }
    for (const auto& [e, c] : dir_count) {
        if (dir_count.find({e[1], e[0]}) == dir_count.end()) boundary.push_back(e);
    }
    rep.closed = boundary.empty() && rep.oriented && rep.manifold;

    // Chain boundary edges into vertex loops. For a manifold with boundary
    // every boundary vertex has exactly one outgoing boundary edge.
    if (!boundary.empty() && rep.manifold && rep.oriented) {
        std::map<index_t, index_t> next;
        bool chainable = true;
        for (const DirectedEdge& e : boundary) {
            if (!next.emplace(e[0], e[1]).second) chainable = false;
        }
        if (chainable) {
            std::set<index_t> visited;
            for (const DirectedEdge& e : boundary) {
                if (visited.count(e[0])) continue;
                std::vector<index_t> loop;
                index_t v = e[0];
                while (!visited.count(v)) {
                    visited.insert(v);
                    loop.push_back(v);
                    auto it = next.find(v);
                    if (it == next.end()) {
                        chainable = false;
                        break;
                    }
                    v = it->second;
                }
                if (!chainable) break;
                rep.boundary_loops.push_back(std::move(loop));
            }
        }
        if (!chainable) rep.manifold = false;
    }
    return rep;
}

Shape close_holes(const Shape& shape) {
    ValidationReport rep = validate(shape);
    if (!rep.manifold || !rep.oriented)
        throw validation_error("close_holes requires a manifold, consistently oriented mesh");
    if (rep.closed) return shape;

    std::vector<Vec3> verts = shape.vertices();
    std::vector<Triangle> tris = shape.triangles();
    std::vector<bool> flags = shape.hole_triangle_flags();

    for (const auto& loop : rep.boundary_loops) {
        Vec3 bary{};
        for (index_t v : loop) bary += verts[v];
        bary = bary / static_cast<double>(loop.size());
        index_t c = static_cast<index_t>(verts.size());
        verts.push_back(bary);
        // The loop follows existing triangle orientation (a,b); patches must
        // supply the reversed direction (b,a), so each fan triangle is (b,a,c).
        for (std::size_t i = 0; i < loop.size(); ++i) {
            index_t a = loop[i];
            index_t b = loop[(i + 1) % loop.size()];
            tris.push_back({b, a, c});
            flags.push_back(true);
        }
    }
    return Shape::build(std::move(verts), std::move(tris), std::move(flags));
}

double triangle_regularity(const Shape& shape, index_t tri, const RegularityConfig& cfg) {
    if (tri < 0 || tri >= shape.num_triangles()) throw error("triangle index out of range");
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (shape.is_hole_triangle(tri)) return inf;

    const Triangle& t = shape.triangles()[tri];
    const auto& V = shape.vertices();
    if (!cfg.ignore_angle_filter) {
        for (int k = 0; k < 3; ++k) {
            Vec3 u = V[t[(k + 1) % 3]] - V[t[k]];
            Vec3 w = V[t[(k + 2) % 3]] - V[t[k]];
            double c = dot(u, w) / std::max(norm(u) * norm(w), 1e-300);
            double ang = std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / kPi;
            if (ang < cfg.min_angle_deg || ang > cfg.max_angle_deg) return inf;
        }
    }
    double mean_area = shape.mean_triangle_area();
    double score = std::abs(shape.triangle_areas()[tri] - mean_area) / std::max(mean_area, 1e-300);
    double curv = 0;
    for (int k = 0; k < 3; ++k) curv += std::abs(shape.vertex_curvature()[t[k]]);
    curv /= 3.0;
    score += cfg.curvature_weight * curv / std::max(shape.median_abs_curvature(), 1e-300);
    return score;
}

std::vector<index_t> triangles_by_regularity(const Shape& shape, const RegularityConfig& cfg) {
    std::vector<index_t> order;
    for (index_t t = 0; t < shape.num_triangles(); ++t)
        if (!shape.is_hole_triangle(t)) order.push_back(t);

    std::vector<double> score(shape.num_triangles(), 0.0);
    bool all_inf = true;
    for (index_t t : order) {
        score[t] = triangle_regularity(shape, t, cfg);
        if (std::isfinite(score[t])) all_inf = false;
    }
    if (all_inf) {
        RegularityConfig raw = cfg;
        raw.ignore_angle_filter = true;
        for (index_t t : order) score[t] = triangle_regularity(shape, t, raw);
    }
    std::stable_sort(order.begin(), order.end(), [&](index_t a, index_t b) {
        if (score[a] != score[b]) return score[a] < score[b];
        return a < b;
    });
    return order;
}

}  // namespace esm
