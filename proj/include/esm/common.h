#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace esm {

using index_t = std::int32_t;

constexpr index_t kInvalidIndex = -1;

// Exception hierarchy. The CLI maps these onto distinct exit codes.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct parse_error : error {
    using error::error;
};
struct validation_error : error {
    using error::error;
};
struct infeasible_error : error {
    using error::error;
};
struct rounding_error : error {
    using error::error;
};

struct Vec3 {
    double x = 0, y = 0, z = 0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

using Triangle = std::array<index_t, 3>;
using DirectedEdge = std::array<index_t, 2>;

// Rotate a vertex triple so its smallest vertex comes first. Preserves
// orientation (cyclic rotation only).
inline Triangle canonical_rotation(const Triangle& t) {
    int k = 0;
    if (t[1] < t[k]) k = 1;
    if (t[2] < t[k]) k = 2;
    return {t[k], t[(k + 1) % 3], t[(k + 2) % 3]};
}

// FNV-1a over a byte buffer; used for file fingerprints in matching documents.
std::uint64_t fnv1a64(const void* data, std::size_t n);
std::string fnv1a64_file(const std::string& path);

}  // namespace esm
