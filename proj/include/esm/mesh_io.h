#pragma once

#include <optional>
#include <string>

#include "esm/mesh.h"

namespace esm {

enum class MeshFormat { OFF, PLY, OBJ };

// Guesses the format from the file extension; throws parse_error for unknown
// extensions.
MeshFormat format_from_path(const std::string& path);

// Per-vertex colors read from a PLY file, if any (values in [0,255]).
struct VertexColors {
    std::vector<std::array<std::uint8_t, 3>> rgb;
};

Shape load_shape(const std::string& path, MeshFormat format);
Shape load_shape(const std::string& path);  // format from extension

// Loads a PLY and returns per-vertex colors when the file carries them.
Shape load_shape_with_colors(const std::string& path, std::optional<VertexColors>& colors);

// ASCII PLY writer; colors optional (must match vertex count when present).
void save_ply(const std::string& path, const Shape& shape,
              const std::optional<VertexColors>& colors = std::nullopt);

void save_off(const std::string& path, const Shape& shape);

}  // namespace esm
