#pragma once

// Plain-text mesh format, one record per line:
//   v x y        vertex (0-based, in order of appearance)
//   t i j k      positively oriented triangle
//   e i j TAG    boundary edge with the domain on its left, TAG in {S, GAMMA}
// Coordinates are written with 17 significant digits so that a written mesh
// reads back to the same doubles.

#include "robinlab/geometry.hpp"

#include <filesystem>
#include <iosfwd>

namespace robinlab {

void write_mesh(std::ostream& os, const Mesh& mesh);
void write_mesh(const std::filesystem::path& path, const Mesh& mesh);

/// Parses the text format; the returned mesh carries Euclidean boundary data.
Mesh read_mesh(std::istream& is);
Mesh read_mesh(const std::filesystem::path& path);

}  // namespace robinlab
