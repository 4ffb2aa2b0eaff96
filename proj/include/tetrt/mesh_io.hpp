#pragma once

#include <filesystem>

#include "tetrt/tetmesh.hpp"

namespace tetrt {

// Little-endian binary dump of a CompactMesh (hot records plus side tables).
void save_compact(const CompactMesh& mesh, const std::filesystem::path& path);

// Throws ParseError on a truncated or foreign file, or one written with a
// different floating-point width.
CompactMesh load_compact(const std::filesystem::path& path);

}  // namespace tetrt
