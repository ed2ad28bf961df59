#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "simlmc/mesh.hpp"

namespace simlmc::fem {

// Plain-text mesh format, one file per level named mesh_l{l}.txt:
//
//   nodes N        followed by N lines  "id x y"
//   elements M     followed by M lines  "id n0 n1 n2 n3"
//   dirichlet K    followed by K node ids
//   neumann J      followed by J lines  "elem edge tx ty"
//
// Ids are zero-based and must appear in order. Rollers are not representable.

Mesh2D read_mesh(std::istream& in, const std::string& source_name = "<stream>");
Mesh2D read_mesh_file(const std::filesystem::path& path);

void write_mesh(std::ostream& out, const Mesh2D& mesh);
void write_mesh_file(const std::filesystem::path& path, const Mesh2D& mesh);

std::filesystem::path level_file(const std::filesystem::path& dir, std::size_t level);

/// Reads mesh_l0.txt, mesh_l1.txt, ... from `dir` until the next file is missing,
/// then validates nesting. Throws Error naming the path when mesh_l0.txt is absent.
MeshHierarchy load_mesh_hierarchy(const std::filesystem::path& dir);

void save_mesh_hierarchy(const std::filesystem::path& dir, const MeshHierarchy& hierarchy);

}  // namespace simlmc::fem
