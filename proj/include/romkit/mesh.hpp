#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "romkit/sparse.hpp"

namespace romkit {

enum class BoundaryTag { top, side, base };

struct BoundaryEdge {
  std::array<Index, 2> nodes;
  BoundaryTag tag;
};

/// Triangulation of the thermal-block square (-1,1)^2.
///
/// Subdomain 1 is the disk of radius 0.5 centred at the origin (assigned by
/// cell centroid), subdomain 2 is the rest. Nodes on y = 1 carry the
/// homogeneous Dirichlet condition.
struct Mesh {
  static constexpr double disk_radius = 0.5;

  std::vector<std::array<double, 2>> nodes;
  std::vector<std::array<Index, 3>> triangles;
  std::vector<int> cell_subdomain;
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<Index> dirichlet_nodes;
  std::vector<Index> free_nodes;
  int refine = 0;

  std::size_t node_count() const { return nodes.size(); }
  std::size_t cell_count() const { return triangles.size(); }

  double signed_area(std::size_t cell) const;
  std::array<double, 2> centroid(std::size_t cell) const;
  double subdomain_area(int tag) const;
};

/// refine x refine squares, each split into two triangles. Diagonals follow
/// a union-jack pattern (mirrored about both axes), so for even refine the
/// mesh is symmetric under x -> -x and the disk boundary is cut along its
/// tangent rather than as a staircase.
Mesh build_thermal_block_mesh(int refine);

/// Recomputes Dirichlet/free node sets from coordinates.
void classify_nodes(Mesh& mesh);

/// Throws invalid_argument if any mesh invariant is violated.
void validate_mesh(const Mesh& mesh);

nlohmann::json mesh_to_json(const Mesh& mesh);
Mesh mesh_from_json(const nlohmann::json& doc);

std::string to_string(BoundaryTag tag);

}  // namespace romkit
