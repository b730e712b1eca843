#include "romkit/mesh.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "romkit/error.hpp"

namespace romkit {

namespace {

constexpr double coord_tol = 1e-12;

}  // namespace

std::string to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::top: return "top";
    case BoundaryTag::side: return "side";
    case BoundaryTag::base: return "base";
  }
  return "unknown";
}

double Mesh::signed_area(std::size_t cell) const {
  const auto& t = triangles[cell];
  const auto& a = nodes[t[0]];
  const auto& b = nodes[t[1]];
  const auto& c = nodes[t[2]];
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

std::array<double, 2> Mesh::centroid(std::size_t cell) const {
  const auto& t = triangles[cell];
  std::array<double, 2> c{0.0, 0.0};
  for (const Index v : t) {
    c[0] += nodes[v][0] / 3.0;
    c[1] += nodes[v][1] / 3.0;
  }
  return c;
}

double Mesh::subdomain_area(int tag) const {
  double area = 0.0;
  for (std::size_t c = 0; c < triangles.size(); ++c) {
    if (cell_subdomain[c] == tag) area += signed_area(c);
  }
  return area;
}

void classify_nodes(Mesh& mesh) {
  mesh.dirichlet_nodes.clear();
  mesh.free_nodes.clear();
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    if (std::abs(mesh.nodes[i][1] - 1.0) <= coord_tol) {
      mesh.dirichlet_nodes.push_back(static_cast<Index>(i));
    } else {
      mesh.free_nodes.push_back(static_cast<Index>(i));
    }
  }
}

Mesh build_thermal_block_mesh(int refine) {
  if (refine < 2) {
    fail(ErrorCode::invalid_argument, "refine must be >= 2, got " + std::to_string(refine));
  }
  Mesh mesh;
  mesh.refine = refine;
  const Index stride = refine + 1;
  // (2k - refine) / refine is exactly antisymmetric under k -> refine - k.
  auto coord = [&](int k) { return static_cast<double>(2 * k - refine) / refine; };

  mesh.nodes.reserve(static_cast<std::size_t>(stride * stride));
  for (int j = 0; j <= refine; ++j) {
    for (int i = 0; i <= refine; ++i) mesh.nodes.push_back({coord(i), coord(j)});
  }
  auto id = [&](int i, int j) { return static_cast<Index>(j) * stride + i; };

  mesh.triangles.reserve(2 * static_cast<std::size_t>(refine) * refine);
  for (int j = 0; j < refine; ++j) {
    for (int i = 0; i < refine; ++i) {
      const Index sw = id(i, j), se = id(i + 1, j), nw = id(i, j + 1), ne = id(i + 1, j + 1);
      // Union-jack pattern: each quadrant's diagonals run along the circle's
      // tangent there, mirror-symmetric about both axes.
      const bool left = 2 * i + 1 <= refine;
      const bool lower = 2 * j + 1 <= refine;
      if (left != lower) {
        mesh.triangles.push_back({sw, se, ne});
        mesh.triangles.push_back({sw, ne, nw});
      } else {
        mesh.triangles.push_back({sw, se, nw});
        mesh.triangles.push_back({se, ne, nw});
      }
    }
  }

  mesh.cell_subdomain.resize(mesh.triangles.size());
  for (std::size_t c = 0; c < mesh.triangles.size(); ++c) {
    const auto m = mesh.centroid(c);
    mesh.cell_subdomain[c] = std::hypot(m[0], m[1]) < Mesh::disk_radius ? 1 : 2;
  }

  for (int i = 0; i < refine; ++i) {
    mesh.boundary_edges.push_back({{id(i, 0), id(i + 1, 0)}, BoundaryTag::base});
  }
  for (int i = 0; i < refine; ++i) {
    mesh.boundary_edges.push_back({{id(i, refine), id(i + 1, refine)}, BoundaryTag::top});
  }
  for (int j = 0; j < refine; ++j) {
    mesh.boundary_edges.push_back({{id(0, j), id(0, j + 1)}, BoundaryTag::side});
    mesh.boundary_edges.push_back({{id(refine, j), id(refine, j + 1)}, BoundaryTag::side});
  }

  classify_nodes(mesh);
  return mesh;
}

void validate_mesh(const Mesh& mesh) {
  const auto n = static_cast<Index>(mesh.nodes.size());
  if (mesh.cell_subdomain.size() != mesh.triangles.size()) {
    fail(ErrorCode::invalid_argument, "mesh: subdomain tags do not match cell count");
  }
  double total = 0.0;
  for (std::size_t c = 0; c < mesh.triangles.size(); ++c) {
    for (const Index v : mesh.triangles[c]) {
      if (v < 0 || v >= n) fail(ErrorCode::invalid_argument, "mesh: node index out of range");
    }
    const double area = mesh.signed_area(c);
    if (!(area > 0.0)) {
      fail(ErrorCode::invalid_argument, "mesh: non-positive area in cell " + std::to_string(c));
    }
    total += area;
    const auto m = mesh.centroid(c);
    const int expected = std::hypot(m[0], m[1]) < Mesh::disk_radius ? 1 : 2;
    if (mesh.cell_subdomain[c] != expected) {
      fail(ErrorCode::invalid_argument, "mesh: wrong subdomain tag in cell " + std::to_string(c));
    }
  }
  if (std::abs(total - 4.0) > 1e-12) {
    fail(ErrorCode::invalid_argument, "mesh: cells do not cover the square");
  }
  std::size_t dirichlet = 0;
  for (const auto& p : mesh.nodes) {
    if (std::abs(p[1] - 1.0) <= coord_tol) ++dirichlet;
  }
  if (dirichlet != mesh.dirichlet_nodes.size() ||
      mesh.dirichlet_nodes.size() + mesh.free_nodes.size() != mesh.nodes.size()) {
    fail(ErrorCode::invalid_argument, "mesh: Dirichlet node set inconsistent with coordinates");
  }
}

nlohmann::json mesh_to_json(const Mesh& mesh) {
  nlohmann::json doc;
  doc["refine"] = mesh.refine;
  doc["nodes"] = mesh.nodes;
  doc["triangles"] = mesh.triangles;
  doc["subdomain"] = mesh.cell_subdomain;
  nlohmann::json boundary = {{"top", nlohmann::json::array()},
                             {"side", nlohmann::json::array()},
                             {"base", nlohmann::json::array()}};
  for (const auto& e : mesh.boundary_edges) boundary[to_string(e.tag)].push_back(e.nodes);
  doc["boundary"] = std::move(boundary);
  return doc;
}

Mesh mesh_from_json(const nlohmann::json& doc) {
  Mesh mesh;
  try {
    mesh.refine = doc.at("refine").get<int>();
    mesh.nodes = doc.at("nodes").get<std::vector<std::array<double, 2>>>();
    mesh.triangles = doc.at("triangles").get<std::vector<std::array<Index, 3>>>();
    mesh.cell_subdomain = doc.at("subdomain").get<std::vector<int>>();
    for (const auto tag : {BoundaryTag::top, BoundaryTag::side, BoundaryTag::base}) {
      for (const auto& e : doc.at("boundary").at(to_string(tag))) {
        mesh.boundary_edges.push_back({e.get<std::array<Index, 2>>(), tag});
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::invalid_argument, std::string("mesh JSON: ") + ex.what());
  }
  classify_nodes(mesh);
  validate_mesh(mesh);
  return mesh;
}

}  // namespace romkit
