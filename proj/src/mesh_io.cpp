#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "sigmalab/error.hpp"
#include "sigmalab/geometry.hpp"

namespace sigmalab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonPositiveRadius: return "NonPositiveRadius";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::MeshQualityFailure: return "MeshQualityFailure";
    case ErrorCode::MeshFormat: return "MeshFormat";
    case ErrorCode::NotStrictlyConvex: return "NotStrictlyConvex";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::A0OutOfRange: return "A0OutOfRange";
    case ErrorCode::SolveFailure: return "SolveFailure";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::MeshMismatch: return "MeshMismatch";
    case ErrorCode::InsufficientBins: return "InsufficientBins";
    case ErrorCode::OriginDerivative: return "OriginDerivative";
    case ErrorCode::ODEStep: return "ODEStep";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::OrderingViolation: return "OrderingViolation";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << "nodes " << mesh.nodes.size() << " triangles " << mesh.triangles.size() << '\n';
  for (const auto& p : mesh.nodes) out << format_double(p.x()) << ' ' << format_double(p.y()) << '\n';
  for (const auto& t : mesh.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& b : mesh.boundary_nodes) out << "b " << b.node << ' ' << format_double(b.t) << '\n';
}

Mesh read_mesh(std::istream& in) {
  Mesh mesh;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::MeshFormat, "line " + std::to_string(line_no) + ": " + why);
  };
  if (!std::getline(in, line)) fail("empty mesh file");
  ++line_no;
  std::size_t n_nodes = 0, n_tris = 0;
  {
    std::istringstream header(line);
    std::string w1, w2;
    if (!(header >> w1 >> n_nodes >> w2 >> n_tris) || w1 != "nodes" || w2 != "triangles") {
      fail("expected 'nodes N triangles M'");
    }
  }
  mesh.nodes.reserve(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    if (!std::getline(in, line)) fail("truncated node block");
    ++line_no;
    std::istringstream ls(line);
    double x, y;
    if (!(ls >> x >> y)) fail("expected 'x y'");
    mesh.nodes.emplace_back(x, y);
  }
  mesh.triangles.reserve(n_tris);
  for (std::size_t i = 0; i < n_tris; ++i) {
    if (!std::getline(in, line)) fail("truncated triangle block");
    ++line_no;
    std::istringstream ls(line);
    int a, b, c;
    if (!(ls >> a >> b >> c)) fail("expected 'i j k'");
    for (int v : {a, b, c}) {
      if (v < 0 || static_cast<std::size_t>(v) >= n_nodes) fail("node index out of range");
    }
    mesh.triangles.push_back({a, b, c});
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    int idx;
    double t;
    if (!(ls >> tag >> idx >> t) || tag != "b") fail("expected 'b idx t'");
    if (idx < 0 || static_cast<std::size_t>(idx) >= n_nodes) fail("boundary index out of range");
    mesh.boundary_nodes.push_back({idx, t});
    mesh.boundary_length = std::max(mesh.boundary_length, t);
  }
  // Perimeter of the boundary polygon is the parameter period for imported meshes.
  if (!mesh.boundary_nodes.empty()) {
    const auto poly = mesh.boundary_polygon();
    double perimeter = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) perimeter += (poly[(i + 1) % poly.size()] - poly[i]).norm();
    mesh.boundary_length = std::max(mesh.boundary_length, perimeter);
  }
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) mesh.h = std::max(mesh.h, mesh.diameter(t));
  return mesh;
}

}  // namespace sigmalab
