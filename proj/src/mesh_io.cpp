#include "robinlab/mesh_io.hpp"

#include "robinlab/errors.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace robinlab {

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

void write_mesh(std::ostream& os, const Mesh& mesh) {
  for (const auto& v : mesh.vertices) os << "v " << fmt17(v.x()) << ' ' << fmt17(v.y()) << '\n';
  for (const auto& t : mesh.triangles) os << "t " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  const auto& s = *mesh.inner;
  for (const auto& e : s.edges) {
    os << "e " << s.nodes[e.second] << ' ' << s.nodes[e.first] << " S\n";
  }
  const auto& g = *mesh.outer;
  for (const auto& e : g.edges) {
    os << "e " << g.nodes[e.first] << ' ' << g.nodes[e.second] << " GAMMA\n";
  }
}

void write_mesh(const std::filesystem::path& path, const Mesh& mesh) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open mesh file for writing: " + path.string());
  write_mesh(os, mesh);
  if (!os) throw IoError("failed writing mesh file: " + path.string());
}

Mesh read_mesh(std::istream& is) {
  std::vector<Vec2> vertices;
  std::vector<std::array<Index, 3>> triangles;
  std::vector<std::array<Index, 2>> s_edges, g_edges;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;
    auto fail = [&]() {
      throw GeometryError("mesh line " + std::to_string(lineno) + ": malformed record '" + line + "'");
    };
    if (kind == "v") {
      double x = 0, y = 0;
      if (!(ls >> x >> y)) fail();
      vertices.emplace_back(x, y);
    } else if (kind == "t") {
      Index a = 0, b = 0, c = 0;
      if (!(ls >> a >> b >> c)) fail();
      triangles.push_back({a, b, c});
    } else if (kind == "e") {
      Index a = 0, b = 0;
      std::string tag;
      if (!(ls >> a >> b >> tag)) fail();
      if (tag == "S") {
        s_edges.push_back({a, b});
      } else if (tag == "GAMMA") {
        g_edges.push_back({a, b});
      } else {
        fail();
      }
    } else {
      fail();
    }
    std::string extra;
    if (ls >> extra) fail();
  }
  return finalize_mesh(std::move(vertices), std::move(triangles), s_edges, g_edges);
}

Mesh read_mesh(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open mesh file: " + path.string());
  return read_mesh(is);
}

}  // namespace robinlab
