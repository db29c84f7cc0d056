#include "robinlab/geometry.hpp"

#include "robinlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace robinlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double phi) {
  double a = std::fmod(phi, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a;
}

// Eigenvalues of a symmetric 2x2 matrix, ascending.
std::array<double, 2> symmetric_eigenvalues(const Mat2& m) {
  const double mean = 0.5 * (m(0, 0) + m(1, 1));
  const double diff = 0.5 * (m(0, 0) - m(1, 1));
  const double rad = std::hypot(diff, m(0, 1));
  return {mean - rad, mean + rad};
}

std::string format_point(const Vec2& x) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << x.x() << ", " << x.y() << ")";
  return os.str();
}

}  // namespace

std::string to_string(BoundaryTag tag) { return tag == BoundaryTag::S ? "S" : "GAMMA"; }

// ---------------------------------------------------------------------------
// MetricTensor

MetricTensor::MetricTensor(Field entries, double theta, std::string tag)
    : entries_(std::move(entries)), theta_(theta), tag_(std::move(tag)) {
  if (!(theta_ > 0.0)) {
    throw GeometryError("metric '" + tag_ + "': ellipticity constant theta must be positive");
  }
}

MetricTensor MetricTensor::identity() {
  MetricTensor m([](const Vec2&) { return Mat2::Identity().eval(); }, 1.0, "identity");
  m.euclidean_ = true;
  return m;
}

MetricTensor MetricTensor::constant(const Mat2& g) {
  if (std::abs(g(0, 1) - g(1, 0)) > 1e-14 * std::max(1.0, g.norm())) {
    throw GeometryError("constant metric is not symmetric");
  }
  const auto eig = symmetric_eigenvalues(g);
  if (!(eig[0] > 0.0)) {
    std::ostringstream os;
    os << "constant metric is not elliptic: smallest eigenvalue " << eig[0];
    throw GeometryError(os.str());
  }
  std::ostringstream tag;
  tag.precision(17);
  tag << "constant[" << g(0, 0) << "," << g(0, 1) << ";" << g(1, 0) << "," << g(1, 1) << "]";
  MetricTensor m([g](const Vec2&) { return g; }, eig[0], tag.str());
  m.euclidean_ = g.isIdentity(0.0);
  return m;
}

MetricTensor MetricTensor::conformal_sine(double amplitude) {
  if (!(std::abs(amplitude) < 1.0)) {
    throw GeometryError("conformal_sine metric needs |amplitude| < 1");
  }
  std::ostringstream tag;
  tag.precision(17);
  tag << "conformal_sine[" << amplitude << "]";
  return MetricTensor(
      [amplitude](const Vec2& x) {
        return ((1.0 + amplitude * std::sin(x.x())) * Mat2::Identity()).eval();
      },
      1.0 - std::abs(amplitude), tag.str());
}

MetricTensor MetricTensor::scaled(double c) const {
  if (!(c > 0.0)) throw GeometryError("metric scale factor must be positive");
  std::ostringstream tag;
  tag.precision(17);
  tag << tag_ << "*" << c;
  auto base = entries_;
  MetricTensor m([base, c](const Vec2& x) { return (c * base(x)).eval(); }, theta_ * c,
                 tag.str());
  return m;
}

MetricSample MetricTensor::eval(const Vec2& x) const {
  const Mat2 g = entries_(x);
  if (!g.allFinite()) {
    throw GeometryError("metric '" + tag_ + "' is not finite at x = " + format_point(x));
  }
  if (std::abs(g(0, 1) - g(1, 0)) > 1e-12 * std::max(1.0, g.norm())) {
    std::ostringstream os;
    os << "metric '" << tag_ << "' is not symmetric at x = " << format_point(x)
       << ": g12 = " << g(0, 1) << ", g21 = " << g(1, 0);
    throw GeometryError(os.str());
  }
  const auto eig = symmetric_eigenvalues(g);
  if (eig[0] < theta_ * (1.0 - 1e-12)) {
    std::ostringstream os;
    os.precision(17);
    os << "metric '" << tag_ << "' violates ellipticity at x = " << format_point(x)
       << ": smallest eigenvalue " << eig[0] << " < theta = " << theta_;
    throw GeometryError(os.str());
  }
  MetricSample s;
  s.g = g;
  s.g_inv = g.inverse();
  s.sqrt_det = std::sqrt(g.determinant());
  return s;
}

MetricSample metric_eval(const MetricTensor& metric, const Vec2& x) { return metric.eval(x); }

// ---------------------------------------------------------------------------
// Curves and domains

StarCurve::StarCurve(double r0, std::vector<double> c, std::vector<double> s, const Vec2& center)
    : r0_(r0), cos_(std::move(c)), sin_(std::move(s)), center_(center) {
  if (!(r0_ > 0.0) || !std::isfinite(r0_)) throw GeometryError("star curve: mean radius must be positive");
  constexpr int kSamples = 4096;
  for (int i = 0; i < kSamples; ++i) {
    const double phi = kTwoPi * i / kSamples;
    if (!(radius(phi) > 0.0)) {
      std::ostringstream os;
      os << "star curve: radius is not positive at phi = " << phi;
      throw GeometryError(os.str());
    }
  }
}

StarCurve StarCurve::circle(double radius, const Vec2& center) {
  return StarCurve(radius, {}, {}, center);
}

StarCurve StarCurve::harmonic(double r0, std::vector<double> cos_coeffs,
                              std::vector<double> sin_coeffs, const Vec2& center) {
  return StarCurve(r0, std::move(cos_coeffs), std::move(sin_coeffs), center);
}

double StarCurve::radius(double phi) const {
  double r = r0_;
  for (std::size_t k = 0; k < cos_.size(); ++k) r += cos_[k] * std::cos((k + 1) * phi);
  for (std::size_t k = 0; k < sin_.size(); ++k) r += sin_[k] * std::sin((k + 1) * phi);
  return r;
}

Vec2 StarCurve::point(double phi) const {
  return center_ + radius(phi) * Vec2(std::cos(phi), std::sin(phi));
}

bool StarCurve::is_circle() const {
  auto zero = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double c) { return c == 0.0; });
  };
  return zero(cos_) && zero(sin_);
}

AnnularDomain::AnnularDomain(StarCurve inner, StarCurve outer, double containment_margin)
    : inner_(std::move(inner)), outer_(std::move(outer)), margin_(containment_margin) {
  if (!(margin_ > 0.0)) throw GeometryError("annular domain: containment margin must be positive");
  if ((inner_.center() - outer_.center()).norm() > 0.0) {
    throw GeometryError("annular domain: inner and outer curves need a common center");
  }
  constexpr int kSamples = 4096;
  for (int i = 0; i < kSamples; ++i) {
    const double phi = kTwoPi * i / kSamples;
    const double gap = outer_.radius(phi) - inner_.radius(phi);
    if (gap < margin_) {
      std::ostringstream os;
      os << "annular domain: radial gap " << gap << " at phi = " << phi
         << " is below the containment margin " << margin_;
      throw GeometryError(os.str());
    }
  }
}

AnnularDomain AnnularDomain::circles(double inner_radius, double outer_radius) {
  return AnnularDomain(StarCurve::circle(inner_radius), StarCurve::circle(outer_radius));
}

// ---------------------------------------------------------------------------
// Mesh

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

double BoundaryLoop::measure() const {
  double total = 0.0;
  for (const auto& e : edges) total += e.induced_length();
  return total;
}

double BoundaryLoop::gauss_angle(Index edge, int gp) const {
  const Vec2 d = edges[edge].gauss_points[gp] - center;
  return wrap_angle(std::atan2(d.y(), d.x()));
}

namespace {

std::shared_ptr<BoundaryLoop> make_loop(BoundaryTag tag, const Vec2& center,
                                        std::vector<Index> nodes,
                                        const std::vector<Vec2>& vertices) {
  auto loop = std::make_shared<BoundaryLoop>();
  loop->tag = tag;
  loop->center = center;
  // Start at the node with the smallest polar angle; order is counterclockwise.
  std::vector<double> angles(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const Vec2 d = vertices[nodes[k]] - center;
    angles[k] = wrap_angle(std::atan2(d.y(), d.x()));
  }
  const auto first = static_cast<std::size_t>(
      std::min_element(angles.begin(), angles.end()) - angles.begin());
  std::rotate(nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(first), nodes.end());
  std::rotate(angles.begin(), angles.begin() + static_cast<std::ptrdiff_t>(first), angles.end());
  loop->nodes = std::move(nodes);
  loop->angles = std::move(angles);
  loop->positions.reserve(loop->nodes.size());
  for (Index v : loop->nodes) loop->positions.push_back(vertices[v]);
  const std::size_t n = loop->nodes.size();
  loop->edges.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    loop->edges[k].first = k;
    loop->edges[k].second = (k + 1) % n;
  }
  return loop;
}

void fill_loop_metric(BoundaryLoop& loop, const MetricTensor& metric) {
  const std::size_t n = loop.size();
  for (std::size_t k = 0; k < n; ++k) {
    auto& e = loop.edges[k];
    const Vec2& a = loop.positions[e.first];
    const Vec2& b = loop.positions[e.second];
    const Vec2 d = b - a;
    e.length = d.norm();
    if (!(e.length > 0.0)) {
      std::ostringstream os;
      os << "zero-length boundary edge on " << to_string(loop.tag) << " between loop nodes "
         << e.first << " and " << e.second;
      throw GeometryError(os.str());
    }
    const Vec2 tangent = d / e.length;
    // Nodes run counterclockwise: the right normal points away from the
    // enclosed region, which is outward of D on Gamma and inward on S.
    const Vec2 right(tangent.y(), -tangent.x());
    e.normal = loop.tag == BoundaryTag::Gamma ? right : Vec2(-right);
    for (int q = 0; q < 2; ++q) {
      const Vec2 x = a + kEdgeGaussParams[q] * d;
      const MetricSample ms = metric.eval(x);
      e.gauss_points[q] = x;
      const Vec2 raised = ms.g_inv * e.normal;
      e.conormal[q] = raised / std::sqrt(e.normal.dot(raised));
      e.weights[q] = 0.5 * e.length * std::sqrt(tangent.dot(ms.g * tangent));
    }
  }
  loop.node_weights.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double half = 0.5 * loop.edges[k].induced_length();
    loop.node_weights[loop.edges[k].first] += half;
    loop.node_weights[loop.edges[k].second] += half;
  }
  loop.metric_tag = metric.tag();
}

double polygon_area(const std::vector<Vec2>& pts) {
  double a = 0.0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const Vec2& p = pts[k];
    const Vec2& q = pts[(k + 1) % pts.size()];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

void fill_triangle_geometry(Mesh& mesh) {
  mesh.areas.resize(mesh.triangles.size());
  double h = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec2& a = mesh.vertices[tri[0]];
    const Vec2& b = mesh.vertices[tri[1]];
    const Vec2& c = mesh.vertices[tri[2]];
    const double area = signed_area(a, b, c);
    if (!(area > 0.0)) {
      std::ostringstream os;
      os << "triangle " << t << " has nonpositive signed area " << area;
      throw GeometryError(os.str());
    }
    mesh.areas[t] = area;
    h = std::max({h, (b - a).norm(), (c - b).norm(), (a - c).norm()});
  }
  mesh.h = h;
}

}  // namespace

Mesh boundary_normals(Mesh mesh, const MetricTensor& metric) {
  if (!mesh.inner || !mesh.outer) throw GeometryError("mesh has no boundary loops");
  auto inner = std::make_shared<BoundaryLoop>(*mesh.inner);
  auto outer = std::make_shared<BoundaryLoop>(*mesh.outer);
  fill_loop_metric(*inner, metric);
  fill_loop_metric(*outer, metric);
  mesh.inner = inner;
  mesh.outer = outer;
  mesh.volume_weights.resize(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec2 bary =
        (mesh.vertices[tri[0]] + mesh.vertices[tri[1]] + mesh.vertices[tri[2]]) / 3.0;
    mesh.volume_weights[t] = mesh.areas[t] * metric.eval(bary).sqrt_det;
  }
  mesh.metric_tag = metric.tag();
  return mesh;
}

Mesh build_annular_mesh(const AnnularDomain& domain, int n_radial, int n_angular) {
  if (n_radial < 2) throw GeometryError("build_annular_mesh: n_radial must be at least 2");
  if (n_angular < 8) throw GeometryError("build_annular_mesh: n_angular must be at least 8");
  const auto nr = static_cast<Index>(n_radial);
  const auto na = static_cast<Index>(n_angular);
  Mesh mesh;
  mesh.center = domain.inner().center();
  mesh.vertices.reserve((nr + 1) * na);
  for (Index i = 0; i <= nr; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(nr);
    for (Index j = 0; j < na; ++j) {
      const double phi = kTwoPi * static_cast<double>(j) / static_cast<double>(na);
      const double rho = (1.0 - s) * domain.inner().radius(phi) + s * domain.outer().radius(phi);
      mesh.vertices.push_back(mesh.center + rho * Vec2(std::cos(phi), std::sin(phi)));
    }
  }
  auto id = [na](Index i, Index j) { return i * na + (j % na); };
  mesh.triangles.reserve(2 * nr * na);
  for (Index i = 0; i < nr; ++i) {
    for (Index j = 0; j < na; ++j) {
      mesh.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      mesh.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  fill_triangle_geometry(mesh);
  std::vector<Index> inner_nodes(na), outer_nodes(na);
  for (Index j = 0; j < na; ++j) {
    inner_nodes[j] = id(0, j);
    outer_nodes[j] = id(nr, j);
  }
  mesh.inner = make_loop(BoundaryTag::S, mesh.center, std::move(inner_nodes), mesh.vertices);
  mesh.outer = make_loop(BoundaryTag::Gamma, mesh.center, std::move(outer_nodes), mesh.vertices);
  return boundary_normals(std::move(mesh), MetricTensor::identity());
}

Mesh finalize_mesh(std::vector<Vec2> vertices, std::vector<std::array<Index, 3>> triangles,
                   const std::vector<std::array<Index, 2>>& s_edges,
                   const std::vector<std::array<Index, 2>>& gamma_edges) {
  Mesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.triangles = std::move(triangles);
  for (const auto& tri : mesh.triangles) {
    for (Index v : tri) {
      if (v >= mesh.vertices.size()) throw GeometryError("triangle references a missing vertex");
    }
  }
  fill_triangle_geometry(mesh);

  // Walk oriented edges into an ordered chain; reject anything that is not a
  // single closed loop.
  auto chain = [&](const std::vector<std::array<Index, 2>>& edges, const char* name) {
    if (edges.size() < 3) throw GeometryError(std::string("boundary ") + name + " has fewer than 3 edges");
    std::unordered_map<Index, Index> next;
    for (const auto& e : edges) {
      if (e[0] >= mesh.vertices.size() || e[1] >= mesh.vertices.size()) {
        throw GeometryError(std::string("boundary ") + name + " references a missing vertex");
      }
      if (!next.emplace(e[0], e[1]).second) {
        throw GeometryError(std::string("boundary ") + name + " is not a simple closed loop");
      }
    }
    std::vector<Index> nodes;
    Index v = edges.front()[0];
    for (std::size_t k = 0; k < edges.size(); ++k) {
      nodes.push_back(v);
      auto it = next.find(v);
      if (it == next.end()) throw GeometryError(std::string("boundary ") + name + " is not closed");
      v = it->second;
    }
    if (v != edges.front()[0]) {
      throw GeometryError(std::string("boundary ") + name + " does not form one closed loop");
    }
    return nodes;
  };
  std::vector<Index> s_nodes = chain(s_edges, "S");
  std::vector<Index> g_nodes = chain(gamma_edges, "GAMMA");
  // Domain on the left: Gamma runs counterclockwise, S clockwise.
  std::reverse(s_nodes.begin(), s_nodes.end());
  std::vector<Vec2> s_pts;
  for (Index v : s_nodes) s_pts.push_back(mesh.vertices[v]);
  std::vector<Vec2> g_pts;
  for (Index v : g_nodes) g_pts.push_back(mesh.vertices[v]);
  if (!(polygon_area(s_pts) > 0.0) || !(polygon_area(g_pts) > 0.0)) {
    throw GeometryError("boundary loops are not oriented with the domain on the left");
  }
  Vec2 center = Vec2::Zero();
  for (const auto& p : s_pts) center += p;
  center /= static_cast<double>(s_pts.size());
  mesh.center = center;
  mesh.inner = make_loop(BoundaryTag::S, center, std::move(s_nodes), mesh.vertices);
  mesh.outer = make_loop(BoundaryTag::Gamma, center, std::move(g_nodes), mesh.vertices);
  return boundary_normals(std::move(mesh), MetricTensor::identity());
}

Mesh discretize(const AnnularDomain& domain, const MetricTensor& metric, int n_radial,
                int n_angular) {
  return boundary_normals(build_annular_mesh(domain, n_radial, n_angular), metric);
}

}  // namespace robinlab
