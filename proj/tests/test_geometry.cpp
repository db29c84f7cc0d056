#include "robinlab/errors.hpp"
#include "robinlab/geometry.hpp"
#include "robinlab/mesh_io.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace robinlab;
using std::numbers::pi;

namespace {

double area_sum(const Mesh& m) {
  double a = 0.0;
  for (double w : m.volume_weights) a += w;
  return a;
}

}  // namespace

TEST_CASE("metric evaluation") {
  const Vec2 x(0.3, -1.2);
  const MetricSample id = metric_eval(MetricTensor::identity(), x);
  CHECK(id.g.isApprox(Mat2::Identity()));
  CHECK(id.g_inv.isApprox(Mat2::Identity()));
  CHECK(id.sqrt_det == doctest::Approx(1.0));

  Mat2 d = Mat2::Zero();
  d(0, 0) = 4.0;
  d(1, 1) = 1.0;
  const MetricSample diag = metric_eval(MetricTensor::constant(d), x);
  CHECK(diag.g_inv(0, 0) == doctest::Approx(0.25));
  CHECK(diag.g_inv(1, 1) == doctest::Approx(1.0));
  CHECK(diag.sqrt_det == doctest::Approx(2.0));

  // (1 + 0.1 sin x1) I at x1 = pi/2: det = 1.1^2.
  const MetricSample s = metric_eval(MetricTensor::conformal_sine(0.1), Vec2(pi / 2, 0.7));
  CHECK(s.sqrt_det == doctest::Approx(1.1).epsilon(1e-14));
}

TEST_CASE("mesh counts for a coarse annulus") {
  const Mesh m = build_annular_mesh(AnnularDomain::circles(1.0, 2.0), 2, 8);
  CHECK(m.num_vertices() == 24);
  CHECK(m.triangles.size() == 32);
  CHECK(m.inner->edges.size() == 8);
  CHECK(m.outer->edges.size() == 8);
  for (const auto& t : m.triangles) {
    CHECK(signed_area(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]) > 0.0);
  }
}

TEST_CASE("refinement halves h") {
  const AnnularDomain d = AnnularDomain::circles(1.0, 2.0);
  const Mesh a = build_annular_mesh(d, 8, 64);
  const Mesh b = build_annular_mesh(d, 16, 128);
  CHECK(a.h / b.h == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("degenerate domains are rejected") {
  CHECK_THROWS_AS(AnnularDomain::circles(1.0, 1.0), GeometryError);
  CHECK_THROWS_AS(AnnularDomain::circles(2.0, 1.0), GeometryError);
  CHECK_THROWS_AS(build_annular_mesh(AnnularDomain::circles(1.0, 2.0), 0, 8), Error);
}

TEST_CASE("normals on the inner circle point into the hole") {
  const Mesh m = discretize(AnnularDomain::circles(1.0, 2.0), MetricTensor::identity(), 4, 64);
  const BoundaryLoop& s = *m.inner;
  std::size_t best = 0;
  double best_dist = 1e9;
  for (std::size_t e = 0; e < s.edges.size(); ++e) {
    const Vec2 mid = 0.5 * (m.vertices[s.edges[e].first] + m.vertices[s.edges[e].second]);
    const double dist = std::abs(std::atan2(mid.y(), mid.x()));
    if (dist < best_dist) {
      best_dist = dist;
      best = e;
    }
  }
  const Vec2 n = s.edges[best].normal;
  CHECK(n.x() == doctest::Approx(-1.0).epsilon(1e-2));
  CHECK(std::abs(n.y()) < 0.06);
}

TEST_CASE("Euclidean conormal equals the normal") {
  const Mesh m = discretize(AnnularDomain::circles(1.0, 2.0), MetricTensor::identity(), 4, 32);
  for (const auto* loop : {m.inner.get(), m.outer.get()}) {
    for (const auto& e : loop->edges) {
      CHECK((e.conormal[0] - e.normal).norm() < 1e-14);
      CHECK((e.conormal[1] - e.normal).norm() < 1e-14);
    }
  }
}

TEST_CASE("perimeter and area converge at second order") {
  const AnnularDomain d = AnnularDomain::circles(1.0, 2.0);
  double prev_perim = 0.0, prev_area = 0.0;
  for (int k = 0; k < 3; ++k) {
    const Mesh m = discretize(d, MetricTensor::identity(), 4 << k, 32 << k);
    const double perim_err = std::abs(m.outer->measure() - 4.0 * pi);
    const double area_err = std::abs(area_sum(m) - 3.0 * pi);
    CHECK(perim_err < 0.05);
    CHECK(area_err < 0.1);
    if (k > 0) {
      CHECK(prev_perim / perim_err >= 3.0);
      CHECK(prev_area / area_err >= 3.0);
    }
    prev_perim = perim_err;
    prev_area = area_err;
  }
}

TEST_CASE("metric scaling keeps the conormal direction and unit g-length") {
  Mat2 g;
  g << 4.0, 0.5, 0.5, 1.0;
  const MetricTensor base = MetricTensor::constant(g);
  const MetricTensor big = base.scaled(3.0);
  const AnnularDomain d = AnnularDomain::circles(1.0, 2.0);
  const Mesh a = discretize(d, base, 3, 24);
  const Mesh b = discretize(d, big, 3, 24);
  for (std::size_t e = 0; e < a.outer->edges.size(); ++e) {
    for (int q = 0; q < 2; ++q) {
      const Vec2 na = a.outer->edges[e].conormal[q];
      const Vec2 nb = b.outer->edges[e].conormal[q];
      CHECK((na.normalized() - nb.normalized()).norm() < 1e-12);
      CHECK(std::sqrt(na.dot(g * na)) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::sqrt(nb.dot(3.0 * g * nb)) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("star-shaped curves give a valid mesh") {
  const AnnularDomain d(StarCurve::harmonic(1.0, {0.0, 0.1}, {0.05}),
                        StarCurve::harmonic(2.5, {0.0, 0.0, 0.2}, {}));
  const Mesh m = discretize(d, MetricTensor::conformal_sine(0.2), 6, 48);
  for (const auto& t : m.triangles) {
    CHECK(signed_area(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]) > 0.0);
  }
  CHECK(m.inner->size() == 48);
}

TEST_CASE("intersecting curves are rejected") {
  CHECK_THROWS_AS(AnnularDomain(StarCurve::harmonic(1.0, {0.9}, {}), StarCurve::circle(1.5)),
                  GeometryError);
}

TEST_CASE("mesh text format round-trips") {
  const Mesh m = discretize(AnnularDomain::circles(1.0, 2.0), MetricTensor::identity(), 3, 16);
  std::stringstream ss;
  write_mesh(ss, m);
  const Mesh r = read_mesh(ss);
  REQUIRE(r.num_vertices() == m.num_vertices());
  for (std::size_t k = 0; k < m.num_vertices(); ++k) CHECK(r.vertices[k] == m.vertices[k]);
  CHECK(r.triangles == m.triangles);
  CHECK(r.inner->nodes == m.inner->nodes);
  CHECK(r.outer->nodes == m.outer->nodes);
}

TEST_CASE("malformed mesh text is rejected") {
  std::stringstream ss("v 0 0\nv 1 0\nt 0 1 2\n");
  CHECK_THROWS_AS(read_mesh(ss), Error);
}
