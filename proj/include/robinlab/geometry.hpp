#pragma once

// Metric tensors, star-shaped boundary curves, annular domains and the
// structured triangulation of the region between two curves.
//
// The domain D is bounded by an inner curve S (inaccessible) and an outer
// curve Gamma (accessible). Everything is two-dimensional; formulas follow
// the index conventions of the general n-dimensional setting.

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace robinlab {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Index = std::size_t;

enum class BoundaryTag { S, Gamma };

std::string to_string(BoundaryTag tag);

/// g, its inverse and sqrt(det g) at one point.
struct MetricSample {
  Mat2 g;
  Mat2 g_inv;
  double sqrt_det = 1.0;
};

/// Symmetric, uniformly elliptic metric field g_{jk}(x).
///
/// Entries are validated lazily at every evaluation: a non-symmetric matrix or
/// one whose smallest eigenvalue drops below theta raises GeometryError naming
/// the point and the eigenvalue.
class MetricTensor {
 public:
  using Field = std::function<Mat2(const Vec2&)>;

  MetricTensor(Field entries, double theta, std::string tag);

  static MetricTensor identity();
  /// Constant matrix; theta is its smallest eigenvalue.
  static MetricTensor constant(const Mat2& g);
  /// (1 + amplitude * sin x_1) * I, |amplitude| < 1.
  static MetricTensor conformal_sine(double amplitude);

  MetricSample eval(const Vec2& x) const;
  /// Raw entries without validation.
  Mat2 entries(const Vec2& x) const { return entries_(x); }

  double theta() const { return theta_; }
  const std::string& tag() const { return tag_; }
  bool is_euclidean() const { return euclidean_; }

  /// c * g, same tag suffixed with the factor.
  MetricTensor scaled(double c) const;

 private:
  Field entries_;
  double theta_;
  std::string tag_;
  bool euclidean_ = false;
};

/// metric_eval: validated (g, g^{-1}, sqrt|g|) at x.
MetricSample metric_eval(const MetricTensor& metric, const Vec2& x);

/// Star-shaped closed curve x(phi) = center + rho(phi) (cos phi, sin phi),
/// rho(phi) = r0 + sum_k (c_k cos k phi + s_k sin k phi).
class StarCurve {
 public:
  static StarCurve circle(double radius, const Vec2& center = Vec2::Zero());
  static StarCurve harmonic(double r0, std::vector<double> cos_coeffs,
                            std::vector<double> sin_coeffs,
                            const Vec2& center = Vec2::Zero());

  double radius(double phi) const;
  Vec2 point(double phi) const;
  const Vec2& center() const { return center_; }
  double mean_radius() const { return r0_; }
  const std::vector<double>& cos_coeffs() const { return cos_; }
  const std::vector<double>& sin_coeffs() const { return sin_; }
  bool is_circle() const;

 private:
  StarCurve(double r0, std::vector<double> c, std::vector<double> s, const Vec2& center);
  double r0_;
  std::vector<double> cos_;
  std::vector<double> sin_;
  Vec2 center_;
};

/// D = Omega \ closure(B), with S = inner and Gamma = outer.
class AnnularDomain {
 public:
  AnnularDomain(StarCurve inner, StarCurve outer, double containment_margin = 1e-3);

  static AnnularDomain circles(double inner_radius, double outer_radius);

  const StarCurve& inner() const { return inner_; }
  const StarCurve& outer() const { return outer_; }
  double containment_margin() const { return margin_; }
  bool is_concentric_circles() const { return inner_.is_circle() && outer_.is_circle(); }

 private:
  StarCurve inner_;
  StarCurve outer_;
  double margin_;
};

/// Two-point Gauss rule on [0, 1].
inline constexpr std::array<double, 2> kEdgeGaussParams = {0.21132486540518711775,
                                                           0.78867513459481288225};

struct BoundaryEdge {
  /// Positions in the loop's node list; edge k joins node k and node k + 1.
  Index first = 0;
  Index second = 0;
  double length = 0.0;  // Euclidean
  Vec2 normal = Vec2::Zero();  // Euclidean outward unit normal of D
  std::array<Vec2, 2> gauss_points{};
  std::array<Vec2, 2> conormal{};  // nu_g at the Gauss points
  std::array<double, 2> weights{};  // dS_g quadrature weights
  double induced_length() const { return weights[0] + weights[1]; }
};

/// One closed boundary component, nodes ordered by increasing polar angle.
struct BoundaryLoop {
  BoundaryTag tag = BoundaryTag::S;
  Vec2 center = Vec2::Zero();
  std::vector<Index> nodes;  // mesh vertex indices
  std::vector<Vec2> positions;
  std::vector<double> angles;  // polar angle about center, in [0, 2pi)
  std::vector<BoundaryEdge> edges;
  std::vector<double> node_weights;  // trapezoidal dS_g
  std::string metric_tag;

  std::size_t size() const { return nodes.size(); }
  double measure() const;
  /// Polar angle of an edge Gauss point.
  double gauss_angle(Index edge, int gp) const;
};

using LoopPtr = std::shared_ptr<const BoundaryLoop>;

/// Conforming P1 triangulation of D with tagged boundary loops.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<Index, 3>> triangles;
  LoopPtr inner;  // S
  LoopPtr outer;  // Gamma
  Vec2 center = Vec2::Zero();
  double h = 0.0;  // maximal edge length
  std::vector<double> areas;  // Euclidean triangle areas
  std::vector<double> volume_weights;  // sqrt|g(barycenter)| * area
  std::string metric_tag;

  const BoundaryLoop& loop(BoundaryTag tag) const {
    return tag == BoundaryTag::S ? *inner : *outer;
  }
  LoopPtr loop_ptr(BoundaryTag tag) const { return tag == BoundaryTag::S ? inner : outer; }
  std::size_t num_vertices() const { return vertices.size(); }
};

/// Transfinite interpolation grid between the two curves: n_radial layers of
/// n_angular quads, each split into two triangles. Boundary data are filled for
/// the Euclidean metric.
Mesh build_annular_mesh(const AnnularDomain& domain, int n_radial, int n_angular);

/// Recomputes normals, conormals nu_g, dS_g edge weights, trapezoidal node
/// weights and dV_g triangle weights for the given metric.
Mesh boundary_normals(Mesh mesh, const MetricTensor& metric);

/// Builds the loop structure from oriented edges (domain on the left) and
/// fills Euclidean boundary quantities. Used by the mesh reader.
Mesh finalize_mesh(std::vector<Vec2> vertices, std::vector<std::array<Index, 3>> triangles,
                   const std::vector<std::array<Index, 2>>& s_edges,
                   const std::vector<std::array<Index, 2>>& gamma_edges);

/// Convenience: mesh + metric data for a domain.
Mesh discretize(const AnnularDomain& domain, const MetricTensor& metric, int n_radial,
                int n_angular);

/// Signed area of the triangle (a, b, c).
double signed_area(const Vec2& a, const Vec2& b, const Vec2& c);

}  // namespace robinlab
