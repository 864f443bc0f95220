#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stit/vec.hpp"

namespace stit {

/// Unit vector in R^l. Construction checks the norm to within 1e-12.
class Direction {
 public:
  explicit Direction(Vec unit);

  // Normalizes a nonzero vector.
  static Direction normalized(const Vec& v);
  // (cos phi, sin phi).
  static Direction from_angle(double phi);
  // +e_axis (sign > 0) or -e_axis.
  static Direction axis(int dim, int axis, int sign = 1);

  const Vec& vec() const { return u_; }
  int dim() const { return static_cast<int>(u_.size()); }
  double operator[](int i) const { return u_(i); }
  Direction operator-() const { return Direction(Vec(-u_)); }

 private:
  Vec u_;
};

/// H(alpha, u) = {x : <x,u> = alpha} with alpha >= 0.
///
/// H^+ = {<x,u> >= alpha}, H^- = {<x,u> <= alpha}. H(0,u) and H(0,-u) are the
/// same hyperplane and compare equal.
class Hyperplane {
 public:
  Hyperplane(double offset, Direction normal);

  // {<x,u> = x0} for any real x0; flips the normal when x0 < 0.
  static Hyperplane from_signed(double x0, const Direction& u);

  double offset() const { return offset_; }
  const Direction& normal() const { return normal_; }
  int dim() const { return normal_.dim(); }

  // <x,u> - alpha: positive on the H^+ side.
  double signed_distance(const Vec& x) const { return x.dot(normal_.vec()) - offset_; }

  bool operator==(const Hyperplane& other) const;

 private:
  double offset_;
  Direction normal_;
};

/// Where a facet of a cell came from.
struct FacetTag {
  enum class Kind : std::uint8_t { kWindow, kCut };

  Kind kind = Kind::kWindow;
  // Window facet index (0-based, see Window) or jump id.
  std::uint64_t index = 0;

  static FacetTag window(std::uint64_t i) { return {Kind::kWindow, i}; }
  static FacetTag cut(std::uint64_t jump_id) { return {Kind::kCut, jump_id}; }
  bool is_window() const { return kind == Kind::kWindow; }
  bool operator==(const FacetTag&) const = default;
  std::string to_string() const;
};

/// Facet half-space {<x, normal> <= offset} with outward unit normal.
struct Facet {
  Vec normal;
  double offset;
  FacetTag tag;
};

/// Bounded convex polytope with nonempty interior.
///
/// Stored as its vertex list plus, per vertex, the sorted indices of the
/// facets through it. In 2D the vertex list is counter-clockwise. Values are
/// immutable once built; every operation returns a new polytope.
class Polytope {
 public:
  // The empty polytope. Most queries on it throw DomainError.
  Polytope() = default;

  // Axis-parallel box [lo, hi]. Facet i < l is {x_i = hi_i} (normal +e_i),
  // facet i >= l is {x_{i-l} = lo_{i-l}} (normal -e_{i-l}); tags default to
  // WindowFacet(i).
  static Polytope box(const Vec& lo, const Vec& hi, std::vector<FacetTag> tags = {});

  // Strictly convex polygon from counter-clockwise vertices. Edge k runs from
  // vertex k to vertex k+1 and gets tags[k] (default WindowFacet(k)).
  static Polytope polygon(std::vector<Vec> ccw, std::vector<FacetTag> tags = {});

  bool empty() const { return vertices_.empty(); }
  int dim() const { return dim_; }
  std::span<const Vec> vertices() const { return vertices_; }
  std::span<const int> incidence(std::size_t vertex) const { return incidence_[vertex]; }
  const std::vector<Facet>& facets() const { return facets_; }

  double support(const Vec& u) const;
  double width(const Vec& u) const { return support(u) + support(-u); }
  // Largest vertex-to-vertex distance.
  double diameter() const;
  // Area in 2D, volume in general.
  double volume() const;
  // Area centroid in 2D; vertex average for l >= 3.
  Vec centroid() const;
  // Boundary length (2D only).
  double perimeter() const;

  // x satisfies every facet inequality with slack `tol`.
  bool contains(const Vec& x, double tol = kGeomEps) const;
  // Every point of `pts` lies strictly inside (margin `tol`).
  bool contains_strictly(std::span<const Vec> pts, double tol = kGeomEps) const;
  bool has_window_facet() const;

  Polytope scaled(double r) const;
  Polytope translated(const Vec& v) const;

  // P n {<x,normal> <= offset}; the new facet gets `tag`. Vertices within
  // kGeomEps of the plane count as on it. Returns the empty polytope when the
  // intersection has empty interior and P itself when the plane does not cut.
  Polytope clipped(const Vec& normal, double offset, FacetTag tag) const;

 private:
  // Merges near-duplicate vertices, drops facets touching fewer than l
  // vertices, reindexes, and orders 2D loops counter-clockwise.
  static Polytope assemble(int dim, std::vector<Vec> vertices,
                           std::vector<std::vector<int>> incidence, std::vector<Facet> facets);
  void sort_ccw();

  int dim_ = 0;
  std::vector<Vec> vertices_;
  std::vector<std::vector<int>> incidence_;
  std::vector<Facet> facets_;
};

// Free-function forms of the queries above; throw DomainError on empty P.
double support(const Polytope& p, const Direction& u);
double width(const Polytope& p, const Direction& u);

// Support of a finite point set (e.g. facet vertices of a window).
double support(std::span<const Vec> pts, const Vec& u);

struct SplitResult {
  Polytope plus;   // P n H^+
  Polytope minus;  // P n H^-
};

// Divides P by H. Returns nullopt when H misses int(P) (all vertices on one
// side up to kGeomEps) and, for l >= 3, when H passes within kGeomEps of a
// vertex; callers resample in that case. The new facet of both
// parts is tagged Cut(jump_id).
std::optional<SplitResult> split(const Polytope& p, const Hyperplane& h, std::uint64_t jump_id);

// H n int(P) != 0 (with tolerance kGeomEps).
bool hits_interior(const Hyperplane& h, std::span<const Vec> pts);
bool hits_interior(const Hyperplane& h, const Polytope& p);

// H separates A and B: (A in H^+ and B in H^-) or (A in H^- and B in H^+).
bool separates(const Hyperplane& h, std::span<const Vec> a, std::span<const Vec> b);
bool separates(const Hyperplane& h, const Polytope& a, const Polytope& b);

// A n B as a polytope (empty if the interiors do not meet). Facets of the
// result keep the tags they had in A or B.
Polytope intersect(const Polytope& a, const Polytope& b);

/// The cube [-a, a]^l.
///
/// Facet i (0-based) for i < l lies in {x_i = a}; facet i + l = -facet i.
struct Window {
  double half_side;
  int dim;

  Window(double half_side, int dim);

  Polytope polytope() const;
  double volume() const;
  // Vertices of facet i (2^(l-1) points).
  std::vector<Vec> facet_vertices(int i) const;
  int facet_count() const { return 2 * dim; }
  Window scaled(double r) const { return Window(half_side * r, dim); }
};

}  // namespace stit
