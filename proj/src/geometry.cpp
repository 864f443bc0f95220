#include "stit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/QR>

#include "stit/error.hpp"

namespace stit {

namespace {

void require_nonempty(const Polytope& p, const char* what) {
  if (p.empty()) throw DomainError(std::string(what) + ": empty polytope");
}

std::size_t shared_count(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

std::vector<int> shared_facets(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

double shoelace(std::span<const Vec> ccw) {
  double twice = 0.0;
  const std::size_t n = ccw.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec& p = ccw[i];
    const Vec& q = ccw[(i + 1) % n];
    twice += p(0) * q(1) - q(0) * p(1);
  }
  return 0.5 * twice;
}

std::vector<std::size_t> angular_order(std::span<const Vec> pts) {
  Vec c = Vec::Zero(2);
  for (const Vec& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  std::vector<double> angle(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    angle[i] = std::atan2(pts[i](1) - c(1), pts[i](0) - c(0));
  }
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return angle[a] < angle[b]; });
  return order;
}

// Volume of a full-dimensional polytope in R^k from vertices and per-vertex
// facet incidences: sum over facets of height * facet volume / k, with each
// facet handled recursively in its own affine hull.
double volume_recursive(const std::vector<Eigen::VectorXd>& pts,
                        const std::vector<std::vector<int>>& inc, int k) {
  if (k == 1) {
    double lo = pts[0](0), hi = pts[0](0);
    for (const auto& p : pts) {
      lo = std::min(lo, p(0));
      hi = std::max(hi, p(0));
    }
    return hi - lo;
  }
  if (k == 2) {
    std::vector<Vec> flat;
    flat.reserve(pts.size());
    for (const auto& p : pts) flat.push_back(make_vec({p(0), p(1)}));
    const auto order = angular_order(flat);
    std::vector<Vec> ccw;
    for (auto i : order) ccw.push_back(flat[i]);
    return std::abs(shoelace(ccw));
  }

  Eigen::VectorXd c = Eigen::VectorXd::Zero(k);
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());

  std::map<int, std::vector<int>> by_facet;
  for (std::size_t v = 0; v < pts.size(); ++v) {
    for (int f : inc[v]) by_facet[f].push_back(static_cast<int>(v));
  }

  double vol = 0.0;
  for (const auto& [facet, members] : by_facet) {
    if (static_cast<int>(members.size()) < k) continue;
    const Eigen::VectorXd& p0 = pts[members[0]];
    Eigen::MatrixXd diffs(k, members.size() - 1);
    for (std::size_t j = 1; j < members.size(); ++j) diffs.col(j - 1) = pts[members[j]] - p0;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(diffs);
    qr.setThreshold(1e-10);
    if (qr.rank() != k - 1) continue;
    const Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd basis = q.leftCols(k - 1);
    const double height = std::abs(q.col(k - 1).dot(c - p0));

    std::vector<Eigen::VectorXd> sub_pts;
    std::vector<std::vector<int>> sub_inc;
    for (int m : members) {
      sub_pts.push_back(basis.transpose() * (pts[m] - p0));
      std::vector<int> rest;
      for (int f : inc[m]) {
        if (f != facet) rest.push_back(f);
      }
      sub_inc.push_back(std::move(rest));
    }
    vol += height * volume_recursive(sub_pts, sub_inc, k - 1) / k;
  }
  return vol;
}

}  // namespace

// ---------------------------------------------------------------------------
// Direction / Hyperplane / FacetTag

Direction::Direction(Vec unit) : u_(std::move(unit)) {
  if (u_.size() < 1 || u_.size() > kMaxDim) throw DomainError("Direction: unsupported dimension");
  if (std::abs(u_.norm() - 1.0) > 1e-12) throw DomainError("Direction: vector is not unit");
}

Direction Direction::normalized(const Vec& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("Direction: zero or non-finite vector");
  return Direction(Vec(v / n));
}

Direction Direction::from_angle(double phi) {
  return Direction::normalized(make_vec({std::cos(phi), std::sin(phi)}));
}

Direction Direction::axis(int dim, int axis, int sign) {
  Vec v = Vec::Zero(dim);
  v(axis) = sign > 0 ? 1.0 : -1.0;
  return Direction(std::move(v));
}

Hyperplane::Hyperplane(double offset, Direction normal)
    : offset_(offset), normal_(std::move(normal)) {
  if (!(offset >= 0.0) || !std::isfinite(offset)) {
    throw DomainError("Hyperplane: offset must be finite and >= 0");
  }
}

Hyperplane Hyperplane::from_signed(double x0, const Direction& u) {
  return x0 >= 0.0 ? Hyperplane(x0, u) : Hyperplane(-x0, -u);
}

bool Hyperplane::operator==(const Hyperplane& other) const {
  if (dim() != other.dim()) return false;
  if (std::abs(offset_ - other.offset_) > kGeomEps) return false;
  if ((normal_.vec() - other.normal_.vec()).norm() <= kGeomEps) return true;
  return offset_ <= kGeomEps && (normal_.vec() + other.normal_.vec()).norm() <= kGeomEps;
}

std::string FacetTag::to_string() const {
  return (is_window() ? "window:" : "cut:") + std::to_string(index);
}

// ---------------------------------------------------------------------------
// Polytope

Polytope Polytope::assemble(int dim, std::vector<Vec> vertices,
                            std::vector<std::vector<int>> incidence,
                            std::vector<Facet> facets) {
  // Merge vertices closer than the incidence tolerance.
  std::vector<Vec> merged;
  std::vector<std::vector<int>> merged_inc;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    bool absorbed = false;
    for (std::size_t j = 0; j < merged.size(); ++j) {
      if ((merged[j] - vertices[i]).norm() <= kGeomEps) {
        std::vector<int> u;
        std::set_union(merged_inc[j].begin(), merged_inc[j].end(), incidence[i].begin(),
                       incidence[i].end(), std::back_inserter(u));
        merged_inc[j] = std::move(u);
        absorbed = true;
        break;
      }
    }
    if (!absorbed) {
      merged.push_back(std::move(vertices[i]));
      merged_inc.push_back(std::move(incidence[i]));
    }
  }
  if (static_cast<int>(merged.size()) < dim + 1) return Polytope{};

  std::vector<int> count(facets.size(), 0);
  for (const auto& inc : merged_inc) {
    for (int f : inc) ++count[f];
  }
  std::vector<int> remap(facets.size(), -1);
  Polytope out;
  out.dim_ = dim;
  for (std::size_t f = 0; f < facets.size(); ++f) {
    if (count[f] >= dim) {
      remap[f] = static_cast<int>(out.facets_.size());
      out.facets_.push_back(std::move(facets[f]));
    }
  }
  out.vertices_ = std::move(merged);
  out.incidence_.reserve(merged_inc.size());
  for (const auto& inc : merged_inc) {
    std::vector<int> kept;
    for (int f : inc) {
      if (remap[f] >= 0) kept.push_back(remap[f]);
    }
    std::sort(kept.begin(), kept.end());
    out.incidence_.push_back(std::move(kept));
  }
  if (dim == 2) out.sort_ccw();
  return out;
}

void Polytope::sort_ccw() {
  const auto order = angular_order(vertices_);
  std::vector<Vec> v;
  std::vector<std::vector<int>> inc;
  v.reserve(order.size());
  inc.reserve(order.size());
  for (auto i : order) {
    v.push_back(std::move(vertices_[i]));
    inc.push_back(std::move(incidence_[i]));
  }
  vertices_ = std::move(v);
  incidence_ = std::move(inc);
}

Polytope Polytope::box(const Vec& lo, const Vec& hi, std::vector<FacetTag> tags) {
  const int dim = static_cast<int>(lo.size());
  if (dim < 1 || dim > kMaxDim || hi.size() != lo.size()) {
    throw DomainError("Polytope::box: bad dimension");
  }
  for (int j = 0; j < dim; ++j) {
    if (!(lo(j) < hi(j))) throw DomainError("Polytope::box: need lo < hi in every coordinate");
  }
  if (tags.empty()) {
    for (int i = 0; i < 2 * dim; ++i) tags.push_back(FacetTag::window(i));
  }
  if (static_cast<int>(tags.size()) != 2 * dim) throw DomainError("Polytope::box: need 2l tags");

  std::vector<Facet> facets;
  for (int i = 0; i < 2 * dim; ++i) {
    const int axis = i % dim;
    Vec n = Vec::Zero(dim);
    n(axis) = i < dim ? 1.0 : -1.0;
    const double offset = i < dim ? hi(axis) : -lo(axis);
    facets.push_back({std::move(n), offset, tags[i]});
  }
  std::vector<Vec> verts;
  std::vector<std::vector<int>> inc;
  for (int mask = 0; mask < (1 << dim); ++mask) {
    Vec v(dim);
    std::vector<int> f;
    for (int j = 0; j < dim; ++j) {
      const bool upper = (mask >> j) & 1;
      v(j) = upper ? hi(j) : lo(j);
      f.push_back(upper ? j : j + dim);
    }
    std::sort(f.begin(), f.end());
    verts.push_back(std::move(v));
    inc.push_back(std::move(f));
  }
  return assemble(dim, std::move(verts), std::move(inc), std::move(facets));
}

Polytope Polytope::polygon(std::vector<Vec> ccw, std::vector<FacetTag> tags) {
  const std::size_t n = ccw.size();
  if (n < 3) throw DomainError("Polytope::polygon: need at least 3 vertices");
  for (const Vec& v : ccw) {
    if (v.size() != 2) throw DomainError("Polytope::polygon: vertices must be 2D");
  }
  if (tags.empty()) {
    for (std::size_t k = 0; k < n; ++k) tags.push_back(FacetTag::window(k));
  }
  if (tags.size() != n) throw DomainError("Polytope::polygon: need one tag per edge");
  for (std::size_t k = 0; k < n; ++k) {
    const Vec d1 = ccw[(k + 1) % n] - ccw[k];
    const Vec d2 = ccw[(k + 2) % n] - ccw[(k + 1) % n];
    if (d1(0) * d2(1) - d1(1) * d2(0) <= kGeomEps * d1.norm() * d2.norm()) {
      throw DomainError("Polytope::polygon: vertices are not strictly convex and CCW");
    }
  }
  std::vector<Facet> facets;
  std::vector<std::vector<int>> inc(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec d = ccw[(k + 1) % n] - ccw[k];
    Vec normal = make_vec({d(1), -d(0)}) / d.norm();
    const double offset = normal.dot(ccw[k]);
    facets.push_back({std::move(normal), offset, tags[k]});
    inc[k].push_back(static_cast<int>(k));
    inc[(k + 1) % n].push_back(static_cast<int>(k));
  }
  for (auto& f : inc) std::sort(f.begin(), f.end());
  return assemble(2, std::move(ccw), std::move(inc), std::move(facets));
}

double Polytope::support(const Vec& u) const {
  require_nonempty(*this, "support");
  double best = vertices_[0].dot(u);
  for (std::size_t i = 1; i < vertices_.size(); ++i) best = std::max(best, vertices_[i].dot(u));
  return best;
}

double Polytope::diameter() const {
  require_nonempty(*this, "diameter");
  double best = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    for (std::size_t j = i + 1; j < vertices_.size(); ++j) {
      best = std::max(best, (vertices_[i] - vertices_[j]).squaredNorm());
    }
  }
  return std::sqrt(best);
}

double Polytope::volume() const {
  require_nonempty(*this, "volume");
  if (dim_ == 2) return shoelace(vertices_);
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(vertices_.size());
  for (const Vec& v : vertices_) pts.emplace_back(v);
  return volume_recursive(pts, incidence_, dim_);
}

Vec Polytope::centroid() const {
  require_nonempty(*this, "centroid");
  if (dim_ == 2) {
    const double area = shoelace(vertices_);
    double cx = 0.0, cy = 0.0;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec& p = vertices_[i];
      const Vec& q = vertices_[(i + 1) % n];
      const double cross = p(0) * q(1) - q(0) * p(1);
      cx += (p(0) + q(0)) * cross;
      cy += (p(1) + q(1)) * cross;
    }
    return make_vec({cx / (6.0 * area), cy / (6.0 * area)});
  }
  Vec c = Vec::Zero(dim_);
  for (const Vec& v : vertices_) c += v;
  return c / static_cast<double>(vertices_.size());
}

double Polytope::perimeter() const {
  require_nonempty(*this, "perimeter");
  if (dim_ != 2) throw DomainError("perimeter: only defined in 2D");
  double len = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    len += (vertices_[(i + 1) % vertices_.size()] - vertices_[i]).norm();
  }
  return len;
}

bool Polytope::contains(const Vec& x, double tol) const {
  require_nonempty(*this, "contains");
  for (const Facet& f : facets_) {
    if (x.dot(f.normal) > f.offset + tol) return false;
  }
  return true;
}

bool Polytope::contains_strictly(std::span<const Vec> pts, double tol) const {
  require_nonempty(*this, "contains_strictly");
  for (const Vec& x : pts) {
    for (const Facet& f : facets_) {
      if (x.dot(f.normal) >= f.offset - tol) return false;
    }
  }
  return true;
}

bool Polytope::has_window_facet() const {
  return std::any_of(facets_.begin(), facets_.end(),
                     [](const Facet& f) { return f.tag.is_window(); });
}

Polytope Polytope::scaled(double r) const {
  require_nonempty(*this, "scaled");
  if (!(r > 0.0)) throw DomainError("scaled: factor must be positive");
  Polytope out = *this;
  for (Vec& v : out.vertices_) v *= r;
  for (Facet& f : out.facets_) f.offset *= r;
  return out;
}

Polytope Polytope::translated(const Vec& t) const {
  require_nonempty(*this, "translated");
  Polytope out = *this;
  for (Vec& v : out.vertices_) v += t;
  for (Facet& f : out.facets_) f.offset += f.normal.dot(t);
  return out;
}

Polytope Polytope::clipped(const Vec& normal, double offset, FacetTag tag) const {
  require_nonempty(*this, "clipped");
  const double nn = normal.norm();
  if (!(nn > 0.0)) throw DomainError("clipped: zero normal");
  const Vec n = normal / nn;
  const double c = offset / nn;

  const std::size_t nv = vertices_.size();
  std::vector<double> s(nv);
  bool any_out = false;
  bool any_in = false;
  for (std::size_t i = 0; i < nv; ++i) {
    s[i] = vertices_[i].dot(n) - c;
    if (s[i] > kGeomEps) any_out = true;
    if (s[i] < -kGeomEps) any_in = true;
  }
  if (!any_out) return *this;
  if (!any_in) return Polytope{};

  const int new_facet = static_cast<int>(facets_.size());
  std::vector<Vec> verts;
  std::vector<std::vector<int>> inc;
  for (std::size_t i = 0; i < nv; ++i) {
    if (s[i] > kGeomEps) continue;
    verts.push_back(vertices_[i]);
    inc.push_back(incidence_[i]);
    if (s[i] >= -kGeomEps) inc.back().push_back(new_facet);
  }
  // Edges are vertex pairs sharing l-1 facets (exact for simple polytopes,
  // which is the almost-sure case for cells cut by random hyperplanes).
  const auto need = static_cast<std::size_t>(dim_ - 1);
  for (std::size_t i = 0; i < nv; ++i) {
    for (std::size_t j = i + 1; j < nv; ++j) {
      const bool crossing = (s[i] < -kGeomEps && s[j] > kGeomEps) ||
                            (s[i] > kGeomEps && s[j] < -kGeomEps);
      if (!crossing || shared_count(incidence_[i], incidence_[j]) < need) continue;
      const double t = s[i] / (s[i] - s[j]);
      verts.push_back(vertices_[i] + t * (vertices_[j] - vertices_[i]));
      auto shared = shared_facets(incidence_[i], incidence_[j]);
      shared.push_back(new_facet);
      inc.push_back(std::move(shared));
    }
  }
  std::vector<Facet> facets = facets_;
  facets.push_back({n, c, tag});
  return assemble(dim_, std::move(verts), std::move(inc), std::move(facets));
}

// ---------------------------------------------------------------------------
// Free functions

double support(const Polytope& p, const Direction& u) { return p.support(u.vec()); }

double width(const Polytope& p, const Direction& u) { return p.width(u.vec()); }

double support(std::span<const Vec> pts, const Vec& u) {
  if (pts.empty()) throw DomainError("support: empty point set");
  double best = pts[0].dot(u);
  for (const Vec& p : pts.subspan(1)) best = std::max(best, p.dot(u));
  return best;
}

std::optional<SplitResult> split(const Polytope& p, const Hyperplane& h, std::uint64_t jump_id) {
  require_nonempty(p, "split");
  if (p.dim() != h.dim()) throw DomainError("split: dimension mismatch");
  bool pos = false;
  bool neg = false;
  for (const Vec& v : p.vertices()) {
    const double s = h.signed_distance(v);
    if (std::abs(s) <= kGeomEps) {
      // A polygon cut through a vertex is still a clean split. In l >= 3 it
      // would create a non-simple vertex, which edge detection in clipped()
      // does not handle, so it is refused (probability zero anyway).
      if (p.dim() >= 3) return std::nullopt;
      continue;
    }
    (s > 0.0 ? pos : neg) = true;
  }
  if (!pos || !neg) return std::nullopt;
  const Vec& u = h.normal().vec();
  SplitResult out{p.clipped(-u, -h.offset(), FacetTag::cut(jump_id)),
                  p.clipped(u, h.offset(), FacetTag::cut(jump_id))};
  if (out.plus.empty() || out.minus.empty()) return std::nullopt;
  return out;
}

bool hits_interior(const Hyperplane& h, std::span<const Vec> pts) {
  bool pos = false;
  bool neg = false;
  for (const Vec& v : pts) {
    const double s = h.signed_distance(v);
    if (s > kGeomEps) pos = true;
    if (s < -kGeomEps) neg = true;
  }
  return pos && neg;
}

bool hits_interior(const Hyperplane& h, const Polytope& p) {
  require_nonempty(p, "hits_interior");
  return hits_interior(h, p.vertices());
}

bool separates(const Hyperplane& h, std::span<const Vec> a, std::span<const Vec> b) {
  auto range = [&](std::span<const Vec> pts) {
    double lo = h.signed_distance(pts[0]);
    double hi = lo;
    for (const Vec& p : pts) {
      const double s = h.signed_distance(p);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    return std::pair{lo, hi};
  };
  if (a.empty() || b.empty()) throw DomainError("separates: empty set");
  const auto [alo, ahi] = range(a);
  const auto [blo, bhi] = range(b);
  const bool a_plus_b_minus = alo >= -kGeomEps && bhi <= kGeomEps;
  const bool a_minus_b_plus = ahi <= kGeomEps && blo >= -kGeomEps;
  return a_plus_b_minus || a_minus_b_plus;
}

bool separates(const Hyperplane& h, const Polytope& a, const Polytope& b) {
  require_nonempty(a, "separates");
  require_nonempty(b, "separates");
  return separates(h, a.vertices(), b.vertices());
}

Polytope intersect(const Polytope& a, const Polytope& b) {
  require_nonempty(a, "intersect");
  require_nonempty(b, "intersect");
  if (a.dim() != b.dim()) throw DomainError("intersect: dimension mismatch");
  Polytope out = a;
  for (const Facet& f : b.facets()) {
    out = out.clipped(f.normal, f.offset, f.tag);
    if (out.empty()) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Window

Window::Window(double half_side_, int dim_) : half_side(half_side_), dim(dim_) {
  if (!(half_side > 0.0) || !std::isfinite(half_side)) {
    throw DomainError("Window: half side must be positive");
  }
  if (dim < 2 || dim > kMaxDim) throw DomainError("Window: dimension must be in [2, 4]");
}

Polytope Window::polytope() const {
  return Polytope::box(Vec::Constant(dim, -half_side), Vec::Constant(dim, half_side));
}

double Window::volume() const { return std::pow(2.0 * half_side, dim); }

std::vector<Vec> Window::facet_vertices(int i) const {
  if (i < 0 || i >= 2 * dim) throw DomainError("Window: facet index out of range");
  const int axis = i % dim;
  const double fixed = i < dim ? half_side : -half_side;
  std::vector<Vec> out;
  for (int mask = 0; mask < (1 << (dim - 1)); ++mask) {
    Vec v(dim);
    int bit = 0;
    for (int j = 0; j < dim; ++j) {
      if (j == axis) {
        v(j) = fixed;
      } else {
        v(j) = ((mask >> bit++) & 1) ? half_side : -half_side;
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace stit
