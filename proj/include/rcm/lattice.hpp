#pragma once

// Geometry of Z^d: points, sup-norm boxes, canonical bonds, and the dense
// lexicographic indexings every field in the library is keyed by.

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <iterator>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rcm/error.hpp"

namespace rcm {

inline constexpr int kMaxDim = 4;

/// A point of Z^d, 1 <= d <= 4.
class Point {
 public:
  using Coord = std::int64_t;

  Point() = default;
  explicit Point(int dim) : dim_(dim) { check_dim(dim); }
  Point(std::initializer_list<Coord> coords) : dim_(static_cast<int>(coords.size())) {
    check_dim(dim_);
    std::copy(coords.begin(), coords.end(), c_.begin());
  }
  static Point from(std::span<const Coord> coords) {
    Point p(static_cast<int>(coords.size()));
    std::copy(coords.begin(), coords.end(), p.c_.begin());
    return p;
  }

  int dim() const noexcept { return dim_; }
  Coord operator[](int i) const noexcept { return c_[i]; }
  Coord& operator[](int i) noexcept { return c_[i]; }

  Point& operator+=(const Point& o) {
    for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Point& operator-=(const Point& o) {
    for (int i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  friend Point operator+(Point a, const Point& b) { return a += b; }
  friend Point operator-(Point a, const Point& b) { return a -= b; }
  friend Point operator-(Point a) {
    for (int i = 0; i < a.dim_; ++i) a.c_[i] = -a.c_[i];
    return a;
  }

  friend bool operator==(const Point& a, const Point& b) {
    return a.dim_ == b.dim_ && std::equal(a.c_.begin(), a.c_.begin() + a.dim_, b.c_.begin());
  }
  /// Lexicographic on coordinates (first coordinate most significant).
  friend std::strong_ordering operator<=>(const Point& a, const Point& b) {
    if (auto c = a.dim_ <=> b.dim_; c != 0) return c;
    for (int i = 0; i < a.dim_; ++i)
      if (auto c = a.c_[i] <=> b.c_[i]; c != 0) return c;
    return std::strong_ordering::equal;
  }

  Coord sup_norm() const {
    Coord m = 0;
    for (int i = 0; i < dim_; ++i) m = std::max(m, std::abs(c_[i]));
    return m;
  }

  std::string str() const {
    std::string s = "(";
    for (int i = 0; i < dim_; ++i) {
      if (i) s += ",";
      s += std::to_string(c_[i]);
    }
    return s + ")";
  }

 private:
  static void check_dim(int d) {
    if (d < 1 || d > kMaxDim) throw DomainError("dimension must be in [1,4], got " + std::to_string(d));
  }

  std::array<Coord, kMaxDim> c_{};
  int dim_ = 0;
};

inline Point unit_vector(int dim, int axis) {
  Point e(dim);
  e[axis] = 1;
  return e;
}

inline Point origin(int dim) { return Point(dim); }

/// Nearest-neighbour bond {lower, lower + e_axis}; axis is zero-based.
/// Always stored in canonical orientation, so upper - lower is a positive
/// unit vector.
struct Bond {
  Point lower;
  int axis = 0;

  Point upper() const {
    Point u = lower;
    u[axis] += 1;
    return u;
  }

  /// Canonical bond joining two nearest neighbours in either order.
  static Bond between(const Point& x, const Point& y) {
    const Point diff = y - x;
    for (int a = 0; a < x.dim(); ++a) {
      if (diff == unit_vector(x.dim(), a)) return {x, a};
      if (diff == -unit_vector(x.dim(), a)) return {y, a};
    }
    throw DomainError(x.str() + " and " + y.str() + " are not nearest neighbours");
  }

  friend bool operator==(const Bond&, const Bond&) = default;
  friend std::strong_ordering operator<=>(const Bond& a, const Bond& b) {
    if (auto c = a.lower <=> b.lower; c != 0) return c;
    return a.axis <=> b.axis;
  }
};

/// Sup-norm ball B(center, radius) = center + ([-n,n] ∩ Z)^d with its dense
/// lexicographic index (last coordinate varies fastest).
class LatticeBox {
 public:
  LatticeBox() = default;
  LatticeBox(Point center, std::int64_t radius) : center_(center), radius_(radius) {
    if (radius < 0) throw DomainError("box radius must be non-negative");
    if (center.dim() < 1) throw DomainError("box center has no dimension");
    side_ = 2 * radius + 1;
    std::size_t s = 1;
    for (int a = center.dim() - 1; a >= 0; --a) {
      strides_[a] = s;
      s *= static_cast<std::size_t>(side_);
    }
    size_ = s;
  }

  static LatticeBox centered(int dim, std::int64_t radius) { return {origin(dim), radius}; }

  const Point& center() const noexcept { return center_; }
  std::int64_t radius() const noexcept { return radius_; }
  int dim() const noexcept { return center_.dim(); }
  std::int64_t side() const noexcept { return side_; }
  std::size_t size() const noexcept { return size_; }
  std::size_t stride(int axis) const noexcept { return strides_[axis]; }

  bool contains(const Point& p) const {
    if (p.dim() != dim()) return false;
    for (int a = 0; a < dim(); ++a)
      if (std::abs(p[a] - center_[a]) > radius_) return false;
    return true;
  }
  /// True for vertices on the interior boundary (some neighbour outside).
  bool on_boundary(const Point& p) const {
    for (int a = 0; a < dim(); ++a)
      if (std::abs(p[a] - center_[a]) == radius_) return true;
    return false;
  }
  bool contains(const LatticeBox& other) const {
    if (other.dim() != dim()) return false;
    for (int a = 0; a < dim(); ++a)
      if (std::abs(other.center_[a] - center_[a]) + other.radius_ > radius_) return false;
    return true;
  }
  bool contains(const Bond& b) const { return contains(b.lower) && contains(b.upper()); }

  std::size_t index(const Point& p) const {
    std::size_t idx = 0;
    for (int a = 0; a < dim(); ++a)
      idx += static_cast<std::size_t>(p[a] - center_[a] + radius_) * strides_[a];
    return idx;
  }
  std::optional<std::size_t> find(const Point& p) const {
    if (!contains(p)) return std::nullopt;
    return index(p);
  }
  Point point(std::size_t idx) const {
    Point p(dim());
    for (int a = 0; a < dim(); ++a) {
      p[a] = static_cast<std::int64_t>(idx / strides_[a]) - radius_ + center_[a];
      idx %= strides_[a];
    }
    return p;
  }

  std::vector<Point> vertices() const {
    std::vector<Point> v;
    v.reserve(size_);
    for (std::size_t i = 0; i < size_; ++i) v.push_back(point(i));
    return v;
  }

  friend bool operator==(const LatticeBox& a, const LatticeBox& b) {
    return a.center_ == b.center_ && a.radius_ == b.radius_;
  }

 private:
  Point center_;
  std::int64_t radius_ = 0;
  std::int64_t side_ = 1;
  std::size_t size_ = 0;
  std::array<std::size_t, kMaxDim> strides_{};
};

/// Finite vertex set with its lexicographic bijection onto {0,...,|S|-1}.
/// A set built from a box keeps only the box (O(1) lookup, no point list).
class VertexSet {
 public:
  class Iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = Point;
    using difference_type = std::ptrdiff_t;
    using pointer = void;
    using reference = Point;

    Iterator() = default;
    Iterator(const VertexSet* s, std::size_t i) : set_(s), i_(i) {}
    Point operator*() const { return (*set_)[i_]; }
    Iterator& operator++() {
      ++i_;
      return *this;
    }
    Iterator operator++(int) {
      Iterator t = *this;
      ++i_;
      return t;
    }
    friend bool operator==(const Iterator& a, const Iterator& b) { return a.i_ == b.i_; }

   private:
    const VertexSet* set_ = nullptr;
    std::size_t i_ = 0;
  };

  VertexSet() = default;
  explicit VertexSet(std::vector<Point> pts) : pts_(std::move(pts)) {
    std::sort(pts_.begin(), pts_.end());
    pts_.erase(std::unique(pts_.begin(), pts_.end()), pts_.end());
    if (!pts_.empty()) {
      const int d = pts_.front().dim();
      for (const auto& p : pts_)
        if (p.dim() != d) throw DomainError("vertex set mixes dimensions");
    }
  }
  explicit VertexSet(const LatticeBox& box) : box_(box) {}

  std::size_t size() const noexcept { return box_ ? box_->size() : pts_.size(); }
  bool empty() const noexcept { return size() == 0; }
  int dim() const {
    if (box_) return box_->dim();
    return pts_.empty() ? 0 : pts_.front().dim();
  }
  /// The box this set equals, if it was built from one.
  const std::optional<LatticeBox>& as_box() const noexcept { return box_; }

  Point operator[](std::size_t i) const { return box_ ? box_->point(i) : pts_[i]; }
  Iterator begin() const { return {this, 0}; }
  Iterator end() const { return {this, size()}; }

  std::optional<std::size_t> find(const Point& p) const {
    if (box_) return box_->find(p);
    auto it = std::lower_bound(pts_.begin(), pts_.end(), p);
    if (it == pts_.end() || !(*it == p)) return std::nullopt;
    return static_cast<std::size_t>(it - pts_.begin());
  }
  bool contains(const Point& p) const { return find(p).has_value(); }
  std::size_t index(const Point& p) const {
    if (auto i = find(p)) return *i;
    throw DomainError("vertex " + p.str() + " not in set");
  }

  friend bool operator==(const VertexSet& a, const VertexSet& b) {
    if (a.size() != b.size()) return false;
    if (a.box_ && b.box_) return *a.box_ == *b.box_;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!(a[i] == b[i])) return false;
    return true;
  }

 private:
  std::optional<LatticeBox> box_;
  std::vector<Point> pts_;
};

/// Finite set of canonical bonds in (lower, axis) lexicographic order.
class BondSet {
 public:
  BondSet() = default;
  explicit BondSet(std::vector<Bond> bonds) : bonds_(std::move(bonds)) {
    std::sort(bonds_.begin(), bonds_.end());
    bonds_.erase(std::unique(bonds_.begin(), bonds_.end()), bonds_.end());
  }

  std::size_t size() const noexcept { return bonds_.size(); }
  bool empty() const noexcept { return bonds_.empty(); }
  const Bond& operator[](std::size_t i) const { return bonds_[i]; }
  auto begin() const noexcept { return bonds_.begin(); }
  auto end() const noexcept { return bonds_.end(); }

  std::optional<std::size_t> find(const Bond& b) const {
    auto it = std::lower_bound(bonds_.begin(), bonds_.end(), b);
    if (it == bonds_.end() || !(*it == b)) return std::nullopt;
    return static_cast<std::size_t>(it - bonds_.begin());
  }
  bool contains(const Bond& b) const { return find(b).has_value(); }

  friend bool operator==(const BondSet&, const BondSet&) = default;

 private:
  std::vector<Bond> bonds_;
};

/// B(center, n): all (2n+1)^d vertices in lexicographic order.
inline VertexSet ball(const Point& center, std::int64_t n) {
  return VertexSet(LatticeBox(center, n));
}

inline VertexSet ball(std::int64_t n, int dim) { return ball(origin(dim), n); }

/// ∂S: vertices of S with at least one nearest neighbour outside S.
inline VertexSet interior_boundary(const VertexSet& s) {
  std::vector<Point> out;
  for (const auto& x : s) {
    bool boundary = false;
    for (int a = 0; a < x.dim() && !boundary; ++a) {
      const Point e = unit_vector(x.dim(), a);
      boundary = !s.contains(x + e) || !s.contains(x - e);
    }
    if (boundary) out.push_back(x);
  }
  return VertexSet(std::move(out));
}

/// S_{B^d}: bonds with both endpoints in S.
inline BondSet bonds_within(const VertexSet& s) {
  std::vector<Bond> out;
  for (const auto& x : s)
    for (int a = 0; a < x.dim(); ++a)
      if (s.contains(x + unit_vector(x.dim(), a))) out.push_back({x, a});
  return BondSet(std::move(out));
}

inline BondSet bonds_within(const LatticeBox& box) {
  std::vector<Bond> out;
  for (std::size_t i = 0; i < box.size(); ++i) {
    const Point x = box.point(i);
    for (int a = 0; a < box.dim(); ++a)
      if (x[a] - box.center()[a] < box.radius()) out.push_back({x, a});
  }
  return BondSet(std::move(out));
}

/// S(m): bonds joining ∂B(m) and ∂B(m+1), i.e. the radial bonds crossing
/// from sup-norm level m to level m+1.
inline BondSet sphere_bonds(std::int64_t m, int dim) {
  if (m < 0) throw DomainError("sphere index must be non-negative");
  std::vector<Bond> out;
  const LatticeBox box = LatticeBox::centered(dim, m);
  for (std::size_t i = 0; i < box.size(); ++i) {
    const Point x = box.point(i);
    if (x.sup_norm() != m) continue;
    for (int a = 0; a < dim; ++a) {
      const Point e = unit_vector(dim, a);
      if ((x + e).sup_norm() == m + 1) out.push_back({x, a});
      if ((x - e).sup_norm() == m + 1) out.push_back({x - e, a});
    }
  }
  return BondSet(std::move(out));
}

}  // namespace rcm
