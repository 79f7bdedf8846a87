#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rcm/error.hpp"
#include "rcm/lattice.hpp"

namespace rcm {

/// Positive weights ω(e) on every bond of an ambient box.
///
/// Storage is dense: slot index(e̱)·d + axis. Slots of bonds that would leave
/// the box (e̱ on the upper face along that axis) hold 0 and are never
/// reachable through the public interface.
class ConductanceField {
 public:
  ConductanceField() = default;

  /// Constant field; c must be positive.
  ConductanceField(LatticeBox box, double c) : box_(std::move(box)) {
    if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("conductance must be positive and finite");
    values_.assign(box_.size() * static_cast<std::size_t>(box_.dim()), 0.0);
    fill([c](const Bond&) { return c; });
  }

  /// Field with ω(e) = value(e); every value must be positive and finite.
  template <typename F>
  static ConductanceField from_function(LatticeBox box, F&& value) {
    ConductanceField w;
    w.box_ = std::move(box);
    w.values_.assign(w.box_.size() * static_cast<std::size_t>(w.box_.dim()), 0.0);
    w.fill(std::forward<F>(value));
    return w;
  }

  const LatticeBox& box() const noexcept { return box_; }
  int dim() const noexcept { return box_.dim(); }

  bool has_bond(const Bond& b) const { return box_.contains(b); }

  double at(const Bond& b) const {
    if (!has_bond(b)) throw DomainError("bond at " + b.lower.str() + " axis " + std::to_string(b.axis) + " outside ambient box");
    return values_[slot(box_.index(b.lower), b.axis)];
  }
  double at(const Point& x, const Point& y) const { return at(Bond::between(x, y)); }

  void set(const Bond& b, double value) {
    if (!has_bond(b)) throw DomainError("bond outside ambient box");
    check_positive(value);
    values_[slot(box_.index(b.lower), b.axis)] = value;
  }

  /// Raw access by (vertex index, axis) for the bond {x, x+e_axis}; the
  /// caller guarantees the bond lies in the box.
  double raw(std::size_t vertex, int axis) const noexcept { return values_[slot(vertex, axis)]; }

  /// μ(x) = Σ_{y∼x} ω(x,y), counting only bonds inside the ambient box.
  double mu(const Point& x) const {
    double s = 0.0;
    for (int a = 0; a < dim(); ++a) {
      const Point e = unit_vector(dim(), a);
      if (box_.contains(x + e)) s += at(Bond{x, a});
      if (box_.contains(x - e)) s += at(Bond{x - e, a});
    }
    return s;
  }

  /// Bonds with both endpoints in the box, canonical order.
  BondSet bonds() const { return bonds_within(box_); }

  template <typename F>
  void for_each_bond(F&& f) const {
    for (std::size_t i = 0; i < box_.size(); ++i) {
      const Point x = box_.point(i);
      for (int a = 0; a < dim(); ++a)
        if (x[a] - box_.center()[a] < box_.radius()) f(Bond{x, a}, values_[slot(i, a)]);
    }
  }

  friend bool operator==(const ConductanceField&, const ConductanceField&) = default;

 private:
  std::size_t slot(std::size_t vertex, int axis) const noexcept {
    return vertex * static_cast<std::size_t>(box_.dim()) + static_cast<std::size_t>(axis);
  }

  static void check_positive(double v) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw DomainError("conductance must be positive and finite, got " + std::to_string(v));
  }

  template <typename F>
  void fill(F&& value) {
    for (std::size_t i = 0; i < box_.size(); ++i) {
      const Point x = box_.point(i);
      for (int a = 0; a < dim(); ++a) {
        if (x[a] - box_.center()[a] >= box_.radius()) continue;
        const double v = value(Bond{x, a});
        check_positive(v);
        values_[slot(i, a)] = v;
      }
    }
  }

  LatticeBox box_;
  std::vector<double> values_;
};

}  // namespace rcm
