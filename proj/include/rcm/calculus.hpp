#pragma once

// Discrete calculus on Z^d: fields on vertices and bonds, gradient,
// divergence, the generator L^ω, norms, oscillation and the measure m(Q).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "rcm/conductance.hpp"
#include "rcm/error.hpp"
#include "rcm/lattice.hpp"
#include "rcm/numeric.hpp"

namespace rcm {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Real values on a finite vertex set. The domain is shared, so copies of a
/// field over a large box only copy the value array.
class VertexField {
 public:
  VertexField() : domain_(std::make_shared<const VertexSet>()) {}
  explicit VertexField(VertexSet domain, double fill = 0.0)
      : domain_(std::make_shared<const VertexSet>(std::move(domain))),
        values_(domain_->size(), fill) {}
  VertexField(std::shared_ptr<const VertexSet> domain, std::vector<double> values)
      : domain_(std::move(domain)), values_(std::move(values)) {
    if (values_.size() != domain_->size()) throw DomainError("vertex field length does not match its domain");
  }

  template <typename F>
  static VertexField from_function(VertexSet domain, F&& f) {
    VertexField v(std::move(domain));
    for (std::size_t i = 0; i < v.size(); ++i) v.values_[i] = f((*v.domain_)[i]);
    return v;
  }

  const VertexSet& domain() const noexcept { return *domain_; }
  const std::shared_ptr<const VertexSet>& shared_domain() const noexcept { return domain_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }

  bool has(const Point& x) const { return domain_->contains(x); }
  double at(const Point& x) const { return values_[domain_->index(x)]; }
  double& at(const Point& x) { return values_[domain_->index(x)]; }

 private:
  std::shared_ptr<const VertexSet> domain_;
  std::vector<double> values_;
};

/// Real values on a finite bond set.
class BondField {
 public:
  BondField() : domain_(std::make_shared<const BondSet>()) {}
  explicit BondField(BondSet domain, double fill = 0.0)
      : domain_(std::make_shared<const BondSet>(std::move(domain))),
        values_(domain_->size(), fill) {}
  BondField(std::shared_ptr<const BondSet> domain, std::vector<double> values)
      : domain_(std::move(domain)), values_(std::move(values)) {
    if (values_.size() != domain_->size()) throw DomainError("bond field length does not match its domain");
  }

  template <typename F>
  static BondField from_function(BondSet domain, F&& f) {
    BondField v(std::move(domain));
    for (std::size_t i = 0; i < v.size(); ++i) v.values_[i] = f((*v.domain_)[i]);
    return v;
  }

  const BondSet& domain() const noexcept { return *domain_; }
  const std::shared_ptr<const BondSet>& shared_domain() const noexcept { return domain_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }

  bool has(const Bond& b) const { return domain_->contains(b); }
  double at(const Bond& b) const {
    if (auto i = domain_->find(b)) return values_[*i];
    throw DomainError("bond at " + b.lower.str() + " not in field domain");
  }

  /// Pointwise product on a common domain.
  friend BondField operator*(const BondField& a, const BondField& b) {
    if (a.domain_ != b.domain_ && !(a.domain() == b.domain()))
      throw DomainError("bond fields live on different domains");
    BondField out(a.domain_, a.values_);
    for (std::size_t i = 0; i < out.size(); ++i) out.values_[i] *= b.values_[i];
    return out;
  }

 private:
  std::shared_ptr<const BondSet> domain_;
  std::vector<double> values_;
};

/// Values on (time grid) × (vertex set), stored slice by slice.
class SpaceTimeField {
 public:
  SpaceTimeField() : domain_(std::make_shared<const VertexSet>()) {}
  SpaceTimeField(std::vector<double> times, std::shared_ptr<const VertexSet> domain)
      : times_(std::move(times)), domain_(std::move(domain)), values_(times_.size() * domain_->size(), 0.0) {
    for (std::size_t j = 1; j < times_.size(); ++j)
      if (!(times_[j] > times_[j - 1])) throw DomainError("time grid must be strictly increasing");
  }
  SpaceTimeField(std::vector<double> times, VertexSet domain)
      : SpaceTimeField(std::move(times), std::make_shared<const VertexSet>(std::move(domain))) {}

  std::span<const double> times() const noexcept { return times_; }
  const VertexSet& domain() const noexcept { return *domain_; }
  const std::shared_ptr<const VertexSet>& shared_domain() const noexcept { return domain_; }
  std::size_t instants() const noexcept { return times_.size(); }

  std::span<const double> slice_values(std::size_t j) const {
    return std::span<const double>(values_).subspan(j * domain_->size(), domain_->size());
  }
  std::span<double> slice_values(std::size_t j) {
    return std::span<double>(values_).subspan(j * domain_->size(), domain_->size());
  }
  VertexField slice(std::size_t j) const {
    auto v = slice_values(j);
    return {domain_, std::vector<double>(v.begin(), v.end())};
  }
  void set_slice(std::size_t j, std::span<const double> v) {
    if (v.size() != domain_->size()) throw DomainError("slice length does not match domain");
    std::copy(v.begin(), v.end(), slice_values(j).begin());
  }

  double operator()(std::size_t j, std::size_t i) const { return values_[j * domain_->size() + i]; }
  double& operator()(std::size_t j, std::size_t i) { return values_[j * domain_->size() + i]; }

  std::span<const double> values() const noexcept { return values_; }

 private:
  std::vector<double> times_;
  std::shared_ptr<const VertexSet> domain_;
  std::vector<double> values_;
};

/// Space-time cylinder [t_lo, t_hi] × S.
struct Cylinder {
  double t_lo = 0.0;
  double t_hi = 0.0;
  VertexSet space;
};

// ---------------------------------------------------------------- calculus

/// ∇f(e) = f(ē) − f(e̱) on the given bonds.
inline BondField gradient(const VertexField& f, const BondSet& bonds) {
  BondField out(bonds);
  for (std::size_t i = 0; i < bonds.size(); ++i) {
    const Bond& b = bonds[i];
    const auto lo = f.domain().find(b.lower);
    const auto hi = f.domain().find(b.upper());
    if (!lo || !hi) throw DomainError("gradient: endpoint of bond at " + b.lower.str() + " outside field domain");
    out[i] = f[*hi] - f[*lo];
  }
  return out;
}

/// ∇f on every bond with both endpoints in the domain of f.
inline BondField gradient(const VertexField& f) { return gradient(f, bonds_within(f.domain())); }

/// Midpoint identification h(e) = ½(h(ē) + h(e̱)).
inline BondField midpoint(const VertexField& h, const BondSet& bonds) {
  BondField out(bonds);
  for (std::size_t i = 0; i < bonds.size(); ++i) {
    const Bond& b = bonds[i];
    const auto lo = h.domain().find(b.lower);
    const auto hi = h.domain().find(b.upper());
    if (!lo || !hi) throw DomainError("midpoint: endpoint of bond at " + b.lower.str() + " outside field domain");
    out[i] = 0.5 * (h[*hi] + h[*lo]);
  }
  return out;
}

enum class MissingBonds { error, zero };

/// ∇*F(x) = Σ_i F({x−e_i,x}) − F({x,x+e_i}) for x in S.
inline VertexField divergence(const BondField& F, const VertexSet& S, MissingBonds policy = MissingBonds::error) {
  VertexField out(S);
  auto value = [&](const Bond& b) {
    if (auto i = F.domain().find(b)) return F[*i];
    if (policy == MissingBonds::zero) return 0.0;
    throw DomainError("divergence: bond at " + b.lower.str() + " missing from field");
  };
  for (std::size_t k = 0; k < S.size(); ++k) {
    const Point x = S[k];
    double s = 0.0;
    for (int a = 0; a < x.dim(); ++a) {
      const Point e = unit_vector(x.dim(), a);
      s += value(Bond{x - e, a}) - value(Bond{x, a});
    }
    out[k] = s;
  }
  return out;
}

/// The conductances restricted to a bond set, as a bond field.
inline BondField conductance_field(const ConductanceField& w, const BondSet& bonds) {
  return BondField::from_function(bonds, [&](const Bond& b) { return w.at(b); });
}

/// L^ω u(x) = Σ_{y∼x} ω(x,y)(u(y) − u(x)). Every neighbour of x must lie in
/// the ambient box of ω and in the domain of u.
inline double apply_generator(const ConductanceField& w, const VertexField& u, const Point& x) {
  const auto ix = u.domain().find(x);
  if (!ix) throw DomainError("generator: " + x.str() + " outside field domain");
  const double ux = u[*ix];
  double s = 0.0;
  for (int a = 0; a < x.dim(); ++a) {
    const Point e = unit_vector(x.dim(), a);
    for (const Point& y : {x + e, x - e}) {
      const auto iy = u.domain().find(y);
      if (!iy || !w.box().contains(y))
        throw DomainError("generator: neighbour " + y.str() + " of " + x.str() + " has no value or conductance");
      s += w.at(x, y) * (u[*iy] - ux);
    }
  }
  return s;
}

// ---------------------------------------------------------------- norms

namespace detail {
template <typename Get>
double lp_norm(std::size_t n, double p, bool normalized, Get&& get) {
  if (n == 0) throw DomainError("norm over an empty set");
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(get(i)));
    return m;
  }
  if (!(p > 0.0)) throw DomainError("norm exponent must be positive");
  double s = pairwise_sum(n, [&](std::size_t i) { return std::pow(std::abs(get(i)), p); });
  if (normalized) s /= static_cast<double>(n);
  return std::pow(s, 1.0 / p);
}
}  // namespace detail

/// ‖f‖_{L^p(S)}, or ‖f‖_{\underline L^p(S)} when normalized. p = ∞ is the
/// sup-norm with or without normalization.
inline double norm(const VertexField& f, const VertexSet& S, double p, bool normalized) {
  std::vector<std::size_t> idx;
  idx.reserve(S.size());
  for (std::size_t k = 0; k < S.size(); ++k) idx.push_back(f.domain().index(S[k]));
  return detail::lp_norm(idx.size(), p, normalized, [&](std::size_t i) { return f[idx[i]]; });
}

inline double norm(const VertexField& f, double p, bool normalized) {
  return detail::lp_norm(f.size(), p, normalized, [&](std::size_t i) { return f[i]; });
}

/// Bond-field norm over S_{B^d} = bonds_within(S); normalized by |S_{B^d}|.
inline double norm(const BondField& F, const VertexSet& S, double p, bool normalized) {
  const BondSet bonds = bonds_within(S);
  std::vector<std::size_t> idx;
  idx.reserve(bonds.size());
  for (const Bond& b : bonds) {
    auto i = F.domain().find(b);
    if (!i) throw DomainError("norm: bond at " + b.lower.str() + " missing from field");
    idx.push_back(*i);
  }
  return detail::lp_norm(idx.size(), p, normalized, [&](std::size_t i) { return F[idx[i]]; });
}

inline double norm(const BondField& F, double p, bool normalized) {
  return detail::lp_norm(F.size(), p, normalized, [&](std::size_t i) { return F[i]; });
}

/// ‖ω^{power}‖ over the bonds of a sub-box of the ambient box; power = −1
/// gives the ‖ω^{-1}‖ norms that enter 𝒞 and Λ_{p,q}.
inline double conductance_norm(const ConductanceField& w, const LatticeBox& sub, double p, bool normalized,
                               double power = 1.0) {
  if (!w.box().contains(sub)) throw DomainError("norm region leaves the ambient box");
  std::vector<double> vals;
  vals.reserve(sub.size() * static_cast<std::size_t>(sub.dim()));
  for (std::size_t i = 0; i < sub.size(); ++i) {
    const Point x = sub.point(i);
    const std::size_t wi = w.box().index(x);
    for (int a = 0; a < sub.dim(); ++a)
      if (x[a] - sub.center()[a] < sub.radius()) vals.push_back(std::pow(w.raw(wi, a), power));
  }
  return detail::lp_norm(vals.size(), p, normalized, [&](std::size_t i) { return vals[i]; });
}

// ---------------------------------------------------------------- oscillation

inline double oscillation(const VertexField& u, const VertexSet& S) {
  if (S.empty()) throw DomainError("oscillation over an empty set");
  double lo = kInf, hi = -kInf;
  for (std::size_t k = 0; k < S.size(); ++k) {
    const double v = u.at(S[k]);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

inline double oscillation(const VertexField& u) { return oscillation(u, u.domain()); }

/// max − min of u over the grid instants in [t_lo, t_hi] and vertices of S.
inline double oscillation(const SpaceTimeField& u, const Cylinder& Q) {
  if (Q.space.empty()) throw DomainError("oscillation over an empty cylinder");
  std::vector<std::size_t> idx;
  idx.reserve(Q.space.size());
  for (std::size_t k = 0; k < Q.space.size(); ++k) idx.push_back(u.domain().index(Q.space[k]));
  double lo = kInf, hi = -kInf;
  bool any = false;
  const auto t = u.times();
  for (std::size_t j = 0; j < t.size(); ++j) {
    if (t[j] < Q.t_lo || t[j] > Q.t_hi) continue;
    any = true;
    for (std::size_t i : idx) {
      lo = std::min(lo, u(j, i));
      hi = std::max(hi, u(j, i));
    }
  }
  if (!any) throw DomainError("cylinder contains no grid instant");
  return hi - lo;
}

/// m(I × S) = |I| · |S|.
inline double measure_m(const Cylinder& Q) {
  if (Q.space.empty() || Q.t_hi < Q.t_lo) throw DomainError("empty cylinder");
  return (Q.t_hi - Q.t_lo) * static_cast<double>(Q.space.size());
}

}  // namespace rcm
