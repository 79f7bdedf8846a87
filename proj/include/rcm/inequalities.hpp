#pragma once

// Cutoff optimization over radial profiles, Sobolev ratio probes, the
// Caccioppoli and logarithmic Caccioppoli checks, and randomized suites for
// the elementary chain-rule inequalities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rcm/calculus.hpp"
#include "rcm/conductance.hpp"
#include "rcm/error.hpp"
#include "rcm/exponents.hpp"
#include "rcm/lattice.hpp"
#include "rcm/numeric.hpp"
#include "rcm/parallel.hpp"
#include "rcm/rng.hpp"

namespace rcm {

// ---------------------------------------------------------------- cutoffs

/// φ̂(k) for k = ρ..σ, with φ̂(ρ) = 1 and φ̂(σ) = 0.
struct RadialProfile {
  std::int64_t rho = 0;
  std::int64_t sigma = 1;
  std::vector<double> values;

  /// φ̂ extended by 1 below ρ and 0 above σ.
  double operator()(std::int64_t k) const {
    if (k <= rho) return 1.0;
    if (k >= sigma) return 0.0;
    return values[static_cast<std::size_t>(k - rho)];
  }
};

struct CutoffResult {
  RadialProfile profile;
  double J = 0.0;
};

namespace detail {
inline void check_shells(std::int64_t rho, std::int64_t sigma, std::span<const double> f) {
  if (rho >= sigma) throw DomainError("cutoff needs rho < sigma");
  if (rho < 0) throw DomainError("cutoff needs rho >= 0");
  if (f.size() != static_cast<std::size_t>(sigma - rho)) throw DomainError("cutoff needs one shell weight per k in [rho, sigma)");
  for (double v : f)
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("shell weights must be finite and non-negative");
}
}  // namespace detail

/// Minimizes Σ_k (φ̂(k+1) − φ̂(k))² f(k) over profiles from 1 at ρ to 0 at σ.
/// With a zero weight the profile drops across the first such shell and J = 0.
inline CutoffResult optimal_radial_cutoff(std::int64_t rho, std::int64_t sigma, std::span<const double> f) {
  detail::check_shells(rho, sigma, f);
  CutoffResult out;
  out.profile.rho = rho;
  out.profile.sigma = sigma;
  auto& phi = out.profile.values;
  phi.assign(f.size() + 1, 0.0);
  const auto zero = std::find(f.begin(), f.end(), 0.0);
  if (zero != f.end()) {
    const auto k0 = static_cast<std::size_t>(zero - f.begin());
    for (std::size_t i = 0; i <= k0; ++i) phi[i] = 1.0;
    out.J = 0.0;
    return out;
  }
  double total = 0.0;
  for (double v : f) total += 1.0 / v;
  double partial = 0.0;
  phi[0] = 1.0;
  for (std::size_t i = 1; i < phi.size(); ++i) {
    partial += 1.0 / f[i - 1];
    phi[i] = i + 1 == phi.size() ? 0.0 : 1.0 - partial / total;
  }
  out.J = 1.0 / total;
  return out;
}

/// (σ−ρ)^{−(1+1/δ)} (Σ_k f(k)^δ)^{1/δ}, an upper bound for the optimal J.
inline double cutoff_bound(std::int64_t rho, std::int64_t sigma, std::span<const double> f, double delta) {
  detail::check_shells(rho, sigma, f);
  if (!(delta > 0.0)) throw DomainError("cutoff bound needs delta > 0");
  double s = 0.0;
  for (double v : f) s += std::pow(v, delta);
  return std::pow(static_cast<double>(sigma - rho), -(1.0 + 1.0 / delta)) * std::pow(s, 1.0 / delta);
}

/// The energy Σ_k (φ̂(k+1) − φ̂(k))² f(k) of a profile.
inline double profile_energy(const RadialProfile& phi, std::span<const double> f) {
  detail::check_shells(phi.rho, phi.sigma, f);
  double s = 0.0;
  for (std::int64_t k = phi.rho; k < phi.sigma; ++k) {
    const double g = phi(k + 1) - phi(k);
    s += g * g * f[static_cast<std::size_t>(k - phi.rho)];
  }
  return s;
}

/// f(k) = Σ_{e∈S(k)} v(e) for k = ρ..σ−1, shells around the origin.
template <typename V>
std::vector<double> shell_sums(std::int64_t rho, std::int64_t sigma, int dim, V&& v) {
  std::vector<double> f;
  for (std::int64_t k = rho; k < sigma; ++k) {
    double s = 0.0;
    for (const Bond& b : sphere_bonds(k, dim)) s += v(b);
    f.push_back(s);
  }
  return f;
}

/// η(x) = φ̂(|x − center|_∞) on the box.
inline VertexField radial_cutoff_field(const RadialProfile& phi, const LatticeBox& box, const Point& center) {
  return VertexField::from_function(VertexSet(box), [&](const Point& x) { return phi((x - center).sup_norm()); });
}

/// Affine cut-off on B(n): 1 on B(⌊σ₂n⌋), 0 off B(n−1), and in between
/// min{1, (n + 2 − |x|)/(n + 2 − ⌊σ₂n⌋)}. The offset of 2 keeps the ratio of
/// neighbouring values at most 4/3, so osr(η²) ≤ 16/9, while |∇η| stays
/// below 3/(n + 2 − ⌊σ₂n⌋).
inline VertexField affine_cutoff(std::int64_t n, double sigma2, const LatticeBox& box) {
  if (!(sigma2 > 0.0 && sigma2 < 1.0)) throw DomainError("affine cutoff needs sigma2 in (0,1)");
  const auto r = static_cast<std::int64_t>(std::floor(sigma2 * static_cast<double>(n)));
  if (r > n - 1) throw DomainError("affine cutoff needs n >= 1/(1 - sigma2)");
  const double width = static_cast<double>(n + 2 - r);
  const Point c = box.center();
  return VertexField::from_function(VertexSet(box), [&](const Point& x) {
    const auto k = (x - c).sup_norm();
    if (k >= n) return 0.0;
    return std::min(1.0, static_cast<double>(n + 2 - k) / width);
  });
}

/// osr(η) = max{η(y)/η(x) ∨ 1 : {x,y} a bond of the domain, η(x) ≠ 0}.
inline double osr(const VertexField& eta) {
  double m = 1.0;
  const auto& S = eta.domain();
  for (std::size_t i = 0; i < S.size(); ++i) {
    const Point x = S[i];
    if (eta[i] == 0.0) continue;
    for (int a = 0; a < x.dim(); ++a) {
      const Point e = unit_vector(x.dim(), a);
      for (const Point& y : {x + e, x - e})
        if (auto j = S.find(y)) m = std::max(m, eta[*j] / eta[i]);
    }
  }
  return m;
}

// ---------------------------------------------------------------- Sobolev

enum class SobolevMode { bulk, sphere };

struct SobolevRatio {
  double ratio = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
  bool infinite = false;
};

/// Vertices with |x|_∞ = n around the origin.
inline VertexSet sphere_vertices(std::int64_t n, int dim) {
  std::vector<Point> out;
  for (const Point& x : ball(n, dim))
    if (x.sup_norm() == n) out.push_back(x);
  return VertexSet(std::move(out));
}

/// bulk:   ‖f − (f)_{B(n)}‖_{L^{s*}(B(n))} / ‖∇f‖_{L^s(B(n))}, s* = ds/(d−s);
/// sphere: ‖f‖_{L^{s*}(∂B(n))} / (‖∇f‖_{L^s(∂B(n))} + n^{-1}‖f‖_{L^s(∂B(n))}),
/// s* = (d−1)s/(d−1−s). Norms are un-normalized; a vanishing denominator
/// with a nonzero numerator sets the infinite flag.
inline SobolevRatio sobolev_probe(const VertexField& f, std::int64_t n, double s, SobolevMode mode) {
  const int d = f.domain().dim();
  SobolevRatio out;
  if (mode == SobolevMode::bulk) {
    if (!(s >= 1.0 && s < d)) throw DomainError("bulk Sobolev probe needs s in [1, d)");
    const VertexSet B = ball(n, d);
    const VertexField g = VertexField::from_function(B, [&](const Point& x) {
      if (!f.has(x)) throw DomainError("Sobolev probe: f undefined at " + x.str());
      return f.at(x);
    });
    const double mean = pairwise_sum(g.values()) / static_cast<double>(B.size());
    const VertexField centred = VertexField::from_function(B, [&](const Point& x) { return g.at(x) - mean; });
    out.numerator = norm(centred, ExponentSet::s_bulk(s, d), false);
    out.denominator = B.size() > 1 ? norm(gradient(g), s, false) : 0.0;
  } else {
    if (d < 2 || !(s >= 1.0 && s < d - 1)) throw DomainError("sphere Sobolev probe needs s in [1, d-1)");
    if (n < 1) throw DomainError("sphere Sobolev probe needs n >= 1");
    const VertexSet S = sphere_vertices(n, d);
    const VertexField g = VertexField::from_function(S, [&](const Point& x) {
      if (!f.has(x)) throw DomainError("Sobolev probe: f undefined at " + x.str());
      return f.at(x);
    });
    out.numerator = norm(g, ExponentSet::s_bulk(s, d - 1), false);
    out.denominator = norm(gradient(g), s, false) + norm(g, s, false) / static_cast<double>(n);
  }
  if (out.numerator == 0.0) return out;
  if (out.denominator == 0.0) {
    out.infinite = true;
    out.ratio = kInf;
    return out;
  }
  out.ratio = out.numerator / out.denominator;
  return out;
}

// ---------------------------------------------------------------- Caccioppoli

/// Relative tolerance for lhs ≤ rhs: slack·max(1, |rhs|).
inline bool within_slack(double lhs, double rhs, double slack) {
  return lhs <= rhs + slack * std::max(1.0, std::abs(rhs));
}

struct CaccioppoliResult {
  double lhs = 0.0;
  double rhs = 0.0;
  /// ∫ ζ Σ_e ω (∇η)² (u^α)(e)², before the factor 4α².
  double cutoff_term = 0.0;
  /// (s₂−s₁)^{-1} ∫_{I₂∖I₁} Σ_x η² u^{2α}.
  double time_term = 0.0;
  double energy = 0.0;
  double sup_mass = 0.0;
  bool satisfied = false;
};

/// Integrated Caccioppoli inequality for a positive subcaloric u on
/// [t_end − s₂, t_end] × S, with I₁ = [t_end − s₁, t_end]:
///
///   sup_{I₁} Σ η²u^{2α} + ∫_{I₁} Σ_e η²(e) ω (∇u^α)²
///     ≤ 2(4α² ∫ ζ Σ_e ω (∇η)² u^α(e)² + (s₂−s₁)^{-1} ∫_{I₂∖I₁} Σ η²u^{2α}),
///
/// where f(e) is the bond midpoint and ζ ramps from 0 at −s₂ to 1 at −s₁.
/// The 2 bounds the sup and the energy separately. Time integrals are
/// trapezoid sums over the grid instants of u in I₂; the sup runs over
/// instants in I₁. η must vanish on the interior boundary of S.
inline CaccioppoliResult caccioppoli_check(const ConductanceField& w, const SpaceTimeField& u, const VertexField& eta,
                                           double alpha, double s1, double s2, double slack = 1e-6) {
  if (!(alpha >= 1.0)) throw DomainError("Caccioppoli check needs alpha >= 1");
  if (!(s1 > 0.0 && s2 > s1)) throw DomainError("Caccioppoli check needs 0 < s1 < s2");
  const auto& box = u.domain().as_box();
  if (!box) throw DomainError("Caccioppoli check needs a box domain");
  if (!w.box().contains(*box)) throw DomainError("Caccioppoli check: domain leaves the ambient box");
  const auto times = u.times();
  const double t_end = times.back();
  if (times.front() > t_end - s2 + 1e-12) throw DomainError("Caccioppoli check: time grid does not cover I2");

  const std::size_t N = box->size();
  std::vector<double> e2(N);
  for (std::size_t i = 0; i < N; ++i) {
    const Point x = box->point(i);
    if (!eta.has(x)) throw DomainError("cutoff undefined at " + x.str());
    const double v = eta.at(x);
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("cutoff must take values in [0,1]");
    if (box->on_boundary(x) && v != 0.0) throw DomainError("cutoff must vanish on the boundary of the domain");
    e2[i] = v * v;
  }
  for (double v : u.values())
    if (!(v > 0.0)) throw DomainError("Caccioppoli check needs u > 0");

  const BondSet bonds = bonds_within(*box);
  std::vector<std::pair<std::size_t, std::size_t>> ends(bonds.size());
  std::vector<double> wb(bonds.size());
  for (std::size_t k = 0; k < bonds.size(); ++k) {
    ends[k] = {box->index(bonds[k].lower), box->index(bonds[k].upper())};
    wb[k] = w.at(bonds[k]);
  }
  const double lo1 = t_end - s1, lo2 = t_end - s2;
  auto zeta = [&](double t) { return t <= lo2 ? 0.0 : t >= lo1 ? 1.0 : (t - lo2) / (s2 - s1); };

  // Per instant: mass Σ η²u^{2α}, energy Σ η²(e)ω(∇u^α)², cutoff Σ ω(∇η)²u^α(e)².
  std::vector<double> ts, mass, energy, cut;
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (times[j] < lo2 - 1e-12) continue;
    const auto uj = u.slice_values(j);
    std::vector<double> ua(N);
    for (std::size_t i = 0; i < N; ++i) ua[i] = std::pow(uj[i], alpha);
    ts.push_back(times[j]);
    mass.push_back(pairwise_sum(N, [&](std::size_t i) { return e2[i] * ua[i] * ua[i]; }));
    energy.push_back(pairwise_sum(bonds.size(), [&](std::size_t k) {
      const auto [a, b] = ends[k];
      const double g = ua[b] - ua[a];
      return 0.5 * (e2[a] + e2[b]) * wb[k] * g * g;
    }));
    cut.push_back(pairwise_sum(bonds.size(), [&](std::size_t k) {
      const auto [a, b] = ends[k];
      const double ge = std::sqrt(e2[b]) - std::sqrt(e2[a]);
      const double m = 0.5 * (ua[a] + ua[b]);
      return wb[k] * ge * ge * m * m;
    }));
  }

  CaccioppoliResult r;
  std::vector<double> f(ts.size());
  for (std::size_t j = 0; j < ts.size(); ++j) f[j] = zeta(ts[j]) * cut[j];
  r.cutoff_term = trapezoid(ts, f);
  // ζ′ jumps at −s₁; integrate on the sub-grid [−s₂, −s₁] only.
  {
    std::vector<double> t2, m2;
    for (std::size_t j = 0; j < ts.size(); ++j)
      if (ts[j] <= lo1 + 1e-12) {
        t2.push_back(ts[j]);
        m2.push_back(mass[j] / (s2 - s1));
      }
    r.time_term = trapezoid(t2, m2);
  }
  {
    std::vector<double> t1, e1;
    for (std::size_t j = 0; j < ts.size(); ++j)
      if (ts[j] >= lo1 - 1e-12) {
        t1.push_back(ts[j]);
        e1.push_back(energy[j]);
        r.sup_mass = std::max(r.sup_mass, mass[j]);
      }
    r.energy = trapezoid(t1, e1);
  }
  r.lhs = r.sup_mass + r.energy;
  r.rhs = 2.0 * (4.0 * alpha * alpha * r.cutoff_term + r.time_term);
  r.satisfied = within_slack(r.lhs, r.rhs, slack);
  return r;
}

struct LogCaccioppoliResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double drift = 0.0;
  double energy = 0.0;
  double osr = 1.0;
  /// Grid instant attaining max(lhs − rhs).
  std::size_t instant = 0;
  bool satisfied = false;
};

/// Pointwise-in-time energy estimate for g(u), u > 0 supercaloric:
///
///   Σ_x η²g′(u)L^ω u + ⅙ Σ_e φ_η(e) ω (∇g(u))² ≤ 6 osr(η)² Σ_e ω (∇η)²,
///
/// with φ_η(e) = min{η²(ē), η²(e̱)}. Since g′ ≤ 0 and ∂_t u ≥ L^ω u, the
/// first term bounds d/dt Σ η²g(u) from above, with equality for caloric u.
/// Evaluated at every grid instant; the worst instant is returned.
inline LogCaccioppoliResult log_caccioppoli_check(const ConductanceField& w, const SpaceTimeField& u,
                                                  const VertexField& eta, double slack = 1e-6) {
  const auto& box = u.domain().as_box();
  if (!box) throw DomainError("log-Caccioppoli check needs a box domain");
  if (!w.box().contains(*box)) throw DomainError("log-Caccioppoli check: domain leaves the ambient box");
  const std::size_t N = box->size();
  const int d = box->dim();
  std::vector<double> e(N);
  for (std::size_t i = 0; i < N; ++i) {
    const Point x = box->point(i);
    if (!eta.has(x)) throw DomainError("cutoff undefined at " + x.str());
    e[i] = eta.at(x);
    if (!(e[i] >= 0.0 && e[i] <= 1.0)) throw DomainError("cutoff must take values in [0,1]");
    if (box->on_boundary(x) && e[i] != 0.0) throw DomainError("cutoff must vanish on the boundary of the domain");
  }
  for (double v : u.values())
    if (!(v > 0.0)) throw DomainError("log-Caccioppoli check needs u > 0");

  const BondSet bonds = bonds_within(*box);
  std::vector<std::pair<std::size_t, std::size_t>> ends(bonds.size());
  std::vector<double> wb(bonds.size());
  for (std::size_t k = 0; k < bonds.size(); ++k) {
    ends[k] = {box->index(bonds[k].lower), box->index(bonds[k].upper())};
    wb[k] = w.at(bonds[k]);
  }
  LogCaccioppoliResult best;
  best.osr = osr(VertexField(std::make_shared<const VertexSet>(*box), e));
  const double cut = pairwise_sum(bonds.size(), [&](std::size_t k) {
    const double g = e[ends[k].second] - e[ends[k].first];
    return wb[k] * g * g;
  });
  const double rhs = 6.0 * best.osr * best.osr * cut;
  double worst = -kInf;

  for (std::size_t j = 0; j < u.instants(); ++j) {
    const auto uj = u.slice_values(j);
    // L^ω u only where η ≠ 0, which keeps every neighbour inside the box.
    const double drift = pairwise_sum(N, [&](std::size_t i) {
      if (e[i] == 0.0) return 0.0;
      const Point x = box->point(i);
      const std::size_t wi = w.box().index(x);
      double Lu = 0.0;
      for (int a = 0; a < d; ++a) {
        const std::size_t s = box->stride(a);
        Lu += w.raw(wi, a) * (uj[i + s] - uj[i]);
        Lu += w.raw(w.box().index(x - unit_vector(d, a)), a) * (uj[i - s] - uj[i]);
      }
      return e[i] * e[i] * g_prime(uj[i]) * Lu;
    });
    const double energy = pairwise_sum(bonds.size(), [&](std::size_t k) {
      const auto [a, b] = ends[k];
      const double phi = std::min(e[a] * e[a], e[b] * e[b]);
      if (phi == 0.0) return 0.0;
      const double g = g_eval(uj[b]) - g_eval(uj[a]);
      return phi * wb[k] * g * g;
    });
    const double lhs = drift + energy / 6.0;
    if (lhs - rhs > worst) {
      worst = lhs - rhs;
      best.lhs = lhs;
      best.drift = drift;
      best.energy = energy;
      best.instant = j;
    }
  }
  best.rhs = rhs;
  best.satisfied = within_slack(best.lhs, best.rhs, slack);
  return best;
}

// ---------------------------------------------------------------- appendix

/// b^α·((a/b)^α − 1) evaluated through expm1/log1p, accurate when a ≈ b.
/// a, b ≥ 0 and any real α with the powers finite.
inline double power_difference(double a, double b, double alpha) {
  if (a == b) return 0.0;
  if (a == 0.0 || b == 0.0) return std::pow(a, alpha) - std::pow(b, alpha);
  return std::pow(b, alpha) * std::expm1(alpha * std::log1p((a - b) / b));
}

/// ã_α = |a|^α sign a.
inline double signed_power(double a, double alpha) {
  return a == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(a), alpha), a);
}

namespace chain {

/// |ã_α − b̃_α| ≤ (1 ∨ |α/β|)|ã_β − b̃_β|(|a|^{α−β} + |b|^{α−β}); a, b ≠ 0.
inline std::pair<double, double> first(double a, double b, double alpha, double beta) {
  auto diff = [&](double e) {
    if ((a > 0) == (b > 0)) return std::abs(power_difference(std::abs(a), std::abs(b), e));
    return std::pow(std::abs(a), e) + std::pow(std::abs(b), e);
  };
  const double lhs = diff(alpha);
  const double rhs = std::max(1.0, std::abs(alpha / beta)) * diff(beta) *
                     (std::pow(std::abs(a), alpha - beta) + std::pow(std::abs(b), alpha - beta));
  return {lhs, rhs};
}

/// (a^α − b^α)² ≤ α²/(2α−1)·(a − b)(a^{2α−1} − b^{2α−1}); a, b ≥ 0, α > ½.
inline std::pair<double, double> second(double a, double b, double alpha) {
  const double da = power_difference(a, b, alpha);
  return {da * da, alpha * alpha / (2.0 * alpha - 1.0) * (a - b) * power_difference(a, b, 2.0 * alpha - 1.0)};
}

/// (a^{2α−1} + b^{2α−1})|a − b| ≤ |a^α − b^α|(a^α + b^α); a, b ≥ 0, α ≥ 1.
inline std::pair<double, double> third(double a, double b, double alpha) {
  return {(std::pow(a, 2.0 * alpha - 1.0) + std::pow(b, 2.0 * alpha - 1.0)) * std::abs(a - b),
          std::abs(power_difference(a, b, alpha)) * (std::pow(a, alpha) + std::pow(b, alpha))};
}

/// −(b²g′(y) − a²g′(x))(y − x) ≤ −(γ/2)min{a²,b²}(g(y) − g(x))²
///   + (2/γ)max{a²/b², b²/a²}(b − a)² if min{a,b} > 0, and
///   ≤ max{−xg′(x), −yg′(y)}(b − a)² otherwise; here γ = ⅓.
inline std::pair<double, double> energy_g(double x, double y, double a, double b) {
  constexpr double gamma = 1.0 / 3.0;
  const double lhs = -(b * b * g_prime(y) - a * a * g_prime(x)) * (y - x);
  double rhs;
  if (std::min(a, b) > 0.0) {
    const double dg = g_eval(y) - g_eval(x);
    const double ratio = std::max(a * a / (b * b), b * b / (a * a));
    rhs = -0.5 * gamma * std::min(a * a, b * b) * dg * dg + 2.0 / gamma * ratio * (b - a) * (b - a);
  } else {
    rhs = std::max(-x * g_prime(x), -y * g_prime(y)) * (b - a) * (b - a);
  }
  return {lhs, rhs};
}

}  // namespace chain

struct AppendixViolation {
  std::string inequality;
  std::vector<std::pair<std::string, double>> inputs;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
};

struct AppendixReport {
  std::size_t samples = 0;
  std::vector<AppendixViolation> violations;
  /// Largest (lhs − rhs)/max(|lhs|,|rhs|) seen, per inequality.
  std::vector<std::pair<std::string, double>> worst;
};

namespace detail {
/// Draws cover the documented ranges with a share of exact ties and zeros:
///   chain 1: a, b ∈ ±[1e-3, 4], α, β ∈ ±[0.05, 3];
///   chain 2: a, b ∈ [0, 4], α ∈ (½, 4];
///   chain 3: a, b ∈ [0, 4], α ∈ [1, 4];
///   energy_g: x, y log-uniform in [1e-3, 10], a, b ∈ [0, 1].
inline double nonneg_draw(CounterStream& rs, double hi, double other) {
  const double k = rs.uniform();
  if (k < 0.05) return 0.0;
  if (k < 0.10) return other;
  return hi * rs.uniform();
}
}  // namespace detail

/// Runs sample_count draws for each of the four inequalities; a violation is
/// lhs − rhs > rel_slack·max(|lhs|, |rhs|).
inline AppendixReport appendix_property_tests(std::size_t sample_count, std::uint64_t seed, double rel_slack = 1e-12) {
  if (sample_count < 1) throw DomainError("appendix tests need at least one sample");
  static const char* names[4] = {"chain_1", "chain_2", "chain_3", "energy_g"};
  struct Outcome {
    double excess[4];
    std::vector<AppendixViolation> bad;
  };
  std::vector<Outcome> out(sample_count);
  parallel_for(sample_count, [&](std::size_t s) {
    CounterStream rs(seed, s);
    Outcome& o = out[s];
    auto record = [&](int which, std::pair<double, double> v, std::vector<std::pair<std::string, double>> in) {
      const double scale = std::max(std::abs(v.first), std::abs(v.second));
      o.excess[which] = scale > 0.0 ? (v.first - v.second) / scale : 0.0;
      if (v.first - v.second > rel_slack * scale || !std::isfinite(v.first) || !std::isfinite(v.second))
        o.bad.push_back({names[which], std::move(in), v.first, v.second, v.second - v.first});
    };
    auto sgn = [&](double m) { return rs.uniform() < 0.5 ? -m : m; };
    {
      const double a = sgn(1e-3 + (4.0 - 1e-3) * rs.uniform());
      const double b = rs.uniform() < 0.05 ? a : sgn(1e-3 + (4.0 - 1e-3) * rs.uniform());
      const double al = sgn(0.05 + 2.95 * rs.uniform());
      const double be = sgn(0.05 + 2.95 * rs.uniform());
      record(0, chain::first(a, b, al, be), {{"a", a}, {"b", b}, {"alpha", al}, {"beta", be}});
    }
    {
      const double a = 4.0 * rs.uniform();
      const double b = detail::nonneg_draw(rs, 4.0, a);
      const double al = 0.5 + 3.5 * rs.uniform();
      record(1, chain::second(a, b, al), {{"a", a}, {"b", b}, {"alpha", al}});
    }
    {
      const double a = 4.0 * rs.uniform();
      const double b = detail::nonneg_draw(rs, 4.0, a);
      const double al = 1.0 + 3.0 * rs.uniform();
      record(2, chain::third(a, b, al), {{"a", a}, {"b", b}, {"alpha", al}});
    }
    {
      const double x = std::exp(std::log(1e-3) + std::log(1e4) * rs.uniform());
      const double y = rs.uniform() < 0.05 ? x : std::exp(std::log(1e-3) + std::log(1e4) * rs.uniform());
      const double a = rs.uniform() < 0.05 ? 0.0 : rs.uniform();
      const double b = detail::nonneg_draw(rs, 1.0, a);
      record(3, chain::energy_g(x, y, a, b), {{"x", x}, {"y", y}, {"a", a}, {"b", b}});
    }
  });
  AppendixReport rep;
  rep.samples = sample_count;
  for (int k = 0; k < 4; ++k) rep.worst.emplace_back(names[k], -kInf);
  for (auto& o : out) {
    for (int k = 0; k < 4; ++k) rep.worst[k].second = std::max(rep.worst[k].second, o.excess[k]);
    for (auto& v : o.bad) rep.violations.push_back(std::move(v));
  }
  return rep;
}

/// `inequality,inputs...,lhs,rhs,slack`, inputs as name=value.
inline void write_violations_csv(std::ostream& os, const std::vector<AppendixViolation>& v) {
  os << "inequality,inputs,lhs,rhs,slack\n";
  char buf[96];
  for (const auto& x : v) {
    os << x.inequality << ',';
    for (std::size_t i = 0; i < x.inputs.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", x.inputs[i].second);
      os << (i ? ";" : "") << x.inputs[i].first << '=' << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g\n", x.lhs, x.rhs, x.slack);
    os << buf;
  }
}

}  // namespace rcm
