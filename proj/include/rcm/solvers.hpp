#pragma once

// Evolution of ∂_t u = L^ω u by uniformization, the caloric initial-boundary
// value problem, the Dirichlet (harmonic) problem and the Bessel reference
// kernel for constant conductances.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <span>
#include <type_traits>
#include <vector>

#include "rcm/calculus.hpp"
#include "rcm/conductance.hpp"
#include "rcm/environment.hpp"
#include "rcm/error.hpp"
#include "rcm/lattice.hpp"
#include "rcm/numeric.hpp"
#include "rcm/parallel.hpp"

namespace rcm {

struct SolverConfig {
  double series_tol = 1e-10;
  /// Ambient box radius for helpers that build the environment themselves;
  /// 0 picks one from a large-deviation estimate.
  std::int64_t radius = 0;
  double max_leak = 1e-12;
  /// Step of the stored time grid for trajectories (IBVP).
  double grid_step = 1.0;
  /// Every check_stride-th IBVP step is re-done as two half steps.
  std::size_t check_stride = 16;
  double residual_tol = 1e-10;
  int max_halvings = 6;
};

// ---------------------------------------------------------------- Poisson

/// Poisson(x) probabilities on an index window [lo, lo + w.size()) whose
/// complement has mass at most tol.
struct PoissonWindow {
  std::size_t lo = 0;
  std::vector<double> w;
  std::size_t hi() const { return lo + w.size() - 1; }
  double at(std::size_t k) const { return (k < lo || k > hi()) ? 0.0 : w[k - lo]; }
};

inline PoissonWindow poisson_window(double x, double tol) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("poisson window needs finite x >= 0");
  PoissonWindow out;
  if (x == 0.0) {
    out.w = {1.0};
    return out;
  }
  const auto mode = static_cast<std::size_t>(std::floor(x));
  const double pm = std::exp(-x + mode * std::log(x) - std::lgamma(mode + 1.0));
  std::vector<double> right{pm};
  // Right tail after k is at most π_{k+1}/(1 − x/(k+2)).
  for (std::size_t k = mode;; ++k) {
    const double next = right.back() * x / double(k + 1);
    const double r = x / double(k + 2);
    if (r < 1.0 && next / (1.0 - r) <= 0.5 * tol) break;
    right.push_back(next);
  }
  std::vector<double> left;
  // Left tail below k is at most π_{k−1}/(1 − (k−1)/x).
  double cur = pm;
  std::size_t k = mode;
  while (k > 0) {
    const double prev = cur * double(k) / x;
    const double r = double(k - 1) / x;
    if (r < 1.0 && prev / (1.0 - r) <= 0.5 * tol) break;
    left.push_back(prev);
    cur = prev;
    --k;
  }
  out.lo = k;
  out.w.assign(left.rbegin(), left.rend());
  out.w.insert(out.w.end(), right.begin(), right.end());
  return out;
}

/// π_k(x) for k = 0..K.
inline std::vector<double> poisson_pmf(double x, std::size_t K) {
  std::vector<double> p(K + 1, 0.0);
  if (x == 0.0) {
    p[0] = 1.0;
    return p;
  }
  for (std::size_t k = 0; k <= K; ++k) p[k] = std::exp(-x + k * std::log(x) - std::lgamma(k + 1.0));
  return p;
}

// ---------------------------------------------------------------- operator

/// Index range [lo_a, hi_a] per axis in region coordinates (0..side−1).
struct IndexRange {
  std::array<std::int64_t, kMaxDim> lo{};
  std::array<std::int64_t, kMaxDim> hi{};
};

/// P = I + L^ω/Λ on the interior of a region, with the interior boundary of
/// the region absorbing. Λ = max μ over interior vertices, so P ≥ 0 entrywise.
class UniformizedOperator {
 public:
  UniformizedOperator(const ConductanceField& w, LatticeBox region) : region_(std::move(region)) {
    if (!w.box().contains(region_)) throw DomainError("operator region leaves the ambient box");
    if (region_.radius() < 1) throw DomainError("operator region needs radius >= 1");
    const int d = region_.dim();
    const std::size_t N = region_.size();
    for (int a = 0; a < d; ++a) wp_[a].assign(N, 0.0);
    std::vector<double> mu(N, 0.0), out(N, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
      const Point x = region_.point(i);
      const std::size_t wi = w.box().index(x);
      for (int a = 0; a < d; ++a) {
        if (x[a] - region_.center()[a] >= region_.radius()) continue;
        const double v = w.raw(wi, a);
        const std::size_t j = i + region_.stride(a);
        wp_[a][i] = v;
        mu[i] += v;
        mu[j] += v;
        if (region_.on_boundary(region_.point(j))) out[i] += v;
        if (region_.on_boundary(x)) out[j] += v;
      }
    }
    rate_ = 0.0;
    for (std::size_t i = 0; i < N; ++i)
      if (live(i)) rate_ = std::max(rate_, mu[i]);
    for (std::size_t i = 0; i < N; ++i) {
      for (int a = 0; a < d; ++a) wp_[a][i] /= rate_;
      if (!live(i)) continue;
      if (out[i] > 0.0) {
        outflow_idx_.push_back(i);
        outflow_.push_back(out[i] / rate_);
      }
    }
  }

  const LatticeBox& region() const noexcept { return region_; }
  double rate() const noexcept { return rate_; }
  std::size_t size() const noexcept { return region_.size(); }

  bool live(std::size_t i) const {
    for (int a = 0; a < region_.dim(); ++a) {
      const auto c = static_cast<std::int64_t>((i / region_.stride(a)) % static_cast<std::size_t>(region_.side()));
      if (c == 0 || c == region_.side() - 1) return false;
    }
    return true;
  }

  /// All interior vertices.
  IndexRange live_range() const {
    IndexRange r;
    for (int a = 0; a < region_.dim(); ++a) {
      r.lo[a] = 1;
      r.hi[a] = region_.side() - 2;
    }
    return r;
  }

  /// Smallest range containing the support of v, clipped to the interior.
  IndexRange support_range(std::span<const double> v) const {
    IndexRange r;
    const int d = region_.dim();
    for (int a = 0; a < d; ++a) {
      r.lo[a] = region_.side();
      r.hi[a] = -1;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] == 0.0) continue;
      std::size_t rem = i;
      for (int a = 0; a < d; ++a) {
        const auto c = static_cast<std::int64_t>(rem / region_.stride(a));
        rem %= region_.stride(a);
        r.lo[a] = std::min(r.lo[a], c);
        r.hi[a] = std::max(r.hi[a], c);
      }
    }
    for (int a = 0; a < d; ++a) {
      r.lo[a] = std::max<std::int64_t>(r.lo[a], 1);
      r.hi[a] = std::min<std::int64_t>(r.hi[a], region_.side() - 2);
    }
    return r;
  }

  /// Range reached after one more application of P.
  IndexRange grow(IndexRange r) const {
    for (int a = 0; a < region_.dim(); ++a) {
      r.lo[a] = std::max<std::int64_t>(r.lo[a] - 1, 1);
      r.hi[a] = std::min<std::int64_t>(r.hi[a] + 1, region_.side() - 2);
    }
    return r;
  }

  /// out[i] = (P in)[i] + extra(i) for i in range. Entries of in on the
  /// region boundary must be 0; entries of out outside the range are left
  /// untouched.
  template <typename Extra>
  void apply(std::span<const double> in, std::span<double> out, const IndexRange& r, Extra&& extra) const {
    switch (region_.dim()) {
      case 1: apply_dim<1>(in, out, r, extra); break;
      case 2: apply_dim<2>(in, out, r, extra); break;
      case 3: apply_dim<3>(in, out, r, extra); break;
      default: apply_dim<4>(in, out, r, extra); break;
    }
  }

  struct NoExtra {
    double operator()(std::size_t) const { return 0.0; }
  };

  void apply(std::span<const double> in, std::span<double> out, const IndexRange& r) const {
    apply(in, out, r, NoExtra{});
  }

  /// Mass sent to the absorbing boundary by one application of P to |v|.
  double outflow(std::span<const double> v) const {
    return pairwise_sum(outflow_idx_.size(), [&](std::size_t k) { return std::abs(v[outflow_idx_[k]]) * outflow_[k]; });
  }

  /// b(x) = Σ_{y ∈ ∂region, y∼x} ω(x,y) g(y) for interior x (zero elsewhere),
  /// g given on the whole region.
  std::vector<double> boundary_forcing(std::span<const double> g) const {
    std::vector<double> b(size(), 0.0);
    const int d = region_.dim();
    for (std::size_t i : outflow_idx_) {
      for (int a = 0; a < d; ++a) {
        const std::size_t s = region_.stride(a);
        if (!live(i + s)) b[i] += wp_[a][i] * rate_ * g[i + s];
        if (!live(i - s)) b[i] += wp_[a][i - s] * rate_ * g[i - s];
      }
    }
    return b;
  }

 private:
  template <int D, typename Extra>
  void apply_dim(std::span<const double> in, std::span<double> out, const IndexRange& r, Extra& extra) const {
    std::array<std::size_t, D> s{};
    for (int a = 0; a < D; ++a) s[a] = region_.stride(a);
    std::size_t lines = 1;
    for (int a = 0; a + 1 < D; ++a) lines *= static_cast<std::size_t>(r.hi[a] - r.lo[a] + 1);
    if (r.hi[D - 1] < r.lo[D - 1]) return;
    for (int a = 0; a + 1 < D; ++a)
      if (r.hi[a] < r.lo[a]) return;
    const double* pin = in.data();
    double* pout = out.data();
    std::array<const double*, D> pw{};
    for (int a = 0; a < D; ++a) pw[a] = wp_[a].data();
    parallel_for(lines, [&](std::size_t line) {
      std::size_t base = static_cast<std::size_t>(r.lo[D - 1]) * s[D - 1];
      std::size_t rem = line;
      for (int a = D - 2; a >= 0; --a) {
        const auto len = static_cast<std::size_t>(r.hi[a] - r.lo[a] + 1);
        base += (static_cast<std::size_t>(r.lo[a]) + rem % len) * s[a];
        rem /= len;
      }
      const auto n = static_cast<std::size_t>(r.hi[D - 1] - r.lo[D - 1] + 1);
      sweep_line<D>(pin + base, pout + base, pw, base, s, n);
      if constexpr (!std::is_same_v<std::decay_t<Extra>, NoExtra>)
        for (std::size_t i = base; i < base + n; ++i) pout[i] += extra(i);
    });
  }

  // (P v)(i) = v(i) + Σ_a w_a(i)(v(i+s_a) − v(i)) + w_a(i−s_a)(v(i−s_a) − v(i)),
  // with w = ω/Λ; the diagonal 1 − μ/Λ is never formed.
  template <int D>
  static void sweep_line(const double* __restrict in, double* __restrict out, const std::array<const double*, D>& pw,
                         std::size_t base, const std::array<std::size_t, D>& s, std::size_t n) {
    std::array<const double* __restrict, D> up{}, down{};
    for (int a = 0; a < D; ++a) {
      up[a] = pw[a] + base;
      down[a] = pw[a] + base - s[a];
    }
    for (std::size_t k = 0; k < n; ++k) {
      const double c = in[k];
      double acc = c;
      for (int a = 0; a < D; ++a) {
        const std::ptrdiff_t sa = static_cast<std::ptrdiff_t>(s[a]);
        acc += up[a][k] * (in[static_cast<std::ptrdiff_t>(k) + sa] - c) + down[a][k] * (in[static_cast<std::ptrdiff_t>(k) - sa] - c);
      }
      out[k] = acc;
    }
  }

  LatticeBox region_;
  double rate_ = 0.0;
  std::array<std::vector<double>, kMaxDim> wp_;
  std::vector<std::size_t> outflow_idx_;
  std::vector<double> outflow_;
};

// ---------------------------------------------------------------- evolve

struct EvolveResult {
  /// e^{t_j L}u0 on the ambient box, one slice per requested time.
  SpaceTimeField u;
  /// Mass (of |u|) absorbed at the box boundary up to each time.
  std::vector<double> leak;
  double rate = 0.0;
  std::size_t matvecs = 0;
};

namespace detail {
inline std::vector<double> to_box(const VertexField& u0, const LatticeBox& box) {
  std::vector<double> v(box.size(), 0.0);
  if (u0.domain().as_box() && *u0.domain().as_box() == box) {
    std::copy(u0.values().begin(), u0.values().end(), v.begin());
  } else {
    for (std::size_t k = 0; k < u0.size(); ++k) {
      const auto i = box.find(u0.domain()[k]);
      if (!i) throw DomainError("initial datum not supported inside the ambient box");
      v[*i] = u0[k];
    }
  }
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] != 0.0 && box.on_boundary(box.point(i)))
      throw DomainError("initial datum touches the absorbing boundary of the ambient box");
  return v;
}
}  // namespace detail

/// e^{tL^ω}u0 at several increasing times from one sequence of powers P^k u0.
/// The boundary of ω's box is absorbing; no leak check is made here.
inline EvolveResult evolve_many(const ConductanceField& w, const VertexField& u0, std::span<const double> times,
                                const SolverConfig& cfg) {
  if (times.empty()) throw DomainError("no evaluation times");
  for (double t : times)
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("evolution time must be finite and >= 0");
  const LatticeBox& box = w.box();
  const UniformizedOperator P(w, box);
  const double L = P.rate();

  std::vector<PoissonWindow> windows;
  std::size_t K = 0;
  for (double t : times) {
    windows.push_back(poisson_window(L * t, cfg.series_tol));
    K = std::max(K, windows.back().hi());
  }

  auto domain = std::make_shared<const VertexSet>(box);
  EvolveResult res{SpaceTimeField(std::vector<double>(times.begin(), times.end()), domain),
                   std::vector<double>(times.size(), 0.0), L, K};

  std::vector<double> v = detail::to_box(u0, box);
  std::vector<double> next(v.size(), 0.0);
  IndexRange range = P.support_range(v);
  double absorbed = 0.0;
  std::vector<std::span<double>> acc;
  for (std::size_t j = 0; j < times.size(); ++j) acc.push_back(res.u.slice_values(j));

  for (std::size_t k = 0;; ++k) {
    for (std::size_t j = 0; j < times.size(); ++j) {
      const double pk = windows[j].at(k);
      if (pk == 0.0) continue;
      res.leak[j] += pk * absorbed;
      // Accumulate only where v can be non-zero.
      const IndexRange r = range;
      const int d = box.dim();
      std::array<std::int64_t, kMaxDim> c{};
      for (int a = 0; a < d; ++a) c[a] = r.lo[a];
      bool nonempty = true;
      for (int a = 0; a < d; ++a) nonempty = nonempty && r.hi[a] >= r.lo[a];
      if (nonempty) {
        while (true) {
          std::size_t base = 0;
          for (int a = 0; a < d - 1; ++a) base += static_cast<std::size_t>(c[a]) * box.stride(a);
          for (auto x = r.lo[d - 1]; x <= r.hi[d - 1]; ++x) {
            const std::size_t i = base + static_cast<std::size_t>(x);
            acc[j][i] += pk * v[i];
          }
          int a = d - 2;
          while (a >= 0 && c[a] == r.hi[a]) {
            c[a] = r.lo[a];
            --a;
          }
          if (a < 0) break;
          ++c[a];
        }
      }
    }
    if (k == K) break;
    absorbed += P.outflow(v);
    const IndexRange grown = P.grow(range);
    P.apply(v, next, grown);
    std::swap(v, next);
    // Entries of next (old v) outside the new range are stale but were zero
    // before; keep the invariant that v vanishes outside its range.
    range = grown;
  }
  return res;
}

/// e^{tL^ω}u0; throws TruncationError when more than max_leak is absorbed.
inline VertexField evolve(const ConductanceField& w, const VertexField& u0, double t, const SolverConfig& cfg) {
  const double times[1] = {t};
  const auto r = evolve_many(w, u0, times, cfg);
  if (r.leak[0] > cfg.max_leak)
    throw TruncationError("evolve: absorbed mass " + std::to_string(r.leak[0]) + " exceeds max_leak; enlarge the box",
                          r.leak[0]);
  return r.u.slice(0);
}

struct HeatKernelColumn {
  Point source;
  double t = 0.0;
  VertexField values;
  double leak = 0.0;
  double series_tol = 0.0;

  double mass() const { return pairwise_sum(values.values()); }
  double at(const Point& y) const { return values.has(y) ? values.at(y) : 0.0; }
};

/// p_t^ω(x, ·) on the ambient box of ω at each requested time.
inline std::vector<HeatKernelColumn> heat_kernel_many(const ConductanceField& w, const Point& x,
                                                      std::span<const double> times, const SolverConfig& cfg) {
  const auto delta = VertexField::from_function(VertexSet(w.box()), [&](const Point& y) { return y == x ? 1.0 : 0.0; });
  if (!w.box().contains(x)) throw DomainError("heat kernel source outside the box");
  const auto r = evolve_many(w, delta, times, cfg);
  std::vector<HeatKernelColumn> out;
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (r.leak[j] > cfg.max_leak)
      throw TruncationError("heat kernel: absorbed mass " + std::to_string(r.leak[j]) + " at t=" +
                                std::to_string(times[j]) + " exceeds max_leak; enlarge the box",
                            r.leak[j]);
    out.push_back({x, times[j], r.u.slice(j), r.leak[j], cfg.series_tol});
  }
  return out;
}

inline HeatKernelColumn heat_kernel(const ConductanceField& w, const Point& x, double t, const SolverConfig& cfg) {
  const double times[1] = {t};
  return heat_kernel_many(w, x, times, cfg).front();
}

/// Box radius for which a walk with per-coordinate jump rate 2·rate exits
/// before time t with probability at most leak (Chernoff bound on each face,
/// doubled by the reflection principle).
inline std::int64_t auto_radius(int d, double t, double rate, double leak) {
  if (t <= 0.0) return 2;
  const double s = 2.0 * rate * t;
  for (std::int64_t R = 2;; R += std::max<std::int64_t>(1, R / 64)) {
    const double z = double(R) / s;
    const double rate_fn = double(R) * std::asinh(z) - s * (std::sqrt(1.0 + z * z) - 1.0);
    if (std::log(4.0 * d) - rate_fn <= std::log(leak)) return R + 1;
  }
}

/// Heat kernel columns for an environment drawn from law around x, with the
/// box chosen by auto_radius (or cfg.radius) and enlarged by 25% on every
/// truncation failure. Returns the columns and the environment used.
inline std::pair<std::vector<HeatKernelColumn>, ConductanceField> heat_kernel_for_law(
    const EnvironmentLaw& law, const Point& x, std::span<const double> times, const SolverConfig& cfg,
    double mean_rate = 1.0, int max_retries = 8) {
  double tmax = 0.0;
  for (double t : times) tmax = std::max(tmax, t);
  std::int64_t R = cfg.radius > 0 ? cfg.radius : auto_radius(x.dim(), tmax, mean_rate, cfg.max_leak);
  for (int attempt = 0;; ++attempt) {
    auto w = generate(law, LatticeBox(x, R));
    try {
      auto cols = heat_kernel_many(w, x, times, cfg);
      return {std::move(cols), std::move(w)};
    } catch (const TruncationError&) {
      if (attempt >= max_retries) throw;
      R += std::max<std::int64_t>(2, R / 4);
    }
  }
}

/// CSV dump `t,x1..xd,value` preceded by a metadata comment line. Entries
/// below min_value in absolute value are skipped when min_value > 0.
inline void write_kernel_csv(std::ostream& os, const HeatKernelColumn& col, double min_value = 0.0) {
  const int d = col.source.dim();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", col.leak);
  os << "# source=" << col.source.str() << " leak=" << buf;
  std::snprintf(buf, sizeof buf, "%.17g", col.series_tol);
  os << " series_tol=" << buf << '\n';
  os << "t";
  for (int a = 0; a < d; ++a) os << ",x" << a + 1;
  os << ",value\n";
  for (std::size_t i = 0; i < col.values.size(); ++i) {
    if (min_value > 0.0 && std::abs(col.values[i]) < min_value) continue;
    const Point y = col.values.domain()[i];
    std::snprintf(buf, sizeof buf, "%.17g", col.t);
    os << buf;
    for (int a = 0; a < d; ++a) os << ',' << y[a];
    std::snprintf(buf, sizeof buf, ",%.17g\n", col.values[i]);
    os << buf;
  }
}

// ---------------------------------------------------------------- IBVP

struct IbvpReport {
  double max_residual = 0.0;
  std::size_t checked_steps = 0;
  std::size_t matvecs = 0;
  double rate = 0.0;
};

namespace detail {

/// Coefficients of one uniformized Duhamel step of length h:
/// u(h) = Σ_j P^j (a_j u0 + b_j f0 + c_j Δf), f linear in time from f0 to f0+Δf.
struct StepCoefficients {
  std::vector<double> a, b, c;
};

inline StepCoefficients step_coefficients(double rate, double h, double tol) {
  const double x = rate * h;
  const auto win = poisson_window(x, tol * 1e-3);
  const std::size_t K = win.hi() + 4;
  const auto pmf = poisson_pmf(x, K + 2);
  // Upper tails Q_m = P(N ≥ m), by suffix sums (the part beyond K+2 is
  // below the window tolerance).
  std::vector<double> Q(K + 4, 0.0);
  for (std::size_t m = K + 3; m-- > 0;) Q[m] = Q[m + 1] + (m <= K + 2 ? pmf[m] : 0.0);
  StepCoefficients s;
  s.a.assign(pmf.begin(), pmf.begin() + static_cast<std::ptrdiff_t>(K + 1));
  s.b.resize(K + 1);
  s.c.resize(K + 1);
  for (std::size_t j = 0; j <= K; ++j) {
    const double I0 = Q[j + 1] / rate;
    const double I1 = double(j + 1) * Q[j + 2] / (rate * rate);
    s.b[j] = I0;
    s.c[j] = I0 - I1 / h;
  }
  return s;
}

}  // namespace detail

/// Lateral data: value at grid instant j and boundary vertex x.
using LateralData = std::function<double(std::size_t, const Point&)>;

/// Solves ∂_t u = L^ω u on the interior of region for t in the grid, with
/// u = lateral on the interior boundary of region (linear in t between grid
/// instants) and u(t_0) = initial in the interior. Each step is exact up to
/// the series tolerance; every check_stride-th step is compared with two half
/// steps and refined by halving if the two disagree beyond residual_tol.
/// Slice observer: grid instant j and the solution on every vertex of region.
using SliceObserver = std::function<void(std::size_t, std::span<const double>)>;

/// Streaming form: each slice is passed to observe and then discarded.
inline void solve_caloric_ibvp(const ConductanceField& w, const LatticeBox& region, std::span<const double> times,
                               const LateralData& lateral, const VertexField& initial, const SolverConfig& cfg,
                               const SliceObserver& observe, IbvpReport* report = nullptr) {
  if (times.size() < 1) throw DomainError("IBVP needs at least one instant");
  const UniformizedOperator P(w, region);
  const double L = P.rate();
  const std::size_t N = region.size();
  std::vector<double> slice(N);
  IbvpReport rep;
  rep.rate = L;

  auto boundary_values = [&](std::size_t j) {
    std::vector<double> g(N, 0.0);
    for (std::size_t i = 0; i < N; ++i)
      if (!P.live(i)) g[i] = lateral(j, region.point(i));
    return g;
  };

  std::vector<double> cur(N, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    if (!P.live(i)) continue;
    const Point x = region.point(i);
    if (!initial.has(x)) throw DomainError("initial datum missing at " + x.str());
    cur[i] = initial.at(x);
  }
  std::vector<double> g0 = boundary_values(0);
  for (std::size_t i = 0; i < N; ++i) slice[i] = P.live(i) ? cur[i] : g0[i];
  observe(0, slice);

  std::map<double, detail::StepCoefficients> cache;
  auto coeffs = [&](double h) -> const detail::StepCoefficients& {
    auto it = cache.find(h);
    if (it == cache.end()) it = cache.emplace(h, detail::step_coefficients(L, h, cfg.series_tol)).first;
    return it->second;
  };
  const IndexRange full = P.live_range();
  std::vector<double> r(N, 0.0), tmp(N, 0.0);

  // One exact step of length h from u0 with forcing f0 → f0 + df.
  auto step = [&](std::span<const double> u0, std::span<const double> f0, std::span<const double> df, double h,
                  std::vector<double>& out) {
    const auto& c = coeffs(h);
    const std::size_t K = c.a.size() - 1;
    for (std::size_t i = 0; i < N; ++i) out[i] = P.live(i) ? c.a[K] * u0[i] + c.b[K] * f0[i] + c.c[K] * df[i] : 0.0;
    for (std::size_t j = K; j-- > 0;) {
      const double a = c.a[j], b = c.b[j], cc = c.c[j];
      P.apply(out, tmp, full, [&](std::size_t i) { return a * u0[i] + b * f0[i] + cc * df[i]; });
      std::swap(out, tmp);
      ++rep.matvecs;
    }
  };

  // Forcing b(t) = Σ_{y∈∂} ω(x,y) g_t(y) is linear in t between instants.
  std::vector<double> f0 = P.boundary_forcing(g0);
  std::vector<double> next(N), half(N), twohalf(N), fmid(N), dhalf(N);
  for (std::size_t j = 1; j < times.size(); ++j) {
    const double h = times[j] - times[j - 1];
    const std::vector<double> g1 = boundary_values(j);
    const std::vector<double> f1 = P.boundary_forcing(g1);
    std::vector<double> df(N);
    for (std::size_t i = 0; i < N; ++i) df[i] = f1[i] - f0[i];
    step(cur, f0, df, h, next);

    if (cfg.check_stride > 0 && (j % cfg.check_stride == 0 || j + 1 == times.size())) {
      // Compare with 2^m sub-steps until two successive refinements agree.
      std::vector<double> coarse = next;
      double diff = 0.0;
      bool ok = false;
      for (int m = 1; m <= cfg.max_halvings; ++m) {
        const std::size_t parts = std::size_t{1} << m;
        const double hs = h / double(parts);
        std::vector<double> state = cur;
        for (std::size_t p = 0; p < parts; ++p) {
          for (std::size_t i = 0; i < N; ++i) {
            fmid[i] = f0[i] + df[i] * double(p) / double(parts);
            dhalf[i] = df[i] / double(parts);
          }
          step(state, fmid, dhalf, hs, twohalf);
          std::swap(state, twohalf);
        }
        diff = 0.0;
        double scale = 1.0;
        for (std::size_t i = 0; i < N; ++i) {
          diff = std::max(diff, std::abs(state[i] - coarse[i]));
          scale = std::max(scale, std::abs(state[i]));
        }
        diff /= scale;
        if (diff <= cfg.residual_tol) {
          ok = true;
          if (m > 1) next = state;
          break;
        }
        coarse = std::move(state);
      }
      ++rep.checked_steps;
      rep.max_residual = std::max(rep.max_residual, diff);
      if (!ok) throw SolverError("IBVP step refinement did not reach the residual tolerance");
    }

    cur.swap(next);
    for (std::size_t i = 0; i < N; ++i) slice[i] = P.live(i) ? cur[i] : g1[i];
    observe(j, slice);
    f0 = f1;
  }
  if (report) *report = rep;
}

inline SpaceTimeField solve_caloric_ibvp(const ConductanceField& w, const LatticeBox& region,
                                         std::span<const double> times, const LateralData& lateral,
                                         const VertexField& initial, const SolverConfig& cfg,
                                         IbvpReport* report = nullptr) {
  SpaceTimeField u(std::vector<double>(times.begin(), times.end()), std::make_shared<const VertexSet>(region));
  solve_caloric_ibvp(
      w, region, times, lateral, initial, cfg,
      [&](std::size_t j, std::span<const double> v) { u.set_slice(j, v); }, report);
  return u;
}

// ---------------------------------------------------------------- harmonic

struct HarmonicReport {
  double relative_residual = 0.0;
  std::size_t unknowns = 0;
};

/// Solves L^ω u = 0 on the interior of region with u = dirichlet on its
/// interior boundary. Sparse LDLᵀ on the interior unknowns.
inline VertexField solve_harmonic(const ConductanceField& w, const LatticeBox& region,
                                  const std::function<double(const Point&)>& dirichlet,
                                  HarmonicReport* report = nullptr, double tol = 1e-10) {
  if (!w.box().contains(region)) throw DomainError("harmonic region leaves the ambient box");
  const std::size_t N = region.size();
  const int d = region.dim();
  std::vector<std::ptrdiff_t> unknown(N, -1);
  std::vector<double> g(N, 0.0);
  std::ptrdiff_t m = 0;
  for (std::size_t i = 0; i < N; ++i) {
    const Point x = region.point(i);
    if (region.on_boundary(x)) {
      g[i] = dirichlet(x);
      if (!std::isfinite(g[i])) throw DomainError("Dirichlet datum not finite at " + x.str());
    } else {
      unknown[i] = m++;
    }
  }
  VertexField u{VertexSet(region)};
  for (std::size_t i = 0; i < N; ++i) u[i] = g[i];
  if (m == 0) return u;

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (std::size_t i = 0; i < N; ++i) {
    if (unknown[i] < 0) continue;
    const Point x = region.point(i);
    const std::size_t wi = w.box().index(x);
    double mu = 0.0;
    for (int a = 0; a < d; ++a) {
      const std::size_t s = region.stride(a);
      const double up = w.raw(wi, a);
      const double down = w.raw(w.box().index(x - unit_vector(d, a)), a);
      mu += up + down;
      for (auto [j, v] : {std::pair{i + s, up}, std::pair{i - s, down}}) {
        if (unknown[j] >= 0)
          trip.emplace_back(unknown[i], unknown[j], -v);
        else
          rhs[unknown[i]] += v * g[j];
      }
    }
    trip.emplace_back(unknown[i], unknown[i], mu);
  }
  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success) throw SolverError("harmonic solve: factorization failed");
  const Eigen::VectorXd x = solver.solve(rhs);
  if (solver.info() != Eigen::Success) throw SolverError("harmonic solve: back substitution failed");
  const double denom = std::max({rhs.norm(), (A * x).norm(), 1e-300});
  const double rel = (A * x - rhs).norm() / denom;
  if (!(rel <= tol)) throw SolverError("harmonic solve: relative residual " + std::to_string(rel) + " above tolerance");
  for (std::size_t i = 0; i < N; ++i)
    if (unknown[i] >= 0) u[i] = x[unknown[i]];
  if (report) *report = {rel, static_cast<std::size_t>(m)};
  return u;
}

// ---------------------------------------------------------------- Bessel

/// e^{-2t} I_k(2t) = Σ_m e^{-2t} t^{2m+k} / (m! (m+k)!), the one-dimensional
/// kernel for ω ≡ 1. Terms are summed in log space until the geometric bound
/// on the remaining tail is below 1e-14 relative to the sum and absolute.
inline double bessel_kernel_1d(double t, std::int64_t k) {
  if (t < 0.0) throw DomainError("bessel kernel needs t >= 0");
  k = k < 0 ? -k : k;
  if (t == 0.0) return k == 0 ? 1.0 : 0.0;
  const double lt = std::log(t);
  const double kk = static_cast<double>(k);
  double sum = 0.0;
  for (std::int64_t m = 0;; ++m) {
    const double md = static_cast<double>(m);
    const double term = std::exp(-2.0 * t + (2.0 * md + kk) * lt - std::lgamma(md + 1.0) - std::lgamma(md + kk + 1.0));
    sum += term;
    const double ratio = t * t / ((md + 1.0) * (md + kk + 1.0));
    if (ratio < 1.0) {
      const double tail = term * ratio / (1.0 - ratio);
      if (tail <= 1e-14 * sum || tail <= 1e-300) break;
    }
  }
  return sum;
}

/// Π_i e^{-2t} I_{|x_i|}(2t): p_t(0,x) for ω ≡ 1 on Z^d.
inline double bessel_reference(int d, double t, const Point& x) {
  if (x.dim() != d) throw DomainError("point dimension mismatch");
  double p = 1.0;
  for (int a = 0; a < d; ++a) p *= bessel_kernel_1d(t, x[a]);
  return p;
}

}  // namespace rcm
