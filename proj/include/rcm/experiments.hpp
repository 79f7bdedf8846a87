#pragma once

// Theorem-verification campaigns. Each run_* builds its own environments and
// data from (master seed, trial index), so any trial can be rerun from the
// seeds in its CSV row, and the report does not depend on the worker count.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "rcm/calculus.hpp"
#include "rcm/conductance.hpp"
#include "rcm/environment.hpp"
#include "rcm/error.hpp"
#include "rcm/exponents.hpp"
#include "rcm/lattice.hpp"
#include "rcm/numeric.hpp"
#include "rcm/parallel.hpp"
#include "rcm/report.hpp"
#include "rcm/rng.hpp"
#include "rcm/solvers.hpp"
#include "rcm/walker.hpp"

namespace rcm {

// ---------------------------------------------------------------- parameters

struct ExperimentParams {
  std::string law = "pareto_mixture(8,8)";
  int d = 2;
  double p = 4.0;
  double q = 4.0;
  /// parabolic | elliptic (oscillation only).
  std::string mode = "parabolic";
  /// gaussian | linear | constant.
  std::string boundary_data = "gaussian";
  double data_scale = 1.0;
  std::int64_t n = 64;
  std::int64_t trials = 50;
  double tau = 1.0;
  double c_free = 1.0;
  /// Level ε of the density hypothesis; λ is measured.
  double harnack_eps = 1.0;
  /// γ in the d ≥ 3 elliptic boundedness ratio.
  double bound_gamma = 1.0;
  double t = 1.0;
  std::vector<double> t_ladder{1, 2, 4, 8, 16, 32, 64};
  std::int64_t seeds = 20;
  std::vector<std::int64_t> n_ladder{8, 16, 32, 64};
  double trap_qprime = 0.8;
  std::vector<std::int64_t> trap_n_ladder{8, 16};
  std::int64_t holder_n = 32;
  std::int64_t holder_levels = 2;
  double k_extent = 1.0;
  std::int64_t k_points = 3;
  std::int64_t sigma_paths = 40000;
  double grid_step = 1.0;
  double max_leak = 1e-12;
  double series_tol = 1e-10;
};

namespace detail {

template <typename T>
T parse_scalar(std::string_view v) {
  T out{};
  if (!parse_number(v, out)) throw ConfigError("cannot parse '" + std::string(v) + "'");
  return out;
}

template <typename T>
std::vector<T> parse_list(std::string_view v) {
  std::vector<T> out;
  std::size_t i = 0;
  while (i <= v.size()) {
    const auto comma = std::min(v.find(',', i), v.size());
    std::string_view item = v.substr(i, comma - i);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    out.push_back(parse_scalar<T>(item));
    i = comma + 1;
  }
  return out;
}

template <typename T>
void assign(T& field, std::string_view v) {
  if constexpr (std::is_same_v<T, std::string>)
    field = std::string(v);
  else if constexpr (std::is_same_v<T, std::vector<double>>)
    field = parse_list<double>(v);
  else if constexpr (std::is_same_v<T, std::vector<std::int64_t>>)
    field = parse_list<std::int64_t>(v);
  else
    field = parse_scalar<T>(v);
}

}  // namespace detail

/// One configurable key of ExperimentParams.
struct ParamKey {
  std::string name;
  std::function<void(ExperimentParams&, std::string_view)> set;
  std::function<Json(const ExperimentParams&)> get;
};

inline const std::vector<ParamKey>& param_keys() {
  static const std::vector<ParamKey> keys = [] {
    std::vector<ParamKey> k;
    auto add = [&](const char* name, auto ExperimentParams::*m) {
      k.push_back({name, [m](ExperimentParams& p, std::string_view v) { detail::assign(p.*m, v); },
                   [m](const ExperimentParams& p) { return Json(p.*m); }});
    };
    add("law", &ExperimentParams::law);
    add("d", &ExperimentParams::d);
    add("p", &ExperimentParams::p);
    add("q", &ExperimentParams::q);
    add("mode", &ExperimentParams::mode);
    add("boundary_data", &ExperimentParams::boundary_data);
    add("data_scale", &ExperimentParams::data_scale);
    add("n", &ExperimentParams::n);
    add("trials", &ExperimentParams::trials);
    add("tau", &ExperimentParams::tau);
    add("c_free", &ExperimentParams::c_free);
    add("harnack_eps", &ExperimentParams::harnack_eps);
    add("bound_gamma", &ExperimentParams::bound_gamma);
    add("t", &ExperimentParams::t);
    add("t_ladder", &ExperimentParams::t_ladder);
    add("seeds", &ExperimentParams::seeds);
    add("n_ladder", &ExperimentParams::n_ladder);
    add("trap_qprime", &ExperimentParams::trap_qprime);
    add("trap_n_ladder", &ExperimentParams::trap_n_ladder);
    add("holder_n", &ExperimentParams::holder_n);
    add("holder_levels", &ExperimentParams::holder_levels);
    add("k_extent", &ExperimentParams::k_extent);
    add("k_points", &ExperimentParams::k_points);
    add("sigma_paths", &ExperimentParams::sigma_paths);
    add("grid_step", &ExperimentParams::grid_step);
    add("max_leak", &ExperimentParams::max_leak);
    add("series_tol", &ExperimentParams::series_tol);
    return k;
  }();
  return keys;
}

inline Json to_json(const ExperimentParams& p) {
  Json j = Json::object();
  for (const auto& k : param_keys()) j[k.name] = k.get(p);
  return j;
}

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"oscillation", "boundedness_harnack", "heat_bounds", "local_limit",
                                              "elliptic_harnack"};
  return names;
}

/// Defaults sized for one core: the parabolic oscillation campaign at n = 64,
/// the elliptic ones at n = 16.
inline ExperimentParams default_params(std::string_view experiment, std::string_view mode = "parabolic") {
  ExperimentParams p;
  if (experiment == "oscillation") {
    p.mode = std::string(mode);
    p.n = mode == "elliptic" ? 16 : 64;
    if (mode != "elliptic") p.grid_step = 4.0;
  } else if (experiment == "boundedness_harnack") {
    p.n = 16;
    p.trials = 20;
  } else if (experiment == "elliptic_harnack") {
    p.n = 16;
  } else if (experiment == "local_limit") {
    // A 1e-12 leak needs a box several times larger at n = 64.
    p.max_leak = 1e-6;
  } else if (experiment != "heat_bounds") {
    throw ConfigError("unknown experiment '" + std::string(experiment) + "'");
  }
  return p;
}

// ---------------------------------------------------------------- data

/// e^{tL} for unit conductances on the graph induced by S; jumps leaving S
/// are suppressed, so constants are preserved.
class SetSmoother {
 public:
  explicit SetSmoother(const VertexSet& S) : size_(S.size()), deg_(2 * std::max(S.dim(), 1)) {
    nbr_.assign(size_ * deg_, kNone);
    for (std::size_t i = 0; i < size_; ++i) {
      const Point x = S[i];
      for (int a = 0; a < x.dim(); ++a) {
        const Point e = unit_vector(x.dim(), a);
        if (auto j = S.find(x + e)) nbr_[i * deg_ + 2 * a] = *j;
        if (auto j = S.find(x - e)) nbr_[i * deg_ + 2 * a + 1] = *j;
      }
    }
  }

  std::vector<double> apply(std::span<const double> v, double t, double tol = 1e-14) const {
    if (v.size() != size_) throw DomainError("smoother input has the wrong length");
    const PoissonWindow win = poisson_window(double(deg_) * t, tol);
    std::vector<double> cur(v.begin(), v.end()), next(size_), out(size_, 0.0);
    for (std::size_t k = 0;; ++k) {
      const double pk = win.at(k);
      for (std::size_t i = 0; i < size_; ++i) out[i] += pk * cur[i];
      if (k >= win.hi()) break;
      for (std::size_t i = 0; i < size_; ++i) {
        double s = 0.0;
        for (std::size_t r = 0; r < deg_; ++r) {
          const std::size_t j = nbr_[i * deg_ + r];
          if (j != kNone) s += cur[j] - cur[i];
        }
        next[i] = cur[i] + s / double(deg_);
      }
      std::swap(cur, next);
    }
    return out;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::size_t size_;
  std::size_t deg_;
  std::vector<std::size_t> nbr_;
};

enum class DataKind { gaussian, linear, constant };

inline DataKind parse_data_kind(std::string_view s) {
  if (s == "gaussian") return DataKind::gaussian;
  if (s == "linear") return DataKind::linear;
  if (s == "constant") return DataKind::constant;
  throw ConfigError("boundary_data must be gaussian, linear or constant");
}

/// Boundary data on a fixed vertex set. Gaussian draws are independent
/// standard normals from stream (seed, k), smoothed at time 1 and rescaled to
/// root-mean-square data_scale; the positive variant exponentiates them.
/// Linear data is x₁ (shifted to x₁ + R + 1 when positive), constant data 1.
class RandomData {
 public:
  RandomData(VertexSet S, DataKind kind, std::uint64_t seed, double scale, bool positive)
      : set_(std::move(S)), smoother_(set_), kind_(kind), seed_(seed), scale_(scale), positive_(positive) {
    for (std::size_t i = 0; i < set_.size(); ++i) shift_ = std::max<double>(shift_, std::abs(double(set_[i][0])));
  }

  const VertexSet& set() const { return set_; }

  std::vector<double> sample(std::uint64_t k) const {
    std::vector<double> v(set_.size());
    if (kind_ == DataKind::constant) {
      std::fill(v.begin(), v.end(), 1.0);
    } else if (kind_ == DataKind::linear) {
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = double(set_[i][0]) + (positive_ ? shift_ + 1.0 : 0.0);
    } else {
      CounterStream rs(seed_, k);
      for (auto& x : v) x = rs.normal();
      v = smoother_.apply(v, 1.0);
      const double rms = std::sqrt(pairwise_sum(v.size(), [&](std::size_t i) { return v[i] * v[i]; }) / double(v.size()));
      const double f = rms > 0.0 ? scale_ / rms : 0.0;
      for (auto& x : v) x = positive_ ? std::exp(f * x) : f * x;
    }
    return v;
  }

 private:
  VertexSet set_;
  SetSmoother smoother_;
  DataKind kind_;
  std::uint64_t seed_;
  double scale_;
  bool positive_;
  double shift_ = 0.0;
};

// ---------------------------------------------------------------- helpers

/// Running maximum of ‖ω^{power}‖_{L̲^r(B(n))} over a ladder of radii; its
/// last entry is the maximal operator M_r restricted to the ladder.
struct MaximalNormRecord {
  double r = 1.0;
  std::vector<std::int64_t> radii;
  std::vector<double> values;
  std::vector<double> running_max;

  double maximum() const { return running_max.empty() ? 0.0 : running_max.back(); }
};

inline MaximalNormRecord maximal_norm(const ConductanceField& w, double r, double power,
                                      std::span<const std::int64_t> radii) {
  MaximalNormRecord rec;
  rec.r = r;
  double m = 0.0;
  for (std::int64_t n : radii) {
    if (n < 1) throw DomainError("maximal norm radii must be >= 1");
    const double v = conductance_norm(w, LatticeBox::centered(w.dim(), n), r, true, power);
    m = std::max(m, v);
    rec.radii.push_back(n);
    rec.values.push_back(v);
    rec.running_max.push_back(m);
  }
  return rec;
}

/// 𝒞_max = max{1, (M_q(ω^{-1})(1 + M_p(ω))^{2−ν})^{p/((1−ν)(p−1))}}.
inline double constant_C_max(double Mp, double Mq_inv, const ExponentSet& e) {
  return std::max(1.0, std::pow(Mq_inv * std::pow(1.0 + Mp, 2.0 - e.nu), e.p / ((1.0 - e.nu) * (e.p - 1.0))));
}

namespace detail {

enum SeedTag : std::uint64_t { kEnvTag = 1, kDataTag = 2, kPathTag = 3, kHolderTag = 4 };

inline EnvironmentLaw law_for(const ExperimentParams& p, std::uint64_t seed) {
  EnvironmentLaw law = parse_law(p.law);
  law.seed = seed;
  return law;
}

inline SolverConfig solver_config(const ExperimentParams& p) {
  SolverConfig cfg;
  cfg.series_tol = p.series_tol;
  cfg.max_leak = p.max_leak;
  cfg.grid_step = p.grid_step;
  return cfg;
}

/// Uniform grid 0, h, ..., T; T must be a multiple of h.
inline std::vector<double> time_grid(double T, double h) {
  if (!(h > 0.0)) throw ConfigError("grid_step must be positive");
  const double steps = T / h;
  const auto m = static_cast<std::int64_t>(std::llround(steps));
  if (m < 1 || std::abs(steps - double(m)) > 1e-9 * std::max(1.0, steps))
    throw ConfigError("time span " + format_double(T) + " is not a multiple of grid_step");
  std::vector<double> t(static_cast<std::size_t>(m) + 1);
  for (std::int64_t j = 0; j <= m; ++j) t[j] = double(j) * h;
  t.back() = T;
  return t;
}

inline Json summary(std::span<const double> v) {
  if (v.empty()) return {{"count", 0}};
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  const double mean = pairwise_sum(s) / double(s.size());
  return {{"count", s.size()}, {"min", s.front()}, {"median", s[s.size() / 2]}, {"mean", mean}, {"max", s.back()}};
}

inline void check_common(const ExperimentParams& p) {
  derive_exponents(p.d, p.p, p.q);
  parse_law(p.law);
  parse_data_kind(p.boundary_data);
  if (p.trials < 1) throw ConfigError("trials must be >= 1");
}

/// Vertex index of each point of region in the list of its boundary points,
/// or -1 for interior points.
inline std::vector<std::ptrdiff_t> boundary_positions(const LatticeBox& region, const VertexSet& boundary) {
  std::vector<std::ptrdiff_t> pos(region.size(), -1);
  for (std::size_t k = 0; k < boundary.size(); ++k) pos[region.index(boundary[k])] = std::ptrdiff_t(k);
  return pos;
}

/// Lateral data for solve_caloric_ibvp: instant j uses stream j + 1 of the
/// boundary generator. The solver asks for instants in increasing order, so
/// one cached slice suffices.
class LateralCache {
 public:
  LateralCache(const LatticeBox& region, const RandomData& data)
      : region_(region), data_(data), pos_(boundary_positions(region, data.set())) {}

  double operator()(std::size_t j, const Point& x) {
    if (j != cached_) {
      slice_ = data_.sample(j + 1);
      cached_ = j;
    }
    const auto k = pos_[region_.index(x)];
    if (k < 0) throw DomainError("lateral value requested off the boundary");
    return slice_[static_cast<std::size_t>(k)];
  }

 private:
  const LatticeBox& region_;
  const RandomData& data_;
  std::vector<std::ptrdiff_t> pos_;
  std::vector<double> slice_;
  std::size_t cached_ = static_cast<std::size_t>(-1);
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline ExperimentReport new_report(const char* name, const ExperimentParams& p, std::uint64_t seed) {
  ExperimentReport r;
  r.experiment = name;
  r.config = to_json(p);
  r.config["seed"] = seed;
  return r;
}

}  // namespace detail

// ---------------------------------------------------------------- oscillation

/// θ̂ = osc(u, Q(n/8))/osc(u, Q(n)) for caloric u on Q(n), or
/// osc(u, B(n))/osc(u, B(4n)) for harmonic u on B(4n), with random data.
inline ExperimentReport run_oscillation(const ExperimentParams& prm, std::uint64_t seed) {
  const detail::Stopwatch clock;
  detail::check_common(prm);
  const bool parabolic = prm.mode == "parabolic";
  if (!parabolic && prm.mode != "elliptic") throw ConfigError("mode must be parabolic or elliptic");
  if (prm.n < 16) throw ConfigError("oscillation needs n >= 16");
  const DataKind kind = parse_data_kind(prm.boundary_data);
  const int d = prm.d;
  const std::int64_t n = prm.n;
  const SolverConfig cfg = detail::solver_config(prm);

  const LatticeBox region = LatticeBox::centered(d, parabolic ? n : 4 * n);
  const VertexSet boundary = interior_boundary(VertexSet(region));
  const std::int64_t small = parabolic ? n / 8 : n;
  const LatticeBox inner = LatticeBox::centered(d, small);
  const double T = double(n) * double(n);
  const double t_small = T - (double(n) / 8.0) * (double(n) / 8.0);
  const std::vector<double> times = parabolic ? detail::time_grid(T, prm.grid_step) : std::vector<double>{};

  const auto N = static_cast<std::size_t>(prm.trials);
  struct Trial {
    std::uint64_t env_seed = 0, data_seed = 0;
    double osc_small = 0, osc_large = 0, theta = 0, norm_p = 0, norm_q_inv = 0, residual = 0;
    bool degenerate = false;
  };
  std::vector<Trial> out(N);
  parallel_for(N, [&](std::size_t k) {
    Trial& tr = out[k];
    tr.env_seed = derive_seed(seed, detail::kEnvTag, k);
    tr.data_seed = derive_seed(seed, detail::kDataTag, k);
    const ConductanceField w = generate(detail::law_for(prm, tr.env_seed), region);
    tr.norm_p = conductance_norm(w, region, prm.p, true);
    tr.norm_q_inv = conductance_norm(w, region, prm.q, true, -1.0);
    double lo = kInf, hi = -kInf, slo = kInf, shi = -kInf;
    auto observe_slice = [&](std::span<const double> v, bool inner_window) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        lo = std::min(lo, v[i]);
        hi = std::max(hi, v[i]);
        if (inner_window && inner.contains(region.point(i))) {
          slo = std::min(slo, v[i]);
          shi = std::max(shi, v[i]);
        }
      }
    };
    if (parabolic) {
      const RandomData lateral_data(boundary, kind, tr.data_seed, prm.data_scale, false);
      const RandomData initial_data(VertexSet(region), kind, tr.data_seed, prm.data_scale, false);
      detail::LateralCache lateral(region, lateral_data);
      const VertexField u0(std::make_shared<const VertexSet>(region), initial_data.sample(0));
      IbvpReport rep;
      solve_caloric_ibvp(
          w, region, times, [&](std::size_t j, const Point& x) { return lateral(j, x); }, u0, cfg,
          [&](std::size_t j, std::span<const double> v) { observe_slice(v, times[j] >= t_small - 1e-9); }, &rep);
      tr.residual = rep.max_residual;
    } else {
      const RandomData data(boundary, kind, tr.data_seed, prm.data_scale, false);
      const std::vector<double> g = data.sample(0);
      const auto pos = detail::boundary_positions(region, boundary);
      const VertexField u =
          solve_harmonic(w, region, [&](const Point& x) { return g[static_cast<std::size_t>(pos[region.index(x)])]; });
      observe_slice(u.values(), true);
    }
    tr.osc_large = hi - lo;
    tr.osc_small = shi - slo;
    tr.degenerate = !(tr.osc_large >= 1e-12);
    tr.theta = tr.degenerate ? std::numeric_limits<double>::quiet_NaN() : tr.osc_small / tr.osc_large;
  });

  ExperimentReport rep = detail::new_report("oscillation", prm, seed);
  rep.table = TrialTable({"trial", "env_seed", "data_seed", "theta", "osc_small", "osc_large", "degenerate", "norm_p",
                          "norm_q_inv", "ibvp_residual"});
  std::vector<double> thetas;
  std::size_t violations = 0;
  for (std::size_t k = 0; k < N; ++k) {
    const Trial& tr = out[k];
    TrialTable::Row row;
    row << std::uint64_t{k} << tr.env_seed << tr.data_seed << tr.theta << tr.osc_small << tr.osc_large
        << tr.degenerate << tr.norm_p << tr.norm_q_inv << tr.residual;
    rep.table.add(row);
    if (tr.degenerate) {
      ++rep.skipped;
      continue;
    }
    thetas.push_back(tr.theta);
    if (!(tr.theta < 1.0)) ++violations;
  }
  rep.trials = N;
  rep.results["theta"] = detail::summary(thetas);
  rep.results["degenerate"] = rep.skipped;
  std::vector<double> np, nq;
  for (const auto& tr : out) {
    np.push_back(tr.norm_p);
    nq.push_back(tr.norm_q_inv);
  }
  rep.results["norm_p"] = detail::summary(np);
  rep.results["norm_q_inv"] = detail::summary(nq);
  rep.check("theta_below_one", violations == 0,
            std::to_string(violations) + " of " + std::to_string(thetas.size()) + " non-degenerate trials have theta >= 1");
  rep.finalize();
  rep.wall_clock_seconds = clock.seconds();
  return rep;
}

// ---------------------------------------------------------------- parabolic boundedness / Harnack

/// Admissible (λ, σ₁, σ₂) for the weak Harnack inequality maximizing
/// σ = min{√σ₁, σ₂}. Any λ ≤ λ̂ meets the density hypothesis, so λ ranges
/// over λ̂ and the multiples of 1/64 below it; σ₁, σ₂ over multiples of 1/64.
struct SigmaPair {
  double lambda = 0.0;
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  double sigma = 0.0;
};

inline std::optional<SigmaPair> choose_sigmas(double lambda_hat, std::int64_t n, int d) {
  std::optional<SigmaPair> best;
  const double ball_n = std::pow(2.0 * double(n) + 1.0, d);
  std::vector<double> lambdas;
  for (int k = 1; k < 64 && k / 64.0 <= lambda_hat; ++k) lambdas.push_back(k / 64.0);
  if (lambda_hat > 0.0 && lambda_hat < 1.0) lambdas.push_back(lambda_hat);
  for (double lambda : lambdas) {
    for (int i = 1; i < 64 && i / 64.0 < lambda; ++i) {
      const double s1 = i / 64.0;
      for (int j = 63; j >= 1 && j / 64.0 > lambda; --j) {
        const double s2 = j / 64.0;
        if (double(n) < 1.0 / (1.0 - s2)) continue;
        const auto r = static_cast<std::int64_t>(std::floor(s2 * double(n)));
        const double ratio = ball_n / std::pow(2.0 * double(r) + 1.0, d);
        if ((1.0 - lambda) / (1.0 - s1) * ratio > 17.0 / 24.0) continue;
        const double s = std::min(std::sqrt(s1), s2);
        if (!best || s > best->sigma) best = SigmaPair{lambda, s1, s2, s};
      }
    }
  }
  return best;
}

/// Per trial: positive caloric u on [−max(τ,1)n², 0] × B(n) (time shifted to
/// start at 0). Records R_bound and, when the density hypothesis admits σ's,
/// min over Q_{1/2}(⌊σn⌋) of u divided by γ. Cylinders are top-centered.
inline ExperimentReport run_boundedness_harnack(const ExperimentParams& prm, std::uint64_t seed) {
  const detail::Stopwatch clock;
  detail::check_common(prm);
  if (!(prm.tau > 0.0)) throw ConfigError("tau must be positive");
  if (prm.n < 2) throw ConfigError("boundedness_harnack needs n >= 2");
  if (!(prm.c_free >= 1.0)) throw ConfigError("c_free must be >= 1");
  if (!(prm.harnack_eps > 0.0)) throw ConfigError("harnack_eps must be positive");
  const ExponentSet e = derive_exponents(prm.d, prm.p, prm.q);
  const DataKind kind = parse_data_kind(prm.boundary_data);
  const int d = prm.d;
  const std::int64_t n = prm.n;
  const double n2 = double(n) * double(n);
  const double T = std::max(prm.tau, 1.0) * n2;
  const std::vector<double> times = detail::time_grid(T, prm.grid_step);
  const double t_q1 = T - prm.tau * n2;
  const double t_half = T - 0.5 * prm.tau * n2;
  const double t_qn = T - n2;
  {
    const double steps = prm.tau * n2 / prm.grid_step;
    if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
      throw ConfigError("tau n^2 must be a multiple of grid_step");
  }
  const SolverConfig cfg = detail::solver_config(prm);
  const LatticeBox region = LatticeBox::centered(d, n);
  const VertexSet boundary = interior_boundary(VertexSet(region));
  const LatticeBox half = LatticeBox::centered(d, n / 2);

  const auto N = static_cast<std::size_t>(prm.trials);
  struct Trial {
    std::uint64_t env_seed = 0, data_seed = 0;
    double C = 0, sup_half = 0, l2 = 0, r_bound = 0;
    double lambda = 0, lambda_used = 0, sigma1 = 0, sigma2 = 0, min_u = 0, gamma = 0, ratio = 0;
    std::int64_t m = 0;
    bool qualified = false;
  };
  std::vector<Trial> out(N);
  parallel_for(N, [&](std::size_t k) {
    Trial& tr = out[k];
    tr.env_seed = derive_seed(seed, detail::kEnvTag, k);
    tr.data_seed = derive_seed(seed, detail::kDataTag, k);
    const ConductanceField w = generate(detail::law_for(prm, tr.env_seed), region);
    const RandomData lateral_data(boundary, kind, tr.data_seed, prm.data_scale, true);
    const RandomData initial_data(VertexSet(region), kind, tr.data_seed, prm.data_scale, true);
    detail::LateralCache lateral(region, lateral_data);
    const VertexField u0(std::make_shared<const VertexSet>(region), initial_data.sample(0));
    const SpaceTimeField u = solve_caloric_ibvp(
        w, region, times, [&](std::size_t j, const Point& x) { return lateral(j, x); }, u0, cfg);

    const double vol = double(region.size());
    tr.C = constant_C(conductance_norm(w, region, prm.p, true), conductance_norm(w, region, prm.q, true, -1.0),
                      prm.tau, e);
    std::vector<double> tq, sq, dens;
    tr.sup_half = -kInf;
    for (std::size_t j = 0; j < times.size(); ++j) {
      const auto s = u.slice_values(j);
      if (times[j] >= t_q1 - 1e-9) {
        tq.push_back(times[j]);
        sq.push_back(pairwise_sum(s.size(), [&](std::size_t i) { return s[i] * s[i]; }));
      }
      if (times[j] >= t_half - 1e-9)
        for (std::size_t i = 0; i < s.size(); ++i)
          if (half.contains(region.point(i))) tr.sup_half = std::max(tr.sup_half, s[i]);
    }
    tr.l2 = std::sqrt(trapezoid(tq, sq) / (prm.tau * n2 * vol));
    tr.r_bound = tr.sup_half / (std::pow(tr.C, e.p / (e.p - 1.0)) * tr.l2);

    // Density of {u ≥ ε} in Q(n), time integral by the trapezoid rule.
    std::vector<double> tn, cnt;
    for (std::size_t j = 0; j < times.size(); ++j) {
      if (times[j] < t_qn - 1e-9) continue;
      const auto s = u.slice_values(j);
      tn.push_back(times[j]);
      cnt.push_back(double(std::count_if(s.begin(), s.end(), [&](double v) { return v >= prm.harnack_eps; })));
    }
    tr.lambda = trapezoid(tn, cnt) / (n2 * vol);
    const auto sig = choose_sigmas(tr.lambda, n, d);
    if (!sig) return;
    tr.lambda_used = sig->lambda;
    tr.sigma1 = sig->sigma1;
    tr.sigma2 = sig->sigma2;
    tr.m = static_cast<std::int64_t>(std::floor(sig->sigma * double(n)));
    if (tr.m < 1) return;
    const LatticeBox qball = LatticeBox::centered(d, tr.m / 2);
    const double t_min = T - 0.5 * double(tr.m) * double(tr.m);
    tr.min_u = kInf;
    for (std::size_t j = 0; j < times.size(); ++j) {
      if (times[j] < t_min - 1e-9) continue;
      const auto s = u.slice_values(j);
      for (std::size_t i = 0; i < s.size(); ++i)
        if (qball.contains(region.point(i))) tr.min_u = std::min(tr.min_u, s[i]);
    }
    const double C1 = constant_C(conductance_norm(w, region, prm.p, true),
                                 conductance_norm(w, region, prm.q, true, -1.0), 1.0, e);
    tr.gamma = weak_harnack_constants(d, sig->lambda, sig->sigma2, conductance_norm(w, region, 1.0, true), e, C1,
                                      conductance_norm(w, region, d / 2.0, true, -1.0), prm.c_free, prm.harnack_eps)
                   .gamma;
    tr.ratio = tr.min_u / tr.gamma;
    tr.qualified = true;
  });

  ExperimentReport rep = detail::new_report("boundedness_harnack", prm, seed);
  rep.table = TrialTable({"trial", "env_seed", "data_seed", "C", "sup_half", "l2_mean", "r_bound", "lambda",
                          "qualified", "lambda_used", "sigma1", "sigma2", "harnack_radius", "min_u", "gamma", "harnack_ratio"});
  std::vector<double> rb, hr;
  std::size_t bad_bound = 0, bad_harnack = 0;
  for (std::size_t k = 0; k < N; ++k) {
    const Trial& tr = out[k];
    TrialTable::Row row;
    row << std::uint64_t{k} << tr.env_seed << tr.data_seed << tr.C << tr.sup_half << tr.l2 << tr.r_bound << tr.lambda
        << tr.qualified << tr.lambda_used << tr.sigma1 << tr.sigma2 << tr.m << tr.min_u << tr.gamma << tr.ratio;
    rep.table.add(row);
    rb.push_back(tr.r_bound);
    if (!std::isfinite(tr.r_bound)) ++bad_bound;
    if (!tr.qualified) {
      ++rep.skipped;
      continue;
    }
    hr.push_back(tr.ratio);
    if (!(tr.ratio >= 1.0)) ++bad_harnack;
  }
  rep.trials = N;
  rep.results["r_bound"] = detail::summary(rb);
  rep.results["harnack_ratio"] = detail::summary(hr);
  rep.results["harnack_skipped"] = rep.skipped;
  rep.check("r_bound_finite", bad_bound == 0, std::to_string(bad_bound) + " non-finite bound ratios");
  rep.check("harnack_ratio_at_least_one", bad_harnack == 0,
            std::to_string(bad_harnack) + " of " + std::to_string(hr.size()) + " qualifying trials below gamma");
  rep.finalize();
  rep.wall_clock_seconds = clock.seconds();
  return rep;
}

// ---------------------------------------------------------------- heat kernel bounds

/// (a) t^{d/2}p_t(0,0)/𝒞(ω,B(⌊√t⌋))^{2p/(p−1)} over t_ladder and seeds, with
/// the empirical 𝒳 from 𝒞_max; (b) the trap bound and growth along
/// trap_n_ladder; (c) oscillation decay of s,y ↦ n^d p_{n²s}(0,y) over nested
/// cylinders n²[t−δ_k², t] × B(δ_k n), δ_k = ½·8^{−k}√t.
inline ExperimentReport run_heat_bounds(const ExperimentParams& prm, std::uint64_t seed) {
  const detail::Stopwatch clock;
  derive_exponents(prm.d, prm.p, prm.q);
  parse_law(prm.law);
  if (prm.t_ladder.empty() || prm.trap_n_ladder.empty()) throw ConfigError("heat_bounds needs non-empty ladders");
  if (prm.seeds < 1) throw ConfigError("seeds must be >= 1");
  for (double t : prm.t_ladder)
    if (!(t >= 1.0)) throw ConfigError("t_ladder entries must be >= 1");
  for (auto m : prm.trap_n_ladder)
    if (m < 1) throw ConfigError("trap_n_ladder entries must be >= 1");
  if (!(prm.trap_qprime > 0.0)) throw ConfigError("trap_qprime must be positive");
  const ExponentSet e = derive_exponents(prm.d, prm.p, prm.q);
  const int d = prm.d;
  const SolverConfig cfg = detail::solver_config(prm);
  const Point o = origin(d);
  const double pw = 2.0 * e.p / (e.p - 1.0);

  ExperimentReport rep = detail::new_report("heat_bounds", prm, seed);
  rep.table = TrialTable({"branch", "index", "env_seed", "n", "t", "value", "reference", "ratio"});

  // (a) compliant law.
  std::vector<double> ladder = prm.t_ladder;
  std::sort(ladder.begin(), ladder.end());
  ladder.erase(std::unique(ladder.begin(), ladder.end()), ladder.end());
  const auto S = static_cast<std::size_t>(prm.seeds);
  struct SeedRun {
    std::uint64_t env_seed = 0;
    std::vector<double> p0, C, ratio;
    double C_max = 0, X = 0;
  };
  std::vector<SeedRun> runs(S);
  parallel_for(S, [&](std::size_t s) {
    SeedRun& r = runs[s];
    r.env_seed = derive_seed(seed, detail::kEnvTag, s);
    const auto [cols, w] = heat_kernel_for_law(detail::law_for(prm, r.env_seed), o, ladder, cfg);
    std::vector<std::int64_t> radii;
    for (std::int64_t m = 1; m < w.box().radius(); ++m) radii.push_back(m);
    r.C_max = constant_C_max(maximal_norm(w, e.p, 1.0, radii).maximum(), maximal_norm(w, e.q, -1.0, radii).maximum(), e);
    for (std::size_t j = 0; j < ladder.size(); ++j) {
      const double t = ladder[j];
      const auto rad = static_cast<std::int64_t>(std::floor(std::sqrt(t) + 1e-12));
      const LatticeBox b = LatticeBox::centered(d, rad);
      const double C = constant_C(conductance_norm(w, b, e.p, true), conductance_norm(w, b, e.q, true, -1.0), 1.0, e);
      const double scaled = std::pow(t, d / 2.0) * cols[j].at(o);
      r.p0.push_back(cols[j].at(o));
      r.C.push_back(C);
      r.ratio.push_back(scaled / std::pow(C, pw));
      double sup = 0.0;
      for (std::size_t i = 0; i < b.size(); ++i) sup = std::max(sup, cols[j].at(b.point(i)));
      r.X = std::max(r.X, std::pow(t, d / 2.0) * sup / r.C_max);
    }
  });
  double ceil_all = 0.0, ceil_small = 0.0;
  bool finite = true;
  const double t_small = std::max(8.0, ladder.front());
  std::vector<double> xs;
  for (std::size_t s = 0; s < S; ++s) {
    const SeedRun& r = runs[s];
    for (std::size_t j = 0; j < ladder.size(); ++j) {
      TrialTable::Row row;
      row << "compliant" << std::uint64_t{s} << r.env_seed << std::int64_t{0} << ladder[j] << r.p0[j]
          << std::pow(r.C[j], pw) << r.ratio[j];
      rep.table.add(row);
      finite = finite && std::isfinite(r.ratio[j]);
      ceil_all = std::max(ceil_all, r.ratio[j]);
      if (ladder[j] <= t_small) ceil_small = std::max(ceil_small, r.ratio[j]);
    }
    xs.push_back(r.X);
  }
  rep.results["compliant"] = {{"ceiling_full", ceil_all},
                              {"ceiling_small_t", ceil_small},
                              {"small_t_cutoff", t_small},
                              {"empirical_X", detail::summary(xs)}};
  rep.check("compliant_ratio_finite", finite && ceil_all > 0.0);
  rep.check("compliant_ceiling_stable", ceil_all <= 1.1 * ceil_small,
            "full " + format_double(ceil_all) + " vs small-t " + format_double(ceil_small));

  // (b) trap.
  std::vector<std::int64_t> tn = prm.trap_n_ladder;
  std::sort(tn.begin(), tn.end());
  Json trap = Json::array();
  bool bound_ok = true, growth_ok = true;
  double prev = 0.0;
  for (std::size_t k = 0; k < tn.size(); ++k) {
    const std::int64_t m = tn[k];
    EnvironmentLaw law;
    law.kind = TrapLaw{m, prm.trap_qprime};
    const double t = double(m) * double(m);
    const double times[1] = {t};
    const auto [cols, w] = heat_kernel_for_law(law, o, times, cfg);
    const double p00 = cols[0].at(o);
    const double bound = std::exp(-2.0 * d * std::pow(double(m), 2.0 - d / prm.trap_qprime));
    const double scaled = std::pow(double(m), d) * p00;
    bound_ok = bound_ok && p00 >= bound - 1e-10;
    if (k > 0) growth_ok = growth_ok && scaled >= 2.0 * prev;
    prev = scaled;
    TrialTable::Row row;
    row << "trap" << std::uint64_t{k} << std::uint64_t{0} << m << t << p00 << bound << scaled;
    rep.table.add(row);
    trap.push_back({{"n", m}, {"p", p00}, {"bound", bound}, {"scaled", scaled}});
  }
  rep.results["trap"] = trap;
  rep.check("trap_bound", bound_ok);
  rep.check("trap_growth", growth_ok, "n^d p_{n^2}(0,0) must at least double along the ladder");

  // (c) Hölder decay on one compliant environment.
  if (prm.holder_levels >= 1) {
    const std::int64_t hn = prm.holder_n;
    if (hn < 1) throw ConfigError("holder_n must be >= 1");
    const double n2 = double(hn) * double(hn);
    const auto levels = static_cast<std::size_t>(prm.holder_levels);
    std::vector<double> delta(levels + 1), times;
    for (std::size_t k = 0; k <= levels; ++k) {
      delta[k] = 0.5 * std::pow(8.0, -double(k)) * std::sqrt(prm.t);
      const double lo = n2 * (prm.t - delta[k] * delta[k]);
      for (int i = 0; i <= 8; ++i) times.push_back(lo + (n2 * prm.t - lo) * i / 8.0);
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end(), [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                times.end());
    const std::uint64_t hs = derive_seed(seed, detail::kHolderTag, 0);
    const auto [cols, w] = heat_kernel_for_law(detail::law_for(prm, hs), o, times, cfg);
    std::vector<double> osc(levels + 1);
    for (std::size_t k = 0; k <= levels; ++k) {
      const double lo_t = n2 * (prm.t - delta[k] * delta[k]) - 1e-9;
      const LatticeBox b = LatticeBox::centered(d, static_cast<std::int64_t>(std::floor(delta[k] * double(hn))));
      double lo = kInf, hi = -kInf;
      for (std::size_t j = 0; j < times.size(); ++j) {
        if (times[j] < lo_t) continue;
        for (std::size_t i = 0; i < b.size(); ++i) {
          const double v = std::pow(double(hn), d) * cols[j].at(b.point(i));
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
      osc[k] = hi - lo;
    }
    Json ratios = Json::array();
    bool decay = true;
    for (std::size_t k = 1; k <= levels; ++k) {
      const double r = osc[k] / osc[k - 1];
      decay = decay && r < 1.0;
      ratios.push_back(r);
      TrialTable::Row row;
      row << "holder" << std::uint64_t{k} << hs << hn << delta[k] << osc[k] << osc[k - 1] << r;
      rep.table.add(row);
    }
    rep.results["holder"] = {{"n", hn}, {"oscillation", osc}, {"decay_ratios", ratios}};
    rep.check("holder_decay", decay, "oscillation must shrink on every nested cylinder");
  }
  rep.trials = S;
  rep.finalize();
  rep.wall_clock_seconds = clock.seconds();
  return rep;
}

// ---------------------------------------------------------------- local limit

/// Grid of k_points^d points spanning [−k_extent, k_extent]^d.
inline std::vector<std::vector<double>> k_grid(int d, double extent, std::int64_t points) {
  if (points < 1) throw ConfigError("k_points must be >= 1");
  std::vector<double> axis(static_cast<std::size_t>(points));
  for (std::int64_t i = 0; i < points; ++i)
    axis[i] = points == 1 ? 0.0 : -extent + 2.0 * extent * double(i) / double(points - 1);
  std::vector<std::vector<double>> out{{}};
  for (int a = 0; a < d; ++a) {
    std::vector<std::vector<double>> next;
    for (const auto& x : out)
      for (double v : axis) {
        auto y = x;
        y.push_back(v);
        next.push_back(std::move(y));
      }
    out = std::move(next);
  }
  return out;
}

/// E(n) = max over the K grid of |n^d p_{n²t}(0,⌊nx⌋) − k_t(x)| on one
/// quenched environment, with Σ² = 2c·I for constant(c) and the walker
/// estimate Σ̂² at the largest n otherwise.
inline ExperimentReport run_local_limit(const ExperimentParams& prm, std::uint64_t seed) {
  const detail::Stopwatch clock;
  const ExponentSet e = derive_exponents(prm.d, prm.p, prm.q);
  if (!(prm.t > 0.0)) throw ConfigError("t must be positive");
  if (prm.n_ladder.empty()) throw ConfigError("n_ladder must be non-empty");
  std::vector<std::int64_t> ns = prm.n_ladder;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  if (ns.front() < 1) throw ConfigError("n_ladder entries must be >= 1");
  const int d = prm.d;
  const std::uint64_t env_seed = derive_seed(seed, detail::kEnvTag, 0);
  const EnvironmentLaw law = detail::law_for(prm, env_seed);
  const auto* constant = std::get_if<ConstantLaw>(&law.kind);
  const SolverConfig cfg = detail::solver_config(prm);
  const Point o = origin(d);
  const auto K = k_grid(d, prm.k_extent, prm.k_points);

  std::vector<double> times;
  for (auto m : ns) times.push_back(double(m) * double(m) * prm.t);
  const std::int64_t nmax = ns.back();
  auto [cols, w] = heat_kernel_for_law(law, o, times, cfg, constant ? constant->c : 1.0);
  const auto need = static_cast<std::int64_t>(std::ceil(double(nmax) * (prm.k_extent + 1.0))) + 1;
  if (w.box().radius() < need) w = generate(law, LatticeBox(o, need));

  ExperimentReport rep = detail::new_report("local_limit", prm, seed);
  Eigen::MatrixXd sigma2;
  if (constant) {
    sigma2 = 2.0 * constant->c * Eigen::MatrixXd::Identity(d, d);
  } else {
    const SigmaEstimate est = estimate_sigma(w, nmax, prm.t, static_cast<std::size_t>(prm.sigma_paths),
                                             derive_seed(seed, detail::kPathTag, 0), o);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(est.sigma2);
    const double floor = 4.0 * est.standard_error.maxCoeff();
    if (!(eig.eigenvalues().minCoeff() > floor))
      throw SolverError("estimated covariance is singular within error bars (smallest eigenvalue " +
                        format_double(eig.eigenvalues().minCoeff()) + ", 4 SE " + format_double(floor) + ")");
    sigma2 = est.sigma2;
    Json s = Json::array(), se = Json::array();
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        s.push_back(est.sigma2(a, b));
        se.push_back(est.standard_error(a, b));
      }
    rep.results["sigma2"] = s;
    rep.results["sigma2_standard_error"] = se;
    rep.results["sigma_truncated_fraction"] = est.truncated_fraction;
  }

  std::vector<std::string> columns{"n"};
  for (int a = 0; a < d; ++a) columns.push_back("x" + std::to_string(a + 1));
  for (const char* c : {"scaled_kernel", "gaussian", "abs_error", "bessel_error"}) columns.push_back(c);
  rep.table = TrialTable(columns);

  std::vector<double> E, bessel_err, norm_p, norm_q;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    const std::int64_t m = ns[k];
    const double scale = std::pow(double(m), d);
    double En = 0.0, Bn = 0.0, np = 0.0, nq = 0.0;
    for (const auto& x : K) {
      Point y(d);
      for (int a = 0; a < d; ++a) y[a] = static_cast<Point::Coord>(std::floor(double(m) * x[a]));
      const double pv = scale * cols[k].at(y);
      const double kt = gaussian_kernel(prm.t, x, sigma2);
      const double err = std::abs(pv - kt);
      double berr = std::numeric_limits<double>::quiet_NaN();
      if (constant) {
        berr = std::abs(pv - scale * bessel_reference(d, constant->c * times[k], y));
        Bn = std::max(Bn, berr);
      }
      En = std::max(En, err);
      const LatticeBox b(y, m);
      np = std::max(np, conductance_norm(w, b, e.p, true));
      nq = std::max(nq, conductance_norm(w, b, e.q, true, -1.0));
      TrialTable::Row row;
      row << m;
      for (double v : x) row << v;
      row << pv << kt << err << berr;
      rep.table.add(row);
    }
    E.push_back(En);
    bessel_err.push_back(Bn);
    norm_p.push_back(np);
    norm_q.push_back(nq);
  }

  // Riemann sum of k_t on the lattice scaled by 1/nmax.
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma2);
  const auto R = static_cast<std::int64_t>(std::ceil(12.0 * double(nmax) * std::sqrt(prm.t * eig.eigenvalues().maxCoeff())));
  const LatticeBox rb = LatticeBox::centered(d, R);
  const double riemann = pairwise_sum(rb.size(), [&](std::size_t i) {
                           const Point y = rb.point(i);
                           std::vector<double> x(d);
                           for (int a = 0; a < d; ++a) x[a] = double(y[a]) / double(nmax);
                           return gaussian_kernel(prm.t, x, sigma2);
                         }) /
                         std::pow(double(nmax), d);

  rep.results["n"] = ns;
  rep.results["E"] = E;
  rep.results["ergodic_norm_p"] = norm_p;
  rep.results["ergodic_norm_q_inv"] = norm_q;
  rep.results["riemann_sum"] = riemann;
  rep.results["environment_seed"] = env_seed;
  rep.check("riemann_sum", std::abs(riemann - 1.0) <= 1e-3, format_double(riemann));
  if (constant) {
    const double bmax = *std::max_element(bessel_err.begin(), bessel_err.end());
    rep.results["bessel_error"] = bessel_err;
    rep.check("bessel_match", bmax <= 1e-8, format_double(bmax));
    bool dec = true;
    for (std::size_t k = 1; k < E.size(); ++k) dec = dec && E[k] < E[k - 1];
    rep.check("error_strictly_decreasing", dec);
  } else {
    rep.check("error_decreases", E.back() < E.front(),
              "E(" + std::to_string(ns.back()) + ") = " + format_double(E.back()) + ", E(" +
                  std::to_string(ns.front()) + ") = " + format_double(E.front()));
  }
  rep.trials = ns.size();
  rep.finalize();
  rep.wall_clock_seconds = clock.seconds();
  return rep;
}

// ---------------------------------------------------------------- elliptic Harnack

/// Per trial: positive harmonic u on B(4n) with random positive Dirichlet
/// data. Records min_{B(n)} u/γ when {u ≥ ε} has positive density λ in B(2n),
/// the elliptic boundedness ratio, and checks Λ ≥ 1.
inline ExperimentReport run_elliptic_harnack(const ExperimentParams& prm, std::uint64_t seed) {
  const detail::Stopwatch clock;
  detail::check_common(prm);
  if (prm.n < 1) throw ConfigError("elliptic_harnack needs n >= 1");
  if (!(prm.c_free >= 1.0)) throw ConfigError("c_free must be >= 1");
  if (!(prm.harnack_eps > 0.0)) throw ConfigError("harnack_eps must be positive");
  if (!(prm.bound_gamma > 0.0 && prm.bound_gamma <= 1.0)) throw ConfigError("bound_gamma must lie in (0,1]");
  const ExponentSet e = derive_exponents(prm.d, prm.p, prm.q);
  const DataKind kind = parse_data_kind(prm.boundary_data);
  const int d = prm.d;
  const std::int64_t n = prm.n;
  const LatticeBox region = LatticeBox::centered(d, 4 * n);
  const LatticeBox b2 = LatticeBox::centered(d, 2 * n);
  const LatticeBox b1 = LatticeBox::centered(d, n);
  const VertexSet boundary = interior_boundary(VertexSet(region));
  const auto pos = detail::boundary_positions(region, boundary);

  const auto N = static_cast<std::size_t>(prm.trials);
  struct Trial {
    std::uint64_t env_seed = 0, data_seed = 0;
    double lambda = 0, Lambda = 0, Lambda_pq = 0, Lambda_11 = 0, min_u = 0, gamma = 0, ratio = 0;
    double max_u = 0, bound_denominator = 0, bound_ratio = 0;
    bool qualified = false;
  };
  std::vector<Trial> out(N);
  parallel_for(N, [&](std::size_t k) {
    Trial& tr = out[k];
    tr.env_seed = derive_seed(seed, detail::kEnvTag, k);
    tr.data_seed = derive_seed(seed, detail::kDataTag, k);
    const ConductanceField w = generate(detail::law_for(prm, tr.env_seed), region);
    const RandomData data(boundary, kind, tr.data_seed, prm.data_scale, true);
    const std::vector<double> g = data.sample(0);
    const VertexField u =
        solve_harmonic(w, region, [&](const Point& x) { return g[static_cast<std::size_t>(pos[region.index(x)])]; });

    tr.Lambda_pq = lambda_pq(conductance_norm(w, region, e.p, true), conductance_norm(w, region, e.q, true, -1.0));
    tr.Lambda_11 = lambda_pq(conductance_norm(w, region, 1.0, true), conductance_norm(w, region, 1.0, true, -1.0));
    tr.Lambda = d == 2 ? tr.Lambda_11 : tr.Lambda_pq;

    std::size_t above = 0;
    double l1 = 0.0, lr = 0.0;
    const double r = 2.0 * e.p / (e.p - 1.0) * prm.bound_gamma;
    for (std::size_t i = 0; i < b2.size(); ++i) {
      const double v = u.at(b2.point(i));
      if (v >= prm.harnack_eps) ++above;
      l1 += std::abs(v);
      lr += std::pow(std::abs(v), r);
    }
    l1 /= double(b2.size());
    lr = std::pow(lr / double(b2.size()), 1.0 / r);
    tr.min_u = kInf;
    tr.max_u = -kInf;
    for (std::size_t i = 0; i < b1.size(); ++i) {
      const double v = u.at(b1.point(i));
      tr.min_u = std::min(tr.min_u, v);
      tr.max_u = std::max(tr.max_u, v);
    }
    if (d == 2) {
      double energy = 0.0;
      std::size_t bonds = 0;
      for (std::size_t i = 0; i < b2.size(); ++i) {
        const Point x = b2.point(i);
        for (int a = 0; a < d; ++a) {
          if (x[a] >= 2 * n) continue;
          const Point y = x + unit_vector(d, a);
          const double du = u.at(y) - u.at(x);
          energy += w.at(x, y) * du * du;
          ++bonds;
        }
      }
      tr.bound_denominator = double(n) * std::sqrt(conductance_norm(w, b2, 1.0, true, -1.0)) *
                                 std::sqrt(energy / double(bonds)) +
                             l1;
    } else {
      const double delta = 1.0 / (d - 1) - 1.0 / (2.0 * e.p) - 1.0 / (2.0 * e.q);
      const double L2n = lambda_pq(conductance_norm(w, b2, e.p, true), conductance_norm(w, b2, e.q, true, -1.0));
      tr.bound_denominator = std::pow(L2n, (delta + 1.0) / (2.0 * delta * prm.bound_gamma)) * lr;
    }
    tr.bound_ratio = tr.max_u / tr.bound_denominator;

    tr.lambda = double(above) / double(b2.size());
    if (tr.lambda <= 0.0) return;
    const double lambda = std::min(tr.lambda, 63.0 / 64.0);
    tr.gamma = elliptic_harnack_gamma(e, lambda, tr.Lambda, prm.c_free, prm.harnack_eps);
    tr.ratio = tr.min_u / tr.gamma;
    tr.qualified = true;
  });

  ExperimentReport rep = detail::new_report("elliptic_harnack", prm, seed);
  rep.table = TrialTable({"trial", "env_seed", "data_seed", "lambda", "qualified", "Lambda", "Lambda_pq", "Lambda_11",
                          "min_u", "gamma", "harnack_ratio", "max_u", "bound_denominator", "bound_ratio"});
  std::vector<double> hr, br;
  std::size_t bad = 0, bad_lambda = 0;
  for (std::size_t k = 0; k < N; ++k) {
    const Trial& tr = out[k];
    TrialTable::Row row;
    row << std::uint64_t{k} << tr.env_seed << tr.data_seed << tr.lambda << tr.qualified << tr.Lambda << tr.Lambda_pq
        << tr.Lambda_11 << tr.min_u << tr.gamma << tr.ratio << tr.max_u << tr.bound_denominator << tr.bound_ratio;
    rep.table.add(row);
    br.push_back(tr.bound_ratio);
    if (!(tr.Lambda_pq >= 1.0 - 1e-12) || !(tr.Lambda_11 >= 1.0 - 1e-12)) ++bad_lambda;
    if (!tr.qualified) {
      ++rep.skipped;
      continue;
    }
    hr.push_back(tr.ratio);
    if (!(tr.ratio >= 1.0)) ++bad;
  }
  rep.trials = N;
  rep.results["harnack_ratio"] = detail::summary(hr);
  rep.results["bound_ratio"] = detail::summary(br);
  rep.check("lambda_at_least_one", bad_lambda == 0, std::to_string(bad_lambda) + " trials with Lambda < 1");
  rep.check("harnack_ratio_at_least_one", bad == 0,
            std::to_string(bad) + " of " + std::to_string(hr.size()) + " qualifying trials below gamma");
  rep.finalize();
  rep.wall_clock_seconds = clock.seconds();
  return rep;
}

inline ExperimentReport run_experiment(std::string_view name, const ExperimentParams& p, std::uint64_t seed) {
  if (name == "oscillation") return run_oscillation(p, seed);
  if (name == "boundedness_harnack") return run_boundedness_harnack(p, seed);
  if (name == "heat_bounds") return run_heat_bounds(p, seed);
  if (name == "local_limit") return run_local_limit(p, seed);
  if (name == "elliptic_harnack") return run_elliptic_harnack(p, seed);
  throw ConfigError("unknown experiment '" + std::string(name) + "'");
}

}  // namespace rcm
