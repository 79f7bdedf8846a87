#pragma once

// Variable-speed random walk by Gillespie sampling: single paths, empirical
// heat kernels and the covariance estimate Σ̂².

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <vector>

#include "rcm/calculus.hpp"
#include "rcm/conductance.hpp"
#include "rcm/error.hpp"
#include "rcm/lattice.hpp"
#include "rcm/numeric.hpp"
#include "rcm/parallel.hpp"
#include "rcm/rng.hpp"

namespace rcm {

struct PathSample {
  std::vector<double> jump_times;
  /// visited.front() is the start; visited[k+1] is entered at jump_times[k].
  std::vector<Point> visited;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  /// The path hit the edge of the ambient box before T and was stopped there.
  bool truncated = false;
};

namespace detail {

/// Walks from vertex index i until time T or the box edge. Calls on_jump(t, j)
/// after every jump; returns the final index and sets truncated.
template <typename OnJump>
std::size_t walk(const ConductanceField& w, std::size_t i, double T, CounterStream& rs, bool& truncated,
                 OnJump&& on_jump) {
  const LatticeBox& box = w.box();
  const int d = box.dim();
  double t = 0.0;
  double rates[2 * kMaxDim];
  std::size_t targets[2 * kMaxDim];
  truncated = false;
  while (true) {
    const Point x = box.point(i);
    if (box.on_boundary(x)) {
      truncated = true;
      return i;
    }
    double mu = 0.0;
    for (int a = 0; a < d; ++a) {
      const std::size_t s = box.stride(a);
      rates[2 * a] = w.raw(i, a);
      targets[2 * a] = i + s;
      rates[2 * a + 1] = w.raw(i - s, a);
      targets[2 * a + 1] = i - s;
      mu += rates[2 * a] + rates[2 * a + 1];
    }
    t += rs.exponential() / mu;
    if (t > T) return i;
    double r = rs.uniform() * mu;
    int k = 0;
    while (k < 2 * d - 1 && r >= rates[k]) r -= rates[k++];
    i = targets[k];
    on_jump(t, i);
  }
}

inline std::size_t start_index(const ConductanceField& w, const Point& x0) {
  if (x0.dim() != w.dim()) throw DomainError("walk start has the wrong dimension");
  const auto i = w.box().find(x0);
  if (!i) throw DomainError("walk start " + x0.str() + " outside the ambient box");
  return *i;
}

}  // namespace detail

/// Gillespie dynamics: hold Exp(μ^ω(x)), then jump to y with probability
/// ω(x,y)/μ^ω(x). The stream is CounterStream(seed, index).
inline PathSample sample_path(const ConductanceField& w, const Point& x0, double T, std::uint64_t seed,
                              std::uint64_t index) {
  if (!(T >= 0.0)) throw DomainError("sample_path needs T >= 0");
  const std::size_t i0 = detail::start_index(w, x0);
  PathSample p;
  p.seed = seed;
  p.index = index;
  p.visited.push_back(x0);
  CounterStream rs(seed, index);
  detail::walk(w, i0, T, rs, p.truncated, [&](double t, std::size_t j) {
    p.jump_times.push_back(t);
    p.visited.push_back(w.box().point(j));
  });
  return p;
}

/// `path_index,jump_time,x1..xd`; the first row of each path is its start at
/// time 0.
inline void write_path_csv(std::ostream& os, std::span<const PathSample> paths) {
  if (paths.empty()) return;
  const int d = paths.front().visited.front().dim();
  os << "path_index,jump_time";
  for (int a = 0; a < d; ++a) os << ",x" << a + 1;
  os << '\n';
  char buf[40];
  for (const auto& p : paths) {
    for (std::size_t k = 0; k < p.visited.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", k == 0 ? 0.0 : p.jump_times[k - 1]);
      os << p.index << ',' << buf;
      for (int a = 0; a < d; ++a) os << ',' << p.visited[k][a];
      os << '\n';
    }
  }
}

struct EmpiricalKernel {
  /// Fraction of the N paths ending at each vertex of the ambient box.
  VertexField probabilities;
  std::size_t paths = 0;
  double truncated_fraction = 0.0;
  /// More than 1% of the paths were truncated.
  bool warning = false;
};

/// Histogram of X_t over N independent paths started at x0; path k uses
/// stream k. Truncated paths contribute nothing, so the mass is one minus
/// the truncated fraction.
inline EmpiricalKernel empirical_kernel(const ConductanceField& w, const Point& x0, double t, std::size_t N,
                                        std::uint64_t seed) {
  if (N < 1) throw DomainError("empirical kernel needs N >= 1");
  if (!(t >= 0.0)) throw DomainError("empirical kernel needs t >= 0");
  const std::size_t i0 = detail::start_index(w, x0);
  constexpr std::size_t kTruncated = static_cast<std::size_t>(-1);
  std::vector<std::size_t> end(N);
  parallel_for(N, [&](std::size_t k) {
    CounterStream rs(seed, k);
    bool trunc = false;
    const std::size_t j = detail::walk(w, i0, t, rs, trunc, [](double, std::size_t) {});
    end[k] = trunc ? kTruncated : j;
  });
  std::vector<std::uint64_t> counts(w.box().size(), 0);
  std::size_t truncated = 0;
  for (std::size_t j : end) {
    if (j == kTruncated)
      ++truncated;
    else
      ++counts[j];
  }
  EmpiricalKernel out;
  out.probabilities = VertexField(VertexSet(w.box()));
  for (std::size_t j = 0; j < counts.size(); ++j)
    out.probabilities[j] = static_cast<double>(counts[j]) / static_cast<double>(N);
  out.paths = N;
  out.truncated_fraction = static_cast<double>(truncated) / static_cast<double>(N);
  out.warning = out.truncated_fraction > 0.01;
  return out;
}

/// ½ Σ_y |p(y) − q(y)| over the union of the two supports; values missing
/// from one field count as 0.
inline double total_variation(const VertexField& p, const VertexField& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Point x = p.domain()[i];
    s += std::abs(p[i] - (q.has(x) ? q.at(x) : 0.0));
  }
  for (std::size_t i = 0; i < q.size(); ++i)
    if (!p.has(q.domain()[i])) s += std::abs(q[i]);
  return 0.5 * s;
}

struct SigmaEstimate {
  Eigen::MatrixXd sigma2;
  /// Standard error of each entry.
  Eigen::MatrixXd standard_error;
  std::size_t samples = 0;
  double truncated_fraction = 0.0;
  bool warning = false;
};

/// Empirical covariance of Y = (X_{n²t} − x0)/(n√t) over the untruncated
/// paths among N. With this scaling ω ≡ 1 gives exactly 2·I, the per
/// coordinate variance 2t of the walk.
inline SigmaEstimate estimate_sigma(const ConductanceField& w, std::int64_t n, double t, std::size_t N,
                                    std::uint64_t seed, const Point& x0) {
  if (N < 2) throw DomainError("estimate_sigma needs N >= 2");
  if (n < 1 || !(t > 0.0)) throw DomainError("estimate_sigma needs n >= 1 and t > 0");
  const int d = w.dim();
  const std::size_t i0 = detail::start_index(w, x0);
  const double T = static_cast<double>(n) * static_cast<double>(n) * t;
  const double scale = 1.0 / (static_cast<double>(n) * std::sqrt(t));
  std::vector<double> y(N * static_cast<std::size_t>(d));
  std::vector<char> trunc(N, 0);
  parallel_for(N, [&](std::size_t k) {
    CounterStream rs(seed, k);
    bool tr = false;
    const std::size_t j = detail::walk(w, i0, T, rs, tr, [](double, std::size_t) {});
    trunc[k] = tr;
    const Point x = w.box().point(j);
    for (int a = 0; a < d; ++a) y[k * d + a] = static_cast<double>(x[a] - x0[a]) * scale;
  });
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < N; ++k)
    if (!trunc[k]) keep.push_back(k);
  const std::size_t M = keep.size();
  if (M < 2) throw SolverError("estimate_sigma: fewer than two untruncated paths");
  std::vector<double> mean(d);
  for (int a = 0; a < d; ++a)
    mean[a] = pairwise_sum(M, [&](std::size_t m) { return y[keep[m] * d + a]; }) / static_cast<double>(M);
  SigmaEstimate out;
  out.sigma2 = Eigen::MatrixXd::Zero(d, d);
  out.standard_error = Eigen::MatrixXd::Zero(d, d);
  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b) {
      auto prod = [&](std::size_t m) { return (y[keep[m] * d + a] - mean[a]) * (y[keep[m] * d + b] - mean[b]); };
      const double c = pairwise_sum(M, prod) / static_cast<double>(M - 1);
      const double v = pairwise_sum(M, [&](std::size_t m) {
                         const double e = prod(m) - c;
                         return e * e;
                       }) /
                       static_cast<double>(M - 1);
      out.sigma2(a, b) = out.sigma2(b, a) = c;
      out.standard_error(a, b) = out.standard_error(b, a) = std::sqrt(v / static_cast<double>(M));
    }
  }
  out.samples = M;
  out.truncated_fraction = static_cast<double>(N - M) / static_cast<double>(N);
  out.warning = out.truncated_fraction > 0.01;
  return out;
}

}  // namespace rcm
