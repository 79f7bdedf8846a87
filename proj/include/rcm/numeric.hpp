#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace rcm {

namespace detail {
inline constexpr std::size_t kPairwiseBlock = 64;
}

/// Pairwise (cascade) summation; error grows like O(log n) instead of O(n)
/// and the result depends only on the input order.
template <typename F>
double pairwise_sum(std::size_t n, F&& term) {
  auto rec = [&](auto&& self, std::size_t lo, std::size_t hi) -> double {
    if (hi - lo <= detail::kPairwiseBlock) {
      double s = 0.0;
      for (std::size_t i = lo; i < hi; ++i) s += term(i);
      return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return self(self, lo, mid) + self(self, mid, hi);
  };
  return rec(rec, 0, n);
}

inline double pairwise_sum(std::span<const double> v) {
  return pairwise_sum(v.size(), [&](std::size_t i) { return v[i]; });
}

/// Trapezoid rule over a (not necessarily uniform) grid.
inline double trapezoid(std::span<const double> t, std::span<const double> f) {
  if (t.size() < 2) return 0.0;
  return pairwise_sum(t.size() - 1, [&](std::size_t i) {
    return 0.5 * (t[i + 1] - t[i]) * (f[i] + f[i + 1]);
  });
}

}  // namespace rcm
