#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <vector>

#include "rcm/environment.hpp"
#include "rcm/inequalities.hpp"
#include "rcm/solvers.hpp"

using namespace rcm;

namespace {

// Exact minimizer of Σ f_k(φ_{k+1} − φ_k)² with φ_0 = 1, φ_L = 0, from the
// normal equations (a tridiagonal system); requires every f_k > 0.
double exact_min(const std::vector<double>& f) {
  const auto L = static_cast<Eigen::Index>(f.size());
  if (L == 1) return f[0];
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(L - 1, L - 1);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(L - 1);
  for (Eigen::Index k = 1; k < L; ++k) {
    A(k - 1, k - 1) = f[k - 1] + f[k];
    if (k > 1) A(k - 1, k - 2) = -f[k - 1];
    if (k < L - 1) A(k - 1, k) = -f[k];
  }
  b(0) = f[0];
  const Eigen::VectorXd phi = A.ldlt().solve(b);
  double J = 0.0;
  for (Eigen::Index k = 0; k < L; ++k) {
    const double lo = k == 0 ? 1.0 : phi(k - 1);
    const double hi = k + 1 == L ? 0.0 : phi(k);
    J += f[k] * (hi - lo) * (hi - lo);
  }
  return J;
}

// Minimum over monotone profiles with values on the grid {i/64}.
double grid_min(const std::vector<double>& f) {
  constexpr int G = 64;
  std::vector<double> best(G + 1, kInf), next(G + 1);
  best[G] = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    std::fill(next.begin(), next.end(), kInf);
    for (int from = 0; from <= G; ++from) {
      if (best[from] == kInf) continue;
      for (int to = 0; to <= from; ++to) {
        const double step = double(from - to) / G;
        next[to] = std::min(next[to], best[from] + f[k] * step * step);
      }
    }
    best.swap(next);
  }
  return best[0];
}

}  // namespace

TEST(Cutoff, TwoEqualShells) {
  const std::vector<double> f{1.0, 1.0};
  const auto r = optimal_radial_cutoff(0, 2, f);
  EXPECT_EQ(r.profile.values, (std::vector<double>{1.0, 0.5, 0.0}));
  EXPECT_DOUBLE_EQ(r.J, 0.5);
}

TEST(Cutoff, UnequalShells) {
  const std::vector<double> f{1.0, 3.0};
  const auto r = optimal_radial_cutoff(0, 2, f);
  EXPECT_DOUBLE_EQ(r.profile.values[1], 0.25);
  EXPECT_DOUBLE_EQ(r.J, 0.75);
  EXPECT_DOUBLE_EQ(profile_energy(r.profile, f), 0.75);
}

TEST(Cutoff, ZeroShellGivesZero) {
  const std::vector<double> f{2.0, 0.0, 5.0};
  const auto r = optimal_radial_cutoff(3, 6, f);
  EXPECT_EQ(r.J, 0.0);
  EXPECT_EQ(profile_energy(r.profile, f), 0.0);
  EXPECT_EQ(r.profile(3), 1.0);
  EXPECT_EQ(r.profile(6), 0.0);
}

TEST(Cutoff, Errors) {
  const std::vector<double> f{1.0};
  EXPECT_THROW(optimal_radial_cutoff(2, 2, std::vector<double>{}), DomainError);
  EXPECT_THROW(optimal_radial_cutoff(0, 1, std::vector<double>{-1.0}), DomainError);
  EXPECT_THROW(cutoff_bound(0, 1, f, 0.0), DomainError);
  EXPECT_THROW(cutoff_bound(0, 1, f, -1.0), DomainError);
}

TEST(Cutoff, BoundExamples) {
  EXPECT_DOUBLE_EQ(cutoff_bound(0, 2, std::vector<double>{1.0, 1.0}, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(cutoff_bound(0, 2, std::vector<double>{1.0, 4.0}, 0.5), 1.125);
}

TEST(Cutoff, MatchesOraclesOnAllSmallInstances) {
  const double levels[4] = {0.1, 0.5, 1.0, 3.0};
  std::size_t count = 0;
  for (int L = 1; L <= 6; ++L) {
    int total = 1;
    for (int k = 0; k < L; ++k) total *= 4;
    for (int code = 0; code < total; ++code) {
      std::vector<double> f(L);
      for (int k = 0, c = code; k < L; ++k, c /= 4) f[k] = levels[c % 4];
      const auto r = optimal_radial_cutoff(2, 2 + L, f);
      ASSERT_NEAR(r.J, exact_min(f), 1e-10);
      ASSERT_NEAR(profile_energy(r.profile, f), r.J, 1e-12);
      const double g = grid_min(f);
      ASSERT_LE(r.J, g + 1e-12);
      for (double delta : {0.5, 1.0, 2.0}) ASSERT_LE(r.J, cutoff_bound(2, 2 + L, f, delta) * (1 + 1e-12));
      const auto& v = r.profile.values;
      ASSERT_EQ(v.front(), 1.0);
      ASSERT_EQ(v.back(), 0.0);
      for (std::size_t i = 1; i < v.size(); ++i) ASSERT_LE(v[i], v[i - 1]);
      ++count;
    }
  }
  EXPECT_EQ(count, 5460u);
}

TEST(Cutoff, GridOracleConvergesToOptimum) {
  // The 1/64 grid is within a step of the optimum: the rounded optimal profile
  // costs at most J + O(1/64).
  const std::vector<double> f{0.1, 3.0, 0.5, 1.0};
  const auto r = optimal_radial_cutoff(0, 4, f);
  const double g = grid_min(f);
  EXPECT_GE(g, r.J - 1e-12);
  EXPECT_LE(g - r.J, 0.05 * r.J);
}

TEST(Cutoff, BoundHoldsOnRandomInstances) {
  CounterStream rs(11, 0);
  for (int i = 0; i < 1000; ++i) {
    const auto L = 1 + static_cast<int>(rs.uniform() * 12);
    std::vector<double> f(L);
    for (auto& v : f) v = rs.uniform() < 0.05 ? 0.0 : std::exp(4.0 * rs.normal());
    const auto r = optimal_radial_cutoff(1, 1 + L, f);
    for (double delta : {0.5, 1.0, 2.0}) ASSERT_LE(r.J, cutoff_bound(1, 1 + L, f, delta) * (1 + 1e-12));
  }
}

TEST(Cutoff, RadialFieldEnergyEqualsShellEnergy) {
  // For a radial cutoff only bonds in the shells S(k) see a gradient.
  const int d = 2;
  const LatticeBox box = LatticeBox::centered(d, 9);
  const EnvironmentLaw law{ParetoMixtureLaw{8, 8}, 5};
  const ConductanceField w = generate(law, box);
  const auto f = shell_sums(2, 8, d, [&](const Bond& b) { return w.at(b); });
  const auto r = optimal_radial_cutoff(2, 8, f);
  const VertexField eta = radial_cutoff_field(r.profile, box, origin(d));
  double direct = 0.0;
  for (const Bond& b : bonds_within(box)) {
    const double g = eta.at(b.upper()) - eta.at(b.lower);
    direct += g * g * w.at(b);
  }
  EXPECT_NEAR(direct, r.J, 1e-12 * r.J);
  for (const Point& x : ball(2, d)) EXPECT_EQ(eta.at(x), 1.0);
  for (const Point& x : box.vertices()) {
    if (x.sup_norm() >= 8) {
      EXPECT_EQ(eta.at(x), 0.0);
    }
  }
}

TEST(Sobolev, ConstantHasZeroRatio) {
  const VertexField f(ball(5, 2), 3.0);
  const auto r = sobolev_probe(f, 5, 1.0, SobolevMode::bulk);
  EXPECT_EQ(r.ratio, 0.0);
  EXPECT_FALSE(r.infinite);
}

TEST(Sobolev, DeltaOnUnitBall) {
  const VertexField f = VertexField::from_function(ball(1, 2), [](const Point& x) { return x == origin(2) ? 1.0 : 0.0; });
  const auto r = sobolev_probe(f, 1, 1.0, SobolevMode::bulk);
  EXPECT_NEAR(r.numerator, std::sqrt(72.0 / 81.0), 1e-14);
  EXPECT_DOUBLE_EQ(r.denominator, 4.0);
  EXPECT_NEAR(r.ratio, std::sqrt(72.0 / 81.0) / 4.0, 1e-14);
}

TEST(Sobolev, SphereConstant) {
  // d = 3, s = 1: s* = 2, ratio = |S|^{1/2} / (|S|/n) with ∇f = 0.
  const std::int64_t n = 4;
  const VertexField f(ball(n, 3), 1.0);
  const auto r = sobolev_probe(f, n, 1.0, SobolevMode::sphere);
  const double S = std::pow(2.0 * n + 1, 3) - std::pow(2.0 * n - 1, 3);
  EXPECT_NEAR(r.ratio, n / std::sqrt(S), 1e-13);
}

TEST(Sobolev, Rejections) {
  const VertexField f(ball(3, 2), 1.0);
  EXPECT_THROW(sobolev_probe(f, 3, 2.0, SobolevMode::bulk), DomainError);
  EXPECT_THROW(sobolev_probe(f, 3, 1.0, SobolevMode::sphere), DomainError);
  EXPECT_THROW(sobolev_probe(f, 4, 1.0, SobolevMode::bulk), DomainError);
}

TEST(Sobolev, RandomGaussianFieldsStayBounded) {
  double ceiling = 0.0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    CounterStream rs(3, s);
    const VertexField f = VertexField::from_function(ball(16, 2), [&](const Point&) { return rs.normal(); });
    const auto r = sobolev_probe(f, 16, 1.0, SobolevMode::bulk);
    ASSERT_FALSE(r.infinite);
    ceiling = std::max(ceiling, r.ratio);
  }
  EXPECT_TRUE(std::isfinite(ceiling));
  EXPECT_GT(ceiling, 0.0);
  EXPECT_LT(ceiling, 1.0);
}

namespace {

struct Instance {
  ConductanceField w;
  SpaceTimeField u;
};

// Caloric u on [0, T] × B(m) with positive, smooth random lateral and
// initial data.
Instance caloric_instance(std::uint64_t seed, std::int64_t m, double T, double step) {
  const int d = 2;
  const LatticeBox box = LatticeBox::centered(d, m);
  ConductanceField w = generate(EnvironmentLaw{ParetoMixtureLaw{8, 8}, seed}, box);
  CounterStream rs(seed, 99);
  double A[4], k1[4], k2[4], om[4], ph[4];
  for (int i = 0; i < 4; ++i) {
    A[i] = 0.6 * rs.normal();
    k1[i] = 0.5 * rs.normal();
    k2[i] = 0.5 * rs.normal();
    om[i] = 0.1 * rs.normal();
    ph[i] = 6.3 * rs.uniform();
  }
  auto data = [&](double t, const Point& x) {
    double g = 0.0;
    for (int i = 0; i < 4; ++i) g += A[i] * std::cos(k1[i] * x[0] + k2[i] * x[1] + om[i] * t + ph[i]);
    return std::exp(g);
  };
  std::vector<double> times;
  for (double t = 0.0; t <= T + 1e-9; t += step) times.push_back(t);
  const VertexField init = VertexField::from_function(VertexSet(box), [&](const Point& x) { return data(0.0, x); });
  SolverConfig cfg;
  SpaceTimeField u = solve_caloric_ibvp(
      w, box, times, [&](std::size_t j, const Point& x) { return data(times[j], x); }, init, cfg);
  return {std::move(w), std::move(u)};
}

}  // namespace

TEST(Caccioppoli, ConstantSolution) {
  const LatticeBox box = LatticeBox::centered(2, 6);
  const ConductanceField w(box, 1.0);
  SpaceTimeField u({0.0, 1.0, 2.0, 3.0, 4.0}, std::make_shared<const VertexSet>(box));
  for (std::size_t j = 0; j < 5; ++j)
    for (auto& v : u.slice_values(j)) v = 2.0;
  const auto r = optimal_radial_cutoff(3, 6, std::vector<double>{1, 1, 1});
  const VertexField eta = radial_cutoff_field(r.profile, box, origin(2));
  const auto c = caccioppoli_check(w, u, eta, 1.0, 2.0, 4.0);
  EXPECT_EQ(c.energy, 0.0);
  EXPECT_TRUE(c.satisfied);
  const auto lc = log_caccioppoli_check(w, u, eta);
  EXPECT_EQ(lc.drift, 0.0);
  EXPECT_EQ(lc.energy, 0.0);
  EXPECT_TRUE(lc.satisfied);
}

TEST(Caccioppoli, CutoffTermCarriesFourAlphaSquared) {
  const auto inst = caloric_instance(4, 10, 100.0, 1.0);
  const VertexField eta = affine_cutoff(10, 0.5, inst.u.domain().as_box().value());
  for (double alpha : {1.0, 2.0}) {
    const auto c = caccioppoli_check(inst.w, inst.u, eta, alpha, 25.0, 100.0);
    EXPECT_NEAR(c.rhs, 2.0 * (4.0 * alpha * alpha * c.cutoff_term + c.time_term), 1e-12 * c.rhs);
    EXPECT_GT(c.cutoff_term, 0.0);
    EXPECT_GT(c.energy, 0.0);
    EXPECT_TRUE(c.satisfied) << "alpha " << alpha << " lhs " << c.lhs << " rhs " << c.rhs;
  }
}

TEST(Caccioppoli, RandomInstancesSatisfied) {
  for (std::uint64_t seed = 20; seed < 24; ++seed) {
    const auto inst = caloric_instance(seed, 12, 144.0, 1.0);
    const LatticeBox box = inst.u.domain().as_box().value();
    const auto f = shell_sums(8, 12, 2, [&](const Bond& b) { return inst.w.at(b); });
    const VertexField eta = radial_cutoff_field(optimal_radial_cutoff(8, 12, f).profile, box, origin(2));
    for (double alpha : {1.0, 2.0}) {
      const auto c = caccioppoli_check(inst.w, inst.u, eta, alpha, 64.0, 144.0);
      EXPECT_TRUE(c.satisfied) << seed << ' ' << alpha << ' ' << c.lhs << ' ' << c.rhs;
    }
  }
}

TEST(Caccioppoli, Rejections) {
  const auto inst = caloric_instance(1, 6, 4.0, 1.0);
  const LatticeBox box = inst.u.domain().as_box().value();
  const VertexField ones(VertexSet(box), 1.0);
  EXPECT_THROW(caccioppoli_check(inst.w, inst.u, ones, 1.0, 1.0, 4.0), DomainError);
  const VertexField eta = affine_cutoff(6, 0.5, box);
  EXPECT_THROW(caccioppoli_check(inst.w, inst.u, eta, 0.5, 1.0, 4.0), DomainError);
  EXPECT_THROW(caccioppoli_check(inst.w, inst.u, eta, 1.0, 3.0, 2.0), DomainError);
  SpaceTimeField neg = inst.u;
  neg.slice_values(1)[0] = -1.0;
  EXPECT_THROW(caccioppoli_check(inst.w, neg, eta, 1.0, 1.0, 4.0), DomainError);
  EXPECT_THROW(log_caccioppoli_check(inst.w, neg, eta), DomainError);
}

TEST(AffineCutoff, OscillationRatioAndSlope) {
  const std::int64_t n = 16;
  const double sigma2 = 0.5;
  const LatticeBox box = LatticeBox::centered(2, n);
  const VertexField eta = affine_cutoff(n, sigma2, box);
  VertexField eta2 = eta;
  for (auto& v : eta2.values()) v = v * v;
  EXPECT_LE(osr(eta2), 2.0);
  const double slope = 3.0 / double(n + 2 - 8);
  for (const Bond& b : bonds_within(box)) EXPECT_LE(std::abs(eta.at(b.upper()) - eta.at(b.lower)), slope + 1e-15);
  for (const Point& x : ball(8, 2)) EXPECT_EQ(eta.at(x), 1.0);
  for (const Point& x : box.vertices()) {
    if (x.sup_norm() >= n) {
      EXPECT_EQ(eta.at(x), 0.0);
    }
  }
}

TEST(LogCaccioppoli, DriftEqualsTimeDerivative) {
  // For caloric u the generator term is d/dt Σ η²g(u); compare with a
  // central difference on a fine grid.
  const auto inst = caloric_instance(7, 8, 2.0, 0.01);
  const LatticeBox box = inst.u.domain().as_box().value();
  const VertexField eta = affine_cutoff(8, 0.5, box);
  auto mass = [&](std::size_t j) {
    double s = 0.0;
    const auto uj = inst.u.slice_values(j);
    for (std::size_t i = 0; i < box.size(); ++i) s += eta[i] * eta[i] * g_eval(uj[i]);
    return s;
  };
  const std::size_t j = 100;
  SpaceTimeField one({inst.u.times()[j]}, inst.u.shared_domain());
  std::copy(inst.u.slice_values(j).begin(), inst.u.slice_values(j).end(), one.slice_values(0).begin());
  const auto r = log_caccioppoli_check(inst.w, one, eta);
  const double fd = (mass(j + 1) - mass(j - 1)) / 0.02;
  EXPECT_NEAR(r.drift, fd, 1e-4 * std::max(1.0, std::abs(fd)));
}

TEST(LogCaccioppoli, RandomInstancesSatisfied) {
  for (std::uint64_t seed = 30; seed < 34; ++seed) {
    const auto inst = caloric_instance(seed, 12, 50.0, 1.0);
    const VertexField eta = affine_cutoff(12, 0.5, inst.u.domain().as_box().value());
    const auto r = log_caccioppoli_check(inst.w, inst.u, eta);
    EXPECT_TRUE(r.satisfied) << seed << ' ' << r.lhs << ' ' << r.rhs;
    EXPECT_LE(r.osr, 4.0 / 3.0 + 1e-15);
  }
}

TEST(Appendix, EqualArgumentsGiveEquality) {
  const auto [l, r] = chain::second(2.5, 2.5, 1.7);
  EXPECT_EQ(l, 0.0);
  EXPECT_EQ(r, 0.0);
}

TEST(Appendix, HandArithmetic) {
  const auto [l, r] = chain::second(4.0, 1.0, 2.0);
  EXPECT_NEAR(l, 225.0, 1e-12);
  EXPECT_NEAR(r, 252.0, 1e-12);
}

TEST(Appendix, PowerDifferenceIsAccurateNearTies) {
  const double a = 1.0 + 1e-9, b = 1.0;
  const double h = a - b;  // exact
  EXPECT_NEAR(power_difference(a, b, 3.0), 3 * h + 3 * h * h, 1e-24);
  EXPECT_EQ(power_difference(0.0, 2.0, 2.0), -4.0);
}

TEST(Appendix, NoViolations) {
  const auto rep = appendix_property_tests(100000, 2024);
  EXPECT_EQ(rep.samples, 100000u);
  std::ostringstream os;
  write_violations_csv(os, rep.violations);
  EXPECT_TRUE(rep.violations.empty()) << os.str().substr(0, 2000);
}

TEST(Appendix, CsvLayout) {
  std::ostringstream os;
  write_violations_csv(os, {{"chain_2", {{"a", 1.0}, {"b", 2.0}}, 3.0, 2.0, -1.0}});
  EXPECT_EQ(os.str(), "inequality,inputs,lhs,rhs,slack\nchain_2,a=1;b=2,3,2,-1\n");
}
