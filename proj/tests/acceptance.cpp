// Acceptance suite: one line per criterion, non-zero exit if any fails.
//
//   rcm_acceptance            run everything
//   rcm_acceptance 4 9        run selected criteria

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rcm/config.hpp"
#include "rcm/inequalities.hpp"
#include "rcm/walker.hpp"

using namespace rcm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool check_passed(const ExperimentReport& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return c.passed;
  return false;
}

// ---------------------------------------------------------------- 1

Outcome exponent_algebra() {
  CounterStream rs(101, 0);
  std::size_t count = 0, bad = 0;
  double worst = 0.0;
  while (count < 1000) {
    const int d = rs.uniform() < 0.5 ? 2 : 3;
    const double p = std::exp(rs.uniform() * std::log(40.0));
    const double q = d / 2.0 * std::exp(rs.uniform() * std::log(40.0));
    if (!(p > 1.0 && q > d / 2.0 && 1.0 / p + 1.0 / q < 2.0 / (d - 1))) continue;
    ++count;
    const ExponentSet e = derive_exponents(d, p, q);
    const double r1 = std::abs((1.0 + e.eps) * e.ell - e.delta2);
    const double r2 = std::abs(e.nu * e.Q - 2.0 * (1.0 + e.eps) - 2.0 * e.eps * (1.0 / (1.0 - e.delta2) - 1.0));
    const double r3 = std::abs(1.0 / e.Q - (1.0 - e.delta2) / 2.0);
    worst = std::max({worst, r1, r2, r3});
    const double lo = (e.theta - e.nu) / (e.theta - 1.0);
    const double mid = p / (p - 1.0);
    const double hi = e.theta < p ? p * e.nu / (p - e.theta) : kInf;
    const bool ok = e.delta1 > 0.0 && e.delta2 > 0.0 && e.nu > 0.0 && e.nu < 1.0 && e.gamma > 2.0 && e.Q > 2.0 &&
                    r1 <= 1e-12 && r2 <= 1e-12 && r3 <= 1e-12 && 0.0 < lo && lo < mid && mid < hi &&
                    e.theta - e.delta2 * (p - 1.0) > 0.0 &&
                    e.theta == (d == 2 ? p : 1.0 + p * e.delta1);
    bad += !ok;
  }
  return {bad == 0, fmt("%zu sets, %zu violations, worst identity residual %.2e", count, bad, worst)};
}

// ---------------------------------------------------------------- 2

VertexField random_field(const VertexSet& s, CounterStream& rng, std::int64_t support = -1) {
  return VertexField::from_function(s, [&](const Point& x) {
    const double v = rng.normal();
    return (support < 0 || x.sup_norm() <= support) ? v : 0.0;
  });
}

Outcome calculus_identities() {
  CounterStream rng(202, 0);
  double worst = 0.0;  // residual relative to the magnitude of the summands
  std::size_t instances = 0;
  for (int d = 1; d <= 3; ++d)
    for (int trial = 0; trial < 100; ++trial) {
      // Summation by parts: Σ_e ∇f·F = Σ_x f·div F for f supported inside.
      {
        const std::int64_t n = d == 3 ? 6 : 12;
        const auto S = ball(n, d);
        const auto f = random_field(S, rng, n - 2);
        const auto bonds = bonds_within(S);
        const auto F = BondField::from_function(bonds, [&](const Bond&) { return rng.normal(); });
        const auto grad = gradient(f, bonds);
        const auto div = divergence(F, ball(n - 1, d));
        double lhs = 0.0, rhs = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < bonds.size(); ++i) {
          lhs += grad[i] * F[i];
          scale += std::abs(grad[i] * F[i]);
        }
        for (std::size_t k = 0; k < div.size(); ++k) {
          const double t = f.at(div.domain()[k]) * div[k];
          rhs += t;
          scale += std::abs(t);
        }
        worst = std::max(worst, std::abs(lhs - rhs) / scale);
      }
      // Divergence form: L^ω u = −div(ω∇u).
      {
        const LatticeBox box = LatticeBox::centered(d, 4);
        const auto w = ConductanceField::from_function(box, [&](const Bond&) { return std::exp(2.0 * rng.normal()); });
        const auto u = random_field(VertexSet(box), rng);
        const auto bonds = bonds_within(box);
        const auto flux = conductance_field(w, bonds) * gradient(u, bonds);
        const auto div = divergence(flux, ball(3, d));
        for (std::size_t k = 0; k < div.size(); ++k) {
          const Point x = div.domain()[k];
          double scale = 0.0;
          for (int a = 0; a < d; ++a)
            for (int s : {-1, 1}) {
              const Point y = s > 0 ? x + unit_vector(d, a) : x - unit_vector(d, a);
              scale += w.at(x, y) * std::abs(u.at(y) - u.at(x));
            }
          worst = std::max(worst, std::abs(apply_generator(w, u, x) + div[k]) / scale);
        }
      }
      // Product rule in both arrangements.
      {
        const auto S = ball(3, d);
        const auto f = random_field(S, rng), g = random_field(S, rng);
        auto fg = f;
        for (std::size_t i = 0; i < fg.size(); ++i) fg[i] *= g[i];
        const auto bonds = bonds_within(S);
        const auto dfg = gradient(fg, bonds), df = gradient(f, bonds), dg = gradient(g, bonds);
        const auto fm = midpoint(f, bonds), gm = midpoint(g, bonds);
        for (std::size_t i = 0; i < bonds.size(); ++i) {
          const Bond& e = bonds[i];
          const double a = f.at(e.upper()) * dg[i] + g.at(e.lower) * df[i];
          const double b = fm[i] * dg[i] + gm[i] * df[i];
          const double scale = std::abs(f.at(e.upper()) * dg[i]) + std::abs(g.at(e.lower) * df[i]) +
                               std::abs(fm[i] * dg[i]) + std::abs(gm[i] * df[i]);
          worst = std::max({worst, std::abs(dfg[i] - a) / scale, std::abs(dfg[i] - b) / scale});
        }
      }
      instances += 3;
    }
  return {worst <= 1e-12, fmt("%zu instances, worst relative residual %.2e", instances, worst)};
}

// ---------------------------------------------------------------- 3

// Exact minimizer of Σ f_k(φ_{k+1} − φ_k)² with φ at the ends fixed to 1
// and 0, from the tridiagonal normal equations.
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

Outcome cutoff_optimizer() {
  const double levels[4] = {0.1, 0.5, 1.0, 3.0};
  std::size_t enumerated = 0, bad = 0;
  double worst = 0.0;
  for (int L = 1; L <= 6; ++L) {
    int total = 1;
    for (int k = 0; k < L; ++k) total *= 4;
    for (int code = 0; code < total; ++code) {
      std::vector<double> f(static_cast<std::size_t>(L));
      for (int k = 0, c = code; k < L; ++k, c /= 4) f[static_cast<std::size_t>(k)] = levels[c % 4];
      const auto r = optimal_radial_cutoff(2, 2 + L, f);
      const double err = std::abs(r.J - exact_min(f));
      worst = std::max(worst, err);
      bad += err > 1e-10;
      for (double delta : {0.5, 1.0, 2.0}) bad += r.J > cutoff_bound(2, 2 + L, f, delta) * (1 + 1e-12);
      ++enumerated;
    }
  }
  CounterStream rs(303, 0);
  std::size_t random_bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto L = 1 + static_cast<int>(rs.uniform() * 12);
    std::vector<double> f(static_cast<std::size_t>(L));
    for (auto& v : f) v = rs.uniform() < 0.05 ? 0.0 : std::exp(4.0 * rs.normal());
    const auto r = optimal_radial_cutoff(1, 1 + L, f);
    for (double delta : {0.5, 1.0, 2.0}) random_bad += r.J > cutoff_bound(1, 1 + L, f, delta) * (1 + 1e-12);
  }
  return {bad == 0 && random_bad == 0,
          fmt("%zu enumerated instances (max error %.2e, %zu failures); bound violations on 1000 random: %zu",
              enumerated, worst, bad, random_bad)};
}

// ---------------------------------------------------------------- 4

Outcome bessel_oracle() {
  SolverConfig cfg;
  double err = 0.0, leak = 0.0;
  for (int d : {1, 2})
    for (double t : {1.0, 4.0}) {
      const ConductanceField one(LatticeBox::centered(d, 40), 1.0);
      const auto col = heat_kernel(one, origin(d), t, cfg);
      leak = std::max(leak, col.leak);
      for (std::size_t i = 0; i < col.values.size(); ++i)
        err = std::max(err, std::abs(col.values[i] - bessel_reference(d, t, col.values.domain()[i])));
    }
  return {err <= 1e-8 && leak <= 1e-12, fmt("max error %.2e, max leak %.2e", err, leak)};
}

// ---------------------------------------------------------------- 5

Outcome kernel_structure() {
  SolverConfig cfg;
  cfg.max_leak = 1.0;  // fixed radius-10 box; symmetry and composition hold with leakage
  double sym = 0.0, ck = 0.0;
  const Point pts[3] = {Point{1, 2}, Point{-3, 0}, Point{0, 0}};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto w = generate(EnvironmentLaw{ParetoMixtureLaw{8, 8}, 500 + seed}, LatticeBox::centered(2, 10));
    std::vector<HeatKernelColumn> cols;
    for (const Point& x : pts) cols.push_back(heat_kernel(w, x, 1.0, cfg));
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b) sym = std::max(sym, std::abs(cols[a].at(pts[b]) - cols[b].at(pts[a])));
    const auto half = heat_kernel(w, pts[0], 0.5, cfg);
    const auto composed = evolve_many(w, half.values, std::vector<double>{0.5}, cfg).u.slice(0);
    for (std::size_t i = 0; i < cols[0].values.size(); ++i)
      ck = std::max(ck, std::abs(cols[0].values[i] - composed[i]));
  }
  return {sym <= 1e-10 && ck <= 1e-8, fmt("20 environments: symmetry %.2e, Chapman-Kolmogorov %.2e", sym, ck)};
}

// ---------------------------------------------------------------- 6

struct Instance {
  ConductanceField w;
  SpaceTimeField u;
};

// Caloric u on [0, n²] × B(n) with positive smooth random lateral and initial data.
Instance caloric_instance(std::uint64_t seed, std::int64_t n) {
  const LatticeBox box = LatticeBox::centered(2, n);
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
  for (std::int64_t t = 0; t <= n * n; ++t) times.push_back(double(t));
  const VertexField init = VertexField::from_function(VertexSet(box), [&](const Point& x) { return data(0.0, x); });
  SpaceTimeField u = solve_caloric_ibvp(
      w, box, times, [&](std::size_t j, const Point& x) { return data(times[j], x); }, init, SolverConfig{});
  return {std::move(w), std::move(u)};
}

Outcome caccioppoli_suite() {
  const std::int64_t n = 16;
  const double T = double(n * n);
  std::size_t checks = 0, violations = 0, log_checks = 0, log_violations = 0;
  double worst = -kInf;
  for (std::uint64_t k = 0; k < 100; ++k) {
    const auto inst = caloric_instance(7000 + k, n);
    const LatticeBox box = inst.u.domain().as_box().value();
    // Alternate between the optimized radial cutoff and the affine one.
    VertexField eta;
    if (k % 2 == 0) {
      const auto f = shell_sums(n / 2, n, 2, [&](const Bond& b) { return inst.w.at(b); });
      eta = radial_cutoff_field(optimal_radial_cutoff(n / 2, n, f).profile, box, origin(2));
    } else {
      eta = affine_cutoff(n, 0.5, box);
    }
    for (double alpha : {1.0, 2.0}) {
      const auto c = caccioppoli_check(inst.w, inst.u, eta, alpha, T / 4.0, T, 1e-6);
      ++checks;
      violations += !c.satisfied;
      worst = std::max(worst, c.lhs / c.rhs);
    }
    if (k < 50) {
      const auto lc = log_caccioppoli_check(inst.w, inst.u, affine_cutoff(n, 0.5, box), 1e-6);
      ++log_checks;
      log_violations += !lc.satisfied;
    }
  }
  return {violations == 0 && log_violations == 0,
          fmt("Caccioppoli %zu/%zu satisfied (max lhs/rhs %.3f); log-Caccioppoli %zu/%zu satisfied",
              checks - violations, checks, worst, log_checks - log_violations, log_checks)};
}

// ---------------------------------------------------------------- 7

Outcome monte_carlo() {
  SolverConfig cfg;
  const double t = 4.0;
  const LatticeBox box = LatticeBox::centered(2, 30);
  double tv_const = 0.0, tv_rand = 0.0;
  {
    const ConductanceField w(box, 1.0);
    const auto col = heat_kernel(w, origin(2), t, cfg);
    tv_const = total_variation(empirical_kernel(w, origin(2), t, 1000000, 71).probabilities, col.values);
  }
  {
    const auto w = generate(EnvironmentLaw{ParetoMixtureLaw{8, 8}, 72}, box);
    const auto col = heat_kernel(w, origin(2), t, cfg);
    tv_rand = total_variation(empirical_kernel(w, origin(2), t, 1000000, 73).probabilities, col.values);
  }
  return {tv_const <= 0.02 && tv_rand <= 0.02, fmt("TV constant %.4f, random %.4f (N = 1e6)", tv_const, tv_rand)};
}

// ---------------------------------------------------------------- 8

Outcome trapping_and_ceiling() {
  const auto r = run_heat_bounds(default_params("heat_bounds"), 1);
  const bool ok = check_passed(r, "trap_bound") && check_passed(r, "trap_growth") &&
                  check_passed(r, "compliant_ratio_finite") && check_passed(r, "compliant_ceiling_stable");
  const auto& tr = r.results["trap"];
  return {ok, fmt("trap p = %.4f >= %.4f and %.4f >= %.4f, n^2 p %.2f -> %.2f; ceiling %.4g (t <= 8: %.4g)",
                  tr[0]["p"].get<double>(), tr[0]["bound"].get<double>(), tr[1]["p"].get<double>(),
                  tr[1]["bound"].get<double>(), tr[0]["scaled"].get<double>(), tr[1]["scaled"].get<double>(),
                  r.results["compliant"]["ceiling_full"].get<double>(),
                  r.results["compliant"]["ceiling_small_t"].get<double>())};
}

// ---------------------------------------------------------------- 9

Outcome local_limit_trend() {
  ExperimentParams p = default_params("local_limit");
  p.law = "constant(1)";
  const auto c = run_local_limit(p, 1);
  const bool c_ok = check_passed(c, "bessel_match") && check_passed(c, "error_strictly_decreasing") &&
                    check_passed(c, "riemann_sum");
  const auto r = run_local_limit(default_params("local_limit"), 1);
  const bool r_ok = check_passed(r, "error_decreases") && check_passed(r, "riemann_sum");
  const auto Ec = c.results["E"].get<std::vector<double>>();
  const auto Er = r.results["E"].get<std::vector<double>>();
  const auto be = c.results["bessel_error"].get<std::vector<double>>();
  return {c_ok && r_ok, fmt("constant: Bessel error %.2e, E %.2e -> %.2e strictly; pareto: E(8) %.2e, E(64) %.2e",
                            *std::max_element(be.begin(), be.end()), Ec.front(), Ec.back(), Er.front(), Er.back())};
}

// ---------------------------------------------------------------- 10

Outcome oscillation_decay() {
  auto nondegenerate = [](const ExperimentReport& r) { return r.trials - r.skipped; };
  const auto par = run_oscillation(default_params("oscillation", "parabolic"), 1);
  const auto ell = run_oscillation(default_params("oscillation", "elliptic"), 1);
  ExperimentParams lin = default_params("oscillation", "elliptic");
  lin.law = "constant(1)";
  lin.boundary_data = "linear";
  lin.trials = 5;
  const auto ctl = run_oscillation(lin, 1);
  const double th = ctl.results["theta"]["max"].get<double>();
  const double tl = ctl.results["theta"]["min"].get<double>();
  const bool ok = par.trials == 50 && ell.trials == 50 && check_passed(par, "theta_below_one") &&
                  check_passed(ell, "theta_below_one") && nondegenerate(par) > 0 && nondegenerate(ell) > 0 &&
                  std::abs(th - 0.25) <= 0.02 && std::abs(tl - 0.25) <= 0.02;
  return {ok, fmt("parabolic %zu/%zu non-degenerate, max theta %.3g; elliptic %zu/%zu, max theta %.3g; control %.6f",
                  nondegenerate(par), par.trials, par.results["theta"]["max"].get<double>(), nondegenerate(ell),
                  ell.trials, ell.results["theta"]["max"].get<double>(), th)};
}

// ---------------------------------------------------------------- 11

Outcome g_and_appendix() {
  const double c = cbar();
  const double root = std::abs(2.0 * c * std::log(1.0 / c) - (1.0 - c));
  const double jump = std::abs(-std::log(c) - (c - 1.0) * (c - 1.0) / (2.0 * c * (1.0 - c)));
  const double slope_jump = std::abs(-1.0 / c - (c - 1.0) / (c * (1.0 - c)));
  constexpr int N = 10000;
  std::vector<double> z(N), g(N);
  for (int i = 0; i < N; ++i) {
    z[i] = 2.0 * (i + 1) / N;
    g[i] = g_eval(z[i]);
  }
  std::size_t bad = 0;
  for (int i = 1; i < N; ++i) bad += g[i] > g[i - 1];
  for (int i = 1; i + 1 < N; ++i) bad += g[i - 1] - 2.0 * g[i] + g[i + 1] < -1e-12 * std::max(1.0, std::abs(g[i]));
  // Finite-difference derivatives away from the kinks c̄ and 1.
  std::size_t fd_points = 0;
  for (int i = 0; i < N; ++i) {
    const double r = z[i], h = 1e-4 * r;
    if (std::abs(r - c) < 3 * h || std::abs(r - 1.0) < 3 * h) continue;
    const double g1 = (g_eval(r + h) - g_eval(r - h)) / (2 * h);
    const double g2 = (g_eval(r + h) - 2 * g_eval(r) + g_eval(r - h)) / (h * h);
    const double tol = 1e-5 * std::max(1.0, std::abs(g2));
    bad += g1 * g1 / 3.0 > g2 + tol;
    bad += -r * g1 > 4.0 / 3.0 + 1e-6;
    ++fd_points;
  }
  const bool g_ok = bad == 0 && root <= 1e-12 && jump <= 1e-9 && slope_jump <= 1e-9;
  const auto rep = appendix_property_tests(100000, 2024, 1e-12);
  return {g_ok && rep.violations.empty(),
          fmt("g: %zu grid failures, root residual %.1e, jump %.1e (%zu derivative points); appendix: %zu samples, "
              "%zu violations",
              bad, root, jump, fd_points, rep.samples, rep.violations.size())};
}

// ---------------------------------------------------------------- 12

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "rcm-acceptance-determinism";
  fs::remove_all(root);
  const std::vector<std::pair<std::string, std::string>> runs{
      {"oscillation", "mode = elliptic\ntrials = 6\n"},
      {"oscillation", "mode = parabolic\nn = 16\ntrials = 3\n"},
      {"boundedness_harnack", "n = 8\ntrials = 6\n"},
      {"elliptic_harnack", "n = 4\ntrials = 6\n"},
      {"heat_bounds", "t_ladder = 1,2,4\nseeds = 3\ntrap_n_ladder = 8\nholder_n = 8\nholder_levels = 1\n"},
      {"local_limit", "n_ladder = 4,8\n"},
  };
  std::size_t same = 0;
  std::string detail;
  int k = 0;
  for (const auto& [name, extra] : runs) {
    std::string csv[2];
    int idx = 0;
    for (const char* threads : {"1", "4"}) {
      const fs::path out = root / (std::to_string(k) + "-" + threads);
      const RunConfig cfg = parse_config("command = verify\nexperiment = " + name + "\nseed = 17\n" + extra,
                                         {{"out", out.string()}, {"threads", threads}});
      std::ostringstream log;
      const int code = run(cfg, log);
      if (code == 2 || code == 3) throw Error(name + ": " + log.str());
      csv[idx++] = slurp(out / "trials.csv");
    }
    const bool eq = !csv[0].empty() && csv[0] == csv[1];
    same += eq;
    if (!eq) detail += " " + name + " differs;";
    ++k;
  }
  set_thread_count(1);
  fs::remove_all(root);
  return {same == runs.size(), fmt("%zu/%zu configurations byte-identical across --threads 1 and 4", same,
                                   runs.size()) + detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "exponent algebra", 1, exponent_algebra},
      {2, "discrete calculus identities", 5, calculus_identities},
      {3, "cutoff optimizer", 30, cutoff_optimizer},
      {4, "heat solver vs Bessel", 60, bessel_oracle},
      {5, "kernel symmetry and Chapman-Kolmogorov", 60, kernel_structure},
      {6, "Caccioppoli suites", 600, caccioppoli_suite},
      {7, "Monte Carlo consistency", 600, monte_carlo},
      {8, "trapping and on-diagonal bound", 900, trapping_and_ceiling},
      {9, "local limit", 1200, local_limit_trend},
      {10, "oscillation decay", 1200, oscillation_decay},
      {11, "g-function and appendix inequalities", 60, g_and_appendix},
      {12, "determinism across thread counts", kInf, determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.contains(c.id)) continue;
    set_thread_count(1);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_seconds) {
      o.pass = false;
      o.detail += fmt("; over the %.0f s budget", c.budget_seconds);
    }
    failed += !o.pass;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << c.id << ". " << c.name << ": " << o.detail
              << fmt(" (%.1f s)", secs) << std::endl;
  }
  std::cout << (failed ? fmt("%d criteria failed", failed) : std::string("all criteria passed")) << std::endl;
  return failed ? 1 : 0;
}
