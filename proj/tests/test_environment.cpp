#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "rcm/calculus.hpp"
#include "rcm/environment.hpp"

using namespace rcm;

namespace {
EnvironmentLaw pareto(std::uint64_t seed, double a = 8, double b = 8) { return {ParetoMixtureLaw{a, b}, seed}; }
}  // namespace

TEST(Generate, Constant) {
  const auto w = generate({ConstantLaw{1.0}, 0}, LatticeBox::centered(2, 3));
  w.for_each_bond([](const Bond&, double v) { EXPECT_EQ(v, 1.0); });
}

TEST(Generate, RejectsInvalidLaws) {
  const auto box = LatticeBox::centered(2, 1);
  EXPECT_THROW(generate({ConstantLaw{0.0}, 0}, box), ConfigError);
  EXPECT_THROW(generate(pareto(1, 1.0, 1.0), box), ConfigError);
  EXPECT_THROW(generate(pareto(1, 2.0, 0.0), box), ConfigError);
}

TEST(Generate, DeterministicAndIndependentOfBox) {
  const auto a = generate(pareto(99), LatticeBox::centered(2, 10));
  const auto b = generate(pareto(99), LatticeBox::centered(2, 10));
  EXPECT_TRUE(a == b);
  const auto big = generate(pareto(99), LatticeBox({3, -2}, 20));
  a.for_each_bond([&](const Bond& e, double v) { EXPECT_EQ(big.at(e), v); });
  const auto other = generate(pareto(100), LatticeBox::centered(2, 10));
  EXPECT_FALSE(a == other);
}

TEST(Generate, HeavyUpperTailMoment) {
  // Upper branch ω = U^{-1/a}: E ω^4 = a/(a − 4) = 2 for a = 8.
  const ParetoMixtureLaw law{8, 8};
  CounterStream rng(2024, 0);
  const int n = 1000000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = std::pow(pareto_mixture_value(law, 0.0, rng.uniform()), 4);
    s += v;
    s2 += v * v;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  EXPECT_NEAR(mean, 2.0, 4 * se);
}

TEST(Generate, ErgodicNormMatchesAnalyticMoment) {
  const double a = 8, b = 8, p = 2;
  const double expect = 0.5 * a / (a - p) + 0.5 * b / (b + p);
  const auto w = generate(pareto(7), LatticeBox::centered(2, 64));
  double s = 0.0, s2 = 0.0;
  std::size_t n = 0;
  w.for_each_bond([&](const Bond&, double v) {
    s += std::pow(v, p);
    s2 += std::pow(v, 2 * p);
    ++n;
  });
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  const double measured = std::pow(conductance_norm(w, w.box(), p, true), p);
  EXPECT_NEAR(measured, mean, 1e-12 * mean);
  EXPECT_NEAR(measured, expect, 4 * se);
}

TEST(Trap, Values) {
  const auto box = LatticeBox::centered(2, 3);
  const auto w = trap_environment(4, 1.0, 2, box);
  for (int a = 0; a < 2; ++a) {
    EXPECT_EQ(w.at(Bond{origin(2), a}), 0.0625);
    EXPECT_EQ(w.at(Bond{-unit_vector(2, a), a}), 0.0625);
  }
  EXPECT_EQ(w.at(Bond{Point{1, 0}, 0}), 1.0);
  EXPECT_EQ(w.mu(origin(2)), 0.25);
  trap_environment(1, 1.0, 2, box).for_each_bond([](const Bond&, double v) { EXPECT_EQ(v, 1.0); });
  EXPECT_EQ(trap_environment(2, 1.0, 3, LatticeBox::centered(3, 1)).at(Bond{origin(3), 2}), 0.125);
  EXPECT_THROW(trap_environment(2, 1.0, 2, LatticeBox({1, 0}, 1)), ConfigError);
  EXPECT_THROW(trap_environment(2, 1.0, 2, LatticeBox({5, 0}, 1)), ConfigError);
}

TEST(Shift, IdentityGroupLawAndTrap) {
  const auto w = generate(pareto(3), LatticeBox::centered(2, 6));
  const auto s0 = shift(w, origin(2));
  EXPECT_TRUE(s0 == w);
  const Point x{1, -2}, y{-3, 1};
  const auto sxy = shift(shift(w, x), y);
  const auto direct = shift(w, x + y);
  EXPECT_TRUE(sxy == direct);
  sxy.for_each_bond([&](const Bond& e, double v) { EXPECT_EQ(v, w.at(Bond{e.lower + x + y, e.axis})); });

  const auto trap = trap_environment(4, 1.0, 2, LatticeBox::centered(2, 3));
  const auto moved = shift(trap, unit_vector(2, 0));
  const Point m = -unit_vector(2, 0);
  moved.for_each_bond([&](const Bond& e, double v) {
    const bool incident = e.lower == m || e.upper() == m;
    EXPECT_EQ(v, incident ? 0.0625 : 1.0);
  });
  EXPECT_THROW(shift(trap, Point{1, 0}, LatticeBox::centered(2, 3)), DomainError);
  EXPECT_NO_THROW(shift(trap, Point{1, 0}, LatticeBox::centered(2, 2)));
}

TEST(EnvFile, RoundTrip) {
  const auto w = generate(pareto(5, 3, 0.5), LatticeBox({2, -1, 4}, 3));
  std::stringstream ss;
  save(w, ss);
  const auto back = load(ss);
  EXPECT_TRUE(back == w);
}

TEST(EnvFile, HeaderAndLineFormat) {
  const auto w = ConductanceField(LatticeBox({1, 2}, 1), 0.5);
  std::stringstream ss;
  save(w, ss);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "rcm-env v1 d=2 center=1,2 n=1");
  std::getline(ss, line);
  EXPECT_EQ(line, "0 1 1 5.0000000000000000e-01");
  std::getline(ss, line);
  EXPECT_EQ(line, "0 1 2 5.0000000000000000e-01");
}

TEST(EnvFile, Errors) {
  auto expect_error = [](const std::string& text, const std::string& needle) {
    std::stringstream ss(text);
    try {
      load(ss, "f");
      ADD_FAILURE() << "no error for: " << text;
    } catch (const FormatError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_error("rcm-env v2 d=1 center=0 n=1\n-1 1 1.0\n0 1 1.0\n", "f:1");
  expect_error("rcm-env v1 d=1 center=0 n=1\n-1 1 1.0\n0 1 0.0\n", "f:3");
  expect_error("rcm-env v1 d=1 center=0 n=1\n-1 1 1.0\n", "f:3");
  expect_error("rcm-env v1 d=1 center=0 n=1\n-1 1 1.0\n0 1 abc\n", "f:3");
  expect_error("rcm-env v1 d=1 center=0 n=1\n0 1 1.0\n-1 1 1.0\n", "f:2");
  expect_error("rcm-env v1 d=2 center=0 n=1\n", "f:1");
}

TEST(EnvFile, FileLawRestrictsToBox) {
  const auto path = (std::filesystem::temp_directory_path() / "rcm_env_test.txt").string();
  const auto w = generate(pareto(8), LatticeBox::centered(2, 4));
  save(w, path);
  const auto sub = generate({FileLaw{path}, 0}, LatticeBox::centered(2, 2));
  sub.for_each_bond([&](const Bond& e, double v) { EXPECT_EQ(v, w.at(e)); });
  EXPECT_THROW(generate({FileLaw{path}, 0}, LatticeBox::centered(2, 5)), ConfigError);
  std::filesystem::remove(path);
}
