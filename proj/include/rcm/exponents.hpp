#pragma once

// Scalar formulas: the exponent family attached to (d,p,q), the constants
// 𝒞 and Λ_{p,q}, the regularized logarithm g, the weak Harnack constants and
// the Gaussian kernel k_t.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <span>
#include <string>

#include "rcm/error.hpp"

namespace rcm {

struct ExponentSet {
  int d = 2;
  double p = 0.0;
  double q = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double theta = 0.0;
  double nu = 0.0;
  double gamma = 0.0;
  double gamma_hat = 0.0;
  double eps = 0.0;
  double Q = 0.0;
  double ell = 0.0;
  double p_sphere = 0.0;

  /// Sobolev conjugate s* = ds/(d − s) in dimension dim (default d).
  double s_bulk(double s) const { return s_bulk(s, d); }
  static double s_bulk(double s, int dim) {
    if (!(s >= 1.0) || !(s < dim)) throw DomainError("Sobolev exponent must lie in [1, d)");
    return dim * s / (dim - s);
  }
};

/// Exponents for admissible (d,p,q): d ≥ 2, p ∈ (1,∞), q ∈ (d/2,∞) and
/// 1/p + 1/q < 2/(d−1), all strict.
inline ExponentSet derive_exponents(int d, double p, double q) {
  if (d < 2) throw ConfigError("exponents need d >= 2");
  if (!(p > 1.0) || !std::isfinite(p)) throw ConfigError("exponents need 1 < p < inf");
  if (!(q > d / 2.0) || !std::isfinite(q)) throw ConfigError("exponents need d/2 < q < inf");
  if (!(1.0 / p + 1.0 / q < 2.0 / (d - 1))) throw ConfigError("exponents need 1/p + 1/q < 2/(d-1)");

  ExponentSet e;
  e.d = d;
  e.p = p;
  e.q = q;
  e.delta1 = 2.0 / (d - 1) - 1.0 / p - 1.0 / q;
  e.delta2 = 2.0 / d - 1.0 / q;
  e.theta = d == 2 ? p : 1.0 + p * e.delta1;
  e.nu = 1.0 - e.delta2 * (1.0 - 1.0 / e.theta);
  e.gamma = 2.0 + 1.0 / p + 1.0 / (e.theta * q);
  e.gamma_hat = 2.0 + 1.0 / p + 1.0 / q;
  e.eps = e.delta2 / e.theta;
  e.Q = 2.0 / (1.0 - e.delta2);
  const double inv_nuQ = 1.0 / (e.nu * e.Q);
  e.ell = (1.0 / (2.0 * (1.0 + e.eps)) - inv_nuQ) / (0.5 - inv_nuQ);
  e.p_sphere = 1.0 / (1.0 / (d - 1) + (p - e.theta) / (2.0 * p));
  return e;
}

/// 𝒞 = max{1, τ^{1/2}(‖ω^{-1}‖_q (‖ω‖_p + τ^{-1})^{2−ν})^{1/(2(1−ν))}}.
inline double constant_C(double norm_p, double norm_q_inv, double tau, const ExponentSet& e) {
  if (!(tau > 0.0)) throw DomainError("constant_C needs tau > 0");
  const double inner = norm_q_inv * std::pow(norm_p + 1.0 / tau, 2.0 - e.nu);
  return std::max(1.0, std::sqrt(tau) * std::pow(inner, 1.0 / (2.0 * (1.0 - e.nu))));
}

/// Λ_{p,q} = ‖ω‖_p ‖ω^{-1}‖_q.
inline double lambda_pq(double norm_p, double norm_q_inv) { return norm_p * norm_q_inv; }

// ---------------------------------------------------------------- g

namespace detail {
inline double compute_cbar() {
  auto f = [](double c) { return 2.0 * c * std::log(1.0 / c) - (1.0 - c); };
  double lo = 0.25, hi = 1.0 / 3.0;
  for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}
}  // namespace detail

/// The root c̄ ∈ [¼,⅓] of 2c log(1/c) = 1 − c (unique there).
inline double cbar() {
  static const double c = detail::compute_cbar();
  return c;
}

/// Regularized (−log z)_+: C¹, convex, non-increasing.
inline double g_eval(double z) {
  if (!(z > 0.0)) throw DomainError("g is defined for z > 0");
  const double c = cbar();
  if (z <= c) return -std::log(z);
  if (z <= 1.0) return (z - 1.0) * (z - 1.0) / (2.0 * c * (1.0 - c));
  return 0.0;
}

inline double g_prime(double z) {
  if (!(z > 0.0)) throw DomainError("g is defined for z > 0");
  const double c = cbar();
  if (z <= c) return -1.0 / z;
  if (z <= 1.0) return (z - 1.0) / (c * (1.0 - c));
  return 0.0;
}

/// One-sided second derivative (from the right at the kinks).
inline double g_second(double z) {
  if (!(z > 0.0)) throw DomainError("g is defined for z > 0");
  const double c = cbar();
  if (z < c) return 1.0 / (z * z);
  if (z < 1.0) return 1.0 / (c * (1.0 - c));
  return 0.0;
}

// ---------------------------------------------------------------- Harnack

struct WeakHarnackConstants {
  double h = 0.0;
  double gamma = 0.0;
};

/// h = exp(−c(1 + ‖ω‖₁/((1−σ₂)²λ^d))) and
/// γ = ε·exp(−c(1 + ‖ω‖₁ + 𝒞^{2p/(p−1)}‖ω^{-1}‖_{d/2})); c = c_free is the
/// unspecified constant, supplied by the caller.
inline WeakHarnackConstants weak_harnack_constants(int d, double lambda, double sigma2, double norm1,
                                                   const ExponentSet& e, double C, double norm_qd2,
                                                   double c_free, double eps_level = 1.0) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("weak Harnack needs lambda in (0,1)");
  if (!(sigma2 > 0.0 && sigma2 < 1.0)) throw DomainError("weak Harnack needs sigma2 in (0,1)");
  if (norm1 < 0.0 || norm_qd2 < 0.0 || C < 0.0) throw DomainError("weak Harnack needs non-negative norms");
  if (!(c_free >= 1.0)) throw DomainError("weak Harnack needs c_free >= 1");
  WeakHarnackConstants out;
  out.h = std::exp(-c_free * (1.0 + norm1 / ((1.0 - sigma2) * (1.0 - sigma2) * std::pow(lambda, d))));
  out.gamma = eps_level * std::exp(-c_free * (1.0 + norm1 + std::pow(C, 2.0 * e.p / (e.p - 1.0)) * norm_qd2));
  return out;
}

/// Exponent of Λ_{p,q} in the elliptic weak Harnack constant for d ≥ 3.
inline double elliptic_harnack_power(const ExponentSet& e) {
  const double delta = 1.0 / (e.d - 1) - 1.0 / (2.0 * e.p) - 1.0 / (2.0 * e.q);
  const double pp = e.p / (e.p - 1.0);
  return 0.5 + (delta + 1.0) / delta * pp * (0.5 + 1.0 / e.q - 1.0 / e.d);
}

/// Elliptic weak Harnack lower bound: ε·exp(−c λ^{-1} Λ^{κ}) with Λ = Λ_{1,1}
/// and κ = ½ for d = 2, Λ = Λ_{p,q} and κ = elliptic_harnack_power for d ≥ 3.
inline double elliptic_harnack_gamma(const ExponentSet& e, double lambda, double Lambda, double c_free,
                                     double eps_level) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("elliptic Harnack needs lambda in (0,1)");
  const double kappa = e.d == 2 ? 0.5 : elliptic_harnack_power(e);
  return eps_level * std::exp(-c_free / lambda * std::pow(Lambda, kappa));
}

// ---------------------------------------------------------------- k_t

/// k_t(x) = ((2πt)^d det Σ²)^{-1/2} exp(−x·(Σ²)^{-1}x/(2t)).
inline double gaussian_kernel(double t, std::span<const double> x, const Eigen::MatrixXd& sigma2) {
  if (!(t > 0.0)) throw DomainError("gaussian kernel needs t > 0");
  const auto d = static_cast<Eigen::Index>(x.size());
  if (sigma2.rows() != d || sigma2.cols() != d) throw DomainError("covariance has wrong shape");
  const Eigen::LLT<Eigen::MatrixXd> llt(sigma2);
  if (llt.info() != Eigen::Success) throw DomainError("covariance is not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(L(i, i) > 1e-300)) throw DomainError("covariance is singular");
    logdet += 2.0 * std::log(L(i, i));
  }
  const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(x.data(), d);
  const double quad = llt.matrixL().solve(v).squaredNorm();
  return std::exp(-0.5 * (d * std::log(2.0 * std::numbers::pi * t) + logdet) - quad / (2.0 * t));
}

}  // namespace rcm
