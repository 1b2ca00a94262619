// Copyright 2026 the cocycle-lab developers.
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <utility>
#include <vector>

#include "cocyclelab/errors.hpp"

namespace cocyclelab {

// 50 significant digits behind the Gauss iteration; double precision
// elsewhere.  The Gauss map loses roughly log10(q_n^2) digits at depth n.
using HighPrec = boost::multiprecision::cpp_bin_float_50;
using BigInt = boost::multiprecision::cpp_int;

inline HighPrec golden_ratio() {
  return (sqrt(HighPrec(5)) - 1) / 2;
}

inline HighPrec frac(const HighPrec& x) {
  HighPrec f = x - floor(x);
  if (f < 0) f += 1;
  return f;
}

/// Distance from x to the nearest integer; range [0, 1/2].
inline HighPrec dist_z(const HighPrec& x) {
  HighPrec f = frac(x);
  return f <= HighPrec(0.5) ? f : 1 - f;
}

inline double dist_z(double x) {
  double f = x - std::floor(x);
  return f <= 0.5 ? f : 1.0 - f;
}

struct ContinuedFraction {
  double alpha = 0.0;
  std::vector<BigInt> partial_quotients;            // a_1 .. a_d
  std::vector<std::pair<BigInt, BigInt>> convergents;  // (p_n, q_n), n = 0 .. d
  bool depth_truncated = false;  // informational: iteration stopped early
};

/// Partial quotients by repeated Gauss map, convergents by the standard
/// recurrence from (p_0, q_0) = (0, 1).  Iteration stops early when the
/// remainder falls below 1e-14 (rational within working precision).
inline ContinuedFraction continued_fraction(const HighPrec& alpha, int depth) {
  if (!(alpha > 0 && alpha < 1)) {
    throw PreconditionViolation("continued_fraction: alpha must lie in (0,1)");
  }
  ContinuedFraction cf;
  cf.alpha = static_cast<double>(alpha);
  cf.convergents.emplace_back(BigInt(0), BigInt(1));
  BigInt p_prev = 1, q_prev = 0;  // (p_{-1}, q_{-1})
  HighPrec x = alpha;
  for (int n = 0; n < depth; ++n) {
    HighPrec inv = 1 / x;
    BigInt a(static_cast<BigInt>(floor(inv)));
    if (a < 1) a = 1;  // guard against roundoff at the floor boundary
    cf.partial_quotients.push_back(a);
    const auto& [p1, q1] = cf.convergents.back();
    BigInt p = a * p1 + p_prev;
    BigInt q = a * q1 + q_prev;
    p_prev = p1;
    q_prev = q1;
    cf.convergents.emplace_back(p, q);
    x = inv - HighPrec(a);
    if (x < HighPrec(1e-14)) {
      cf.depth_truncated = true;
      break;
    }
  }
  return cf;
}

enum class DiophCondition { DC, DC_TILDE };

struct DiophantineReport {
  DiophCondition condition = DiophCondition::DC;
  double gamma = 0.0;
  double tau = 0.0;
  int depth_K = 0;
  double min_margin = 0.0;
  long worst_k = 0;
  bool satisfied = false;
};

namespace detail {

template <typename Target>
inline DiophantineReport check_margins(const HighPrec& alpha, double gamma,
                                       double tau, int K, DiophCondition cond,
                                       Target target) {
  if (!(gamma > 0)) throw PreconditionViolation("gamma must be positive");
  if (!(tau >= 1)) throw PreconditionViolation("tau must be >= 1");
  if (K < 1) throw PreconditionViolation("K must be positive");
  DiophantineReport rep;
  rep.condition = cond;
  rep.gamma = gamma;
  rep.tau = tau;
  rep.depth_K = K;
  HighPrec best;
  long best_k = 0;
  for (long k = 1; k <= K; ++k) {  // |k alpha ± c|_Z is even in k
    HighPrec m = dist_z(target(k, alpha)) -
                 (1 / HighPrec(gamma)) / pow(HighPrec(k), HighPrec(tau));
    if (best_k == 0 || m < best) {
      best = m;
      best_k = k;
    }
  }
  rep.min_margin = static_cast<double>(best);
  rep.worst_k = best_k;
  rep.satisfied = rep.min_margin >= 0.0;
  return rep;
}

}  // namespace detail

/// DC(gamma, tau) certificate over 1 <= |k| <= K: margins
/// |k alpha|_Z - gamma^{-1} / |k|^tau.  Finite-depth certificate only.
inline DiophantineReport check_dc(const HighPrec& alpha, double gamma, double tau,
                                  int K) {
  return detail::check_margins(alpha, gamma, tau, K, DiophCondition::DC,
                               [](long k, const HighPrec& a) { return k * a; });
}

/// The D-tilde variant: margins |k alpha - 1/2|_Z - gamma^{-1} / |k|^tau.
inline DiophantineReport check_dc_tilde(const HighPrec& alpha, double gamma,
                                        double tau, int K) {
  return detail::check_margins(
      alpha, gamma, tau, K, DiophCondition::DC_TILDE,
      [](long k, const HighPrec& a) { return k * a - HighPrec(0.5); });
}

/// Finite-depth surrogate for the recurrence condition: evaluates
/// check_dc_tilde along Gauss iterates G^n(alpha), n = 0 .. gauss_depth.
/// "Infinitely many n" degrades to a hit count over this window.
///
/// Throws PrecisionExhausted when the accumulated error amplification
/// (about q_n^2 relative to the 50-digit input) eats half the working digits.
inline std::vector<std::pair<int, DiophantineReport>> check_rdc_tilde_finite(
    const HighPrec& alpha, double gamma, double tau, int gauss_depth, int K) {
  if (gauss_depth < 1) throw PreconditionViolation("gauss_depth must be positive");
  std::vector<std::pair<int, DiophantineReport>> out;
  HighPrec x = alpha;
  BigInt q_prev = 0, q = 1;  // convergent denominators of the orbit so far
  const BigInt q_limit = BigInt(1) << 42;  // q^2 > 1e25 ~ half of 50 digits
  for (int n = 0; n <= gauss_depth; ++n) {
    out.emplace_back(n, check_dc_tilde(x, gamma, tau, K));
    if (n == gauss_depth) break;
    if (q > q_limit) {
      throw PrecisionExhausted(
          "check_rdc_tilde_finite: Gauss iteration at depth " + std::to_string(n) +
          " has lost more than half the working digits");
    }
    HighPrec inv = 1 / x;
    BigInt a(static_cast<BigInt>(floor(inv)));
    if (a < 1) a = 1;
    BigInt qn = a * q + q_prev;
    q_prev = q;
    q = qn;
    x = inv - HighPrec(a);
    if (x <= 0) {
      throw PrecisionExhausted(
          "check_rdc_tilde_finite: rational remainder at depth " + std::to_string(n));
    }
  }
  return out;
}

/// Falsification probe for the doubling lemma: given alpha in
/// DC~(gamma, tau) at depth K, report whether 2*alpha lies in
/// DC(gamma/2, tau) at the same depth.  The source claims this always holds;
/// counterexamples are findings, not errors.
inline bool doubling_lemma_check(const HighPrec& alpha, double gamma, double tau,
                                 int K) {
  DiophantineReport pre = check_dc_tilde(alpha, gamma, tau, K);
  if (!pre.satisfied) {
    throw PreconditionViolation(
        "doubling_lemma_check: alpha does not satisfy the DC~ precondition");
  }
  return check_dc(frac(2 * alpha), gamma / 2.0, tau, K).satisfied;
}

}  // namespace cocyclelab
