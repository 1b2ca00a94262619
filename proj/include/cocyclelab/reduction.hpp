// Copyright 2026 the cocycle-lab developers.
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "cocyclelab/arithmetic.hpp"
#include "cocyclelab/cocycle.hpp"
#include "cocyclelab/errors.hpp"
#include "cocyclelab/fourier.hpp"

namespace cocyclelab {

struct ReductionStepReport {
  int step_index = 0;
  int truncation_N = 0;
  double input_size = 0.0;
  double output_size = 0.0;
  double min_denominator = 0.0;
  double conjugation_size = 0.0;
};

/// Default small-divisor guard derived from a DC~ report: 4 gamma^{-1} / N^tau.
inline double default_guard(double gamma, double tau, int truncation_n) {
  return 4.0 / (gamma * std::pow(static_cast<double>(truncation_n), tau));
}

/// Solves B_t(x + alpha) + B_t(x) = -U_t(x) coefficientwise:
/// b_k = -u_k / (e^{2 i pi k alpha} + 1).  The k = 0 mode divides by 2, so
/// the plus-sign equation has no obstruction.  REAL_VALUED symmetry is
/// preserved.
inline FourierMap solve_diagonal(const FourierMap& u_t, double alpha, double guard) {
  if (u_t.symmetry() == Symmetry::REAL_VALUED && !u_t.is_real_valued()) {
    throw SymmetryViolated("solve_diagonal: U_t tagged REAL_VALUED but is not");
  }
  FourierMap b(u_t.period(), u_t.symmetry());
  double min_den = 2.0;
  for (const auto& [k, u] : u_t.coeffs()) {
    double th = kTwoPi * static_cast<double>(k) * alpha;
    Complex den = Complex(std::cos(th), std::sin(th)) + Complex(1.0, 0.0);
    double mag = std::abs(den);
    if (mag < guard) {
      throw SmallDenominator(k, mag,
                             "solve_diagonal: |e^{2 i pi k alpha} + 1| = " +
                                 std::to_string(mag) + " below guard at k = " +
                                 std::to_string(k));
    }
    min_den = std::min(min_den, mag);
    b.set_coeff(k, -u / den);
  }
  (void)min_den;
  return b;
}

/// Solves the twisted equation e^{-2 i pi x} B_z(x + alpha) - conj(B_z(x))
/// = -U_z(x).  Mode m >= 0 couples X = b_{m+1} with Y = conj(b_{-m}):
///   X e^{2 i pi (m+1) alpha} - Y = -u_m
///   Y e^{2 i pi m alpha}     - X = -conj(u_{-m-1})
/// with determinant e^{2 i pi (2m+1) alpha} - 1.
inline FourierMap solve_offdiagonal(const FourierMap& u_z, double alpha,
                                    double guard) {
  FourierMap b(u_z.period());
  long mmax = u_z.support();
  for (long m = 0; m <= mmax; ++m) {
    Complex um = u_z.coeff(m);
    Complex umm = u_z.coeff(-m - 1);
    double th = kTwoPi * static_cast<double>(2 * m + 1) * alpha;
    Complex det = Complex(std::cos(th), std::sin(th)) - Complex(1.0, 0.0);
    double mag = std::abs(det);
    if (mag < guard) {
      throw SmallDenominator(m, mag,
                             "solve_offdiagonal: |e^{2 i pi (2m+1) alpha} - 1| = " +
                                 std::to_string(mag) + " below guard at m = " +
                                 std::to_string(m));
    }
    Complex e1 = std::polar(1.0, kTwoPi * static_cast<double>(m + 1) * alpha);
    Complex e2 = std::polar(1.0, kTwoPi * static_cast<double>(m) * alpha);
    // [[e1, -1], [-1, e2]] [X, Y]^T = [-u_m, -conj(u_{-m-1})]^T
    Complex rx = -um, ry = -std::conj(umm);
    Complex xv = (e2 * rx + ry) / det;
    Complex yv = (rx + e1 * ry) / det;
    if (xv != Complex(0.0, 0.0)) b.set_coeff(m + 1, xv);
    if (yv != Complex(0.0, 0.0)) b.set_coeff(-m, std::conj(yv));
  }
  return b;
}

namespace detail {

/// Linearized off-diagonal equation in the model chart
/// (alpha, A E_{1/2}(. + alpha/2) exp U), re-derived:
///   e^{-2 i pi (x + alpha/2)} conj(B_z(x + alpha)) - B_z(x) = -U_z(x).
/// Mode m >= 0 couples P = b_m with Q = conj(b_{-m-1}); the determinant is
/// again e^{2 i pi (2m+1) alpha} - 1 up to a unimodular factor.
inline FourierMap solve_offdiagonal_chart(const FourierMap& u_z, double alpha,
                                          double guard, double* min_den = nullptr) {
  FourierMap b(u_z.period());
  long mmax = u_z.support();
  Complex ph = std::polar(1.0, -std::numbers::pi * alpha);
  if (min_den) *min_den = 2.0;
  for (long m = 0; m <= mmax; ++m) {
    Complex um = u_z.coeff(m);
    Complex umm = u_z.coeff(-m - 1);
    // eq1 (mode m):              Q e^{2 i pi (m+1) a} ph - P = -u_m
    // eq2 (mode -m-1, conjugated): P e^{2 i pi m a} conj(ph) - Q = -conj(u_{-m-1})
    Complex a12 = std::polar(1.0, kTwoPi * static_cast<double>(m + 1) * alpha) * ph;
    Complex a21 = std::polar(1.0, kTwoPi * static_cast<double>(m) * alpha) * std::conj(ph);
    Complex det = Complex(1.0, 0.0) - a12 * a21;  // 1 - e^{2 i pi (2m+1) a}
    double mag = std::abs(det);
    if (mag < guard) {
      throw SmallDenominator(m, mag,
                             "model chart: off-diagonal determinant " +
                                 std::to_string(mag) + " below guard at m = " +
                                 std::to_string(m));
    }
    if (min_den) *min_den = std::min(*min_den, mag);
    Complex r1 = -um, r2 = -std::conj(umm);
    // [[-1, a12], [a21, -1]] [P, Q]^T = [r1, r2]^T
    Complex pv = (-r1 - a12 * r2) / det;
    Complex qv = (-a21 * r1 - r2) / det;
    if (pv != Complex(0.0, 0.0)) b.set_coeff(m, pv);
    if (qv != Complex(0.0, 0.0)) b.set_coeff(-m - 1, std::conj(qv));
  }
  return b;
}

inline long next_pow2(long n) {
  long p = 1;
  while (p < n) p <<= 1;
  return p;
}

inline double su2_pair_sup(const FourierMap& t, const FourierMap& z, int grid) {
  double m = 0.0;
  for (int i = 0; i < grid; ++i) {
    double x = static_cast<double>(i) / grid;
    Su2Vector v{synthesize(t, x).real(), synthesize(z, x)};
    m = std::max(m, v.norm());
  }
  return m;
}

}  // namespace detail

struct LocalStepResult {
  FourierMap b_t;  // REAL_VALUED diagonal conjugation component
  FourierMap b_z;  // off-diagonal conjugation component
  Cocycle next;    // the conjugated cocycle, back in the model chart
  ReductionStepReport report;
};

/// One step of the local scheme: truncate U at |k| <= N, solve both
/// linearized equations, conjugate by exp(B), and re-extract (U_t', U_z')
/// in the same chart.  The measured contraction is quadratic up to the
/// truncation tail.
inline LocalStepResult local_reduction_step(const Cocycle& c, int truncation_n,
                                            double guard) {
  if (c.form() != Cocycle::Form::model_chart) {
    throw PreconditionViolation("local_reduction_step: input must be in the model chart");
  }
  const double alpha = c.freq();
  const FourierMap& u_t = c.chart_u_t();
  const FourierMap& u_z = c.chart_u_z();
  const int probe = 4 * static_cast<int>(detail::next_pow2(
                        std::max<long>(64, u_t.support() + u_z.support() + 2)));
  const double input_size = detail::su2_pair_sup(u_t, u_z, probe);
  if (input_size > kEpsilon0 * (1.0 + 1e-9)) {
    throw PreconditionViolation("local_reduction_step: ||U|| = " +
                                std::to_string(input_size) +
                                " above the smallness threshold");
  }

  FourierMap ut_n = u_t.truncated(truncation_n);
  FourierMap uz_n = u_z.truncated(truncation_n);

  // cancellation sign: the derived diagonal equation is
  // B_t(x+a) + B_t(x) = +U_t(x), so the paper-form solver receives -U_t
  FourierMap minus_ut = ut_n * Complex(-1.0, 0.0);
  minus_ut.set_symmetry(Symmetry::REAL_VALUED);
  FourierMap b_t = solve_diagonal(minus_ut, alpha, guard);
  double min_den_diag = 2.0;
  for (const auto& [k, v] : ut_n.coeffs()) {
    double th = kTwoPi * static_cast<double>(k) * alpha;
    min_den_diag = std::min(min_den_diag, std::abs(Complex(std::cos(th), std::sin(th)) +
                                                   Complex(1.0, 0.0)));
  }
  double min_den_off = 2.0;
  FourierMap b_z = detail::solve_offdiagonal_chart(uz_n, alpha, guard, &min_den_off);

  // conjugate on an oversampled grid and re-extract the chart data
  long supports = b_t.support() + b_z.support() + u_t.support() + u_z.support() + 2;
  int m = static_cast<int>(detail::next_pow2(std::max<long>(256, 4 * supports)));
  std::vector<Complex> t_samp(m), z_samp(m);
  double conj_size = 0.0;
  GroupElement a_const = element_a();
  for (int i = 0; i < m; ++i) {
    double x = static_cast<double>(i) / m;
    Su2Vector bx{synthesize(b_t, x).real(), synthesize(b_z, x)};
    Su2Vector bxa{synthesize(b_t, x + alpha).real(), synthesize(b_z, x + alpha)};
    conj_size = std::max(conj_size, bx.norm());
    GroupElement g = su2_exp(bxa) * c(x) * su2_exp(bx).inverse();
    // U'(x) = log(E(-x - a/2) A^{-1} g); reject outside the quarter-turn chart
    GroupElement chart = e_r(0.5, x + alpha / 2.0).inverse() * (a_const.inverse() * g);
    Su2Vector u;
    try {
      u = su2_log(chart, std::numbers::pi / 2.0);
    } catch (const ChartEscape&) {
      throw ChartEscape("local_reduction_step: conjugated cocycle left the model chart at x = " +
                        std::to_string(x));
    }
    t_samp[i] = Complex(u.t, 0.0);
    z_samp[i] = u.z;
  }
  FourierMap ut_next = detail::analyze_pruned(t_samp, 1, 1e-12, Symmetry::REAL_VALUED);
  FourierMap uz_next = detail::analyze_pruned(z_samp, 1, 1e-12);

  LocalStepResult res;
  res.b_t = b_t;
  res.b_t.set_symmetry(Symmetry::REAL_VALUED);
  res.b_z = b_z;
  res.report.truncation_N = truncation_n;
  res.report.input_size = input_size;
  res.report.output_size = detail::su2_pair_sup(ut_next, uz_next, probe);
  res.report.min_denominator = std::min(min_den_diag, min_den_off);
  res.report.conjugation_size = conj_size;
  res.next = Cocycle::model_chart(alpha, ut_next, uz_next, c.label());
  return res;
}

struct KamResult {
  NormalFormParams normal_form;
  std::vector<ReductionStepReport> reports;
  bool converged = false;
  std::vector<std::pair<FourierMap, FourierMap>> conjugations;  // (B_t, B_z) per step
};

/// Iterates local_reduction_step over the truncation schedule until the
/// chart perturbation falls below tol; the surviving off-diagonal zero mode
/// (rotated into the unshifted chart) is returned as z_n.
///
/// Preconditions: alpha passes check_dc_tilde(gamma, tau) at depth
/// max(schedule) and the initial perturbation is below the smallness
/// threshold.  Throws Stalled when the size fails to decay for three
/// consecutive steps.
inline KamResult kam_reduce(const Cocycle& c, const std::vector<int>& schedule,
                            double tol, double gamma = 10.0, double tau = 2.0) {
  if (schedule.empty()) throw PreconditionViolation("kam_reduce: empty schedule");
  int kmax = *std::max_element(schedule.begin(), schedule.end());
  DiophantineReport gate = check_dc_tilde(HighPrec(c.freq()), gamma, tau, kmax);
  if (!gate.satisfied) {
    throw PreconditionViolation(
        "kam_reduce: alpha fails DC~(gamma=" + std::to_string(gamma) +
        ", tau=" + std::to_string(tau) + ") at depth " + std::to_string(kmax));
  }
  KamResult out;
  Cocycle cur = c;
  int stall = 0;
  for (std::size_t s = 0; s < schedule.size(); ++s) {
    double guard = default_guard(gamma, tau, schedule[s]);
    LocalStepResult step = local_reduction_step(cur, schedule[s], guard);
    step.report.step_index = static_cast<int>(s + 1);
    out.reports.push_back(step.report);
    out.conjugations.emplace_back(step.b_t, step.b_z);
    if (step.report.output_size >= step.report.input_size) {
      if (++stall >= 3) {
        throw Stalled("kam_reduce: no decay for three consecutive steps");
      }
    } else {
      stall = 0;
    }
    cur = step.next;
    if (step.report.output_size < tol) {
      out.converged = true;
      break;
    }
  }
  if (!out.reports.empty() && !out.converged &&
      out.reports.back().output_size < tol) {
    out.converged = true;
  }
  // z_n: off-diagonal zero mode, rotated from the shifted chart
  // A E(. + a/2) e^U into the eq-(5) chart A E(.) e^{U~} by the constant
  // conjugation E_{1/2}(alpha/4); modes beyond the window are below tol.
  Complex z0 = cur.chart_u_z().coeff(0);
  Complex rot = std::polar(1.0, -std::numbers::pi * c.freq() / 2.0);
  out.normal_form.alpha_n = c.freq();
  out.normal_form.z_n = rot * z0;
  return out;
}

// ----------------------------------------------------------------------------
// Second iterate of the normal form: reduction near the diagonal constant
// -E_{1/2}(-alpha) = E_{1/2}(1 - alpha) at frequency 2 alpha.  The diagonal
// equation has divisors e^{2 i pi k (2 alpha)} - 1 (k = 0 is the
// obstruction), the off-diagonal one e^{2 i pi (2k+1) alpha} - 1.
// ----------------------------------------------------------------------------

struct SecondIterateStep {
  FourierMap residual_t;  // chart residual after the step, diagonal part
  FourierMap residual_z;  // off-diagonal part
  double residual_size = 0.0;
  bool size_bound_check = false;
};

namespace detail {

struct DiagChartState {
  GroupElement constant;  // current diagonal constant
  double theta;           // constant = E_{1/2}(theta) modulo the tracked drift
};

struct DiagChartData {
  FourierMap w_t;
  FourierMap w_z;
  double sup = 0.0;  // raw grid sup of |W|, independent of the noise pruning
};

/// Chart data of gen relative to the diagonal constant.
inline DiagChartData diag_chart_extract(const std::function<GroupElement(double)>& gen,
                                        const GroupElement& constant, int m) {
  std::vector<Complex> ts(m), zs(m);
  double sup = 0.0;
  for (int i = 0; i < m; ++i) {
    double x = static_cast<double>(i) / m;
    Su2Vector w = su2_log(constant.inverse() * gen(x), std::numbers::pi / 2.0);
    ts[i] = Complex(w.t, 0.0);
    zs[i] = w.z;
    sup = std::max(sup, w.norm());
  }
  DiagChartData out;
  out.w_t = detail::analyze_pruned(ts, 1, 1e-12, Symmetry::REAL_VALUED);
  out.w_z = detail::analyze_pruned(zs, 1, 1e-12);
  out.sup = sup;
  return out;
}

}  // namespace detail

/// One explicit reduction step applied to the exact second iterate of the
/// normal form at frequency 2 alpha_n: solves only the closed-form linear
/// off-diagonal term (modes {-1, 0}), leaving a residual of size O(|z_n|^2)
/// with Fourier spectrum in [-2, 2].
inline SecondIterateStep reduce_second_iterate_once(const NormalFormParams& nf,
                                                    double guard = 1e-9,
                                                    int grid = 512) {
  if (std::abs(nf.z_n) > 0.1) {
    throw PreconditionViolation("reduce_second_iterate_once: |z_n| <= 0.1 required");
  }
  const double alpha = nf.alpha_n;
  const double beta = 2.0 * alpha;
  const double theta = 1.0 - alpha;
  const GroupElement c0 = e_r(0.5, theta);
  Cocycle d = second_iterate_exact_form(nf);

  // linear exponent {0, e^{-2 i pi x} conj z + z}: modes -1 -> conj z, 0 -> z
  FourierMap v_z(1);
  for (long k : {-1L, 0L}) {
    Complex w = k == -1 ? std::conj(nf.z_n) : nf.z_n;
    if (w == Complex(0.0, 0.0)) continue;
    double th = kTwoPi * (static_cast<double>(k) * beta - theta);
    Complex den = Complex(std::cos(th), std::sin(th)) - Complex(1.0, 0.0);
    if (std::abs(den) < guard) {
      throw SmallDenominator(k, std::abs(den),
                             "reduce_second_iterate_once: divisor below guard");
    }
    v_z.set_coeff(k, -w / den);
  }
  auto conj_gen = [&](double x) {
    Su2Vector vx{0.0, synthesize(v_z, x)};
    Su2Vector vxb{0.0, synthesize(v_z, x + beta)};
    return su2_exp(vxb) * d(x) * su2_exp(vx).inverse();
  };
  detail::DiagChartData chart = detail::diag_chart_extract(conj_gen, c0, grid);
  const FourierMap& wt = chart.w_t;
  const FourierMap& wz = chart.w_z;
  SecondIterateStep out;
  out.residual_t = wt;
  out.residual_z = wz;
  out.residual_size = chart.sup;
  double total = 0.0, outside = 0.0;
  for (const auto& [k, v] : wt.coeffs()) {
    total += std::norm(v);
    if (std::labs(k) > 2) outside += std::norm(v);
  }
  for (const auto& [k, v] : wz.coeffs()) {
    total += std::norm(v);
    if (std::labs(k) > 2) outside += std::norm(v);
  }
  double z2 = std::norm(nf.z_n);
  bool support_ok = total == 0.0 || outside <= 1e-3 * total;
  bool size_ok = out.residual_size <= 3.0 * z2;  // measured constant is ~1.0
  out.size_bound_check = support_ok && size_ok;
  return out;
}

struct SecondIterateConjugation {
  PeriodicMap d_m;                  // accumulated 1-periodic conjugation
  std::vector<double> step_sizes;   // chart size after each step
  GroupElement final_constant;      // straightened constant A_m
  std::function<GroupElement(double)> reduced_gen;  // A_m exp(U_m(.))
};

/// Accumulated conjugation D_m from m full reduction steps on the second
/// iterate (2 alpha, A_2(.)) of the normal form, near the diagonal constant.
/// Each step solves every available mode and absorbs the k = 0 diagonal
/// obstruction into the constant.  Used as the almost-reducibility leg of
/// the renormalization pipeline.
inline SecondIterateConjugation second_iterate_conjugations(
    const NormalFormParams& nf, int steps, double guard = 1e-9, int grid = 512) {
  const double beta = 2.0 * nf.alpha_n;
  double theta = 1.0 - nf.alpha_n;
  GroupElement constant = e_r(0.5, theta);
  Cocycle d = second_iterate_exact_form(nf);
  std::function<GroupElement(double)> gen = [d](double x) { return d(x); };
  std::function<GroupElement(double)> acc = [](double) {
    return GroupElement::identity();
  };
  SecondIterateConjugation out;
  for (int s = 0; s < steps; ++s) {
    detail::DiagChartData chart = detail::diag_chart_extract(gen, constant, grid);
    const FourierMap& wt = chart.w_t;
    const FourierMap& wz = chart.w_z;
    FourierMap v_t(1, Symmetry::REAL_VALUED), v_z(1);
    for (const auto& [k, w] : wt.coeffs()) {
      if (k == 0) continue;  // obstruction: absorbed into the constant below
      double th = kTwoPi * static_cast<double>(k) * beta;
      Complex den = Complex(std::cos(th), std::sin(th)) - Complex(1.0, 0.0);
      if (std::abs(den) < guard) {
        throw SmallDenominator(k, std::abs(den),
                               "second_iterate_conjugations: diagonal divisor below guard");
      }
      v_t.set_coeff(k, -w / den);
    }
    for (const auto& [k, w] : wz.coeffs()) {
      double th = kTwoPi * (static_cast<double>(k) * beta - theta);
      Complex den = Complex(std::cos(th), std::sin(th)) - Complex(1.0, 0.0);
      if (std::abs(den) < guard) {
        throw SmallDenominator(k, std::abs(den),
                               "second_iterate_conjugations: off-diagonal divisor below guard");
      }
      v_z.set_coeff(k, -w / den);
    }
    double t0 = wt.coeff(0).real();
    constant = constant * su2_exp({t0, Complex(0.0, 0.0)});
    theta += t0 / std::numbers::pi;
    auto prev_gen = gen;
    gen = [prev_gen, v_t, v_z, beta](double x) {
      Su2Vector vx{synthesize(v_t, x).real(), synthesize(v_z, x)};
      Su2Vector vxb{synthesize(v_t, x + beta).real(), synthesize(v_z, x + beta)};
      return su2_exp(vxb) * prev_gen(x) * su2_exp(vx).inverse();
    };
    auto prev_acc = acc;
    acc = [prev_acc, v_t, v_z](double x) {
      Su2Vector vx{synthesize(v_t, x).real(), synthesize(v_z, x)};
      return su2_exp(vx) * prev_acc(x);
    };
    out.step_sizes.push_back(detail::diag_chart_extract(gen, constant, grid).sup);
  }
  out.d_m = {1, acc};
  out.final_constant = constant;
  out.reduced_gen = gen;
  return out;
}

// ----------------------------------------------------------------------------
// Obstruction normalization (dimension-drop correction)
// ----------------------------------------------------------------------------

struct ObstructionPair {
  Complex z0{0.0, 0.0};
  Complex z1{0.0, 0.0};
};

/// Conjugation by diag(e^{-2 i pi theta / 2}, e^{2 i pi theta / 2}) with
/// theta = arg(z0) / (2 pi) maps (z0, z1) to (|z0|, e^{-i arg z0} z1): the
/// leading coefficient becomes real positive and the real dimension of the
/// orbit data drops from 4 to 3.
inline ObstructionPair normalize_obstruction(const ObstructionPair& p) {
  if (p.z0 == Complex(0.0, 0.0)) {
    throw ZeroLeadingCoefficient("normalize_obstruction: z0 = 0 has no phase");
  }
  Complex phase = std::polar(1.0, -std::arg(p.z0));
  return {std::abs(p.z0), phase * p.z1};
}

}  // namespace cocyclelab
