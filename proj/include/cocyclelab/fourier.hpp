// Copyright 2026 the cocycle-lab developers.
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <vector>

#include "cocyclelab/algebra.hpp"
#include "cocyclelab/errors.hpp"

namespace cocyclelab {

enum class Symmetry { NONE, REAL_VALUED };

/// Finitely supported Fourier series on a circle of integer period p.
/// Frequency index k means the character e^{2 i pi k x / p}.  Coefficient
/// space is the source of truth; grids are derived views.
class FourierMap {
 public:
  FourierMap() = default;
  explicit FourierMap(int period, Symmetry sym = Symmetry::NONE)
      : period_(period), symmetry_(sym) {
    if (period < 1) throw PreconditionViolation("FourierMap: period must be positive");
  }

  int period() const { return period_; }
  Symmetry symmetry() const { return symmetry_; }
  void set_symmetry(Symmetry s) { symmetry_ = s; }

  Complex coeff(long k) const {
    auto it = coeffs_.find(k);
    return it == coeffs_.end() ? Complex(0.0, 0.0) : it->second;
  }

  void set_coeff(long k, Complex v) {
    if (v == Complex(0.0, 0.0)) {
      coeffs_.erase(k);
    } else {
      coeffs_[k] = v;
    }
  }

  const std::map<long, Complex>& coeffs() const { return coeffs_; }

  long support() const {
    long n = 0;
    for (const auto& [k, v] : coeffs_) n = std::max(n, std::labs(k));
    return n;
  }

  bool empty() const { return coeffs_.empty(); }

  /// Checks coeff(-k) == conj(coeff(k)) within tol.
  bool is_real_valued(double tol = 1e-12) const {
    for (const auto& [k, v] : coeffs_) {
      if (std::abs(coeff(-k) - std::conj(v)) > tol) return false;
    }
    return true;
  }

  FourierMap& prune(double eps = 1e-16) {
    for (auto it = coeffs_.begin(); it != coeffs_.end();) {
      if (std::abs(it->second) <= eps) {
        it = coeffs_.erase(it);
      } else {
        ++it;
      }
    }
    return *this;
  }

  FourierMap truncated(long n) const {
    FourierMap out(period_, symmetry_);
    for (const auto& [k, v] : coeffs_) {
      if (std::labs(k) <= n) out.coeffs_[k] = v;
    }
    return out;
  }

  FourierMap operator+(const FourierMap& o) const {
    if (o.period_ != period_) throw PeriodMismatch("FourierMap: period mismatch in +");
    FourierMap out = *this;
    for (const auto& [k, v] : o.coeffs_) out.set_coeff(k, out.coeff(k) + v);
    return out;
  }

  FourierMap operator*(Complex s) const {
    FourierMap out(period_, symmetry_);
    for (const auto& [k, v] : coeffs_) out.coeffs_[k] = v * s;
    return out;
  }

  /// Coefficient rotation implementing x -> x + s: coeff(k) *= e^{2 i pi k s / p}.
  FourierMap shifted(double s) const {
    FourierMap out(period_, symmetry_);
    for (const auto& [k, v] : coeffs_) {
      double th = kTwoPi * static_cast<double>(k) * s / period_;
      out.coeffs_[k] = v * Complex(std::cos(th), std::sin(th));
    }
    return out;
  }

  FourierMap conjugated() const {
    FourierMap out(period_, symmetry_);
    for (const auto& [k, v] : coeffs_) out.coeffs_[-k] = std::conj(v);
    return out;
  }

  /// Re-index to a multiple period: k -> k * (new_period / p), values equal on
  /// a common grid.
  FourierMap embedded(int new_period) const {
    if (new_period % period_ != 0) {
      throw PeriodMismatch("FourierMap: embedding target must be a multiple period");
    }
    long f = new_period / period_;
    FourierMap out(new_period, symmetry_);
    for (const auto& [k, v] : coeffs_) out.coeffs_[k * f] = v;
    return out;
  }

 private:
  int period_ = 1;
  Symmetry symmetry_ = Symmetry::NONE;
  std::map<long, Complex> coeffs_;
};

/// Exact finite sum sum_k coeff(k) e^{2 i pi k x / p}.
inline Complex synthesize(const FourierMap& f, double x) {
  Complex acc(0.0, 0.0);
  for (const auto& [k, v] : f.coeffs()) {
    double th = kTwoPi * static_cast<double>(k) * x / f.period();
    acc += v * Complex(std::cos(th), std::sin(th));
  }
  return acc;
}

namespace detail {

inline void fft_radix2(std::vector<Complex>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = kTwoPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    Complex wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      Complex w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        Complex u = a[i + j], v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

inline std::vector<Complex> dft_forward(const std::vector<Complex>& samples);

/// Internal analysis for chart extractions: coefficients below
/// rel_floor * max|c| are measurement noise and are dropped before they can
/// seed spurious solver modes.  The aliasing guard allows a noise floor of
/// the same size.
inline FourierMap analyze_pruned(const std::vector<Complex>& samples, int period,
                                 double rel_floor = 1e-12,
                                 Symmetry sym = Symmetry::NONE,
                                 double abs_floor = 1e-15) {
  const long m = static_cast<long>(samples.size());
  std::vector<Complex> c = dft_forward(samples);
  double cmax = 0.0;
  for (const auto& v : c) cmax = std::max(cmax, std::abs(v));
  const double floor = std::max(abs_floor, rel_floor * cmax);
  const long n = m / 2 - 1;
  double total = 0.0, tail = 0.0;
  FourierMap out(period, sym);
  for (long k = 0; k < m; ++k) {
    long kk = k <= m / 2 ? k : k - m;
    double e = std::norm(c[k]);
    total += e;
    if (std::labs(kk) > n) {
      tail += e;
    } else if (std::abs(c[k]) > floor) {
      out.set_coeff(kk, c[k]);
    }
  }
  if (total > 0.0 && tail > 1e-8 * total + static_cast<double>(m) * floor * floor) {
    throw AliasingDetected("analyze_pruned: tail energy above the noise floor");
  }
  return out;
}

inline std::vector<Complex> dft_forward(const std::vector<Complex>& samples) {
  const std::size_t m = samples.size();
  std::vector<Complex> out;
  if ((m & (m - 1)) == 0) {
    out = samples;
    fft_radix2(out, false);
  } else {
    out.assign(m, Complex(0.0, 0.0));
    for (std::size_t k = 0; k < m; ++k) {
      Complex acc(0.0, 0.0);
      for (std::size_t j = 0; j < m; ++j) {
        double th = -kTwoPi * static_cast<double>(j) * static_cast<double>(k) /
                    static_cast<double>(m);
        acc += samples[j] * Complex(std::cos(th), std::sin(th));
      }
      out[k] = acc;
    }
  }
  for (auto& v : out) v /= static_cast<double>(m);
  return out;
}

}  // namespace detail

/// Discrete Fourier transform of M samples on the uniform period-p grid,
/// re-indexed to [-N, N].  With target_n < 0 the support defaults to the
/// largest unaliased window.  Throws AliasingDetected when the energy above
/// index N exceeds 1e-8 of the total.
inline FourierMap analyze(const std::vector<Complex>& samples, int period = 1,
                          long target_n = -1, Symmetry sym = Symmetry::NONE) {
  const long m = static_cast<long>(samples.size());
  if (m < 2) throw PreconditionViolation("analyze: need at least two samples");
  long n = target_n >= 0 ? target_n : (m - 1) / 2;
  if (m < 2 * n + 1) {
    throw PreconditionViolation("analyze: M >= 2N+1 required for support N");
  }
  std::vector<Complex> c = detail::dft_forward(samples);
  double total = 0.0, tail = 0.0;
  FourierMap out(period, sym);
  for (long k = 0; k < m; ++k) {
    long kk = k <= m / 2 ? k : k - m;
    double e = std::norm(c[k]);
    total += e;
    if (std::labs(kk) > n) {
      tail += e;
    } else if (std::abs(c[k]) > 0.0) {
      out.set_coeff(kk, c[k]);
    }
  }
  if (total > 0.0 && tail > 1e-8 * total) {
    throw AliasingDetected("analyze: energy above index " + std::to_string(n) +
                           " exceeds 1e-8 of total (under-resolved)");
  }
  out.prune();
  return out;
}

/// Sup of |f| on a uniform grid.
inline double norm_c0(const FourierMap& f, int grid_size) {
  if (grid_size < 4 * static_cast<int>(f.support())) {
    throw PreconditionViolation("norm_c0: grid must be >= 4x support");
  }
  double m = 0.0;
  for (int i = 0; i < grid_size; ++i) {
    double x = f.period() * static_cast<double>(i) / grid_size;
    m = std::max(m, std::abs(synthesize(f, x)));
  }
  return m;
}

/// (sum_k (1+|k|)^{2s} |coeff(k)|^2)^{1/2}.
inline double norm_sobolev(const FourierMap& f, double s) {
  double acc = 0.0;
  for (const auto& [k, v] : f.coeffs()) {
    acc += std::pow(1.0 + std::labs(k), 2.0 * s) * std::norm(v);
  }
  return std::sqrt(acc);
}

/// x -> {U_t(x), U_z(x)} from a REAL_VALUED diagonal component and an
/// off-diagonal component of shared period.
inline std::function<Su2Vector(double)> su2_map(const FourierMap& u_t,
                                                const FourierMap& u_z) {
  if (u_t.period() != u_z.period()) {
    throw PeriodMismatch("su2_map: components must share a period");
  }
  if (u_t.symmetry() != Symmetry::REAL_VALUED || !u_t.is_real_valued()) {
    throw SymmetryViolated("su2_map: U_t must carry the REAL_VALUED symmetry");
  }
  return [u_t, u_z](double x) -> Su2Vector {
    Complex t = synthesize(u_t, x);
    return {t.real(), synthesize(u_z, x)};
  };
}

}  // namespace cocyclelab
