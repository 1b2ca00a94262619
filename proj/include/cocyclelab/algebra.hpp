// Copyright 2026 the cocycle-lab developers.
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "cocyclelab/errors.hpp"

namespace cocyclelab {

using Complex = std::complex<double>;
using Su2Matrix = std::array<std::array<Complex, 2>, 2>;
using So3Matrix = std::array<std::array<double, 3>, 3>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Element {t, z} of su(2), realized as the traceless skew-Hermitian matrix
/// [[i t, z], [-conj(z), -i t]].
struct Su2Vector {
  double t = 0.0;
  Complex z{0.0, 0.0};

  double norm() const { return std::sqrt(t * t + std::norm(z)); }

  Su2Matrix matrix() const {
    return {{{Complex(0.0, t), z}, {-std::conj(z), Complex(0.0, -t)}}};
  }

  Su2Vector operator+(const Su2Vector& o) const { return {t + o.t, z + o.z}; }
  Su2Vector operator-(const Su2Vector& o) const { return {t - o.t, z - o.z}; }
  Su2Vector operator*(double s) const { return {t * s, z * s}; }
  Su2Vector operator-() const { return {-t, -z}; }
};

/// Unit quaternion (w, x, y, z) representing an SU(2) element.
///
/// The matrix realization is [[w + i z, -y + i x], [y + i x, w - i z]], fixed
/// so that the k direction is diag(i, -i).  Under this convention
/// E_r(x) = (cos 2*pi*r*x, 0, 0, sin 2*pi*r*x) and cover_project(E_{1/2}(x))
/// is the rotation by angle 2*pi*x about the z axis.  Products renormalize,
/// so long cocycle products do not drift.
struct GroupElement {
  double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

  static GroupElement identity() { return {1.0, 0.0, 0.0, 0.0}; }

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

  GroupElement normalized() const {
    double inv = 1.0 / norm();
    return {w * inv, x * inv, y * inv, z * inv};
  }

  GroupElement conjugate() const { return {w, -x, -y, -z}; }
  GroupElement inverse() const { return conjugate(); }  // unit norm
  GroupElement operator-() const { return {-w, -x, -y, -z}; }

  GroupElement operator*(const GroupElement& o) const {
    GroupElement r{w * o.w - x * o.x - y * o.y - z * o.z,
                   w * o.x + x * o.w + y * o.z - z * o.y,
                   w * o.y - x * o.z + y * o.w + z * o.x,
                   w * o.z + x * o.y - y * o.x + z * o.w};
    return r.normalized();
  }

  Su2Matrix matrix() const {
    return {{{Complex(w, z), Complex(-y, x)}, {Complex(y, x), Complex(w, -z)}}};
  }

  double dot(const GroupElement& o) const {
    return w * o.w + x * o.x + y * o.y + z * o.z;
  }
};

/// Euclidean distance of the quaternion 4-vectors (an SU(2) metric).
inline double su2_distance(const GroupElement& a, const GroupElement& b) {
  double dw = a.w - b.w, dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dw * dw + dx * dx + dy * dy + dz * dz);
}

/// Distance modulo +-Id: min(|p-q|, |p+q|) on lifts.  All SO(3) statements in
/// this library are tested in this metric.
inline double so3_distance(const GroupElement& a, const GroupElement& b) {
  return std::min(su2_distance(a, b), su2_distance(a, -b));
}

/// exp of the su(2) element: cos(w)*Id + (sin(w)/w)*H, w = norm(H).
inline GroupElement su2_exp(const Su2Vector& h) {
  double om = h.norm();
  double s;
  if (om < 1e-12) {
    s = 1.0 - om * om / 6.0;  // series limit at w = 0
  } else {
    s = std::sin(om) / om;
  }
  // pure-quaternion image of {t, z} is (0, Im z, -Re z, t)
  GroupElement g{std::cos(om), s * h.z.imag(), -s * h.z.real(), s * h.t};
  return g.normalized();
}

/// Principal logarithm; the rotation angle atan2(|pure|, w) lies in [0, pi].
/// Throws ChartEscape when the angle exceeds `max_angle`.
inline Su2Vector su2_log(const GroupElement& g, double max_angle = std::numbers::pi - 1e-9) {
  double pn = std::sqrt(g.x * g.x + g.y * g.y + g.z * g.z);
  double om = std::atan2(pn, g.w);
  if (om > max_angle) {
    throw ChartEscape("su2_log: rotation angle " + std::to_string(om) +
                      " exceeds chart bound " + std::to_string(max_angle));
  }
  if (pn < 1e-300) return {0.0, {0.0, 0.0}};
  double f = om / pn;
  return {f * g.z, Complex(-f * g.y, f * g.x)};
}

/// diag(e^{2 i pi r x}, e^{-2 i pi r x}) for half-integer r.
inline GroupElement e_r(double r, double x) {
  double two_r = 2.0 * r;
  if (std::abs(two_r - std::round(two_r)) > 1e-12) {
    throw PreconditionViolation("e_r: 2r must be an integer");
  }
  double th = kTwoPi * r * x;
  return {std::cos(th), 0.0, 0.0, std::sin(th)};
}

/// The distinguished constant A = [[0, 1], [-1, 0]]; A^2 = -Id exactly, and
/// Ad(A).E_{1/2}(x) = E_{1/2}(-x).
inline GroupElement element_a() { return {0.0, 0.0, -1.0, 0.0}; }

/// Ad(g).H = g H g^{-1}, read back in {t, z} coordinates.  Norm-preserving.
inline Su2Vector ad_action(const GroupElement& g, const Su2Vector& h) {
  GroupElement p{0.0, h.z.imag(), -h.z.real(), h.t};
  // q p q^-1 without the unit renormalization (p is not unit)
  const GroupElement& q = g;
  GroupElement qp{q.w * p.w - q.x * p.x - q.y * p.y - q.z * p.z,
                  q.w * p.x + q.x * p.w + q.y * p.z - q.z * p.y,
                  q.w * p.y - q.x * p.z + q.y * p.w + q.z * p.x,
                  q.w * p.z + q.x * p.y - q.y * p.x + q.z * p.w};
  GroupElement qc = q.conjugate();
  GroupElement r{qp.w * qc.w - qp.x * qc.x - qp.y * qc.y - qp.z * qc.z,
                 qp.w * qc.x + qp.x * qc.w + qp.y * qc.z - qp.z * qc.y,
                 qp.w * qc.y - qp.x * qc.z + qp.y * qc.w + qp.z * qc.x,
                 qp.w * qc.z + qp.x * qc.y - qp.y * qc.x + qp.z * qc.w};
  return {r.z, Complex(-r.y, r.x)};
}

/// Standard unit-quaternion-to-rotation-matrix map; cover_project(g) equals
/// cover_project(-g).
inline So3Matrix cover_project(const GroupElement& g) {
  double w = g.w, x = g.x, y = g.y, z = g.z;
  return {{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
           {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
           {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}}};
}

/// One lift of an SO(3) matrix (Shepperd's method); the sign is arbitrary.
inline GroupElement so3_lift(const So3Matrix& m) {
  double tr = m[0][0] + m[1][1] + m[2][2];
  GroupElement q;
  if (tr > 0.0) {
    double s = std::sqrt(tr + 1.0) * 2.0;
    q = {0.25 * s, (m[2][1] - m[1][2]) / s, (m[0][2] - m[2][0]) / s,
         (m[1][0] - m[0][1]) / s};
  } else if (m[0][0] > m[1][1] && m[0][0] > m[2][2]) {
    double s = std::sqrt(1.0 + m[0][0] - m[1][1] - m[2][2]) * 2.0;
    q = {(m[2][1] - m[1][2]) / s, 0.25 * s, (m[0][1] + m[1][0]) / s,
         (m[0][2] + m[2][0]) / s};
  } else if (m[1][1] > m[2][2]) {
    double s = std::sqrt(1.0 + m[1][1] - m[0][0] - m[2][2]) * 2.0;
    q = {(m[0][2] - m[2][0]) / s, (m[0][1] + m[1][0]) / s, 0.25 * s,
         (m[1][2] + m[2][1]) / s};
  } else {
    double s = std::sqrt(1.0 + m[2][2] - m[0][0] - m[1][1]) * 2.0;
    q = {(m[1][0] - m[0][1]) / s, (m[0][2] + m[2][0]) / s,
         (m[1][2] + m[2][1]) / s, 0.25 * s};
  }
  return q.normalized();
}

enum class HomotopyClass { trivial, nontrivial };

struct PathLift {
  std::vector<GroupElement> lift;
  HomotopyClass homotopy_class;
};

/// Continuous lift of a loop of SO(3) samples.  Signs are chosen to minimize
/// the quaternion jump at each step; the class is nontrivial iff the lift ends
/// at minus its start.
///
/// Throws GapTooLarge if consecutive samples are more than pi/2 apart in
/// SO(3) (quaternion half-angle pi/4), which signals undersampling.
inline PathLift path_lift(const std::vector<So3Matrix>& samples) {
  if (samples.size() < 2) {
    throw PreconditionViolation("path_lift: need at least two samples");
  }
  {
    double d = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        d = std::max(d, std::abs(samples.front()[i][j] - samples.back()[i][j]));
    if (d > 1e-8) {
      throw PreconditionViolation("path_lift: first sample must equal last within 1e-8");
    }
  }
  const double min_dot = std::cos(std::numbers::pi / 4.0);
  std::vector<GroupElement> lift;
  lift.reserve(samples.size());
  lift.push_back(so3_lift(samples[0]));
  for (std::size_t i = 1; i < samples.size(); ++i) {
    GroupElement q = so3_lift(samples[i]);
    double d = q.dot(lift.back());
    if (d < 0.0) {
      q = -q;
      d = -d;
    }
    if (d < min_dot) {
      throw GapTooLarge("path_lift: angular gap at sample " + std::to_string(i) +
                        " exceeds pi/2; increase sampling");
    }
    lift.push_back(q);
  }
  HomotopyClass cls = lift.back().dot(lift.front()) > 0.0 ? HomotopyClass::trivial
                                                          : HomotopyClass::nontrivial;
  return {std::move(lift), cls};
}

}  // namespace cocyclelab
