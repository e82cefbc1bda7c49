#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "qwm/types.hpp"

namespace qwm {

/// Internal-state unitary, checked at construction.
class UnitaryCoin {
 public:
  explicit UnitaryCoin(Mat m, double tol = 1e-12) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0)
      throw std::invalid_argument("coin must be square and non-empty");
    double defect = unitarity_defect(m_);
    if (defect > tol)
      throw std::invalid_argument("coin is not unitary: ||U^dag U - 1||_max = " +
                                  std::to_string(defect));
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const Mat& matrix() const { return m_; }
  const cplx& operator()(int i, int j) const { return m_(i, j); }

 private:
  Mat m_;
};

inline UnitaryCoin hadamard_coin() {
  Mat h(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  h << s, s, s, -s;
  return UnitaryCoin(h);
}

inline UnitaryCoin identity_coin(int d) { return UnitaryCoin(Mat::Identity(d, d)); }

inline Mat pauli_x() {
  Mat x(2, 2);
  x << 0, 1, 1, 0;
  return x;
}

/// exp(i*eps*X): rotation about the x axis of the Bloch sphere.
inline UnitaryCoin x_rotation(double eps) {
  Mat r(2, 2);
  r << std::cos(eps), cplx(0, std::sin(eps)), cplx(0, std::sin(eps)), std::cos(eps);
  return UnitaryCoin(r);
}

/// Singlet state (|ud> - |du>)/sqrt(2) in the (uu, ud, du, dd) coin basis.
inline Vec singlet_vector() {
  Vec s(4);
  const double r = 1.0 / std::sqrt(2.0);
  s << 0.0, r, -r, 0.0;
  return s;
}

/// Collision coin 1 + (gamma - 1) P_singlet: phase gamma on the singlet component only.
inline UnitaryCoin singlet_collision_coin(cplx gamma) {
  if (std::abs(std::abs(gamma) - 1.0) > 1e-12)
    throw std::invalid_argument("collision phase must have modulus 1");
  Vec s = singlet_vector();
  Mat g = Mat::Identity(4, 4) + (gamma - 1.0) * (s * s.adjoint());
  return UnitaryCoin(g);
}

inline UnitaryCoin singlet_collision_coin(double g) {
  return singlet_collision_coin(std::exp(cplx(0, g)));
}

/// Tensor-factor exchange F on the two-particle coin space: F (a x b) = b x a.
inline Mat exchange_matrix() {
  Mat f = Mat::Zero(4, 4);
  f(0, 0) = 1;
  f(1, 2) = 1;
  f(2, 1) = 1;
  f(3, 3) = 1;
  return f;
}

/// Collision coin acting as u_sym on the symmetric subspace {uu, (ud+du)/sqrt2, dd}
/// and as identity on the singlet.
inline UnitaryCoin symmetric_collision_coin(const UnitaryCoin& u_sym) {
  if (u_sym.dim() != 3) throw std::invalid_argument("symmetric block must be 3x3");
  Mat b(4, 4);  // columns: symmetric triple then singlet, in the (uu,ud,du,dd) basis
  const double r = 1.0 / std::sqrt(2.0);
  b.setZero();
  b(0, 0) = 1;
  b(1, 1) = r;
  b(2, 1) = r;
  b(3, 2) = 1;
  b(1, 3) = r;
  b(2, 3) = -r;
  Mat blk = Mat::Identity(4, 4);
  blk.topLeftCorner(3, 3) = u_sym.matrix();
  return UnitaryCoin(b * blk * b.adjoint());
}

}  // namespace qwm
