#pragma once

#include <Eigen/Dense>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace qwm {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr double pi = std::numbers::pi;

/// Distance between two angles on the circle, result in [0, pi].
inline double circ_dist(double a, double b) {
  double d = std::remainder(a - b, 2.0 * pi);
  return std::abs(d);
}

inline double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

/// ||U^dag U - 1||_max
inline double unitarity_defect(const Mat& u) {
  return max_abs(u.adjoint() * u - Mat::Identity(u.rows(), u.cols()));
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Eigenphases (arguments of unit-circle eigenvalues), unsorted.
inline Eigen::VectorXd eigenphases(const Mat& u) {
  Eigen::ComplexEigenSolver<Mat> es(u, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
  Eigen::VectorXd ph(u.rows());
  for (Eigen::Index i = 0; i < u.rows(); ++i) ph[i] = std::arg(es.eigenvalues()[i]);
  return ph;
}

}  // namespace qwm
