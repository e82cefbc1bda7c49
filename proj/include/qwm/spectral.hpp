#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "qwm/coin.hpp"
#include "qwm/symbol.hpp"
#include "qwm/types.hpp"

namespace qwm {

/// The resolvent of a point z on the unit circle is too close to the spectrum of the
/// walk; the quadrature for R(z) would be ill-conditioned.
struct SpectralProximityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// R(z) = (2 pi)^{-s} int d^s k (W(k) - z)^{-1} W(k), restricted to the coin space at
/// the defect site. For z off the spectrum this satisfies R + R^dag = 1, so
/// 1 - R^{-1} is unitary.
struct DefectOperator {
  cplx z;
  Mat r;
  double quadrature_residual = 0.0;  // || R_N - R_2N ||_max
  int grid_points = 0;               // per axis, after refinement
};

namespace detail {

inline Mat quadrature_R(cplx z, const WalkSymbol& w, int n) {
  const int d = w.coin_dim();
  Mat acc = Mat::Zero(d, d);
  if (w.lattice_dim() == 1) {
    for (int j = 0; j < n; ++j) {
      Mat wk = w.evaluate(2.0 * pi * j / n);
      acc += (wk - z * Mat::Identity(d, d)).partialPivLu().solve(wk);
    }
    return acc / double(n);
  }
  for (int j1 = 0; j1 < n; ++j1)
    for (int j2 = 0; j2 < n; ++j2) {
      Mat wk = w.evaluate(2.0 * pi * j1 / n, 2.0 * pi * j2 / n);
      acc += (wk - z * Mat::Identity(d, d)).partialPivLu().solve(wk);
    }
  return acc / double(n) / double(n);
}

inline double min_spectral_distance(cplx z, const WalkSymbol& w, int n) {
  double wz = std::arg(z);
  double best = pi;
  if (w.lattice_dim() == 1) {
    for (int j = 0; j < n; ++j) {
      Eigen::VectorXd ph = eigenphases(w.evaluate(2.0 * pi * j / n));
      for (Eigen::Index i = 0; i < ph.size(); ++i) best = std::min(best, circ_dist(ph[i], wz));
    }
  } else {
    for (int j1 = 0; j1 < n; ++j1)
      for (int j2 = 0; j2 < n; ++j2) {
        Eigen::VectorXd ph = eigenphases(w.evaluate(2.0 * pi * j1 / n, 2.0 * pi * j2 / n));
        for (Eigen::Index i = 0; i < ph.size(); ++i) best = std::min(best, circ_dist(ph[i], wz));
      }
  }
  return best;
}

}  // namespace detail

/// Trapezoid quadrature of R(z) on a uniform periodic grid (spectrally accurate for z
/// away from the bands). The residual is estimated by doubling the grid; the refined
/// value is returned. Throws SpectralProximityError if z comes within 1e-6 of an
/// eigenphase of W(k) sampled on the grid.
inline DefectOperator compute_R(cplx z, const WalkSymbol& w, int grid_points) {
  if (grid_points < 4) throw std::invalid_argument("need at least 4 quadrature points");
  if (std::abs(std::abs(z) - 1.0) > 1e-12)
    throw std::invalid_argument("z must lie on the unit circle");
  double dist = detail::min_spectral_distance(z, w, grid_points);
  if (dist < 1e-6)
    throw SpectralProximityError("z within " + std::to_string(dist) +
                                 " of the sampled spectrum of W(k)");
  Mat coarse = detail::quadrature_R(z, w, grid_points);
  Mat fine = detail::quadrature_R(z, w, 2 * grid_points);
  return {z, fine, max_abs(coarse - fine), 2 * grid_points};
}

struct LemmaReport {
  double hermitian_residual;  // || R + R^dag - 1 ||_max
  double unitarity_residual;  // || (1 - R^{-1})^dag (1 - R^{-1}) - 1 ||_max
  bool pass;
};

inline LemmaReport check_unitarity_lemma(const DefectOperator& R) {
  const Eigen::Index d = R.r.rows();
  double herm = max_abs(R.r + R.r.adjoint() - Mat::Identity(d, d));
  Mat u = Mat::Identity(d, d) - R.r.inverse();
  double uni = unitarity_defect(u);
  double tol = std::max(1e-9, 10.0 * R.quadrature_residual);
  return {herm, uni, herm <= tol && uni <= tol};
}

/// Defect coin pinning z into the point spectrum: Gamma = 1 - R(z)^{-1}. Fails with
/// the condition number if R is numerically singular.
inline UnitaryCoin defect_coin_for(const DefectOperator& R) {
  Eigen::JacobiSVD<Mat> svd(R.r);
  double cond = svd.singularValues()(0) / svd.singularValues()(svd.singularValues().size() - 1);
  if (!(cond < 1e12))
    throw std::runtime_error("R(z) is numerically singular: condition number " +
                             std::to_string(cond));
  const Eigen::Index d = R.r.rows();
  Mat u = Mat::Identity(d, d) - R.r.partialPivLu().solve(Mat::Identity(d, d));
  double defect = unitarity_defect(u);
  if (defect > 1e-9)
    throw std::runtime_error("1 - R^{-1} failed the unitarity check: defect " +
                             std::to_string(defect));
  return UnitaryCoin(u, 1e-9);
}

/// Dense one-step operator of a 1d walk on an M-site ring with the collision coin at
/// the origin site (index M/2): B = Free * ((1 - N) + Gamma N).
inline Mat ring_block(const WalkSymbol& rel, int M, const Mat& defect_coin) {
  if (rel.lattice_dim() != 1) throw std::invalid_argument("ring_block needs an s = 1 symbol");
  const int d = rel.coin_dim();
  if (defect_coin.rows() != d || defect_coin.cols() != d)
    throw std::invalid_argument("defect coin dimension mismatch");
  if (M < 4) throw std::invalid_argument("ring too small");
  Mat free = Mat::Zero(static_cast<Eigen::Index>(d) * M, static_cast<Eigen::Index>(d) * M);
  for (const auto& [n, a] : rel.terms())
    for (int m = 0; m < M; ++m) {
      int tgt = ((m + n[0]) % M + M) % M;
      free.block(static_cast<Eigen::Index>(d) * tgt, static_cast<Eigen::Index>(d) * m, d, d) += a;
    }
  Mat gate = Mat::Identity(free.rows(), free.cols());
  const int o = M / 2;
  gate.block(static_cast<Eigen::Index>(d) * o, static_cast<Eigen::Index>(d) * o, d, d) =
      defect_coin;
  return free * gate;
}

/// Same on an M x M torus for a 2d symbol; defect at the (M/2, M/2) site.
inline Mat torus_block(const WalkSymbol& rel2, int M, const Mat& defect_coin) {
  if (rel2.lattice_dim() != 2) throw std::invalid_argument("torus_block needs an s = 2 symbol");
  const int d = rel2.coin_dim();
  const Eigen::Index dim = static_cast<Eigen::Index>(d) * M * M;
  auto at = [&](int m1, int m2) {
    return static_cast<Eigen::Index>(d) * ((((m1 % M) + M) % M) * M + (((m2 % M) + M) % M));
  };
  Mat free = Mat::Zero(dim, dim);
  for (const auto& [n, a] : rel2.terms())
    for (int m1 = 0; m1 < M; ++m1)
      for (int m2 = 0; m2 < M; ++m2)
        free.block(at(m1 + n[0], m2 + n[1]), at(m1, m2), d, d) += a;
  Mat gate = Mat::Identity(dim, dim);
  const int o = M / 2;
  gate.block(at(o, o), at(o, o), d, d) = defect_coin;
  return free * gate;
}

/// Apply the defected ring walk to a coefficient vector (d entries per site, defect at
/// site M/2) without forming the dense matrix.
inline Vec apply_ring_block(const WalkSymbol& rel, const Mat& defect_coin, const Vec& psi) {
  const int d = rel.coin_dim();
  const int M = static_cast<int>(psi.size()) / d;
  if (static_cast<Eigen::Index>(M) * d != psi.size())
    throw std::invalid_argument("vector length is not a multiple of the coin dimension");
  Vec work = psi;
  const int o = M / 2;
  work.segment(static_cast<Eigen::Index>(d) * o, d) =
      defect_coin * work.segment(static_cast<Eigen::Index>(d) * o, d);
  Vec out = Vec::Zero(psi.size());
  for (const auto& [n, a] : rel.terms())
    for (int m = 0; m < M; ++m) {
      int tgt = ((m + n[0]) % M + M) % M;
      out.segment(static_cast<Eigen::Index>(d) * tgt, d).noalias() +=
          a * work.segment(static_cast<Eigen::Index>(d) * m, d);
    }
  return out;
}

/// Eigenphases of the free relative walk sampled over the Brillouin zone; the band set
/// used for gap classification.
inline std::vector<double> band_phases(const WalkSymbol& rel, int grid = 512) {
  std::vector<double> out;
  out.reserve(static_cast<size_t>(grid) * rel.coin_dim());
  for (int j = 0; j < grid; ++j) {
    Eigen::VectorXd ph = eigenphases(rel.evaluate(2.0 * pi * j / grid));
    for (Eigen::Index i = 0; i < ph.size(); ++i) out.push_back(ph[i]);
  }
  return out;
}

inline double distance_to_bands(double w, const std::vector<double>& bands) {
  double best = pi;
  for (double b : bands) best = std::min(best, circ_dist(w, b));
  return best;
}

struct SpectrumRow {
  double p;
  std::vector<double> eigenphases;  // sorted ascending in (-pi, pi]
  std::vector<bool> in_gap;
};

struct SpectrumTable {
  int ring_size = 0;
  double gap_tolerance = 0.0;  // eigenphase is "in gap" if farther than this from the bands
  std::vector<SpectrumRow> rows;
};

/// Spectrum of the interacting pair walk on a ring, resolved by total momentum
/// p = 2 pi n / M. Each block is the relative-coordinate ring walk with the collision
/// coin at the origin; finite-ring band edges are blurred at O(1/M), hence the
/// classification tolerance 10/M + 1e-6.
inline SpectrumTable ring_spectrum(int M, const WalkSymbol& w1, const UnitaryCoin& gamma,
                                   int band_grid = 512) {
  if (M < 4) throw std::invalid_argument("ring_spectrum needs M >= 4");
  SpectrumTable table;
  table.ring_size = M;
  table.gap_tolerance = 10.0 / M + 1e-6;
  for (int n = 0; n < M; ++n) {
    double p = 2.0 * pi * n / M;
    WalkSymbol rel = relative_symbol(w1, p);
    Mat block = ring_block(rel, M, gamma.matrix());
    Eigen::VectorXd ph = eigenphases(block);
    std::vector<double> bands = band_phases(rel, band_grid);
    SpectrumRow row;
    row.p = p;
    row.eigenphases.assign(ph.data(), ph.data() + ph.size());
    std::sort(row.eigenphases.begin(), row.eigenphases.end());
    row.in_gap.reserve(row.eigenphases.size());
    for (double w : row.eigenphases)
      row.in_gap.push_back(distance_to_bands(w, bands) > table.gap_tolerance);
    table.rows.push_back(std::move(row));
  }
  return table;
}

/// Open arcs of the unit circle free of eigenphases of the sampled symbol. Arcs
/// narrower than a few grid steps cannot be distinguished from sampling holes, so the
/// returned resolution accompanies the list.
struct BandGaps {
  std::vector<std::pair<double, double>> arcs;  // (start, end) going counterclockwise
  double resolution;
};

inline BandGaps band_gap(const WalkSymbol& symbol, int grid_points) {
  std::vector<double> ph;
  if (symbol.lattice_dim() == 1) {
    ph = band_phases(symbol, grid_points);
  } else {
    for (int j1 = 0; j1 < grid_points; ++j1)
      for (int j2 = 0; j2 < grid_points; ++j2) {
        Eigen::VectorXd e =
            eigenphases(symbol.evaluate(2.0 * pi * j1 / grid_points, 2.0 * pi * j2 / grid_points));
        for (Eigen::Index i = 0; i < e.size(); ++i) ph.push_back(e[i]);
      }
  }
  std::sort(ph.begin(), ph.end());
  BandGaps out;
  out.resolution = 2.0 * pi / grid_points;
  const double cut = 8.0 * out.resolution;
  for (size_t i = 0; i < ph.size(); ++i) {
    double a = ph[i];
    double b = (i + 1 < ph.size()) ? ph[i + 1] : ph[0] + 2.0 * pi;
    if (b - a > cut) out.arcs.emplace_back(a, b);
  }
  return out;
}

/// Position-space eigenvector from a defect-space solution psi of the eigenvalue
/// condition: Psi(k) = (W(k) - z)^{-1} W(k) (1 - Gamma) psi, inverse Fourier
/// transformed on |m| <= cutoff. Returned as a (2*cutoff+1)*d coefficient vector.
inline Vec eigenvector_from_defect(const Vec& psi, cplx z, const WalkSymbol& rel,
                                   const Mat& gamma, int cutoff, int grid = 4096) {
  const int d = rel.coin_dim();
  if (psi.size() != d) throw std::invalid_argument("defect vector has wrong dimension");
  DefectOperator R = compute_R(z, rel, grid / 2);
  Vec resid = R.r * ((Mat::Identity(d, d) - gamma) * psi) - psi;
  if (resid.norm() > 1e-8 * std::max(1.0, psi.norm()))
    throw std::invalid_argument("psi violates the eigenvalue condition: residual " +
                                std::to_string(resid.norm()));
  Vec psi_gamma = (Mat::Identity(d, d) - gamma) * psi;
  Vec out = Vec::Zero(static_cast<Eigen::Index>(2 * cutoff + 1) * d);
  for (int j = 0; j < grid; ++j) {
    double k = 2.0 * pi * j / grid;
    Mat wk = rel.evaluate(k);
    Vec sample = (wk - z * Mat::Identity(d, d)).partialPivLu().solve(wk * psi_gamma);
    for (int m = -cutoff; m <= cutoff; ++m)
      out.segment(static_cast<Eigen::Index>(m + cutoff) * d, d) +=
          std::exp(cplx(0, -k * m)) * sample;
  }
  out /= double(grid);
  return out;
}

/// Number of eigenphases of `block` within `tol` of arg(z).
inline int count_eigenphases_near(const Mat& block, cplx z, double tol) {
  Eigen::VectorXd ph = eigenphases(block);
  double wz = std::arg(z);
  int cnt = 0;
  for (Eigen::Index i = 0; i < ph.size(); ++i)
    if (circ_dist(ph[i], wz) <= tol) ++cnt;
  return cnt;
}

}  // namespace qwm
