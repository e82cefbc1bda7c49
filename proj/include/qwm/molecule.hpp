#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "qwm/coin.hpp"
#include "qwm/spectral.hpp"
#include "qwm/symbol.hpp"
#include "qwm/types.hpp"

namespace qwm {

// Closed-form results for the Hadamard pair walk with singlet collisions
// Gamma = gamma 1 = e^{ig} 1 on the one-dimensional collision coin space.

enum class Branch { Plus, Minus };

inline const char* to_string(Branch b) { return b == Branch::Plus ? "+" : "-"; }

struct InteractionPhase {
  double g;    // radians, in (-pi, pi]
  cplx gamma;  // e^{ig}, unit modulus by construction

  explicit InteractionPhase(double g_) : g(std::remainder(g_, 2.0 * pi)), gamma(std::polar(1.0, g)) {}
};

struct DispersionPoint {
  double p;
  Branch branch;
  double omega;          // in (-pi, pi]
  bool allowed;          // sin(w) sin(g - w) > 0; boundary ties count as forbidden
  double group_velocity; // sites per step, sign tied to the branch
};

inline double group_velocity(double p, double g, Branch branch) {
  double s = (branch == Branch::Plus) ? 1.0 : -1.0;
  return s * std::sin(p) / std::sqrt(4.0 - 4.0 * std::cos(g) + std::sin(p) * std::sin(p));
}

/// Bound-state quasi-energies: e^{iw} = e^{ig}/(2 e^{ig} - 1) (cos p +- i sqrt(sin^2 p
/// + 4(1 - cos g))), a branch being physical only where sin(w) sin(g - w) > 0. The "+"
/// branch takes the root with the positive imaginary bracket. At g = 0 both branches
/// reduce to the free values e^{+-ip} and the constraint is unsatisfiable, so both
/// come back forbidden rather than as an error.
inline std::array<DispersionPoint, 2> dispersion(double p, double g) {
  cplx gamma = std::polar(1.0, g);
  double s = std::sqrt(std::sin(p) * std::sin(p) + 4.0 * (1.0 - std::cos(g)));
  cplx pref = gamma / (2.0 * gamma - 1.0);
  std::array<DispersionPoint, 2> out;
  for (int i = 0; i < 2; ++i) {
    Branch br = (i == 0) ? Branch::Plus : Branch::Minus;
    double sgn = (i == 0) ? 1.0 : -1.0;
    cplx z = pref * cplx(std::cos(p), sgn * s);
    double w = std::arg(z);
    double constraint = std::sin(w) * std::sin(g - w);
    bool allowed = constraint > 1e-12;
    out[i] = {p, br, w, allowed, group_velocity(p, g, br)};
  }
  return out;
}

inline DispersionPoint dispersion_branch(double p, double g, Branch branch) {
  return dispersion(p, g)[branch == Branch::Plus ? 0 : 1];
}

struct MaxSpeedReport {
  double speed;           // largest |dw/dp| over constraint-allowed momenta
  double p_at;            // where it is attained
  double unconstrained;   // 1/sqrt(5 - 4 cos g), the value at p = pi/2
  bool forbidden_at_pi_half;
};

/// The unconstrained speed maximum always sits at p = pi/2. When the constraint
/// forbids both branches there, the maximum over allowed momenta is located by a
/// 10^4-point scan.
inline MaxSpeedReport max_speed(double g, int scan_points = 10000) {
  if (g == 0.0) throw std::invalid_argument("max_speed needs g != 0 (no bound state at g = 0)");
  double unconstrained = 1.0 / std::sqrt(5.0 - 4.0 * std::cos(g));
  auto at_half = dispersion(pi / 2, g);
  bool ok_half = at_half[0].allowed || at_half[1].allowed;
  if (ok_half) return {unconstrained, pi / 2, unconstrained, false};
  double best = 0.0, best_p = 0.0;
  for (int j = 0; j <= scan_points; ++j) {
    double p = -pi + 2.0 * pi * j / scan_points;
    auto d = dispersion(p, g);
    for (const auto& pt : d)
      if (pt.allowed && std::abs(pt.group_velocity) > best) {
        best = std::abs(pt.group_velocity);
        best_p = p;
      }
  }
  return {best, best_p, unconstrained, true};
}

/// Coin of the virtual nearest-neighbour walk whose two dispersion branches coincide
/// with the bound-state branches (including the constraint-forbidden ones):
/// C = 1/(2 gamma - 1) [[gamma, sqrt2 (gamma-1)], [sqrt2 (gamma-1) gamma, gamma]].
inline UnitaryCoin molecule_coin(cplx gamma) {
  Mat c(2, 2);
  cplx pref = 1.0 / (2.0 * gamma - 1.0);
  c(0, 0) = pref * gamma;
  c(0, 1) = pref * std::sqrt(2.0) * (gamma - 1.0);
  c(1, 0) = pref * std::sqrt(2.0) * (gamma - 1.0) * gamma;
  c(1, 1) = pref * gamma;
  return UnitaryCoin(c);
}

/// Collision-anchored phase eta with cos(eta) = cos(p) - 2 cos(w). The sign of sin(eta)
/// is fixed by requiring |v1| <= 1 and a capture probability in (0, 1]; at g = pi both
/// signs qualify and sin(eta) follows the sign of sin(w). On dispersion branches the
/// result satisfies e^{i eta} = -e^{i w}/gamma.
inline double eta(double p, double omega, double g) {
  double c = std::cos(p) - 2.0 * std::cos(omega);
  if (std::abs(c) > 1.0 + 1e-12)
    throw std::domain_error("cos(eta) = " + std::to_string(c) + " is outside [-1, 1]");
  c = std::clamp(c, -1.0, 1.0);
  double mag = std::acos(c);
  auto qualifies = [&](double e) {
    bool pcap_ok = std::sin(omega) * std::sin(e) >= 0.0;  // P_cap = 1/(1 + 2 sw/se) in (0, 1]
    if (g == 0.0) return pcap_ok;
    double v1 = -std::cos(e) - (std::cos(g / 2) / std::sin(g / 2)) * std::sin(e);
    return pcap_ok && std::abs(v1) <= 1.0 + 1e-9;
  };
  bool qp = qualifies(mag), qm = qualifies(-mag);
  if (qp && qm) return std::sin(omega) >= 0.0 ? mag : -mag;  // degenerate tie (g = pi)
  if (qp) return mag;
  if (qm) return -mag;
  return mag;  // off-branch input; either sign fails, keep the principal one
}

/// Decay pole of the bound state: v1 = -cos(eta) - cot(g/2) sin(eta); |v1| < 1 exactly
/// on allowed branches and v1 = 0 (strict localization) when p = +-w(p).
inline cplx pole_v1(double p, double g, Branch branch) {
  if (g == 0.0) throw std::invalid_argument("pole_v1 needs g != 0 (no bound state at g = 0)");
  DispersionPoint pt = dispersion_branch(p, g, branch);
  double e = eta(p, pt.omega, g);
  return cplx(-std::cos(e) - (std::cos(g / 2) / std::sin(g / 2)) * std::sin(e), 0.0);
}

// --- scalar defect operator on the singlet component, in closed form -------------
//
// For the Hadamard relative symbol W(v) = diag(e^{ip}, v, 1/v, e^{-ip}) (H x H) the
// polynomial q(v) = v det(W(v) - z) is quadratic,
//   q(v) = a (v^2 + 1) + b v,   a = z (z^2 + 1 - 2 z cos p)/2,
//                               b = z^4 + 1 - (z^3 + z) cos p,
// with roots forming an inverse pair. The singlet matrix element of the resolvent
// integrand is N(v) / (2 q(v)) with N(v) = z^2 (z - cos p)(v^2 + 1) - 2 v (z cos p - 1),
// and the k-integral collects the residues at v = 0 and at the in-disk root v1.

struct ResolventPolynomials {
  cplx a, b;
  cplx q(cplx v) const { return a * (v * v + 1.0) + b * v; }
  cplx dq(cplx v) const { return 2.0 * a * v + b; }
};

inline ResolventPolynomials resolvent_polynomials(cplx z, double p) {
  cplx a = z * (z * z + 1.0 - 2.0 * z * std::cos(p)) / 2.0;
  cplx b = z * z * z * z + 1.0 - (z * z * z + z) * std::cos(p);
  return {a, b};
}

/// Root of q with modulus < 1 (the pole "picked" by the residue evaluation). Throws
/// when both roots sit on the unit circle (z inside a band) or when q degenerates
/// (strict localization, z = e^{+-ip}).
inline cplx in_disk_root(const ResolventPolynomials& poly) {
  if (std::abs(poly.a) < 1e-13) throw std::domain_error("q(v) degenerates: pole at v = 0");
  cplx beta = poly.b / (2.0 * poly.a);
  cplx root = -beta + std::sqrt(beta * beta - 1.0);
  if (std::abs(root) > 1.0) root = 1.0 / root;  // roots are an inverse pair
  if (std::abs(root) > 1.0 - 1e-9)
    throw std::domain_error("both resolvent poles on the unit circle: z is inside a band");
  return root;
}

/// <singlet| R(z) |singlet> in closed form (residue evaluation).
inline cplx scalar_r_closed(cplx z, double p) {
  ResolventPolynomials poly = resolvent_polynomials(z, p);
  cplx cp(std::cos(p), 0.0);
  if (std::abs(poly.a) < 1e-13) {
    // degenerate case z = e^{+-ip}: q(v) = b v, double pole of the integrand at v = 0
    return (1.0 - z * cp) / poly.b;
  }
  cplx v1 = in_disk_root(poly);
  cplx res0 = z * (z - cp) / (z * z - 2.0 * z * cp + 1.0);
  cplx nv1 = z * z * (z - cp) * (v1 * v1 + 1.0) - 2.0 * v1 * (z * cp - 1.0);
  return res0 + nv1 / (2.0 * v1 * poly.dq(v1));
}

// --- bound state amplitudes --------------------------------------------------------

namespace detail {

inline Mat adjugate(const Mat& m) {
  const Eigen::Index n = m.rows();
  Mat adj(n, n);
  Mat minor(n - 1, n - 1);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index r = 0, rr = 0; r < n; ++r) {
        if (r == i) continue;
        for (Eigen::Index c = 0, cc = 0; c < n; ++c) {
          if (c == j) continue;
          minor(rr, cc) = m(r, c);
          ++cc;
        }
        ++rr;
      }
      cplx cof = minor.determinant();
      adj(j, i) = (((i + j) % 2) ? -cof : cof);  // transpose of the cofactor matrix
    }
  return adj;
}

/// W(v) for the Hadamard relative symbol, Laurent-extended off the unit circle.
inline Mat relative_symbol_at(cplx v, double p) {
  Mat d = Mat::Zero(4, 4);
  d(0, 0) = std::polar(1.0, p);
  d(1, 1) = v;
  d(2, 2) = 1.0 / v;
  d(3, 3) = std::polar(1.0, -p);
  Mat h = hadamard_coin().matrix();
  return d * kron(h, h);
}

}  // namespace detail

/// Componentwise residue operator R_{v1} = Res_{v -> v1} v^{-1} z (W(v) - z)^{-1},
/// evaluated through the adjugate: (W(v) - z)^{-1} = v adj(W(v) - z) / q(v).
inline Mat residue_operator(cplx v1, cplx z, double p) {
  ResolventPolynomials poly = resolvent_polynomials(z, p);
  Mat a = detail::relative_symbol_at(v1, p) - z * Mat::Identity(4, 4);
  return z * detail::adjugate(a) / poly.dq(v1);
}

struct BoundStateRecord {
  double p = 0.0;
  double g = 0.0;
  Branch branch = Branch::Plus;
  double omega = 0.0;
  double eta = 0.0;
  cplx v1;
  double p_cap = 0.0;
  int cutoff = 0;
  std::vector<Vec> amplitudes;  // index m + cutoff, each a 4-vector; table of P_cap * Psi_m
  const Vec& at(int m) const { return amplitudes[static_cast<size_t>(m + cutoff)]; }
};

inline double capture_probability_closed(double omega, double eta_val) {
  return 1.0 / (1.0 + 2.0 * std::sin(omega) / std::sin(eta_val));
}

/// Bound state at total momentum p, written in the relative (dimer) coordinate:
///   Psi~_m = P_cap * { (1-gamma) v1^|m| R_{v1} psi_-   (m < 0)
///                      psi_-                            (m = 0)
///                      -(1-gamma) v1^|m| F R_{v1} psi_- (m > 0) }.
/// At the strict-localization momenta (v1 = 0) the |m| = 1 coefficients come from a
/// direct contour quadrature and the state vanishes beyond |m| = 1.
inline BoundStateRecord bound_state(double p, double g, Branch branch, int cutoff) {
  if (g == 0.0) throw std::invalid_argument("no bound state at g = 0");
  if (cutoff < 1) throw std::invalid_argument("cutoff must be >= 1");
  DispersionPoint pt = dispersion_branch(p, g, branch);
  if (!pt.allowed)
    throw std::invalid_argument("branch " + std::string(to_string(branch)) +
                                " is forbidden at this momentum: sin(w) sin(g - w) <= 0");
  cplx z = std::polar(1.0, pt.omega);
  cplx gamma = std::polar(1.0, g);
  double e = eta(p, pt.omega, g);
  double pcap = capture_probability_closed(pt.omega, e);
  cplx v1(-std::cos(e) - (std::cos(g / 2) / std::sin(g / 2)) * std::sin(e), 0.0);

  BoundStateRecord rec;
  rec.p = p;
  rec.g = g;
  rec.branch = branch;
  rec.omega = pt.omega;
  rec.eta = e;
  rec.v1 = v1;
  rec.p_cap = pcap;
  rec.cutoff = cutoff;
  rec.amplitudes.assign(2 * cutoff + 1, Vec::Zero(4));

  Vec s = singlet_vector();
  Vec psi_gamma = (1.0 - gamma) * s;
  Mat f = exchange_matrix();
  rec.amplitudes[cutoff] = pcap * s;

  if (std::abs(v1) > 1e-12) {
    Vec neg_unit = residue_operator(v1, z, p) * psi_gamma;  // Psi_{-1} / v1
    for (int m = 1; m <= cutoff; ++m) {
      cplx w = std::pow(v1, m);
      rec.amplitudes[cutoff - m] = pcap * w * neg_unit;
      rec.amplitudes[cutoff + m] = -pcap * w * (f * neg_unit);
    }
  } else {
    // strictly localized on {-1, 0, 1}: extract the m = -1 Fourier coefficient
    const int n = 2048;
    Vec acc = Vec::Zero(4);
    for (int j = 0; j < n; ++j) {
      double k = 2.0 * pi * j / n;
      Mat wk = detail::relative_symbol_at(std::polar(1.0, k), p);
      acc += std::exp(cplx(0, k)) *
             (wk - z * Mat::Identity(4, 4)).partialPivLu().solve(Mat(wk) * psi_gamma);
    }
    acc /= double(n);
    rec.amplitudes[cutoff - 1] = pcap * acc;
    rec.amplitudes[cutoff + 1] = -pcap * (f * acc);
  }
  return rec;
}

/// ||Psi||^2 = <psi_Gamma| (-z dR/dz) |psi_Gamma> by quadrature, with the derivative
/// taken inside the integral: dR/dz = (2 pi)^{-1} int dk (W - z)^{-2} W.
inline double norm_squared_quadrature(const Vec& psi_gamma, cplx z, const WalkSymbol& rel,
                                      int grid = 4096) {
  const int d = rel.coin_dim();
  Vec acc = Vec::Zero(d);
  for (int j = 0; j < grid; ++j) {
    double k = 2.0 * pi * j / grid;
    Mat wk = rel.evaluate(k);
    auto lu = (wk - z * Mat::Identity(d, d)).partialPivLu();
    acc += lu.solve(lu.solve(wk * psi_gamma));
  }
  acc /= double(grid);
  cplx val = psi_gamma.dot(-z * acc);
  return val.real();
}

/// Squared norm of the bound state with unit singlet at the origin, computed both by
/// quadrature of -z dR/dz and by the singlet closed form 1 + 2 sin(w)/sin(eta)
/// (equivalently -i gamma^{-1} dgamma/domega). The two routes must agree to 1e-8.
inline double norm_squared(double p, double g, Branch branch, int grid = 4096) {
  DispersionPoint pt = dispersion_branch(p, g, branch);
  if (!pt.allowed) throw std::invalid_argument("branch is forbidden at this momentum");
  cplx z = std::polar(1.0, pt.omega);
  double e = eta(p, pt.omega, g);
  double closed = 1.0 + 2.0 * std::sin(pt.omega) / std::sin(e);
  Vec psi_gamma = (1.0 - std::polar(1.0, g)) * singlet_vector();
  double quad = norm_squared_quadrature(psi_gamma, z, relative_symbol(hadamard_walk(), p), grid);
  if (closed <= 0.0 || quad <= 0.0)
    throw std::runtime_error("norm^2 came out non-positive: closed " + std::to_string(closed) +
                             ", quadrature " + std::to_string(quad));
  if (std::abs(closed - quad) > 1e-8 * std::max(1.0, std::abs(closed)))
    throw std::runtime_error("norm^2 routes disagree: closed " + std::to_string(closed) +
                             " vs quadrature " + std::to_string(quad));
  return closed;
}

/// P_cap = |<Phi|psi>|^2 / ||Psi||^2 for a normalized collision-space state Phi.
/// For Phi = singlet this reduces to (1 + 2 sin(w)/sin(eta))^{-1}.
inline double capture_probability(const Vec& phi, double p, double g, Branch branch) {
  if (phi.size() != 4) throw std::invalid_argument("collision-space state must be a 4-vector");
  if (std::abs(phi.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("collision-space state must be normalized");
  DispersionPoint pt = dispersion_branch(p, g, branch);
  if (!pt.allowed) throw std::invalid_argument("branch is forbidden at this momentum");
  double e = eta(p, pt.omega, g);
  double nrm = 1.0 + 2.0 * std::sin(pt.omega) / std::sin(e);
  cplx ov = phi.dot(singlet_vector());
  return std::norm(ov) / nrm;
}

/// (1/2pi) int dp sum over allowed branches of P_cap(p): the total probability that
/// the localized singlet pair forms a molecule.
inline double integrated_capture(double g, int grid_points = 2048) {
  if (g == 0.0) throw std::invalid_argument("integrated_capture needs g != 0");
  if (grid_points < 2048) throw std::invalid_argument("use at least 2048 quadrature points");
  double total = 0.0;
  for (int j = 0; j < grid_points; ++j) {
    double p = -pi + 2.0 * pi * j / grid_points;
    for (const auto& pt : dispersion(p, g)) {
      if (!pt.allowed) continue;
      double e = eta(p, pt.omega, g);
      total += capture_probability_closed(pt.omega, e);
    }
  }
  return total / grid_points;
}

struct VelocityHistogram {
  std::vector<double> centers;
  std::vector<double> density;  // mass / bin width; caustic bins are allowed to spike
  double total_mass;
};

/// Pushforward of the measure P_cap(p) dp / 2pi through the group velocity, binned over
/// v in [-1, 1]. The histogram mass equals the integrated capture probability; the
/// long-time molecule position distribution scaled by 1/t follows this density.
inline VelocityHistogram asymptotic_distribution(double g, int bins, int grid_points = 8192) {
  if (g == 0.0) throw std::invalid_argument("asymptotic_distribution needs g != 0");
  if (bins < 2) throw std::invalid_argument("need at least 2 bins");
  VelocityHistogram h;
  h.centers.resize(bins);
  h.density.assign(bins, 0.0);
  double width = 2.0 / bins;
  for (int b = 0; b < bins; ++b) h.centers[b] = -1.0 + (b + 0.5) * width;
  double total = 0.0;
  for (int j = 0; j < grid_points; ++j) {
    double p = -pi + 2.0 * pi * j / grid_points;
    for (const auto& pt : dispersion(p, g)) {
      if (!pt.allowed) continue;
      double e = eta(p, pt.omega, g);
      double mass = capture_probability_closed(pt.omega, e) / grid_points;
      int b = std::clamp(static_cast<int>((pt.group_velocity + 1.0) / width), 0, bins - 1);
      h.density[b] += mass;
      total += mass;
    }
  }
  for (double& d : h.density) d /= width;
  h.total_mass = total;
  return h;
}

}  // namespace qwm
