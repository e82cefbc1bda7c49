#pragma once

#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "qwm/coin.hpp"
#include "qwm/types.hpp"

namespace qwm {

/// Momentum-space symbol of a translation-invariant walk: a finite Laurent expansion
///   W(p) = sum_n A_n e^{i n.p},   n in Z^s,
/// where each A_n is a d x d matrix. Locality = finitely many terms. The Fourier
/// convention is psihat(p) = sum_x e^{i p.x} psi(x), so the e^{+ip} multiplier shifts
/// amplitudes one site in the +x direction.
class WalkSymbol {
 public:
  using Key = std::array<int, 2>;  // second entry unused (0) when lattice_dim == 1

  WalkSymbol(int coin_dim, int lattice_dim) : d_(coin_dim), s_(lattice_dim) {
    if (coin_dim < 1 || lattice_dim < 1 || lattice_dim > 2)
      throw std::invalid_argument("coin dim must be >= 1, lattice dim 1 or 2");
  }

  int coin_dim() const { return d_; }
  int lattice_dim() const { return s_; }
  const std::map<Key, Mat>& terms() const { return terms_; }

  void add_term(int n1, int n2, const Mat& a) {
    if (a.rows() != d_ || a.cols() != d_) throw std::invalid_argument("term has wrong size");
    if (s_ == 1 && n2 != 0) throw std::invalid_argument("1d symbol has a single index");
    Key k{n1, n2};
    auto it = terms_.find(k);
    if (it == terms_.end())
      terms_[k] = a;
    else
      it->second += a;
  }

  int neighborhood_size() const {
    int r = 0;
    for (const auto& [n, a] : terms_) r = std::max({r, std::abs(n[0]), std::abs(n[1])});
    return r;
  }

  Mat evaluate(double p1, double p2 = 0.0) const {
    Mat w = Mat::Zero(d_, d_);
    for (const auto& [n, a] : terms_)
      w += a * std::exp(cplx(0, n[0] * p1 + n[1] * p2));
    return w;
  }

  /// Largest unitarity defect of W(p) over a uniform momentum grid.
  double unitarity_residual(int grid = 64) const {
    double worst = 0.0;
    if (s_ == 1) {
      for (int j = 0; j < grid; ++j)
        worst = std::max(worst, unitarity_defect(evaluate(2.0 * pi * j / grid)));
    } else {
      for (int j1 = 0; j1 < grid; ++j1)
        for (int j2 = 0; j2 < grid; ++j2)
          worst = std::max(worst,
                           unitarity_defect(evaluate(2.0 * pi * j1 / grid, 2.0 * pi * j2 / grid)));
    }
    return worst;
  }

 private:
  int d_, s_;
  std::map<Key, Mat> terms_;
};

/// Hadamard walk in one dimension: W(p) = S(p) C with S = diag(e^{ip}, e^{-ip})
/// and C the Hadamard coin. Nonzero Laurent terms sit at n = +1 (up row) and
/// n = -1 (down row).
inline WalkSymbol hadamard_walk() {
  WalkSymbol w(2, 1);
  Mat c = hadamard_coin().matrix();
  Mat up = Mat::Zero(2, 2), down = Mat::Zero(2, 2);
  up.row(0) = c.row(0);
  down.row(1) = c.row(1);
  w.add_term(+1, 0, up);
  w.add_term(-1, 0, down);
  return w;
}

/// Alternating coin/shift product C_0 sigma(p_1) C_1 ... sigma(p_s) C_s with the
/// off-diagonal shift sigma(p) = [[0, e^{ip}], [e^{-ip}, 0]]. Takes s+1 coins of
/// dimension 2 and returns an s-dimensional symbol.
inline WalkSymbol coin_shift_walk(const std::vector<UnitaryCoin>& coins) {
  if (coins.size() < 2) throw std::invalid_argument("need at least two coins (s >= 1)");
  const int s = static_cast<int>(coins.size()) - 1;
  if (s > 2) throw std::invalid_argument("lattice dimension above 2 not supported");
  for (const auto& c : coins)
    if (c.dim() != 2) throw std::invalid_argument("coin/shift walk needs 2x2 coins");

  // accumulate Laurent terms left to right; sigma contributes n_k = +1 and -1 pieces
  std::map<WalkSymbol::Key, Mat> acc{{{0, 0}, coins[0].matrix()}};
  for (int axis = 1; axis <= s; ++axis) {
    Mat plus = Mat::Zero(2, 2), minus = Mat::Zero(2, 2);
    plus(0, 1) = 1.0;   // e^{+ip_axis}
    minus(1, 0) = 1.0;  // e^{-ip_axis}
    std::map<WalkSymbol::Key, Mat> next;
    for (const auto& [n, a] : acc) {
      for (int dir : {+1, -1}) {
        WalkSymbol::Key k = n;
        k[axis - 1] += dir;
        Mat piece = a * (dir > 0 ? plus : minus) * coins[axis].matrix();
        auto it = next.find(k);
        if (it == next.end())
          next[k] = piece;
        else
          it->second += piece;
      }
    }
    acc.swap(next);
  }
  WalkSymbol w(2, s);
  for (const auto& [n, a] : acc)
    if (max_abs(a) > 0.0) w.add_term(n[0], n[1], a);
  return w;
}

/// Flat two-dimensional walk used for band-gap engineering: interior coin carries the
/// spin flip X so that the eps -> 0 limit is sigma(p1+p2), whose eigenvalues are
/// exactly +-1 for every momentum. Small eps keeps both branches near {0, pi},
/// opening gaps at +-i.
inline WalkSymbol flat_walk_2d(double eps) {
  UnitaryCoin edge = x_rotation(eps);
  UnitaryCoin middle{Mat(pauli_x() * x_rotation(eps).matrix())};
  return coin_shift_walk({edge, middle, edge});
}

/// W_2(p, k) = W(p/2 + k) (x) W(p/2 - k): the two-particle symbol at total momentum p
/// and relative momentum k, evaluated directly.
inline Mat two_particle_symbol(const WalkSymbol& w, double p, double k) {
  if (w.lattice_dim() != 1) throw std::invalid_argument("two_particle_symbol needs s = 1");
  return kron(w.evaluate(p / 2 + k), w.evaluate(p / 2 - k));
}

namespace detail {
inline void require_odd_steps(const WalkSymbol& w) {
  for (const auto& [n, a] : w.terms())
    for (int ax = 0; ax < w.lattice_dim(); ++ax)
      if (((n[ax] % 2) + 2) % 2 != 1)
        throw std::invalid_argument(
            "relative-coordinate reduction needs odd single-particle steps");
}
}  // namespace detail

/// Relative-coordinate symbol at fixed total momentum p for two particles driven by w.
/// With every single-particle step odd, the particle separation keeps its parity, and
/// on the even sublattice (dimer index m = (x1 - x2)/2, conjugate momentum kappa = 2k)
/// the pair walk is a 1d walk with coin dimension d^2:
///   Wrel(kappa) = sum_{n1,n2} (A_{n1} (x) A_{n2}) e^{i (n1+n2) p / 2} e^{i (n1-n2) kappa / 2}.
inline WalkSymbol relative_symbol(const WalkSymbol& w, double p) {
  if (w.lattice_dim() != 1) throw std::invalid_argument("relative_symbol needs s = 1");
  detail::require_odd_steps(w);
  const int d = w.coin_dim();
  WalkSymbol rel(d * d, 1);
  for (const auto& [n1, a1] : w.terms())
    for (const auto& [n2, a2] : w.terms()) {
      int m = (n1[0] - n2[0]) / 2;
      cplx phase = std::exp(cplx(0, (n1[0] + n2[0]) * p / 2.0));
      rel.add_term(m, 0, Mat(phase * kron(a1, a2)));
    }
  return rel;
}

/// Two-dimensional analogue: relative symbol on the (even, even) sublattice of the
/// particle-separation lattice at fixed total momentum (p1, p2).
inline WalkSymbol relative_symbol_2d(const WalkSymbol& w, double p1, double p2) {
  if (w.lattice_dim() != 2) throw std::invalid_argument("relative_symbol_2d needs s = 2");
  detail::require_odd_steps(w);
  const int d = w.coin_dim();
  WalkSymbol rel(d * d, 2);
  for (const auto& [n1, a1] : w.terms())
    for (const auto& [n2, a2] : w.terms()) {
      int m1 = (n1[0] - n2[0]) / 2, m2 = (n1[1] - n2[1]) / 2;
      cplx phase = std::exp(cplx(0, (n1[0] + n2[0]) * p1 / 2.0 + (n1[1] + n2[1]) * p2 / 2.0));
      rel.add_term(m1, m2, Mat(phase * kron(a1, a2)));
    }
  return rel;
}

}  // namespace qwm
