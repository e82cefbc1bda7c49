#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qwm/coin.hpp"
#include "qwm/symbol.hpp"
#include "qwm/types.hpp"

namespace qwm {

enum class Boundary { Ring, Window };

struct Lattice {
  Boundary boundary;
  int extent;  // ring size M, or window half-width L (sites -L..L)

  static Lattice ring(int m) {
    if (m < 2) throw std::invalid_argument("ring needs at least 2 sites");
    return {Boundary::Ring, m};
  }
  static Lattice window(int l) {
    if (l < 0) throw std::invalid_argument("window half-width must be >= 0");
    return {Boundary::Window, l};
  }

  int sites() const { return boundary == Boundary::Ring ? extent : 2 * extent + 1; }
  int origin_index() const { return boundary == Boundary::Ring ? extent / 2 : extent; }
  int coordinate(int idx) const { return idx - origin_index(); }
  int index_of(int coord) const {
    if (boundary == Boundary::Ring) {
      int n = extent;
      return ((coord + origin_index()) % n + n) % n;
    }
    int idx = coord + origin_index();
    if (idx < 0 || idx >= sites()) throw std::out_of_range("coordinate outside window");
    return idx;
  }
};

/// Amplitudes over (x1, x2, alpha, beta) on a finite lattice.
class TwoParticleState {
 public:
  TwoParticleState(Lattice lat, int coin_dim)
      : lat_(lat), d_(coin_dim), amp_(Vec::Zero(static_cast<Eigen::Index>(lat.sites()) *
                                                lat.sites() * coin_dim * coin_dim)) {}

  const Lattice& lattice() const { return lat_; }
  int coin_dim() const { return d_; }
  int sites() const { return lat_.sites(); }
  Vec& amplitudes() { return amp_; }
  const Vec& amplitudes() const { return amp_; }

  cplx& at(int i1, int i2, int a, int b) {
    return amp_[((static_cast<Eigen::Index>(i1) * sites() + i2) * d_ + a) * d_ + b];
  }
  const cplx& at(int i1, int i2, int a, int b) const {
    return const_cast<TwoParticleState*>(this)->at(i1, i2, a, b);
  }

  double norm() const { return amp_.norm(); }

  void normalize() {
    double n = norm();
    if (n == 0.0) throw std::runtime_error("cannot normalize the zero state");
    amp_ /= n;
  }

  /// Particle exchange: Psi(x1, x2, a, b) -> Psi(x2, x1, b, a).
  TwoParticleState exchanged() const {
    TwoParticleState out(lat_, d_);
    const int n = sites();
    for (int i1 = 0; i1 < n; ++i1)
      for (int i2 = 0; i2 < n; ++i2)
        for (int a = 0; a < d_; ++a)
          for (int b = 0; b < d_; ++b) out.at(i1, i2, a, b) = at(i2, i1, b, a);
    return out;
  }

  TwoParticleState fermi_projected() const {
    TwoParticleState out = exchanged();
    out.amp_ = 0.5 * (amp_ - out.amp_);
    return out;
  }

  TwoParticleState bose_projected() const {
    TwoParticleState out = exchanged();
    out.amp_ = 0.5 * (amp_ + out.amp_);
    return out;
  }

  /// Joint translation by one site (ring only).
  TwoParticleState translated(int shift) const {
    if (lat_.boundary != Boundary::Ring)
      throw std::invalid_argument("translation is defined on the ring");
    TwoParticleState out(lat_, d_);
    const int n = sites();
    for (int i1 = 0; i1 < n; ++i1)
      for (int i2 = 0; i2 < n; ++i2)
        for (int a = 0; a < d_; ++a)
          for (int b = 0; b < d_; ++b)
            out.at(((i1 + shift) % n + n) % n, ((i2 + shift) % n + n) % n, a, b) =
                at(i1, i2, a, b);
    return out;
  }

  /// Largest |coordinate| carrying any amplitude.
  int support_radius() const {
    const int n = sites();
    int r = 0;
    for (int i1 = 0; i1 < n; ++i1)
      for (int i2 = 0; i2 < n; ++i2)
        for (int a = 0; a < d_; ++a)
          for (int b = 0; b < d_; ++b)
            if (std::abs(at(i1, i2, a, b)) > 0.0)
              r = std::max({r, std::abs(lat_.coordinate(i1)), std::abs(lat_.coordinate(i2))});
    return r;
  }

 private:
  Lattice lat_;
  int d_;
  Vec amp_;
};

/// Both particles at the origin in the antisymmetric internal state (|ud> - |du>)/sqrt(2).
inline TwoParticleState singlet_state_at_origin(Lattice lat) {
  TwoParticleState psi(lat, 2);
  const int o = lat.origin_index();
  const double r = 1.0 / std::sqrt(2.0);
  psi.at(o, o, 0, 1) = r;
  psi.at(o, o, 1, 0) = -r;
  return psi;
}

/// One time step of the interacting pair walk: the collision coin acts first on sites
/// with x1 == x2, then both particles take the free step given by the single-particle
/// symbol. Applied as shift-permutation plus blockwise coin products; no dense matrix
/// is ever stored.
class StepOperator {
 public:
  StepOperator(WalkSymbol w1, UnitaryCoin collision, Lattice lat)
      : w1_(std::move(w1)), gamma_(collision.matrix()), lat_(lat) {
    if (w1_.lattice_dim() != 1) throw std::invalid_argument("pair step needs an s = 1 walk");
    const int d = w1_.coin_dim();
    if (collision.dim() != d * d)
      throw std::invalid_argument("collision coin must act on the d^2 joint coin space");
    for (const auto& [n1, a1] : w1_.terms())
      for (const auto& [n2, a2] : w1_.terms())
        pair_terms_.push_back({n1[0], n2[0], kron(a1, a2)});
  }

  const WalkSymbol& single_particle_symbol() const { return w1_; }
  const Mat& collision_matrix() const { return gamma_; }
  const Lattice& lattice() const { return lat_; }

  TwoParticleState apply(const TwoParticleState& in) const {
    const int n = in.sites();
    const int d = w1_.coin_dim();
    const int dd = d * d;
    if (in.coin_dim() != d || in.lattice().boundary != lat_.boundary ||
        in.lattice().extent != lat_.extent)
      throw std::invalid_argument("state does not match the step's lattice");

    // collision coin on the diagonal
    Vec work = in.amplitudes();
    for (int i = 0; i < n; ++i) {
      Eigen::Index base = (static_cast<Eigen::Index>(i) * n + i) * dd;
      work.segment(base, dd) = gamma_ * work.segment(base, dd);
    }

    // free pair step, term by term
    const bool ring = lat_.boundary == Boundary::Ring;
    Vec out = Vec::Zero(work.size());
    for (const auto& t : pair_terms_) {
      for (int i1 = 0; i1 < n; ++i1) {
        int s1 = i1 - t.n1;
        if (ring)
          s1 = (s1 % n + n) % n;
        else if (s1 < 0 || s1 >= n)
          continue;
        for (int i2 = 0; i2 < n; ++i2) {
          int s2 = i2 - t.n2;
          if (ring)
            s2 = (s2 % n + n) % n;
          else if (s2 < 0 || s2 >= n)
            continue;
          Eigen::Index src = (static_cast<Eigen::Index>(s1) * n + s2) * dd;
          Eigen::Index dst = (static_cast<Eigen::Index>(i1) * n + i2) * dd;
          out.segment(dst, dd).noalias() += t.a * work.segment(src, dd);
        }
      }
    }

    TwoParticleState res(in.lattice(), d);
    res.amplitudes() = std::move(out);
    if (!ring) {
      double drift = std::abs(res.norm() - in.norm());
      if (drift > 1e-12 * std::max(1.0, in.norm()))
        throw std::runtime_error("window too small: amplitude reached the boundary band");
    }
    return res;
  }

  /// Dense matrix of the step (small lattices only; used for unitarity checks).
  Mat dense_matrix() const {
    const int n = lat_.sites();
    const int d = w1_.coin_dim();
    if (n > 16) throw std::invalid_argument("dense step matrix is restricted to <= 16 sites");
    Eigen::Index dim = static_cast<Eigen::Index>(n) * n * d * d;
    Mat m(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
      TwoParticleState e(lat_, d);
      e.amplitudes()[j] = 1.0;
      m.col(j) = apply(e).amplitudes();
    }
    return m;
  }

 private:
  struct PairTerm {
    int n1, n2;
    Mat a;
  };
  WalkSymbol w1_;
  Mat gamma_;
  Lattice lat_;
  std::vector<PairTerm> pair_terms_;
};

inline StepOperator build_interacting_step(const WalkSymbol& w, const UnitaryCoin& gamma_coin,
                                           Lattice lat) {
  return StepOperator(w, gamma_coin, lat);
}

/// Repeated application of the step. On a window the clearance precondition
/// support + t <= L is checked before running (particle speed is one site per step).
inline TwoParticleState evolve(const TwoParticleState& state, const StepOperator& step, int t) {
  if (t < 0) throw std::invalid_argument("negative step count");
  if (state.lattice().boundary == Boundary::Window) {
    int clearance = state.lattice().extent - state.support_radius();
    if (t > clearance)
      throw std::invalid_argument("window too small for requested evolution: need half-width >= " +
                                  std::to_string(state.support_radius() + t));
  }
  TwoParticleState cur = state;
  for (int i = 0; i < t; ++i) cur = step.apply(cur);
  return cur;
}

/// Probability grid sum_{a,b} |Psi(x1, x2, a, b)|^2, row index x1, column x2.
inline Eigen::MatrixXd joint_distribution(const TwoParticleState& psi) {
  const int n = psi.sites();
  const int d = psi.coin_dim();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (int i1 = 0; i1 < n; ++i1)
    for (int i2 = 0; i2 < n; ++i2)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) p(i1, i2) += std::norm(psi.at(i1, i2, a, b));
  return p;
}

inline Eigen::VectorXd marginal_x1(const Eigen::MatrixXd& joint) { return joint.rowwise().sum(); }

/// Distribution of x1 + x2 (twice the pair centre). Entry k corresponds to the
/// coordinate sum 2*cmin + k where cmin is the smallest site coordinate.
inline Eigen::VectorXd sum_marginal(const Eigen::MatrixXd& joint, const Lattice& lat) {
  const int n = static_cast<int>(joint.rows());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * n - 1);
  for (int i1 = 0; i1 < n; ++i1)
    for (int i2 = 0; i2 < n; ++i2) {
      int s = (lat.coordinate(i1) + lat.coordinate(i2)) - 2 * lat.coordinate(0);
      out[s] += joint(i1, i2);
    }
  return out;
}

/// Probability that the particle separation is at most `width` (ring distance on rings).
inline double near_diagonal_mass(const TwoParticleState& psi, int width) {
  const int n = psi.sites();
  const int d = psi.coin_dim();
  const bool ring = psi.lattice().boundary == Boundary::Ring;
  double mass = 0.0;
  for (int i1 = 0; i1 < n; ++i1)
    for (int i2 = 0; i2 < n; ++i2) {
      int dx = std::abs(i1 - i2);
      if (ring) dx = std::min(dx, n - dx);
      if (dx > width) continue;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) mass += std::norm(psi.at(i1, i2, a, b));
    }
  return mass;
}

/// Outermost significant maxima of an oscillatory lattice distribution: smooth with a
/// (1/4, 1/2, 1/4) kernel, then take the argmax over each half-axis. `coords[i]` is the
/// lattice coordinate of values[i].
inline std::pair<double, double> outer_peaks(const Eigen::VectorXd& values,
                                             const std::vector<double>& coords) {
  const int n = static_cast<int>(values.size());
  Eigen::VectorXd sm = values;
  for (int i = 1; i + 1 < n; ++i)
    sm[i] = 0.25 * values[i - 1] + 0.5 * values[i] + 0.25 * values[i + 1];
  double best_neg = 0, best_pos = 0, vneg = -1, vpos = -1;
  for (int i = 0; i < n; ++i) {
    if (coords[i] < 0 && sm[i] > vneg) vneg = sm[i], best_neg = coords[i];
    if (coords[i] > 0 && sm[i] > vpos) vpos = sm[i], best_pos = coords[i];
  }
  return {best_neg, best_pos};
}

}  // namespace qwm
