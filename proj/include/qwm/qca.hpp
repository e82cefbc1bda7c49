#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "qwm/coin.hpp"
#include "qwm/two_particle.hpp"
#include "qwm/types.hpp"

namespace qwm {

// Lattice gas automaton on a double chain of qubits: every cell carries a right-moving
// and a left-moving mode. Occupation basis per cell: empty, right only, left only,
// both. Local rules conserve particle number, so states are stored sparsely by
// occupation bit string (bit 2x = right mode of cell x, bit 2x+1 = left mode).

class GasState {
 public:
  explicit GasState(int cells) : cells_(cells) {
    if (cells < 2 || cells > 32) throw std::invalid_argument("gas ring needs 2..32 cells");
  }

  int cells() const { return cells_; }
  std::map<std::uint64_t, cplx>& amplitudes() { return amp_; }
  const std::map<std::uint64_t, cplx>& amplitudes() const { return amp_; }

  static std::uint64_t right_bit(int cell) { return std::uint64_t(1) << (2 * cell); }
  static std::uint64_t left_bit(int cell) { return std::uint64_t(1) << (2 * cell + 1); }

  double norm() const {
    double s = 0.0;
    for (const auto& [k, a] : amp_) s += std::norm(a);
    return std::sqrt(s);
  }

  void prune(double floor = 1e-300) {
    for (auto it = amp_.begin(); it != amp_.end();)
      it = (std::abs(it->second) <= floor) ? amp_.erase(it) : std::next(it);
  }

  static GasState vacuum(int cells) {
    GasState g(cells);
    g.amp_[0] = 1.0;
    return g;
  }

  /// One right-moving (up-like) or left-moving (down-like) particle at a cell.
  static GasState single(int cells, int cell, bool right_mover) {
    GasState g(cells);
    g.amp_[right_mover ? right_bit(cell) : left_bit(cell)] = 1.0;
    return g;
  }

  /// Doubly occupied cell: one right and one left mover.
  static GasState pair_at(int cells, int cell) {
    GasState g(cells);
    g.amp_[right_bit(cell) | left_bit(cell)] = 1.0;
    return g;
  }

 private:
  int cells_;
  std::map<std::uint64_t, cplx> amp_;
};

/// Block-diagonal cell coin: |00> is left invariant, a 2x2 unitary acts on the
/// one-particle span {right only, left only}, and the doubly occupied cell picks up
/// the phase gamma.
struct CellCoin {
  Mat block;   // basis order (right only, left only)
  cplx gamma;

  CellCoin(const UnitaryCoin& b, cplx g) : block(b.matrix()), gamma(g) {
    if (b.dim() != 2) throw std::invalid_argument("cell coin block must be 2x2");
    if (std::abs(std::abs(g) - 1.0) > 1e-12)
      throw std::invalid_argument("pair phase must have modulus 1");
  }
};

/// One automaton step: the cell coin acts everywhere, then the right chain shifts one
/// cell to the right and the left chain one cell to the left. With this composition
/// the one- and two-particle sectors reproduce the coin-then-shift pair walk exactly.
inline GasState qca_step(const GasState& in, const CellCoin& coin) {
  const int m = in.cells();
  std::map<std::uint64_t, cplx> cur = in.amplitudes();
  for (int x = 0; x < m; ++x) {
    const std::uint64_t rb = GasState::right_bit(x), lb = GasState::left_bit(x);
    std::map<std::uint64_t, cplx> next;
    for (const auto& [key, amp] : cur) {
      bool r = key & rb, l = key & lb;
      if (!r && !l) {
        next[key] += amp;
      } else if (r && l) {
        next[key] += amp * coin.gamma;
      } else {
        int col = r ? 0 : 1;
        std::uint64_t base = key & ~(rb | lb);
        if (coin.block(0, col) != 0.0) next[base | rb] += amp * coin.block(0, col);
        if (coin.block(1, col) != 0.0) next[base | lb] += amp * coin.block(1, col);
      }
    }
    cur.swap(next);
  }
  GasState out(m);
  for (const auto& [key, amp] : cur) {
    std::uint64_t shifted = 0;
    for (int x = 0; x < m; ++x) {
      if (key & GasState::right_bit(x)) shifted |= GasState::right_bit((x + 1) % m);
      if (key & GasState::left_bit(x)) shifted |= GasState::left_bit((x - 1 + m) % m);
    }
    out.amplitudes()[shifted] += amp;
  }
  out.prune();
  return out;
}

/// Restriction to the n-particle sector (orthogonal projection).
inline GasState sector_projection(const GasState& in, int n) {
  if (n < 0 || n > 2 * in.cells()) throw std::invalid_argument("particle count out of range");
  GasState out(in.cells());
  for (const auto& [key, amp] : in.amplitudes())
    if (std::popcount(key) == n) out.amplitudes()[key] = amp;
  return out;
}

/// Expected occupation of each mode: pairs (right, left) per cell.
inline std::vector<std::pair<double, double>> occupation_numbers(const GasState& g) {
  std::vector<std::pair<double, double>> occ(g.cells(), {0.0, 0.0});
  for (const auto& [key, amp] : g.amplitudes()) {
    double w = std::norm(amp);
    for (int x = 0; x < g.cells(); ++x) {
      if (key & GasState::right_bit(x)) occ[x].first += w;
      if (key & GasState::left_bit(x)) occ[x].second += w;
    }
  }
  return occ;
}

// --- equivalence dictionary with the pair walk --------------------------------------
//
// Modes are ordered cell-major with the right mover first: mode(x, R) = 2x,
// mode(x, L) = 2x + 1. A two-particle occupation {m1 < m2} corresponds to the ordered
// entry sqrt(2) Psi(site(m1) spin(m1), site(m2) spin(m2)) of the antisymmetric pair
// wave function, with R as up and L as down. On the infinite lattice (equivalently a
// window the evolution never leaves) this intertwines the automaton with the
// singlet-collision pair walk exactly; a ring automaton is the fold of the infinite
// one, so ring amplitudes are predicted by summing window entries over cover copies.

inline std::map<std::uint64_t, cplx> predict_pair_sector(const TwoParticleState& psi,
                                                         int ring_cells, int ring_origin) {
  if (psi.coin_dim() != 2) throw std::invalid_argument("dictionary is for coin dimension 2");
  const int n = psi.sites();
  std::map<std::uint64_t, cplx> pred;
  const double s2 = std::sqrt(2.0);
  for (int i1 = 0; i1 < n; ++i1)
    for (int i2 = 0; i2 < n; ++i2)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          cplx amp = psi.at(i1, i2, a, b);
          if (amp == 0.0) continue;
          long m1 = 2L * psi.lattice().coordinate(i1) + a;  // R(=up) before L within a cell
          long m2 = 2L * psi.lattice().coordinate(i2) + b;
          if (m1 >= m2) continue;  // keep one orientation; the diagonal vanishes
          int c1 = ((psi.lattice().coordinate(i1) + ring_origin) % ring_cells + ring_cells) %
                   ring_cells;
          int c2 = ((psi.lattice().coordinate(i2) + ring_origin) % ring_cells + ring_cells) %
                   ring_cells;
          std::uint64_t key = (a == 0 ? GasState::right_bit(c1) : GasState::left_bit(c1)) |
                              (b == 0 ? GasState::right_bit(c2) : GasState::left_bit(c2));
          pred[key] += s2 * amp;
        }
  return pred;
}

/// Interacting pair step whose collision coin acts as a 3x3 unitary on the symmetric
/// internal subspace and as the identity on the singlet. The Bose sector is invariant.
inline StepOperator bose_collision_step(const WalkSymbol& w, const UnitaryCoin& u_sym,
                                        Lattice lat) {
  return build_interacting_step(w, symmetric_collision_coin(u_sym), lat);
}

}  // namespace qwm
