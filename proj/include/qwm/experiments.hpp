#pragma once

// Experiment runners behind the command-line tool. Each runner resolves its
// parameters into a config echo, computes with the library, and renders the result
// as CSV (grids) or JSON (structured tables). Outputs are deterministic: the same
// config produces bit-identical files.

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "qwm/coin.hpp"
#include "qwm/molecule.hpp"
#include "qwm/qca.hpp"
#include "qwm/spectral.hpp"
#include "qwm/symbol.hpp"
#include "qwm/two_particle.hpp"

namespace qwm {

using json = nlohmann::json;

/// Angles may be given as multiples of pi: "pi", "0.5pi", "-0.25pi", or as plain
/// radians: "1.570796".
inline double parse_angle(const std::string& text) {
  std::string s = text;
  double factor = 1.0;
  if (s.size() >= 2 && s.substr(s.size() - 2) == "pi") {
    factor = pi;
    s = s.substr(0, s.size() - 2);
    if (s.empty() || s == "-" || s == "+") s += "1";
  }
  size_t used = 0;
  double value;
  try {
    value = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse angle '" + text + "'");
  }
  if (used != s.size()) throw std::invalid_argument("cannot parse angle '" + text + "'");
  return value * factor;
}

/// 17 significant digits: enough to reproduce the double exactly.
inline std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

struct ExperimentOutput {
  json config;       // fully resolved parameters, defaults included
  bool is_csv;
  std::string csv;   // populated when is_csv
  json data;         // populated otherwise

  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    if (is_csv) {
      out << csv;
    } else {
      json wrapped;
      wrapped["config"] = config;
      wrapped["results"] = data;
      out << wrapped.dump(2) << "\n";
    }
  }
};

inline ExperimentOutput run_evolve(double g, int t, int ring_size) {
  if (ring_size <= 2 * t) throw std::invalid_argument("ring must exceed twice the step count");
  ExperimentOutput out;
  out.config = {{"experiment", "evolve"}, {"g", g}, {"t", t}, {"M", ring_size},
                {"format", "csv"}};
  out.is_csv = true;
  Lattice lat = Lattice::ring(ring_size);
  StepOperator step = build_interacting_step(hadamard_walk(), singlet_collision_coin(g), lat);
  TwoParticleState psi = evolve(singlet_state_at_origin(lat), step, t);
  Eigen::MatrixXd joint = joint_distribution(psi);
  std::ostringstream csv;
  csv << "x1,x2,probability\n";
  for (int i = 0; i < ring_size; ++i)
    for (int j = 0; j < ring_size; ++j)
      csv << lat.coordinate(i) << ',' << lat.coordinate(j) << ',' << fmt17(joint(i, j)) << '\n';
  out.csv = csv.str();
  return out;
}

inline ExperimentOutput run_spectrum(int ring_size, double g, int band_grid) {
  ExperimentOutput out;
  out.config = {{"experiment", "spectrum"}, {"M", ring_size}, {"g", g},
                {"band_grid", band_grid}, {"format", "json"}};
  out.is_csv = false;
  SpectrumTable table = ring_spectrum(ring_size, hadamard_walk(), singlet_collision_coin(g),
                                      band_grid);
  out.data["ring_size"] = table.ring_size;
  out.data["gap_tolerance"] = table.gap_tolerance;
  out.data["rows"] = json::array();
  for (const auto& row : table.rows) {
    json r;
    r["p"] = row.p;
    r["eigenphases"] = row.eigenphases;
    r["in_gap"] = row.in_gap;
    out.data["rows"].push_back(std::move(r));
  }
  return out;
}

inline ExperimentOutput run_dispersion(double g, int grid) {
  if (grid < 2) throw std::invalid_argument("grid must have at least 2 points");
  ExperimentOutput out;
  out.config = {{"experiment", "dispersion"}, {"g", g}, {"grid", grid}, {"format", "csv"}};
  out.is_csv = true;
  std::ostringstream csv;
  csv << "p,omega_plus,omega_minus,allowed_plus,allowed_minus,velocity_plus,velocity_minus\n";
  for (int j = 0; j < grid; ++j) {
    double p = -pi + 2 * pi * j / (grid - 1);
    auto d = dispersion(p, g);
    csv << fmt17(p) << ',' << fmt17(d[0].omega) << ',' << fmt17(d[1].omega) << ','
        << (d[0].allowed ? 1 : 0) << ',' << (d[1].allowed ? 1 : 0) << ','
        << fmt17(d[0].group_velocity) << ',' << fmt17(d[1].group_velocity) << '\n';
  }
  out.csv = csv.str();
  return out;
}

inline ExperimentOutput run_velocity(double g, int scan_points) {
  ExperimentOutput out;
  out.config = {{"experiment", "velocity"}, {"g", g}, {"scan_points", scan_points},
                {"format", "json"}};
  out.is_csv = false;
  MaxSpeedReport r = max_speed(g, scan_points);
  out.data = {{"max_speed", r.speed},
              {"p_at", r.p_at},
              {"unconstrained", r.unconstrained},
              {"forbidden_at_pi_half", r.forbidden_at_pi_half}};
  return out;
}

inline ExperimentOutput run_capture(double g, int grid) {
  ExperimentOutput out;
  out.config = {{"experiment", "capture"}, {"g", g}, {"grid", grid}, {"format", "json"}};
  out.is_csv = false;
  out.data["integrated"] = integrated_capture(g, grid);
  out.data["rows"] = json::array();
  for (int j = 0; j < 256; ++j) {
    double p = -pi + 2 * pi * j / 255;
    json row{{"p", p}};
    for (const auto& pt : dispersion(p, g)) {
      std::string key = pt.branch == Branch::Plus ? "plus" : "minus";
      row["allowed_" + key] = pt.allowed;
      row["pcap_" + key] =
          pt.allowed ? capture_probability_closed(pt.omega, eta(p, pt.omega, g)) : 0.0;
    }
    out.data["rows"].push_back(std::move(row));
  }
  return out;
}

inline ExperimentOutput run_boundstate(double g, double p, Branch branch, int cutoff) {
  ExperimentOutput out;
  out.config = {{"experiment", "boundstate"}, {"g", g}, {"p", p},
                {"branch", to_string(branch)}, {"cutoff", cutoff}, {"format", "json"}};
  out.is_csv = false;
  BoundStateRecord rec = bound_state(p, g, branch, cutoff);
  out.data = {{"omega", rec.omega},
              {"eta", rec.eta},
              {"v1_re", rec.v1.real()},
              {"v1_im", rec.v1.imag()},
              {"p_cap", rec.p_cap},
              {"group_velocity", group_velocity(p, g, branch)}};
  out.data["amplitudes"] = json::array();
  for (int m = -rec.cutoff; m <= rec.cutoff; ++m) {
    json row{{"m", m}};
    json comps = json::array();
    for (int c = 0; c < 4; ++c)
      comps.push_back({rec.at(m)[c].real(), rec.at(m)[c].imag()});
    row["components"] = std::move(comps);
    out.data["amplitudes"].push_back(std::move(row));
  }
  return out;
}

inline ExperimentOutput run_asymptotic(double g, int bins, int grid) {
  ExperimentOutput out;
  out.config = {{"experiment", "asymptotic"}, {"g", g}, {"bins", bins}, {"grid", grid},
                {"format", "csv"}};
  out.is_csv = true;
  VelocityHistogram h = asymptotic_distribution(g, bins, grid);
  std::ostringstream csv;
  csv << "v,density\n";
  for (size_t b = 0; b < h.density.size(); ++b)
    csv << fmt17(h.centers[b]) << ',' << fmt17(h.density[b]) << '\n';
  out.csv = csv.str();
  return out;
}

inline ExperimentOutput run_qca(int cells, int t, double g) {
  ExperimentOutput out;
  out.config = {{"experiment", "qca"}, {"M", cells}, {"t", t}, {"g", g}, {"format", "json"}};
  out.is_csv = false;
  GasState gas = GasState::pair_at(cells, cells / 2);
  CellCoin coin(hadamard_coin(), std::polar(1.0, g));
  for (int i = 0; i < t; ++i) gas = qca_step(gas, coin);
  auto occ = occupation_numbers(gas);
  out.data["norm"] = gas.norm();
  out.data["cells"] = json::array();
  for (int x = 0; x < cells; ++x)
    out.data["cells"].push_back(
        {{"cell", x}, {"right_occupation", occ[x].first}, {"left_occupation", occ[x].second}});
  return out;
}

inline ExperimentOutput run_fastmol(int t, int ring_size, int seed) {
  if (ring_size <= 2 * t) throw std::invalid_argument("ring must exceed twice the step count");
  ExperimentOutput out;
  out.config = {{"experiment", "fastmol"}, {"t", t}, {"M", ring_size}, {"seed", seed},
                {"format", "csv"}};
  out.is_csv = true;
  Lattice lat = Lattice::ring(ring_size);
  UnitaryCoin gamma = [&] {
    if (seed == 0)  // the counter-coin interaction; seeds > 0 draw a symmetric block
      return UnitaryCoin(kron(hadamard_coin().matrix(), hadamard_coin().matrix()));
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    std::normal_distribution<double> gauss;
    Mat a(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a(i, j) = cplx(gauss(rng), gauss(rng));
    Eigen::HouseholderQR<Mat> qr(a);
    return symmetric_collision_coin(UnitaryCoin(Mat(qr.householderQ())));
  }();
  StepOperator step = build_interacting_step(hadamard_walk(), gamma, lat);
  TwoParticleState psi(lat, 2);
  psi.at(lat.origin_index(), lat.origin_index(), 0, 0) = 1.0;  // uu pair at the origin
  psi = evolve(psi, step, t);
  Eigen::MatrixXd joint = joint_distribution(psi);
  std::ostringstream csv;
  csv << "x1,x2,probability\n";
  for (int i = 0; i < ring_size; ++i)
    for (int j = 0; j < ring_size; ++j)
      csv << lat.coordinate(i) << ',' << lat.coordinate(j) << ',' << fmt17(joint(i, j)) << '\n';
  out.csv = csv.str();
  return out;
}

inline ExperimentOutput run_defect_synthesis(double eps, double z_angle, int torus_size,
                                             int quad_grid) {
  ExperimentOutput out;
  out.config = {{"experiment", "defect-synthesis"}, {"eps", eps}, {"z_angle", z_angle},
                {"M", torus_size}, {"grid", quad_grid}, {"format", "json"}};
  out.is_csv = false;
  WalkSymbol rel = relative_symbol_2d(flat_walk_2d(eps), 0.0, 0.0);
  cplx z = std::polar(1.0, z_angle);
  DefectOperator R = compute_R(z, rel, quad_grid);
  UnitaryCoin gamma = defect_coin_for(R);
  LemmaReport lemma = check_unitarity_lemma(R);
  Mat block = torus_block(rel, torus_size / 2, gamma.matrix());
  Eigen::VectorXd ph = eigenphases(block);
  double best = pi;
  for (Eigen::Index i = 0; i < ph.size(); ++i) best = std::min(best, circ_dist(ph[i], z_angle));
  out.data = {{"quadrature_residual", R.quadrature_residual},
              {"hermitian_residual", lemma.hermitian_residual},
              {"unitarity_residual", lemma.unitarity_residual},
              {"eigenphase_offset", best},
              {"multiplicity_within_1e-6", count_eigenphases_near(block, z, 1e-6)}};
  return out;
}

}  // namespace qwm
