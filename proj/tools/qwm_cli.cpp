// Command-line experiment runner. One subcommand per experiment; every run prints the
// fully resolved configuration to stdout and writes the data file given by --output.
// Angles accept a pi literal: --g pi, --g 0.5pi, --g -0.25pi, or plain radians.

#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "qwm/experiments.hpp"

using namespace qwm;

namespace {

void finish(const ExperimentOutput& out, const std::string& path) {
  std::cout << out.config.dump() << "\n";
  out.write(path);
  std::cout << "wrote " << path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"interacting two-particle quantum walk laboratory"};
  app.require_subcommand(1);

  std::string g_text = "pi", p_text = "0", z_text = "0.5pi", branch_text = "+", output;
  int t = 50, ring = 128, grid = 2048, bins = 81, cutoff = 12, cells = 12, seed = 0;
  double eps = 0.1;

  auto* evolve_cmd = app.add_subcommand("evolve", "joint position distribution after t steps");
  evolve_cmd->add_option("--g", g_text, "collision phase (pi literal ok)")->capture_default_str();
  evolve_cmd->add_option("--t", t, "number of steps")->capture_default_str();
  evolve_cmd->add_option("--M", ring, "ring size")->capture_default_str();
  evolve_cmd->add_option("--output", output, "CSV path")->default_str("joint.csv");
  evolve_cmd->callback([&] {
    finish(run_evolve(parse_angle(g_text), t, ring), output.empty() ? "joint.csv" : output);
  });

  auto* spectrum_cmd = app.add_subcommand("spectrum", "ring spectrum by total momentum");
  spectrum_cmd->add_option("--M", ring, "ring size")->default_str("28");
  spectrum_cmd->add_option("--g", g_text, "collision phase")->capture_default_str();
  spectrum_cmd->add_option("--band-grid", grid, "momentum samples for band classification")
      ->default_str("512");
  spectrum_cmd->add_option("--output", output, "JSON path")->default_str("spectrum.json");
  spectrum_cmd->callback([&] {
    int m = spectrum_cmd->count("--M") ? ring : 28;
    int bg = spectrum_cmd->count("--band-grid") ? grid : 512;
    finish(run_spectrum(m, parse_angle(g_text), bg), output.empty() ? "spectrum.json" : output);
  });

  auto* disp_cmd = app.add_subcommand("dispersion", "bound-state dispersion over momentum");
  disp_cmd->add_option("--g", g_text, "collision phase")->capture_default_str();
  disp_cmd->add_option("--grid", grid, "momentum samples")->default_str("101");
  disp_cmd->add_option("--output", output, "CSV path")->default_str("dispersion.csv");
  disp_cmd->callback([&] {
    int n = disp_cmd->count("--grid") ? grid : 101;
    finish(run_dispersion(parse_angle(g_text), n), output.empty() ? "dispersion.csv" : output);
  });

  auto* vel_cmd = app.add_subcommand("velocity", "maximal molecule speed");
  vel_cmd->add_option("--g", g_text, "collision phase")->capture_default_str();
  vel_cmd->add_option("--scan", grid, "momentum scan points")->default_str("10000");
  vel_cmd->add_option("--output", output, "JSON path")->default_str("velocity.json");
  vel_cmd->callback([&] {
    int n = vel_cmd->count("--scan") ? grid : 10000;
    finish(run_velocity(parse_angle(g_text), n), output.empty() ? "velocity.json" : output);
  });

  auto* cap_cmd = app.add_subcommand("capture", "capture probability and its p-integral");
  cap_cmd->add_option("--g", g_text, "collision phase")->capture_default_str();
  cap_cmd->add_option("--grid", grid, "quadrature points (>= 2048)")->capture_default_str();
  cap_cmd->add_option("--output", output, "JSON path")->default_str("capture.json");
  cap_cmd->callback([&] {
    finish(run_capture(parse_angle(g_text), grid), output.empty() ? "capture.json" : output);
  });

  auto* bs_cmd = app.add_subcommand("boundstate", "analytic bound-state record");
  bs_cmd->add_option("--g", g_text, "collision phase")->capture_default_str();
  bs_cmd->add_option("--p", p_text, "total momentum (pi literal ok)")->capture_default_str();
  bs_cmd->add_option("--branch", branch_text, "+ or -")->capture_default_str();
  bs_cmd->add_option("--cutoff", cutoff, "amplitude table half-width")->capture_default_str();
  bs_cmd->add_option("--output", output, "JSON path")->default_str("boundstate.json");
  bs_cmd->callback([&] {
    if (branch_text != "+" && branch_text != "-")
      throw CLI::ValidationError("--branch", "must be + or -");
    Branch br = branch_text == "+" ? Branch::Plus : Branch::Minus;
    finish(run_boundstate(parse_angle(g_text), parse_angle(p_text), br, cutoff),
           output.empty() ? "boundstate.json" : output);
  });

  auto* asy_cmd = app.add_subcommand("asymptotic", "long-time velocity distribution");
  asy_cmd->add_option("--g", g_text, "collision phase")->capture_default_str();
  asy_cmd->add_option("--bins", bins, "velocity bins")->capture_default_str();
  asy_cmd->add_option("--grid", grid, "momentum quadrature points")->default_str("8192");
  asy_cmd->add_option("--output", output, "CSV path")->default_str("asymptotic.csv");
  asy_cmd->callback([&] {
    int n = asy_cmd->count("--grid") ? grid : 8192;
    finish(run_asymptotic(parse_angle(g_text), bins, n),
           output.empty() ? "asymptotic.csv" : output);
  });

  auto* qca_cmd = app.add_subcommand("qca", "lattice gas occupation profile");
  qca_cmd->add_option("--M", cells, "number of cells")->capture_default_str();
  qca_cmd->add_option("--t", t, "number of steps")->default_str("6");
  qca_cmd->add_option("--g", g_text, "pair phase of the cell coin")->capture_default_str();
  qca_cmd->add_option("--output", output, "JSON path")->default_str("qca.json");
  qca_cmd->callback([&] {
    int tt = qca_cmd->count("--t") ? t : 6;
    finish(run_qca(cells, tt, parse_angle(g_text)), output.empty() ? "qca.json" : output);
  });

  auto* fm_cmd = app.add_subcommand("fastmol", "fast molecules from symmetric collisions");
  fm_cmd->add_option("--t", t, "number of steps")->default_str("20");
  fm_cmd->add_option("--M", ring, "ring size")->default_str("64");
  fm_cmd->add_option("--seed", seed, "0 = counter-coin, > 0 = random symmetric block")
      ->capture_default_str();
  fm_cmd->add_option("--output", output, "CSV path")->default_str("fastmol.csv");
  fm_cmd->callback([&] {
    int tt = fm_cmd->count("--t") ? t : 20;
    int m = fm_cmd->count("--M") ? ring : 64;
    finish(run_fastmol(tt, m, seed), output.empty() ? "fastmol.csv" : output);
  });

  auto* ds_cmd = app.add_subcommand("defect-synthesis",
                                    "band-gap engineering on the flat 2d walk");
  ds_cmd->add_option("--eps", eps, "coin rotation angle")->capture_default_str();
  ds_cmd->add_option("--z", z_text, "target eigenphase (pi literal ok)")->capture_default_str();
  ds_cmd->add_option("--M", ring, "difference-torus size per axis")->default_str("32");
  ds_cmd->add_option("--grid", grid, "quadrature grid per axis")->default_str("64");
  ds_cmd->add_option("--output", output, "JSON path")->default_str("defect.json");
  ds_cmd->callback([&] {
    int m = ds_cmd->count("--M") ? ring : 32;
    int qg = ds_cmd->count("--grid") ? grid : 64;
    finish(run_defect_synthesis(eps, parse_angle(z_text), m, qg),
           output.empty() ? "defect.json" : output);
  });

  try {
    CLI11_PARSE(app, argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
