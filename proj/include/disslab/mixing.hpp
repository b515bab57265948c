#pragma once

#include "disslab/solver.hpp"
#include "disslab/spectral.hpp"

#include <string>
#include <vector>

namespace disslab {

// One sub-step: displacement along `axis` by (A/kappa) sin(kappa x_other + phase),
// spread over [s0, s1] with the window J g'(J s - j).
struct Shear {
  int axis = 0;
  int kappa = 1;
  double amplitude = 0.0;
  double phase = 0.0;
  double s0 = 0.0, s1 = 1.0;
};

struct MixingProfile {
  int substeps = 8;
  std::vector<double> kpattern{1, 1, 1, 1, 2, 2, 2, 2};
  // rows are stages first_stage, first_stage+1, ...; the last row repeats
  std::vector<std::vector<double>> amplitudes;
  std::vector<std::vector<double>> phases;
  int first_stage = 0;
  double tail_tol = 1e-6;
  double linf_cap = 10.0;
  static MixingProfile standard();
};

struct MixerStage {
  int n = 0;
  int base = 2;
  double lambda = 1.0;
  Grid grid;
  std::vector<Shear> schedule;

  void velocity(double s, std::vector<Samples> &out) const; // physical samples at stage time s
  void velocity_dt(double s, std::vector<Samples> &out) const;
  double max_speed(double s0, double s1) const; // bound over [s0, s1]
  double max_gradient(double s0, double s1) const;
  Drift drift() const;
  int active(double s) const; // sub-step index, -1 outside
};

struct StageBounds {
  double c0 = 0, c1 = 0, c2 = 0; // ||d^k v||_inf / lambda^{k-1}, k = 0,1,2
  double c0_dt = 0;              // ||d_t v||_inf * lambda
};

struct NormRow {
  double t, l2, linf, grad_linf, hm1;
};

struct MixerResult {
  SpectralField rho;
  std::vector<NormRow> history;
  double contraction = 0.0; // Hm1(end)/Hm1(start)
  double l2_drift = 0.0;
  double max_linf = 0.0;
  double max_tail = 0.0;
  bool resolved = true;
  std::string csv() const;
};

SpectralField checkerboard(int lambda, const Grid &g);
MixerStage build_stage(int n, int base, const Grid &g, const MixingProfile &profile);
StageBounds measure_bounds(const MixerStage &st, int samples_per_substep = 5);

// exact flow map of a single shear over the fraction `frac` of its sub-step
SpectralField shear_map(const SpectralField &rho, const Shear &sh, double frac);
// state at stage time s by composing exact sub-step maps
SpectralField stage_map(const SpectralField &rho, const MixerStage &st, double s);

// strict: throw on tail or L^inf breach; otherwise only flag
MixerResult run_stage(const MixerStage &st, const SpectralField &rho_in, const MixingProfile &profile,
                      bool strict = true);
// same transport through the spectral solver (cross-check path)
SpectralField run_stage_solver(const MixerStage &st, const SpectralField &rho_in, double cfl = 0.5);

} // namespace disslab
