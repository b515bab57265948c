#pragma once

#include "disslab/spectral.hpp"

#include <functional>
#include <string>
#include <vector>

namespace disslab {

enum class ProblemKind { transport, advection_diffusion, heat };

// Drift contract: the solver asks for physical samples at stage times.
struct Drift {
  std::function<void(double t, std::vector<Samples> &out)> eval;
  // bound on max |v| over [t0, t1]; sampled at t0 when absent
  std::function<double(double t0, double t1)> max_speed;
  explicit operator bool() const { return static_cast<bool>(eval); }
};

using Source = std::function<SpectralField(double t)>;
using Callback = std::function<void(double t, const SpectralField &state)>;

struct Problem {
  ProblemKind kind = ProblemKind::advection_diffusion;
  Drift drift;
  Source source;
  double nu = 0.0;
  SpectralField datum;
  double t0 = 0.0, t1 = 1.0;
  std::vector<double> sample_times; // budget rows and callbacks
  std::vector<double> breakpoints;  // steps never straddle these
  std::vector<Callback> callbacks;
  double cfl = 0.5;
  double dt_max = 1e300;
  double dt_fixed = 0.0;
  double max_decay = 2.0; // cap on 2 nu |k|^2 dt
  double tail_tol = 1e-6;
  long max_steps = 20000000;
};

struct EnergyBudget {
  std::vector<double> t, E, D, W, residual;
  void push(double time, double e, double d, double w, double e0);
  double max_abs_residual() const;
  bool dissipation_monotone() const;
  std::string csv() const;
};

struct Trajectory {
  SpectralField final;
  EnergyBudget budget;
  long steps = 0;
  double max_tail = 0.0;
  double min_dt = 0.0;
};

Trajectory integrate(const Problem &p);

SpectralField heat_multiplier(const SpectralField &f, double nu, double dt);
// exact 2 nu int_0^dt ||grad e^{nu Lap s} f||^2 ds
double heat_dissipation(const SpectralField &f, double nu, double dt);
// energy fraction with max|k_i| > kmax/2 (top octave of the retained band)
double tail_fraction(const SpectralField &f);
double energy(const SpectralField &f);
double dissipation_rate(const SpectralField &f, double nu); // 2 nu ||grad f||^2

// Weak formulation with a separable test phi = w(t) psi(x):
//   int w'(t) a(t) + w(t) b(t) + w(t) c(t) dt + w(0) a(0)
// a = <u, psi>, b = <u (x) u, grad psi>, c = <f, psi>.
struct WeakPairings {
  std::function<double(double)> a, b, c;
};
struct TimeWeight {
  std::function<double(double)> w, dw;
};
struct WeakResidualOptions {
  std::vector<double> knots; // segment boundaries including both ends
  int order = 48;
};
double weak_residual(const WeakPairings &pr, const TimeWeight &tw, const WeakResidualOptions &opt);

// pairings from field providers on a grid
WeakPairings grid_pairings(std::function<SpectralField(double)> u, std::function<SpectralField(double)> f,
                           const SpectralField &psi);

// Gauss-Legendre nodes/weights on [-1, 1]
void gauss_legendre(int n, std::vector<double> &x, std::vector<double> &w);
double integrate_gl(const std::function<double(double)> &fn, double a, double b, int n);

} // namespace disslab
