#pragma once

#include "disslab/lp.hpp"
#include "disslab/mixing.hpp"
#include "disslab/solver.hpp"

#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace disslab {

struct TimeSchedule {
  int m = 0;
  int base = 2;
  WeightSequence weights = WeightSequence::inverse_square();
  std::vector<double> nodes; // nodes[n] = t_n^m for n = 1..m+1; nodes[0] unused
  double tau = 0, nu = 0, Lambda = 0;
  bool valid = false;
  std::string diagnostic;

  double lambda(int n) const;
  double node(int n) const { return nodes.at(n); }
  double t_limit(int n) const;          // 1 - (lambda_n a_n)^{-1}
  double gap(int n) const { return node(n + 1) - node(n); }
  double identity_value() const { return nu * Lambda * Lambda * tau; }
};

// check=false skips the validity errors (the algebra is still filled in)
TimeSchedule make_schedule(int m, const WeightSequence &a, int base, bool check = true);

// eta_m: flat-smoothstep chain through the nodes
struct Reparam {
  std::vector<double> nodes; // as in TimeSchedule, nodes[1..last]
  Smooth at(double t) const; // value and derivatives 1..3
  int interval(double t) const; // n with t in [t_n, t_{n+1}), 0 before t_1, -1 after the last node
};
Reparam eta(const TimeSchedule &s);
// limit schedule with nodes t_n for n = 1..n_last
Reparam eta_limit(const WeightSequence &a, int base, int n_last);

// Planar shear sum: each term is coef * sin(kappa x_other + phase) along `axis`.
struct ShearTerm {
  int axis = 0;
  double kappa = 1;
  double phase = 0;
  double coef = 0;
};
using ShearSum = std::vector<ShearTerm>;

double shear_inner(const ShearSum &a, const ShearSum &b, double length = kTwoPi);
double shear_l2(const ShearSum &a, double length = kTwoPi);
ShearSum shear_scaled(const ShearSum &a, double s);
ShearSum shear_laplacian(const ShearSum &a);
ShearSum shear_concat(const ShearSum &a, const ShearSum &b);
double shear_l3_cubed(const ShearSum &a, double length = kTwoPi); // single-term closed form, else quadrature
SpectralField shear_field(const ShearSum &a, const Grid &g);

// Glued drift v^m (or the limit v) as closed-form shear sums.
class GluedFlow {
public:
  GluedFlow(Reparam r, int base, int first_stage, int last_stage, MixingProfile profile);
  ShearSum velocity(double t) const;
  ShearSum velocity_dt(double t) const;
  ShearSum force(double t, double nu) const; // d_t v - nu Lap v ((v.grad)v = 0 for a shear)
  int stage(double t) const;                 // active stage or -1
  std::pair<int, double> local(double t) const; // stage and stage-local time
  double max_speed(double t0, double t1) const;
  // time knots where the integrands are only piecewise smooth
  std::vector<double> knots(double t0, double t1) const;
  const Reparam &reparam() const { return r_; }

private:
  Reparam r_;
  int base_, first_, last_;
  MixingProfile profile_;
};

struct StabilityReport {
  double lhs = 0, rhs = 0;
  bool holds = true;
};
StabilityReport stability_check(double sup_diff2, double diss_theta, double diss_rho, double slack = 1e-3);

struct Construction1Options {
  int grid_max = 1024;
  int resolution_factor = 8;
  int samples = 64;
  double cfl = 0.5;
  double tail_tol = 1e-6;
  int gl_order = 8;
  MixingProfile profile = MixingProfile::standard();
  std::string snapshot_dir; // empty: no snapshots
};

struct MemberResult {
  int m = 0;
  int grid_n = 0;
  TimeSchedule schedule;
  EnergyBudget budget;
  double total_dissipation = 0;
  double final_energy = 0;
  double low_mode = 0;   // ||P_{<=Lambda} theta(t_{m+1})||
  double high_mode2 = 0; // ||P_{>Lambda} theta(1)||^2
  double budget_residual = 0;
  StabilityReport stability;
  double rho_l2_drift = 0;
  double rho_tail = 0;
  double theta_tail = 0;
  std::vector<int> shells;
  std::vector<double> onsager_v; // int lambda_q ||Delta_q v||_3^3 dt
  std::vector<double> mixed;      // int lambda_q ||Delta_q v||_3 ||Delta_q rho||_3^2 dt
  double force_l1l2 = 0;          // ||g^m||_{L1 L2}
  double viscous_force_l1l2 = 0;  // nu_m ||Lap v^m||_{L1 L2}
  double force_gap = 0;           // ||g^m - g||_{L1 L2}
  double work = 0;                // 2 int <g^m, v^m>
  double v_dissipation = 0;       // 2 nu_m int ||grad v^m||^2
  double wall_seconds = 0;
  bool aborted = false; // solver stopped early; theta quantities are NaN
  std::string abort_reason;
  double abort_time = 0; // last sample time reached
  std::string budget_csv() const { return budget.csv(); }
};

int member_grid(int m, int base, const Construction1Options &opt);
MemberResult run_family_member(int m, const WeightSequence &a, int base, const Construction1Options &opt);

struct VerdictRow {
  std::string name;
  bool pass = false;
  std::string detail;
  double measured = NAN;  // compared with tolerance through relation
  double tolerance = NAN;
  std::string relation = "<=";
};
std::vector<VerdictRow> verdict(const std::vector<MemberResult> &family);

} // namespace disslab
