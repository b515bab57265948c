#pragma once

#include "disslab/blocks.hpp"
#include "disslab/construction_one.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace disslab {

// smooth square-root time cutoffs chi_n, defined for every n >= N
struct CutoffSet {
  double beta = 0, eps = 4, c_eps = 0, T = 0;
  int N = 4, n_max = 10;

  double tau(int n) const;
  double ell(int n) const { return c_eps * std::pow(tau(n), 1.0 + eps / 4.0); }
  double chi(int n, double t) const;
  double dchi(int n, double t) const;
  double sum_sq(double t) const; // over every n with chi_n(t) != 0

  struct Piece {
    int n = 0;               // pair index: W_n and W_{n+1} may be active
    bool transition = false; // chi_n falling, chi_{n+1} rising
    double a = 0, b = 0;
  };
  // plateau_n, trans_n for n = N..n_max; u truncated at n_max vanishes afterwards
  std::vector<Piece> pieces() const;
  double derivative_constant = 0; // sup |chi_n'| tau^{1+eps/4} over the support
};

CutoffSet make_cutoffs(double beta, double eps, int N, int n_max, double safety = 0.5, double c_override = 0.0);

struct Construction2Options {
  BlockOptions blocks;
  double eps = 4.0;
  double safety = 0.5;
  double c_eps = 0.0;                     // 0: calibrated
  std::vector<double> h_values{1.0 / 64, 1.0 / 128};
  std::vector<double> r_list{1.5, 1.9};
  std::vector<int> m_values{2, 4, 6};
  int order = 24;                         // Gauss-Legendre nodes per sub-piece
  int split = 4;                          // sub-pieces per transition
  int lr_order = 8;                       // nodes per piece for L^r force norms
  int sum_samples = 1000;
  int test_fields = 10;
  int weak_samples = 64;                  // per piece, doubled for the refinement check
  std::uint64_t seed = 1;
  bool force_norms = true;
  bool onsager = true;
};

struct ShellRow {
  int q = 0;
  double h = 0;
  double pi = 0;        // int <div(u x u), S_q S_q u>
  double phi = 0;       // anomalous work at shell q, from its definition
  double su_start = 0;  // ||S_q u(T-h)||^2
};

struct TruncationRow {
  int m = 0;
  double nu = 0;
  double nu_scaled = 0; // nu_m lambda_{N+m}^{1-beta/2}
  double dissipation_residual = 0; // |2 nu int ||grad u^m||^2 - 1| with an independent quadrature
  double zero_work_residual = 0;
  double energy_start = 0;         // ||u^m(0)||^2
  double linf_l2 = 0;              // sup_t ||u^m - u||_{L2} against the untruncated family
  double l2_l2 = 0;                // (int ||u^m - u||^2 dt)^{1/2}
  std::map<double, double> force_lr; // r -> int ||f^nu - f||_{L^r} dt
};

struct Construction2Result {
  Construction2Options options;
  BlockFamily family;
  CutoffSet cutoffs;
  double sum_sq_defect = 0;   // max |sum chi^2 - 1| on [0, T)
  double sum_sq_at_T = 0;
  double orthogonality = 0;   // max |(W_n, W_n')| over computed n != n'
  std::vector<ShellRow> shells;
  int top_shell = 0;
  std::map<double, double> pi_amount, phi_amount; // h -> max over the top three shells (surrogate)
  std::vector<TruncationRow> truncations;
  std::map<int, double> onsager; // q -> int lambda_q ||Delta_q u||_3^3 dt (beta = 0)
  double weak_l1 = 0, weak_l1_refined = 0;
  std::vector<double> weak_residuals;
  double seconds = 0;
};

Construction2Result run_construction2(const Construction2Options &opt);
std::vector<VerdictRow> verdict(const Construction2Result &r, const Construction2Result *trend = nullptr);

// sup_{s>0} s |{t : v(t) > s}| for samples v_i carrying time weights w_i
double weak_l1(const std::vector<double> &values, const std::vector<double> &weights);

} // namespace disslab
