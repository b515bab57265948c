#pragma once

#include "disslab/lp.hpp"
#include "disslab/spectral.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace disslab {

// x3 profile on the unit circle: real even coefficients e[k + R], k = -R..R
struct Packet {
  int R = 0;
  std::vector<double> e{1.0};

  double coef(int k) const { return std::abs(k) > R ? 0.0 : e[k + R]; }
  bool flat() const { return R == 0; }
  static Packet unit();
  // coefficients bump(|k|/width) (-1)^k, L2-normalized; concentrates near x3 = 1/2
  static Packet concentrated(double width);
  Packet product(const Packet &o) const;
  Packet second_derivative() const;
  double l2() const;
  std::vector<double> samples(int n3) const;
  double lr(double r) const; // quadrature on a lattice of 16(R+1) points
};

// e(x3) h(x_h): planar h (2 components) at base level, physical horizontal
// wavevectors are D times the base-grid ones
struct SepTerm {
  Packet e;
  SpectralField h;
};

// sum over k of w(|k|) Re(a_k conj b_k) with |k|^2 = D^2 |k_h|^2 + k3^2 (index units)
double sep_bilinear(const SepTerm &a, const SepTerm &b, double D, const std::function<double(double)> &w);
double sep_inner(const SepTerm &a, const SepTerm &b);

struct TemplateOptions {
  int K = 16;          // inner annulus radius; the template lives in K < |k| < 2K
  int iterations = 1500;
  double step = 0.05;
  double envelope = 0.4 / kTwoPi; // width of the initial localized noise
  std::uint64_t seed = 1;
};

struct PlanarTemplate {
  int K = 16;
  SpectralField v; // unit box, 2 components, L2 = 1, divergence-free
  double normalized_flux = 0;
};

// seeded projected gradient ascent of int (v.grad v).S_q^2 v on the annulus
PlanarTemplate optimize_template(const TemplateOptions &opt);
// int (v.grad v).S_q^2 v on the unit box (exact for band-limited v on a 3x grid)
double planar_flux(const SpectralField &v, int q, const LPBank &bank);

struct BlockOptions {
  double beta = 0.0;
  int N = 4;
  int n_max = 10;
  double target = 2.0;  // normalized flux
  double mu = 0.0;      // packet width factor; 0 picks the value that makes the packet flux factor 1
  bool require_target = true; // false: keep the nearest endpoint when the target is out of reach
  TemplateOptions tmpl;
};

struct BlockCertificate {
  int n = 0;
  double theta = 0;
  double width = 0; // packet width M_n (0 for beta = 0)
  double l2 = 0;
  double divergence = 0;
  double flux = 0;
  double normalized_flux = 0;
  bool target_met = true;
  double support_min = 0, support_max = 0;
  double annulus_lo = 0, annulus_hi = 0;
  std::map<double, double> lr; // r -> ||W_n||_{L^r}
  std::map<int, double> shell_flux; // q -> int div(S_q(W W)).S_q W for q != n
  std::string text() const;
};

struct BlockFamily {
  double beta = 0;
  int N = 4, n_max = 10;
  double mu = 0;
  double target = 2.0;
  bool require_target = true;
  Grid base;         // unit box, 16K points per axis
  SpectralField V;   // optimized template on the base grid
  SpectralField Vs;  // its half-period translate
  double template_flux = 0;
  std::vector<double> theta;     // per n - N
  std::vector<Packet> packets;   // per n - N
  std::vector<BlockCertificate> certificates;

  int K() const { return 1 << N; }
  double lambda(int n) const { return std::ldexp(1.0, n); }
  double tau(int n) const;
  double width(int n) const;
  SpectralField planar(int n) const; // base-level profile of W_n (dilation removed)
  const Packet &packet(int n) const;
  bool has(int n) const { return n >= N && n <= n_max; }
};

BlockFamily make_family(const BlockOptions &opt);
// theta and packet for block n (root-find on the normalized flux), then certify it
BlockCertificate make_block(BlockFamily &fam, int n);
BlockCertificate certify_block(const BlockFamily &fam, int n);

// base-level dilation by an integer factor on the same grid
SpectralField dilate(const SpectralField &h, int factor);
SpectralField half_shift(const SpectralField &h);

// everything needed for times where only W_n and W_{n+1} are active
struct PairBasis {
  int n = 0;
  double D = 1;                 // physical dilation of the base level
  SepTerm U[2];                 // W_n, W_{n+1}
  SepTerm A[3];                 // (U0.grad)U0, (U0.grad)U1 + (U1.grad)U0, (U1.grad)U1
  SepTerm L[2][2];              // Laplacian of U_l as packet'' part and planar part
  double grad2[2] = {0, 0};     // ||grad U_l||^2
  std::vector<Samples> X[2];    // physical planar samples of the base profiles
};
PairBasis pair_basis(const BlockFamily &fam, int n);

} // namespace disslab
