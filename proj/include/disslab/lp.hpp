#pragma once

#include "disslab/spectral.hpp"

#include <string>
#include <vector>

namespace disslab {

// Flat smoothstep g(s)=psi(s)/(psi(s)+psi(1-s)), psi(s)=exp(-1/s); all derivatives vanish at 0 and 1.
struct Smooth {
  double v = 0, d1 = 0, d2 = 0, d3 = 0;
};
Smooth smoothstep(double s);

// chi(r) = g(4(1-r)): 1 on r <= 3/4, 0 on r >= 1
double bump(double r);

class LPBank {
public:
  explicit LPBank(int base = 2);

  int base() const { return base_; }
  double lambda(int q) const; // q >= -1
  int q_max(const Grid &g) const;
  int q_cover(const Grid &g) const; // shells needed to reach every lattice point

  double phi(int q, double r) const;        // shell profile, q >= -1
  double low_symbol(int q, double r) const; // S_q = sum_{p<=q} phi_p

  SpectralField shell(const SpectralField &u, int q) const;
  SpectralField low_pass(const SpectralField &u, int q) const;
  SpectralField sharp(const SpectralField &u, double cutoff) const; // |k| <= cutoff
  SpectralField sharp_high(const SpectralField &u, double cutoff) const;

  double partition_residual(const Grid &g) const;

private:
  int base_;
  void check_shell(const Grid &g, int q) const;
};

class WeightSequence {
public:
  static WeightSequence inverse_square();
  static WeightSequence shifted_power(double scale, double shift, double power);
  static WeightSequence table(std::vector<double> values, double tail_power);
  static WeightSequence parse(const std::string &spec);

  double operator()(int n) const; // n >= 1
  double sum() const;
  const std::string &name() const { return name_; }

  struct Membership {
    bool in_class = false;
    bool bounds = false, decreasing = false, summable = false, ratio_to_one = false;
    double last_gap = 0; // 1 - a_{P+1}/a_P at the end of the prefix
    int prefix = 0;
  };
  Membership membership(int prefix = 10000, double ratio_tol = 1e-3) const;

private:
  enum class Kind { inverse_square, shifted_power, table } kind_ = Kind::inverse_square;
  std::string name_;
  double scale_ = 1, shift_ = 1, power_ = 2;
  std::vector<double> table_;
  double tail(int from) const; // sum_{n > from}
};

struct ShellSpectrum {
  int base = 2;
  double s = 0, p = 2;
  std::vector<double> lambda; // index 0 is q = -1
  std::vector<double> value;  // lambda_q^s ||Delta_q u||_p
  double running_max_top3() const;
};

ShellSpectrum shell_spectrum(const SpectralField &u, double s, double p, const LPBank &bank);
ShellSpectrum spectrum_from_shell_norms(const std::vector<double> &norms, double s, double p, int base);

double besov_norm(const ShellSpectrum &sp, double r);
double weighted_besov_norm(const ShellSpectrum &sp, const WeightSequence &a);
double besov_norm(const SpectralField &u, double s, double p, double r, const LPBank &bank);
double weighted_besov_norm(const SpectralField &u, double s, double p, const WeightSequence &a,
                           const LPBank &bank, bool require_class = false);
ShellSpectrum c0_tail(const SpectralField &u, double s, double p, const LPBank &bank);

// constants of the two inclusions for a truncated spectrum with q = -1..qtop
double inclusion_sup_constant(const WeightSequence &a, double eps, int base, int qtop);

struct BernsteinReport {
  double lower = 0, middle = 0, upper = 0; // lambda^k||D||_r, ||grad D||_r, lambda^{k+d(1/s-1/r)}||D||_s
  double lower_ratio = 0, upper_ratio = 0;
};
BernsteinReport bernstein_check(const SpectralField &u, int q, double s, double r, const LPBank &bank);

// Pi_q = int S_q(u x u) : grad S_q u, products on the grid (input must be dealiased)
double flux_shell(const SpectralField &u, int q, const LPBank &bank, std::string *warning = nullptr);
// int S_q(v rho) . grad S_q rho
double flux_shell(const SpectralField &v, const SpectralField &rho, int q, const LPBank &bank);

double onsager_integrand(const SpectralField &u, int q, const LPBank &bank);
double mixed_integrand(const SpectralField &v, const SpectralField &rho, int q, const LPBank &bank);

// r_q = S_q(v rho) - v S_q rho - S_q v rho + v rho, vector valued
SpectralField commutator_r(const SpectralField &v, const SpectralField &rho, int q, const LPBank &bank);
double identity_residual(const SpectralField &v, const SpectralField &rho, int q, const LPBank &bank);

} // namespace disslab
