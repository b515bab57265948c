#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <vector>

namespace disslab {

using cplx = std::complex<double>;
using Samples = std::vector<double>;
using CSamples = std::vector<cplx>;
using Wave = std::array<int, 3>;

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

struct Grid {
  int dim = 2;
  int n = 64;
  double length = kTwoPi;

  Grid() = default;
  Grid(int d, int npa, double len = kTwoPi) : dim(d), n(npa), length(len) {}

  void validate() const;
  std::size_t points() const;
  int freq(int i) const { return i < (n + 1) / 2 ? i : i - n; }
  int index_of(int k) const { return k >= 0 ? k : k + n; }
  double kscale() const { return kTwoPi / length; }
  double dx() const { return length / n; }
  double volume() const { return std::pow(length, dim); }
  double cell() const { return std::pow(dx(), dim); }
  int nyquist() const { return n / 2; }
  int dealias_kmax() const { return n / 3; }
  Wave wave(std::size_t idx) const;
  std::size_t linear(const Wave &k) const;
  bool operator==(const Grid &o) const {
    return dim == o.dim && n == o.n && length == o.length;
  }
  bool operator!=(const Grid &o) const { return !(*this == o); }
};

inline double wave_norm2(const Wave &k) {
  return double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2];
}
inline int wave_maxabs(const Wave &k) {
  return std::max({std::abs(k[0]), std::abs(k[1]), std::abs(k[2])});
}

// Fourier coefficients c_k = N^{-d} sum_j f(x_j) e^{-i k.x_j}, full (non-halved) lattice.
class SpectralField {
public:
  Grid grid;
  int ncomp = 1;
  bool real = true;
  bool mean_zero = false;
  std::vector<std::vector<cplx>> c;

  SpectralField() = default;
  SpectralField(const Grid &g, int components, bool is_real = true);

  std::size_t size() const { return grid.points(); }
  cplx &at(int comp, const Wave &k) { return c[comp][grid.linear(k)]; }
  cplx at(int comp, const Wave &k) const { return c[comp][grid.linear(k)]; }

  SpectralField &operator+=(const SpectralField &o);
  SpectralField &operator-=(const SpectralField &o);
  SpectralField &operator*=(double s);
  SpectralField component(int i) const;
};

SpectralField operator+(SpectralField a, const SpectralField &b);
SpectralField operator-(SpectralField a, const SpectralField &b);
SpectralField operator*(double s, SpectralField a);

// transforms
SpectralField transform(const Grid &g, const std::vector<Samples> &comps);
SpectralField transform_complex(const Grid &g, const std::vector<CSamples> &comps);
std::vector<Samples> inverse(const SpectralField &f);
std::vector<CSamples> inverse_complex(const SpectralField &f);
void fft_forward(const Grid &g, cplx *data);
void fft_backward(const Grid &g, cplx *data);
// sign < 0 forward (scaled), sign > 0 backward
void fft_axis(const Grid &g, cplx *data, int axis, int sign);

// physical sampling helpers
using PointFn = std::function<std::vector<double>(const std::array<double, 3> &)>;
std::vector<Samples> sample(const Grid &g, int ncomp, const PointFn &fn);
SpectralField from_function(const Grid &g, int ncomp, const PointFn &fn);

// differential operators
enum class DiffOp { gradient, divergence, laplacian };
SpectralField differentiate(const SpectralField &f, DiffOp op);
SpectralField gradient(const SpectralField &f);
SpectralField divergence(const SpectralField &f);
SpectralField laplacian(const SpectralField &f);
SpectralField apply_symbol(const SpectralField &f, const std::function<double(const Wave &)> &sym);

SpectralField dealias(const SpectralField &f);
bool is_dealiased(const SpectralField &f);

double inner_product(const SpectralField &f, const SpectralField &g);
double inner_product_quadrature(const SpectralField &f, const SpectralField &g);
double mean(const SpectralField &f, int comp = 0);
double hermitian_defect(const SpectralField &f);
double max_abs_coeff(const SpectralField &f);

// products formed in physical space (caller guarantees resolution)
SpectralField pointwise_product(const SpectralField &a, int ca, const SpectralField &b, int cb);

struct NormRequest {
  std::vector<double> lp;
  std::vector<double> sobolev;
  bool linf_grad = false;
};

struct NormReport {
  std::map<double, double> lp;
  std::map<double, double> sobolev;
  std::optional<double> linf_grad;
};

NormReport norms(const SpectralField &f, const NormRequest &req);
double lp_norm(const SpectralField &f, double p);
double lp_norm_samples(const std::vector<Samples> &s, const Grid &g, double p);
double l2_norm(const SpectralField &f);
double linf_norm(const SpectralField &f);
double hs_norm(const SpectralField &f, double s);
double hm1_norm(const SpectralField &f);
double grad_linf(const SpectralField &f);
double norm_2p5d(double norm2d, double p, double length);

double mean_zero_tolerance();

} // namespace disslab
