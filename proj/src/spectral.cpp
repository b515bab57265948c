#include "disslab/spectral.hpp"

#include "disslab/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <tuple>

namespace disslab {

namespace {

bool pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// FFTW planning is not thread safe; execution with the new-array interface is.
std::mutex plan_mutex;
std::map<std::tuple<int, int, int>, fftw_plan> plan_cache;

fftw_plan get_plan(const Grid &g, int sign) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto key = std::make_tuple(g.dim, g.n, sign);
  auto it = plan_cache.find(key);
  if (it != plan_cache.end())
    return it->second;
  std::vector<int> dims(g.dim, g.n);
  std::size_t total = g.points();
  auto *buf = fftw_alloc_complex(total);
  fftw_plan p = fftw_plan_dft(g.dim, dims.data(), buf, buf, sign,
                              FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(buf);
  if (!p)
    fail_numeric("fft_plan", "FFTW could not create a plan");
  plan_cache[key] = p;
  return p;
}

void check_same(const SpectralField &a, const SpectralField &b) {
  if (a.grid != b.grid)
    fail_config("grid_mismatch", "fields live on different grids");
  if (a.ncomp != b.ncomp)
    fail_config("component_mismatch", "fields have different component counts");
}

} // namespace

void Grid::validate() const {
  if (dim != 2 && dim != 3) {
    std::ostringstream os;
    os << "grid dimension must be 2 or 3, got " << dim;
    fail_config("bad_grid", os.str());
  }
  if (n < 4 || !pow2(n)) {
    std::ostringstream os;
    os << "n_per_axis must be a power of two >= 4, got " << n;
    fail_config("bad_grid", os.str());
  }
  if (!(length > 0))
    fail_config("bad_grid", "box_length must be positive");
}

std::size_t Grid::points() const {
  std::size_t p = 1;
  for (int d = 0; d < dim; ++d)
    p *= static_cast<std::size_t>(n);
  return p;
}

Wave Grid::wave(std::size_t idx) const {
  Wave k{0, 0, 0};
  for (int d = dim - 1; d >= 0; --d) {
    k[d] = freq(static_cast<int>(idx % n));
    idx /= n;
  }
  return k;
}

std::size_t Grid::linear(const Wave &k) const {
  std::size_t idx = 0;
  for (int d = 0; d < dim; ++d)
    idx = idx * n + index_of(k[d]);
  return idx;
}

SpectralField::SpectralField(const Grid &g, int components, bool is_real)
    : grid(g), ncomp(components), real(is_real) {
  grid.validate();
  c.assign(ncomp, std::vector<cplx>(grid.points(), cplx(0.0, 0.0)));
}

SpectralField &SpectralField::operator+=(const SpectralField &o) {
  check_same(*this, o);
  for (int i = 0; i < ncomp; ++i)
    for (std::size_t j = 0; j < c[i].size(); ++j)
      c[i][j] += o.c[i][j];
  real = real && o.real;
  mean_zero = mean_zero && o.mean_zero;
  return *this;
}

SpectralField &SpectralField::operator-=(const SpectralField &o) {
  check_same(*this, o);
  for (int i = 0; i < ncomp; ++i)
    for (std::size_t j = 0; j < c[i].size(); ++j)
      c[i][j] -= o.c[i][j];
  real = real && o.real;
  mean_zero = mean_zero && o.mean_zero;
  return *this;
}

SpectralField &SpectralField::operator*=(double s) {
  for (auto &comp : c)
    for (auto &v : comp)
      v *= s;
  return *this;
}

SpectralField SpectralField::component(int i) const {
  SpectralField out;
  out.grid = grid;
  out.ncomp = 1;
  out.real = real;
  out.mean_zero = mean_zero;
  out.c = {c.at(i)};
  return out;
}

SpectralField operator+(SpectralField a, const SpectralField &b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField &b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

void fft_forward(const Grid &g, cplx *data) {
  fftw_execute_dft(get_plan(g, FFTW_FORWARD), reinterpret_cast<fftw_complex *>(data),
                   reinterpret_cast<fftw_complex *>(data));
  const double s = 1.0 / static_cast<double>(g.points());
  std::size_t total = g.points();
  for (std::size_t i = 0; i < total; ++i)
    data[i] *= s;
}

void fft_backward(const Grid &g, cplx *data) {
  fftw_execute_dft(get_plan(g, FFTW_BACKWARD), reinterpret_cast<fftw_complex *>(data),
                   reinterpret_cast<fftw_complex *>(data));
}

// 1-D transforms along one axis of a 2-D lattice; forward is scaled by 1/n
void fft_axis(const Grid &g, cplx *data, int axis, int sign) {
  if (g.dim != 2 || axis < 0 || axis > 1)
    fail_config("bad_operator", "axis transforms are defined on 2-D grids");
  fftw_plan p;
  {
    std::lock_guard<std::mutex> lock(plan_mutex);
    static std::map<std::tuple<int, int, int>, fftw_plan> axis_cache;
    auto key = std::make_tuple(g.n, axis, sign);
    auto it = axis_cache.find(key);
    if (it == axis_cache.end()) {
      int nn = g.n;
      int stride = axis == 0 ? g.n : 1;
      int dist = axis == 0 ? 1 : g.n;
      auto *buf = fftw_alloc_complex(g.points());
      p = fftw_plan_many_dft(1, &nn, g.n, buf, nullptr, stride, dist, buf, nullptr, stride, dist,
                             sign > 0 ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
      fftw_free(buf);
      if (!p)
        fail_numeric("fft_plan", "FFTW could not create an axis plan");
      axis_cache[key] = p;
    } else {
      p = it->second;
    }
  }
  fftw_execute_dft(p, reinterpret_cast<fftw_complex *>(data), reinterpret_cast<fftw_complex *>(data));
  if (sign < 0) {
    const double s = 1.0 / g.n;
    for (std::size_t i = 0; i < g.points(); ++i)
      data[i] *= s;
  }
}

SpectralField transform(const Grid &g, const std::vector<Samples> &comps) {
  g.validate();
  SpectralField f(g, static_cast<int>(comps.size()), true);
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (comps[i].size() != g.points()) {
      std::ostringstream os;
      os << "lattice has " << comps[i].size() << " samples, grid expects " << g.points();
      fail_config("dimension_mismatch", os.str());
    }
    auto &dst = f.c[i];
    for (std::size_t j = 0; j < dst.size(); ++j)
      dst[j] = cplx(comps[i][j], 0.0);
    fft_forward(g, dst.data());
  }
  return f;
}

SpectralField transform_complex(const Grid &g, const std::vector<CSamples> &comps) {
  g.validate();
  SpectralField f(g, static_cast<int>(comps.size()), false);
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (comps[i].size() != g.points())
      fail_config("dimension_mismatch", "lattice size does not match grid");
    f.c[i] = comps[i];
    fft_forward(g, f.c[i].data());
  }
  return f;
}

std::vector<CSamples> inverse_complex(const SpectralField &f) {
  std::vector<CSamples> out(f.ncomp);
  for (int i = 0; i < f.ncomp; ++i) {
    out[i] = f.c[i];
    fft_backward(f.grid, out[i].data());
  }
  return out;
}

std::vector<Samples> inverse(const SpectralField &f) {
  std::vector<Samples> out(f.ncomp, Samples(f.size()));
  // two real components share one complex transform
  int i = 0;
  std::vector<cplx> buf(f.size());
  for (; i + 1 < f.ncomp && f.real; i += 2) {
    const auto &a = f.c[i];
    const auto &b = f.c[i + 1];
    for (std::size_t j = 0; j < buf.size(); ++j)
      buf[j] = a[j] + cplx(0.0, 1.0) * b[j];
    fft_backward(f.grid, buf.data());
    for (std::size_t j = 0; j < buf.size(); ++j) {
      out[i][j] = buf[j].real();
      out[i + 1][j] = buf[j].imag();
    }
  }
  for (; i < f.ncomp; ++i) {
    buf = f.c[i];
    fft_backward(f.grid, buf.data());
    for (std::size_t j = 0; j < buf.size(); ++j)
      out[i][j] = buf[j].real();
  }
  return out;
}

std::vector<Samples> sample(const Grid &g, int ncomp, const PointFn &fn) {
  g.validate();
  std::vector<Samples> out(ncomp, Samples(g.points()));
  const double h = g.dx();
  for (std::size_t idx = 0; idx < g.points(); ++idx) {
    std::array<double, 3> x{0, 0, 0};
    std::size_t r = idx;
    for (int d = g.dim - 1; d >= 0; --d) {
      x[d] = h * static_cast<double>(r % g.n);
      r /= g.n;
    }
    auto v = fn(x);
    for (int c = 0; c < ncomp; ++c)
      out[c][idx] = v[c];
  }
  return out;
}

SpectralField from_function(const Grid &g, int ncomp, const PointFn &fn) {
  return transform(g, sample(g, ncomp, fn));
}

SpectralField apply_symbol(const SpectralField &f, const std::function<double(const Wave &)> &sym) {
  SpectralField out = f;
  for (std::size_t j = 0; j < f.size(); ++j) {
    double s = sym(f.grid.wave(j));
    for (int i = 0; i < f.ncomp; ++i)
      out.c[i][j] *= s;
  }
  return out;
}

SpectralField gradient(const SpectralField &f) {
  if (f.ncomp != 1)
    fail_config("bad_operator", "gradient expects a scalar field");
  const Grid &g = f.grid;
  SpectralField out(g, g.dim, f.real);
  out.mean_zero = true;
  const double ks = g.kscale();
  for (std::size_t j = 0; j < f.size(); ++j) {
    Wave k = g.wave(j);
    for (int d = 0; d < g.dim; ++d) {
      double kd = (std::abs(k[d]) == g.nyquist()) ? 0.0 : ks * k[d];
      out.c[d][j] = cplx(0.0, kd) * f.c[0][j];
    }
  }
  return out;
}

SpectralField divergence(const SpectralField &f) {
  const Grid &g = f.grid;
  if (f.ncomp != g.dim)
    fail_config("bad_operator", "divergence expects a vector field with dim components");
  SpectralField out(g, 1, f.real);
  out.mean_zero = true;
  const double ks = g.kscale();
  for (std::size_t j = 0; j < f.size(); ++j) {
    Wave k = g.wave(j);
    cplx s(0.0, 0.0);
    for (int d = 0; d < g.dim; ++d) {
      double kd = (std::abs(k[d]) == g.nyquist()) ? 0.0 : ks * k[d];
      s += cplx(0.0, kd) * f.c[d][j];
    }
    out.c[0][j] = s;
  }
  return out;
}

SpectralField laplacian(const SpectralField &f) {
  const double ks2 = f.grid.kscale() * f.grid.kscale();
  SpectralField out = apply_symbol(f, [ks2](const Wave &k) { return -ks2 * wave_norm2(k); });
  out.mean_zero = true;
  return out;
}

SpectralField differentiate(const SpectralField &f, DiffOp op) {
  switch (op) {
  case DiffOp::gradient:
    return gradient(f);
  case DiffOp::divergence:
    return divergence(f);
  case DiffOp::laplacian:
    return laplacian(f);
  }
  return f;
}

SpectralField dealias(const SpectralField &f) {
  const int kmax = f.grid.dealias_kmax();
  return apply_symbol(f, [kmax](const Wave &k) { return wave_maxabs(k) > kmax ? 0.0 : 1.0; });
}

bool is_dealiased(const SpectralField &f) {
  const int kmax = f.grid.dealias_kmax();
  // transform roundoff from physical-space construction is not support
  const double floor = 64 * std::numeric_limits<double>::epsilon() * max_abs_coeff(f);
  for (std::size_t j = 0; j < f.size(); ++j) {
    if (wave_maxabs(f.grid.wave(j)) <= kmax)
      continue;
    for (int i = 0; i < f.ncomp; ++i)
      if (std::abs(f.c[i][j]) > floor)
        return false;
  }
  return true;
}

double inner_product(const SpectralField &f, const SpectralField &g) {
  check_same(f, g);
  double s = 0.0;
  for (int i = 0; i < f.ncomp; ++i)
    for (std::size_t j = 0; j < f.size(); ++j)
      s += (f.c[i][j] * std::conj(g.c[i][j])).real();
  return s * f.grid.volume();
}

double inner_product_quadrature(const SpectralField &f, const SpectralField &g) {
  check_same(f, g);
  auto a = inverse(f);
  auto b = inverse(g);
  double s = 0.0;
  for (int i = 0; i < f.ncomp; ++i)
    for (std::size_t j = 0; j < f.size(); ++j)
      s += a[i][j] * b[i][j];
  return s * f.grid.cell();
}

double mean(const SpectralField &f, int comp) { return f.c.at(comp)[0].real(); }

double hermitian_defect(const SpectralField &f) {
  double worst = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    Wave k = f.grid.wave(j);
    Wave mk{-k[0], -k[1], -k[2]};
    std::size_t jm = f.grid.linear(mk);
    for (int i = 0; i < f.ncomp; ++i)
      worst = std::max(worst, std::abs(f.c[i][j] - std::conj(f.c[i][jm])));
  }
  return worst;
}

double max_abs_coeff(const SpectralField &f) {
  double m = 0.0;
  for (const auto &comp : f.c)
    for (const auto &v : comp)
      m = std::max(m, std::abs(v));
  return m;
}

SpectralField pointwise_product(const SpectralField &a, int ca, const SpectralField &b, int cb) {
  if (a.grid != b.grid)
    fail_config("grid_mismatch", "product of fields on different grids");
  auto pa = inverse(a.component(ca));
  auto pb = inverse(b.component(cb));
  for (std::size_t j = 0; j < pa[0].size(); ++j)
    pa[0][j] *= pb[0][j];
  return transform(a.grid, pa);
}

double lp_norm_samples(const std::vector<Samples> &s, const Grid &g, double p) {
  const std::size_t npts = s.at(0).size();
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t j = 0; j < npts; ++j) {
      double a2 = 0.0;
      for (const auto &comp : s)
        a2 += comp[j] * comp[j];
      m = std::max(m, std::sqrt(a2));
    }
    return m;
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < npts; ++j) {
    double a2 = 0.0;
    for (const auto &comp : s)
      a2 += comp[j] * comp[j];
    acc += std::pow(a2, 0.5 * p);
  }
  return std::pow(acc * g.cell(), 1.0 / p);
}

double lp_norm(const SpectralField &f, double p) {
  if (!(p >= 1.0))
    fail_config("bad_exponent", "L^p requires p >= 1");
  if (p == 2.0)
    return l2_norm(f);
  return lp_norm_samples(inverse(f), f.grid, p);
}

double l2_norm(const SpectralField &f) {
  double s = 0.0;
  for (const auto &comp : f.c)
    for (const auto &v : comp)
      s += std::norm(v);
  return std::sqrt(s * f.grid.volume());
}

double linf_norm(const SpectralField &f) { return lp_norm_samples(inverse(f), f.grid, INFINITY); }

double mean_zero_tolerance() { return 1e-12; }

double hs_norm(const SpectralField &f, double s) {
  double scale = 0.0;
  for (const auto &comp : f.c)
    scale = std::max(scale, std::abs(comp[0]));
  if (s < 0.0 && scale > mean_zero_tolerance() * std::max(1.0, max_abs_coeff(f)))
    fail_config("nonzero_mean", "negative-order Sobolev norm requested on a field with nonzero mean");
  const double ks = f.grid.kscale();
  double acc = 0.0;
  for (std::size_t j = 1; j < f.size(); ++j) {
    double k2 = ks * ks * wave_norm2(f.grid.wave(j));
    double w = std::pow(k2, s);
    for (const auto &comp : f.c)
      acc += w * std::norm(comp[j]);
  }
  if (s == 0.0)
    for (const auto &comp : f.c)
      acc += std::norm(comp[0]);
  return std::sqrt(acc * f.grid.volume());
}

double hm1_norm(const SpectralField &f) { return hs_norm(f, -1.0); }

double grad_linf(const SpectralField &f) {
  double m = 0.0;
  std::vector<std::vector<Samples>> grads;
  for (int i = 0; i < f.ncomp; ++i)
    grads.push_back(inverse(gradient(f.component(i))));
  const std::size_t npts = f.size();
  for (std::size_t j = 0; j < npts; ++j) {
    double a2 = 0.0;
    for (const auto &gcomp : grads)
      for (const auto &d : gcomp)
        a2 += d[j] * d[j];
    m = std::max(m, std::sqrt(a2));
  }
  return m;
}

NormReport norms(const SpectralField &f, const NormRequest &req) {
  NormReport r;
  std::optional<std::vector<Samples>> phys;
  for (double p : req.lp) {
    if (p == 2.0) {
      r.lp[p] = l2_norm(f);
      continue;
    }
    if (!(p >= 1.0))
      fail_config("bad_exponent", "L^p requires p >= 1");
    if (!phys)
      phys = inverse(f);
    r.lp[p] = lp_norm_samples(*phys, f.grid, p);
  }
  for (double s : req.sobolev)
    r.sobolev[s] = hs_norm(f, s);
  if (req.linf_grad)
    r.linf_grad = grad_linf(f);
  return r;
}

double norm_2p5d(double norm2d, double p, double length) {
  if (std::isinf(p))
    return norm2d;
  return norm2d * std::pow(length, 1.0 / p);
}

} // namespace disslab
