#include "disslab/blocks.hpp"

#include "disslab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace disslab {

namespace {

using CVec = std::vector<cplx>;

SpectralField zero_planar(const Grid &g) { return SpectralField(g, 2, true); }

Samples physical(const Grid &g, const CVec &a) {
  CVec b = a;
  fft_backward(g, b.data());
  Samples s(b.size());
  for (std::size_t j = 0; j < b.size(); ++j)
    s[j] = b[j].real();
  return s;
}

CVec spectral(const Grid &g, const Samples &s) {
  CVec b(s.begin(), s.end());
  fft_forward(g, b.data());
  return b;
}

// d_j h_i in physical space with the gradient scaled by D
std::array<std::array<Samples, 2>, 2> planar_derivs(const SpectralField &h, double D) {
  const Grid &g = h.grid;
  std::array<std::array<Samples, 2>, 2> out;
  CVec b(g.points());
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      for (std::size_t m = 0; m < b.size(); ++m) {
        int kj = g.wave(m)[j];
        double kk = std::abs(kj) == g.nyquist() ? 0.0 : kTwoPi * D * kj;
        b[m] = cplx(0.0, kk) * h.c[i][m];
      }
      out[i][j] = physical(g, b);
    }
  return out;
}

// (a.grad) b for planar base-level fields
SpectralField advect(const std::vector<Samples> &a, const std::array<std::array<Samples, 2>, 2> &db, const Grid &g) {
  std::vector<Samples> r(2, Samples(g.points(), 0.0));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (std::size_t m = 0; m < g.points(); ++m)
        r[i][m] += a[j][m] * db[i][j][m];
  return transform(g, r);
}

double triple_integral(const Packet &p) {
  Packet sq = p.product(p);
  double s = 0.0;
  for (int k = -p.R; k <= p.R; ++k)
    s += sq.coef(k) * p.coef(k);
  return s;
}

SpectralField resample(const SpectralField &f, const Grid &g) {
  SpectralField out(g, f.ncomp, f.real);
  for (std::size_t j = 0; j < f.size(); ++j) {
    Wave k = f.grid.wave(j);
    bool ok = true;
    for (int d = 0; d < 2; ++d)
      ok = ok && std::abs(k[d]) < g.nyquist();
    bool nz = false;
    for (int c = 0; c < f.ncomp; ++c)
      nz = nz || f.c[c][j] != cplx(0.0, 0.0);
    if (!nz)
      continue;
    if (!ok)
      fail_config("unresolved_block", "template does not fit the base grid");
    for (int c = 0; c < f.ncomp; ++c)
      out.c[c][g.linear(k)] = f.c[c][j];
  }
  return out;
}

} // namespace

// packets

Packet Packet::unit() { return Packet{}; }

Packet Packet::concentrated(double width) {
  if (!(width > 0))
    fail_config("bad_packet", "packet width must be positive");
  Packet p;
  p.R = static_cast<int>(std::ceil(width));
  p.e.assign(2 * p.R + 1, 0.0);
  double n2 = 0.0;
  for (int k = -p.R; k <= p.R; ++k) {
    double v = bump(std::abs(k) / width) * ((k & 1) ? -1.0 : 1.0);
    p.e[k + p.R] = v;
    n2 += v * v;
  }
  for (auto &v : p.e)
    v /= std::sqrt(n2);
  return p;
}

Packet Packet::product(const Packet &o) const {
  Packet p;
  p.R = R + o.R;
  p.e.assign(2 * p.R + 1, 0.0);
  for (int a = -R; a <= R; ++a)
    for (int b = -o.R; b <= o.R; ++b)
      p.e[a + b + p.R] += coef(a) * o.coef(b);
  return p;
}

Packet Packet::second_derivative() const {
  Packet p = *this;
  for (int k = -R; k <= R; ++k)
    p.e[k + R] *= -(kTwoPi * k) * (kTwoPi * k);
  return p;
}

double Packet::l2() const {
  double s = 0.0;
  for (double v : e)
    s += v * v;
  return std::sqrt(s);
}

std::vector<double> Packet::samples(int n3) const {
  std::vector<double> s(n3, 0.0);
  for (int j = 0; j < n3; ++j) {
    double x = double(j) / n3;
    for (int k = -R; k <= R; ++k)
      s[j] += coef(k) * std::cos(kTwoPi * k * x);
  }
  return s;
}

double Packet::lr(double r) const {
  auto s = samples(16 * (R + 1));
  if (std::isinf(r)) {
    double m = 0.0;
    for (double v : s)
      m = std::max(m, std::abs(v));
    return m;
  }
  double acc = 0.0;
  for (double v : s)
    acc += std::pow(std::abs(v), r);
  return std::pow(acc / s.size(), 1.0 / r);
}

// bilinear forms

double sep_bilinear(const SepTerm &a, const SepTerm &b, double D, const std::function<double(double)> &w) {
  const Grid &g = a.h.grid;
  if (b.h.grid != g)
    fail_config("grid_mismatch", "separable terms on different base grids");
  const int R = std::min(a.e.R, b.e.R);
  std::vector<double> ee(2 * R + 1);
  double ee_sum = 0.0;
  for (int k = -R; k <= R; ++k) {
    ee[k + R] = a.e.coef(k) * b.e.coef(k);
    ee_sum += ee[k + R];
  }
  double total = 0.0;
  for (std::size_t j = 0; j < g.points(); ++j) {
    double p = 0.0;
    for (int c = 0; c < 2; ++c)
      p += (a.h.c[c][j] * std::conj(b.h.c[c][j])).real();
    if (p == 0.0)
      continue;
    if (!w) {
      total += p * ee_sum;
      continue;
    }
    const double kh2 = D * D * wave_norm2(g.wave(j));
    double s = 0.0;
    for (int k = -R; k <= R; ++k)
      if (ee[k + R] != 0.0)
        s += w(std::sqrt(kh2 + double(k) * k)) * ee[k + R];
    total += p * s;
  }
  return total;
}

double sep_inner(const SepTerm &a, const SepTerm &b) { return sep_bilinear(a, b, 1.0, nullptr); }

// template search

double planar_flux(const SpectralField &v, int q, const LPBank &bank) { return -flux_shell(v, q, bank); }

PlanarTemplate optimize_template(const TemplateOptions &opt) {
  const int K = opt.K;
  if (K < 2 || (K & (K - 1)))
    fail_config("bad_template", "template radius must be a power of two >= 2");
  if (opt.iterations < 0 || !(opt.step > 0) || !(opt.envelope > 0))
    fail_config("bad_template", "template search needs iterations >= 0, step > 0, envelope > 0");
  Grid g(2, 8 * K, 1.0);
  const std::size_t N = g.points();
  std::vector<double> kx(N), ky(N), s2(N);
  std::vector<int> k0(N), k1(N);
  std::vector<char> ann(N);
  for (std::size_t j = 0; j < N; ++j) {
    Wave k = g.wave(j);
    double r = std::sqrt(wave_norm2(k));
    k0[j] = k[0];
    k1[j] = k[1];
    ann[j] = r > K && r < 2 * K;
    kx[j] = kTwoPi * k[0];
    ky[j] = kTwoPi * k[1];
    double s = bump(r / (2.0 * K));
    s2[j] = s * s;
  }
  auto project = [&](CVec &a, CVec &b) {
    for (std::size_t j = 0; j < N; ++j) {
      if (!ann[j]) {
        a[j] = b[j] = 0.0;
        continue;
      }
      cplx d = (double(k0[j]) * a[j] + double(k1[j]) * b[j]) / double(k0[j] * k0[j] + k1[j] * k1[j]);
      a[j] -= double(k0[j]) * d;
      b[j] -= double(k1[j]) * d;
    }
  };
  auto norm2 = [&](const CVec &a, const CVec &b) {
    double s = 0.0;
    for (std::size_t j = 0; j < N; ++j)
      s += std::norm(a[j]) + std::norm(b[j]);
    return s;
  };
  auto deriv = [&](const CVec &a, const std::vector<double> &kk, const std::vector<double> *mul) {
    CVec b(N);
    for (std::size_t j = 0; j < N; ++j)
      b[j] = cplx(0.0, kk[j]) * a[j] * (mul ? (*mul)[j] : 1.0);
    return physical(g, b);
  };
  auto scaled = [&](const CVec &a, const std::vector<double> &m) {
    CVec b(N);
    for (std::size_t j = 0; j < N; ++j)
      b[j] = a[j] * m[j];
    return physical(g, b);
  };

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Samples> init(2, Samples(N));
  const double inv2s2 = 1.0 / (2.0 * opt.envelope * opt.envelope);
  for (int c = 0; c < 2; ++c)
    for (std::size_t j = 0; j < N; ++j) {
      double x = (j / g.n) * g.dx() - 0.5, y = (j % g.n) * g.dx() - 0.5;
      init[c][j] = normal(rng) * std::exp(-(x * x + y * y) * inv2s2);
    }
  CVec a = spectral(g, init[0]), b = spectral(g, init[1]);
  project(a, b);
  double nn = std::sqrt(norm2(a, b));
  for (std::size_t j = 0; j < N; ++j) {
    a[j] /= nn;
    b[j] /= nn;
  }

  auto gradient_step = [&](CVec &ga, CVec &gb) {
    const CVec *u[2] = {&a, &b};
    Samples uu[2], w[2], du[2][2], dw[2][2];
    const std::vector<double> *ks[2] = {&kx, &ky};
    for (int i = 0; i < 2; ++i) {
      uu[i] = physical(g, *u[i]);
      w[i] = scaled(*u[i], s2);
      for (int j = 0; j < 2; ++j) {
        du[i][j] = deriv(*u[i], *ks[j], nullptr);
        dw[i][j] = deriv(*u[i], *ks[j], &s2);
      }
    }
    Samples G[2];
    for (int i = 0; i < 2; ++i) {
      Samples adv_u(N), adv_w(N), t1(N);
      for (std::size_t m = 0; m < N; ++m) {
        adv_u[m] = uu[0][m] * du[i][0][m] + uu[1][m] * du[i][1][m];
        adv_w[m] = uu[0][m] * dw[i][0][m] + uu[1][m] * dw[i][1][m];
        t1[m] = du[0][i][m] * w[0][m] + du[1][i][m] * w[1][m];
      }
      Samples s2adv = scaled(spectral(g, adv_u), s2);
      G[i].resize(N);
      for (std::size_t m = 0; m < N; ++m)
        G[i][m] = t1[m] - adv_w[m] + s2adv[m];
    }
    ga = spectral(g, G[0]);
    gb = spectral(g, G[1]);
    project(ga, gb);
  };

  CVec ga, gb;
  for (int it = 0; it < opt.iterations; ++it) {
    gradient_step(ga, gb);
    double gn = std::sqrt(norm2(ga, gb));
    if (!(gn > 0))
      break;
    for (std::size_t j = 0; j < N; ++j) {
      a[j] += opt.step * ga[j] / gn;
      b[j] += opt.step * gb[j] / gn;
    }
    nn = std::sqrt(norm2(a, b));
    for (std::size_t j = 0; j < N; ++j) {
      a[j] /= nn;
      b[j] /= nn;
    }
  }

  PlanarTemplate t;
  t.K = K;
  t.v = SpectralField(g, 2, true);
  t.v.c[0] = a;
  t.v.c[1] = b;
  // exact Hermitian symmetry
  for (int c = 0; c < 2; ++c)
    for (std::size_t j = 0; j < N; ++j) {
      Wave k = g.wave(j);
      Wave mk{-k[0], -k[1], 0};
      std::size_t jm = g.linear(mk);
      if (jm < j)
        continue;
      cplx v = 0.5 * (t.v.c[c][j] + std::conj(t.v.c[c][jm]));
      t.v.c[c][j] = v;
      t.v.c[c][jm] = std::conj(v);
    }
  t.v *= 1.0 / l2_norm(t.v);
  t.v.mean_zero = true;
  LPBank bank(2);
  int q = 0;
  while ((1 << q) < K)
    ++q;
  t.normalized_flux = planar_flux(t.v, q, bank) / K;
  return t;
}

// family

double BlockFamily::tau(int n) const {
  return 0.25 / (1.0 - std::pow(2.0, -1.0 - beta / 2.0)) * std::pow(lambda(n), -1.0 - beta / 2.0);
}

double BlockFamily::width(int n) const { return beta > 0 ? mu * std::pow(lambda(n), beta) : 0.0; }

const Packet &BlockFamily::packet(int n) const {
  if (!has(n))
    fail_config("bad_block", "block index outside the family");
  return packets.at(n - N);
}

SpectralField BlockFamily::planar(int n) const {
  if (!has(n))
    fail_config("bad_block", "block index outside the family");
  const double th = theta.at(n - N);
  SpectralField v = std::cos(th) * V + std::sin(th) * Vs;
  v *= 1.0 / l2_norm(v);
  v.mean_zero = true;
  return v;
}

SpectralField dilate(const SpectralField &h, int factor) {
  const Grid &g = h.grid;
  SpectralField out(g, h.ncomp, h.real);
  for (std::size_t j = 0; j < h.size(); ++j) {
    bool nz = false;
    for (int c = 0; c < h.ncomp; ++c)
      nz = nz || h.c[c][j] != cplx(0.0, 0.0);
    if (!nz)
      continue;
    Wave k = g.wave(j);
    for (int d = 0; d < g.dim; ++d) {
      k[d] *= factor;
      if (std::abs(k[d]) >= g.nyquist())
        fail_config("unresolved_block", "dilated field does not fit the base grid");
    }
    for (int c = 0; c < h.ncomp; ++c)
      out.c[c][g.linear(k)] = h.c[c][j];
  }
  out.mean_zero = h.mean_zero;
  return out;
}

SpectralField half_shift(const SpectralField &h) {
  SpectralField out = h;
  for (std::size_t j = 0; j < h.size(); ++j) {
    Wave k = h.grid.wave(j);
    if ((k[0] + k[1] + k[2]) & 1)
      for (auto &c : out.c)
        c[j] = -c[j];
  }
  return out;
}

BlockCertificate make_block(BlockFamily &fam, int n) {
  const int idx = n - fam.N;
  if (idx < 0 || idx > fam.n_max - fam.N)
    fail_config("bad_block", "block index outside the family");
  if (static_cast<int>(fam.packets.size()) <= idx) {
    fam.packets.resize(idx + 1);
    fam.theta.resize(idx + 1, 0.0);
  }
  Packet E = fam.beta > 0 ? Packet::concentrated(fam.width(n)) : Packet::unit();
  fam.packets[idx] = E;
  const double D = std::ldexp(1.0, n - fam.N);
  const Grid &g = fam.base;

  // cubic flux form of c V + s Vs
  std::vector<Samples> X0 = inverse(fam.V), X1 = inverse(fam.Vs);
  auto d0 = planar_derivs(fam.V, D), d1 = planar_derivs(fam.Vs, D);
  Packet E2 = E.product(E);
  SepTerm U0{E, fam.V}, U1{E, fam.Vs};
  SepTerm A00{E2, advect(X0, d0, g)};
  SepTerm A01{E2, advect(X0, d1, g) + advect(X1, d0, g)};
  SepTerm A11{E2, advect(X1, d1, g)};
  LPBank bank(2);
  auto S2 = [&](double r) {
    double s = bank.low_symbol(n, r);
    return s * s;
  };
  const double c30 = sep_bilinear(A00, U0, D, S2);
  const double c21 = sep_bilinear(A00, U1, D, S2) + sep_bilinear(A01, U0, D, S2);
  const double c12 = sep_bilinear(A01, U1, D, S2) + sep_bilinear(A11, U0, D, S2);
  const double c03 = sep_bilinear(A11, U1, D, S2);
  const double cross = sep_inner(U0, U1);
  const double scale = std::pow(fam.lambda(n), 1.0 + fam.beta / 2.0);
  auto nflux = [&](double th) {
    double c = std::cos(th), s = std::sin(th);
    double norm = std::sqrt(1.0 + 2.0 * c * s * cross);
    return (c * c * c * c30 + c * c * s * c21 + c * s * s * c12 + s * s * s * c03) / (norm * norm * norm) / scale;
  };
  double lo = 0.0, hi = kPi / 4.0;
  double flo = nflux(lo) - fam.target, fhi = nflux(hi) - fam.target;
  bool met = flo >= 0.0 && fhi <= 0.0;
  if (!met && !fam.require_target) {
    fam.theta[idx] = std::abs(flo) <= std::abs(fhi) ? lo : hi;
    lo = hi = fam.theta[idx];
  } else if (!met) {
    std::ostringstream os;
    os << "normalized flux of block " << n << " spans [" << nflux(hi) << ", " << nflux(lo)
       << "], target " << fam.target << " not bracketed";
    fail_numeric("root_find", os.str());
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    double mid = 0.5 * (lo + hi);
    (nflux(mid) - fam.target >= 0.0 ? lo : hi) = mid;
  }
  fam.theta[idx] = 0.5 * (lo + hi);
  BlockCertificate cert = certify_block(fam, n);
  cert.target_met = met;
  if (static_cast<int>(fam.certificates.size()) <= idx)
    fam.certificates.resize(idx + 1);
  fam.certificates[idx] = cert;
  return cert;
}

BlockCertificate certify_block(const BlockFamily &fam, int n) {
  BlockCertificate c;
  c.n = n;
  c.theta = fam.theta.at(n - fam.N);
  c.width = fam.width(n);
  const Packet &E = fam.packet(n);
  const SpectralField X = fam.planar(n);
  const Grid &g = fam.base;
  const double D = std::ldexp(1.0, n - fam.N);
  SepTerm U{E, X};
  c.l2 = std::sqrt(sep_inner(U, U));

  double div2 = 0.0, grad2 = 0.0, kmin = 1e300, kmax = 0.0;
  for (std::size_t j = 0; j < g.points(); ++j) {
    Wave k = g.wave(j);
    cplx d = double(k[0]) * X.c[0][j] + double(k[1]) * X.c[1][j];
    double a2 = std::norm(X.c[0][j]) + std::norm(X.c[1][j]);
    if (a2 == 0.0)
      continue;
    div2 += std::norm(d);
    grad2 += wave_norm2(k) * a2;
    double r = D * std::sqrt(wave_norm2(k));
    kmin = std::min(kmin, r);
    kmax = std::max(kmax, std::sqrt(r * r + double(E.R) * E.R));
  }
  c.divergence = grad2 > 0 ? std::sqrt(div2 / grad2) : 0.0;
  c.support_min = kmin;
  c.support_max = kmax;
  if (fam.beta > 0) {
    c.annulus_lo = fam.lambda(n) / 2.0;
    c.annulus_hi = 2.0 * fam.lambda(n + 1);
  } else {
    c.annulus_lo = fam.lambda(n);
    c.annulus_hi = fam.lambda(n + 1);
  }

  std::vector<Samples> Xs = inverse(X);
  auto dX = planar_derivs(X, D);
  SepTerm A{E.product(E), advect(Xs, dX, g)};
  LPBank bank(2);
  auto S2 = [&](int q) {
    return [&bank, q](double r) {
      double s = bank.low_symbol(q, r);
      return s * s;
    };
  };
  // flat packets: skew form 1/2 (<(X.grad)X, S^2 X> - <(X.grad)S^2 X, X>), exactly 0 where S is 0 or 1
  auto shell = [&](int q) {
    if (!E.flat())
      return sep_bilinear(A, U, D, S2(q));
    auto w = S2(q);
    SpectralField Y = apply_symbol(X, [&](const Wave &k) { return w(D * std::sqrt(wave_norm2(k))); });
    SepTerm B{A.e, advect(Xs, planar_derivs(Y, D), g)};
    return 0.5 * (sep_bilinear(A, U, D, w) - sep_inner(B, U));
  };
  c.flux = shell(n);
  c.normalized_flux = c.flux / std::pow(fam.lambda(n), 1.0 + fam.beta / 2.0);
  for (int q = std::max(-1, fam.N - 3); q <= fam.n_max + 3; ++q)
    if (q != n)
      c.shell_flux[q] = shell(q);
  for (double r : {1.0, 3.0, double(INFINITY)})
    c.lr[r] = E.lr(r) * (std::isinf(r) ? linf_norm(X) : lp_norm(X, r));
  return c;
}

std::string BlockCertificate::text() const {
  std::ostringstream os;
  os.precision(12);
  os << "block " << n << "\n";
  os << "  theta " << theta << "\n";
  os << "  packet_width " << width << "\n";
  os << "  l2 " << l2 << "\n";
  os << "  divergence_relative " << divergence << "\n";
  os << "  flux " << flux << "\n";
  os << "  normalized_flux " << normalized_flux << (target_met ? "" : " (target not reached)") << "\n";
  os << "  support " << support_min << " " << support_max << " annulus " << annulus_lo << " " << annulus_hi << "\n";
  for (auto &[r, v] : lr)
    os << "  L" << (std::isinf(r) ? std::string("inf") : std::to_string(int(r))) << " " << v << "\n";
  for (auto &[q, v] : shell_flux)
    os << "  shell_flux q=" << q << " " << v << "\n";
  return os.str();
}

BlockFamily make_family(const BlockOptions &opt) {
  if (!(opt.beta >= 0.0 && opt.beta < 2.0))
    fail_config("bad_beta", "beta must lie in [0, 2)");
  if (opt.N < 2 || opt.N > 8)
    fail_config("bad_family", "starting index N must lie in [2, 8]");
  if (opt.n_max < opt.N + 1 || opt.n_max > 40)
    fail_config("bad_family", "n_max must satisfy N + 1 <= n_max <= 40");
  BlockFamily fam;
  fam.beta = opt.beta;
  fam.N = opt.N;
  fam.n_max = opt.n_max;
  fam.target = opt.target;
  fam.require_target = opt.require_target;
  TemplateOptions to = opt.tmpl;
  to.K = 1 << opt.N;
  PlanarTemplate t = optimize_template(to);
  fam.template_flux = t.normalized_flux;
  fam.base = Grid(2, 16 * to.K, 1.0);
  fam.V = resample(t.v, fam.base);
  fam.Vs = half_shift(fam.V);
  if (opt.beta > 0) {
    if (opt.mu > 0) {
      fam.mu = opt.mu;
    } else {
      const double ref = 64.0;
      fam.mu = std::pow(std::sqrt(ref) / triple_integral(Packet::concentrated(ref)), 2.0);
    }
  }
  for (int n = fam.N; n <= fam.n_max; ++n)
    make_block(fam, n);
  return fam;
}

PairBasis pair_basis(const BlockFamily &fam, int n) {
  if (!fam.has(n))
    fail_config("bad_block", "pair index outside the family");
  PairBasis p;
  p.n = n;
  p.D = std::ldexp(1.0, n - fam.N);
  const Grid &g = fam.base;
  SpectralField X0 = fam.planar(n);
  SpectralField X1 = fam.has(n + 1) ? dilate(fam.planar(n + 1), 2) : zero_planar(g);
  Packet E0 = fam.packet(n);
  Packet E1 = fam.has(n + 1) ? fam.packet(n + 1) : Packet::unit();
  p.U[0] = {E0, X0};
  p.U[1] = {E1, X1};
  p.X[0] = inverse(X0);
  p.X[1] = inverse(X1);
  auto d0 = planar_derivs(X0, p.D), d1 = planar_derivs(X1, p.D);
  p.A[0] = {E0.product(E0), advect(p.X[0], d0, g)};
  p.A[1] = {E0.product(E1), advect(p.X[0], d1, g) + advect(p.X[1], d0, g)};
  p.A[2] = {E1.product(E1), advect(p.X[1], d1, g)};
  for (int l = 0; l < 2; ++l) {
    p.L[l][0] = {p.U[l].e.second_derivative(), p.U[l].h};
    p.L[l][1] = {p.U[l].e, (p.D * p.D) * laplacian(p.U[l].h)};
    p.grad2[l] = -(sep_inner(p.U[l], p.L[l][0]) + sep_inner(p.U[l], p.L[l][1]));
  }
  return p;
}

} // namespace disslab
