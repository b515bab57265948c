#include "disslab/construction_two.hpp"

#include "disslab/errors.hpp"
#include "disslab/solver.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

namespace disslab {

// cutoffs

double CutoffSet::tau(int n) const {
  return 0.25 / (1.0 - std::pow(2.0, -1.0 - beta / 2.0)) * std::pow(2.0, -n * (1.0 + beta / 2.0));
}

double CutoffSet::chi(int n, double t) const {
  if (n < N)
    return 0.0;
  const double r0 = T - tau(n) - ell(n), r1 = T - tau(n);
  const double f0 = T - tau(n + 1) - ell(n + 1), f1 = T - tau(n + 1);
  if (t <= r0 || t >= f1)
    return 0.0;
  if (t < r1)
    return std::sin(0.5 * kPi * smoothstep((t - r0) / ell(n)).v);
  if (t <= f0)
    return 1.0;
  return std::cos(0.5 * kPi * smoothstep((t - f0) / ell(n + 1)).v);
}

double CutoffSet::dchi(int n, double t) const {
  if (n < N)
    return 0.0;
  const double r0 = T - tau(n) - ell(n), r1 = T - tau(n);
  const double f0 = T - tau(n + 1) - ell(n + 1), f1 = T - tau(n + 1);
  if (t <= r0 || t >= f1 || (t >= r1 && t <= f0))
    return 0.0;
  if (t < r1) {
    Smooth g = smoothstep((t - r0) / ell(n));
    return std::cos(0.5 * kPi * g.v) * 0.5 * kPi * g.d1 / ell(n);
  }
  Smooth g = smoothstep((t - f0) / ell(n + 1));
  return -std::sin(0.5 * kPi * g.v) * 0.5 * kPi * g.d1 / ell(n + 1);
}

double CutoffSet::sum_sq(double t) const {
  double s = 0.0;
  for (int n = N; n < N + 200; ++n) {
    if (T - tau(n) - ell(n) >= t)
      break;
    double c = chi(n, t);
    s += c * c;
  }
  return s;
}

std::vector<CutoffSet::Piece> CutoffSet::pieces() const {
  std::vector<Piece> out;
  for (int n = N; n <= n_max; ++n) {
    double a = n == N ? 0.0 : T - tau(n);
    double b = T - tau(n + 1) - ell(n + 1);
    out.push_back({n, false, a, b});
    out.push_back({n, true, b, T - tau(n + 1)});
  }
  return out;
}

CutoffSet make_cutoffs(double beta, double eps, int N, int n_max, double safety, double c_override) {
  if (!(eps > 0))
    fail_config("bad_cutoff", "eps must be positive");
  if (!(beta >= 0 && beta < 2))
    fail_config("bad_beta", "beta must lie in [0, 2)");
  if (n_max < N)
    fail_config("bad_cutoff", "n_max must be >= N");
  if (!(safety > 0 && safety < 1))
    fail_config("bad_cutoff", "safety must lie in (0, 1)");
  CutoffSet c;
  c.beta = beta;
  c.eps = eps;
  c.N = N;
  c.n_max = n_max;
  c.T = c.tau(N);
  double cmin = INFINITY;
  for (int n = N; n <= n_max + 1; ++n)
    cmin = std::min(cmin, (c.tau(n) - c.tau(n + 1)) / std::pow(c.tau(n + 1), 1.0 + eps / 4.0));
  c.c_eps = c_override > 0 ? c_override : safety * cmin;
  for (int n = N; n <= n_max + 1; ++n) {
    double gap = c.tau(n) - c.tau(n + 1) - c.ell(n + 1);
    if (!(gap > 0)) {
      std::ostringstream os;
      os << "time-step condition fails at n=" << n << " with c_eps=" << c.c_eps << " (eps=" << eps << ")";
      fail_config("calibration_failure", os.str());
    }
  }
  // derivative bound constant, sampled on each transition
  double dmax = 0.0;
  for (int n = N; n <= n_max + 1; ++n) {
    const double a = c.T - c.tau(n) - c.ell(n);
    for (int i = 1; i < 400; ++i) {
      double t = a + c.ell(n) * i / 400.0;
      dmax = std::max(dmax, std::abs(c.dchi(n, t)) * std::pow(c.tau(n), 1.0 + eps / 4.0));
    }
  }
  c.derivative_constant = dmax;
  return c;
}

double weak_l1(const std::vector<double> &values, const std::vector<double> &weights) {
  std::vector<std::size_t> idx(values.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  double best = 0.0, meas = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    meas += weights[idx[k]];
    if (k + 1 < idx.size() && values[idx[k + 1]] == values[idx[k]])
      continue;
    best = std::max(best, values[idx[k]] * meas);
  }
  return best;
}

namespace {

struct Node {
  double t, w;
};

std::vector<Node> nodes(double a, double b, int order, int split) {
  std::vector<Node> out;
  if (!(b > a))
    return out;
  std::vector<double> x, w;
  gauss_legendre(order, x, w);
  for (int s = 0; s < split; ++s) {
    double lo = a + (b - a) * s / split, hi = a + (b - a) * (s + 1) / split;
    double c = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
    for (int i = 0; i < order; ++i)
      out.push_back({c + r * x[i], r * w[i]});
  }
  return out;
}

int next_pow2(int v) {
  int p = 1;
  while (p < v)
    p <<= 1;
  return p;
}

// f-term layout: U0 U1 A0 A1 A2 L00 L01 L10 L11
constexpr int kTerms = 9;
using Coefs = std::array<double, kTerms>;

struct State {
  double c[2] = {0, 0}, d[2] = {0, 0};
};

Coefs u_coefs(const State &s) {
  Coefs k{};
  k[0] = s.c[0];
  k[1] = s.c[1];
  return k;
}

Coefs f_coefs(const State &s, double nu) {
  Coefs k{};
  k[0] = s.d[0];
  k[1] = s.d[1];
  k[2] = s.c[0] * s.c[0];
  k[3] = s.c[0] * s.c[1];
  k[4] = s.c[1] * s.c[1];
  k[5] = k[6] = -nu * s.c[0];
  k[7] = k[8] = -nu * s.c[1];
  return k;
}

struct ShellData {
  std::array<double, 4> cubic{};           // Pi integrand coefficients in (c0, c1)
  std::array<std::array<double, 2>, 2> g{}; // <S_q U_a, S_q U_b>
};

struct PairScalars {
  int n = 0;
  bool has1 = false;
  double G[kTerms][kTerms] = {};
  std::map<int, ShellData> shells;
  std::vector<std::array<double, 2>> upsi;
  std::vector<std::array<double, 3>> apsi, bpsi;
};

double quad(const double G[kTerms][kTerms], const Coefs &a, const Coefs &b) {
  double s = 0.0;
  for (int i = 0; i < kTerms; ++i) {
    if (a[i] == 0.0)
      continue;
    for (int j = 0; j < kTerms; ++j)
      if (b[j] != 0.0)
        s += a[i] * G[i][j] * b[j];
  }
  return s;
}

std::array<const SepTerm *, kTerms> term_list(const PairBasis &p) {
  return {&p.U[0], &p.U[1], &p.A[0], &p.A[1], &p.A[2], &p.L[0][0], &p.L[0][1], &p.L[1][0], &p.L[1][1]};
}

// physical radius range of the support of U_0 and U_1
std::array<double, 2> radial_range(const PairBasis &p, bool has1) {
  double lo = 1e300, hi = 0.0;
  const int nl = has1 ? 2 : 1;
  for (int l = 0; l < nl; ++l) {
    const SepTerm &u = p.U[l];
    const Grid &g = u.h.grid;
    for (std::size_t j = 0; j < g.points(); ++j) {
      if (u.h.c[0][j] == cplx(0.0, 0.0) && u.h.c[1][j] == cplx(0.0, 0.0))
        continue;
      double r = p.D * std::sqrt(wave_norm2(g.wave(j)));
      lo = std::min(lo, r);
      hi = std::max(hi, std::sqrt(r * r + double(u.e.R) * u.e.R));
    }
  }
  return {lo, hi};
}

// planar test field with a few random divergence-free modes, |k|_inf <= 40, L2 = 1
struct TestField {
  std::vector<std::pair<Wave, std::array<cplx, 2>>> modes; // includes the conjugate partners
};

TestField make_test_field(std::mt19937_64 &rng) {
  std::uniform_int_distribution<int> kd(-40, 40);
  std::normal_distribution<double> nd(0.0, 1.0);
  TestField tf;
  double e = 0.0;
  int count = 0;
  while (count < 6) {
    Wave k{kd(rng), kd(rng), 0};
    if (k[0] == 0 && k[1] == 0)
      continue;
    if (k[0] < 0 || (k[0] == 0 && k[1] < 0))
      continue;
    cplx alpha(nd(rng), nd(rng));
    double kn = std::sqrt(wave_norm2(k));
    std::array<cplx, 2> a{alpha * (-k[1] / kn), alpha * (k[0] / kn)};
    tf.modes.push_back({k, a});
    tf.modes.push_back({Wave{-k[0], -k[1], 0}, {std::conj(a[0]), std::conj(a[1])}});
    e += 2.0 * (std::norm(a[0]) + std::norm(a[1]));
    ++count;
  }
  for (auto &m : tf.modes)
    for (auto &v : m.second)
      v /= std::sqrt(e);
  return tf;
}

// restriction to modes divisible by D, at base level
SpectralField restrict_test(const TestField &tf, const Grid &g, int D) {
  SpectralField out(g, 2, true);
  for (auto &[k, a] : tf.modes) {
    if (k[0] % D || k[1] % D)
      continue;
    Wave kb{k[0] / D, k[1] / D, 0};
    if (std::abs(kb[0]) >= g.nyquist() || std::abs(kb[1]) >= g.nyquist())
      continue;
    out.c[0][g.linear(kb)] += a[0];
    out.c[1][g.linear(kb)] += a[1];
  }
  return out;
}

double plain_inner(const SpectralField &a, const SpectralField &b) {
  double s = 0.0;
  for (int c = 0; c < 2; ++c)
    for (std::size_t j = 0; j < a.size(); ++j)
      s += (a.c[c][j] * std::conj(b.c[c][j])).real();
  return s;
}

PairScalars pair_scalars(const BlockFamily &fam, const PairBasis &p, const std::vector<int> &shell_list,
                         const std::vector<TestField> &tests) {
  PairScalars ps;
  ps.n = p.n;
  ps.has1 = fam.has(p.n + 1);
  auto terms = term_list(p);
  for (int i = 0; i < kTerms; ++i)
    for (int j = i; j < kTerms; ++j)
      ps.G[i][j] = ps.G[j][i] = sep_inner(*terms[i], *terms[j]);

  LPBank bank(2);
  auto rr = radial_range(p, ps.has1);
  for (int q : shell_list) {
    ShellData sd;
    const double lo = 0.75 * bank.lambda(q + 1), hi = bank.lambda(q + 1);
    if (rr[1] <= lo) {
      sd.cubic = {ps.G[2][0], ps.G[2][1] + ps.G[3][0], ps.G[3][1] + ps.G[4][0], ps.G[4][1]};
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          sd.g[a][b] = ps.G[a][b];
    } else if (rr[0] < hi) {
      auto w = [&bank, q](double r) {
        double s = bank.low_symbol(q, r);
        return s * s;
      };
      auto B = [&](const SepTerm &a, const SepTerm &b) { return sep_bilinear(a, b, p.D, w); };
      sd.cubic[0] = B(p.A[0], p.U[0]);
      if (ps.has1) {
        sd.cubic[1] = B(p.A[0], p.U[1]) + B(p.A[1], p.U[0]);
        sd.cubic[2] = B(p.A[1], p.U[1]) + B(p.A[2], p.U[0]);
        sd.cubic[3] = B(p.A[2], p.U[1]);
      }
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          sd.g[a][b] = B(p.U[a], p.U[b]);
    }
    ps.shells[q] = sd;
  }

  // test-field pairings, x3-independent tests only see the packet means
  const Grid &g = p.U[0].h.grid;
  const int D = static_cast<int>(p.D);
  for (const auto &tf : tests) {
    SpectralField psi = restrict_test(tf, g, D);
    std::array<double, 2> up{};
    std::array<double, 3> ap{}, bp{};
    for (int l = 0; l < 2; ++l)
      up[l] = p.U[l].e.coef(0) * plain_inner(p.U[l].h, psi);
    for (int k = 0; k < 3; ++k)
      ap[k] = p.A[k].e.coef(0) * plain_inner(p.A[k].h, psi);
    // int (U_a x U_b) : grad psi
    std::vector<Samples> dpsi[2];
    for (int i = 0; i < 2; ++i) {
      SpectralField gi = gradient(psi.component(i));
      gi *= p.D;
      auto s = inverse(gi);
      dpsi[i] = {s[0], s[1]}; // d_j psi_i
    }
    auto bform = [&](int a, int b) {
      double s = 0.0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          for (std::size_t m = 0; m < g.points(); ++m)
            s += p.X[a][i][m] * p.X[b][j][m] * dpsi[i][j][m];
      return s / g.points();
    };
    const double m00 = p.U[0].e.product(p.U[0].e).coef(0);
    const double m01 = p.U[0].e.product(p.U[1].e).coef(0);
    const double m11 = p.U[1].e.product(p.U[1].e).coef(0);
    bp[0] = m00 * bform(0, 0);
    if (ps.has1) {
      bp[1] = m01 * (bform(0, 1) + bform(1, 0));
      bp[2] = m11 * bform(1, 1);
    }
    ps.upsi.push_back(up);
    ps.apsi.push_back(ap);
    ps.bpsi.push_back(bp);
  }
  return ps;
}

State state_at(const CutoffSet &cut, int n, bool has1, double t, int top = 1 << 30) {
  State s;
  if (n <= top) {
    s.c[0] = cut.chi(n, t);
    s.d[0] = cut.dchi(n, t);
  }
  if (has1 && n + 1 <= top) {
    s.c[1] = cut.chi(n + 1, t);
    s.d[1] = cut.dchi(n + 1, t);
  }
  return s;
}

// physical evaluation of sum_t coef_t e_t(x3) h_t(x_h) for the L^r norms
struct PhysicalTerms {
  std::array<std::vector<Samples>, kTerms> h;
  std::array<Packet, kTerms> e;
};

PhysicalTerms physical_terms(const PairBasis &p) {
  PhysicalTerms pt;
  auto terms = term_list(p);
  for (int i = 0; i < kTerms; ++i) {
    pt.e[i] = terms[i]->e;
    if (i == 0 || i == 5)
      pt.h[i] = p.X[0];
    else if (i == 1 || i == 7)
      pt.h[i] = p.X[1];
    else
      pt.h[i] = inverse(terms[i]->h);
  }
  return pt;
}

std::map<double, double> lr_norms(const PhysicalTerms &pt, const Coefs &k, const std::vector<double> &rs) {
  int Rmax = 0;
  bool any = false;
  for (int i = 0; i < kTerms; ++i)
    if (k[i] != 0.0) {
      Rmax = std::max(Rmax, pt.e[i].R);
      any = true;
    }
  std::map<double, double> out;
  for (double r : rs)
    out[r] = 0.0;
  if (!any)
    return out;
  const int n3 = next_pow2(2 * Rmax + 1);
  std::array<std::vector<double>, kTerms> ez;
  for (int i = 0; i < kTerms; ++i)
    if (k[i] != 0.0)
      ez[i] = pt.e[i].samples(n3);
  const std::size_t np = pt.h[0][0].size();
  std::vector<double> acc(rs.size(), 0.0);
  std::vector<double> f0(np), f1(np);
  for (int z = 0; z < n3; ++z) {
    std::fill(f0.begin(), f0.end(), 0.0);
    std::fill(f1.begin(), f1.end(), 0.0);
    for (int i = 0; i < kTerms; ++i) {
      if (k[i] == 0.0)
        continue;
      const double s = k[i] * ez[i][z];
      const double *h0 = pt.h[i][0].data(), *h1 = pt.h[i][1].data();
      for (std::size_t m = 0; m < np; ++m) {
        f0[m] += s * h0[m];
        f1[m] += s * h1[m];
      }
    }
    for (std::size_t m = 0; m < np; ++m) {
      double a2 = f0[m] * f0[m] + f1[m] * f1[m];
      if (a2 == 0.0)
        continue;
      for (std::size_t ir = 0; ir < rs.size(); ++ir)
        acc[ir] += std::pow(a2, 0.5 * rs[ir]);
    }
  }
  for (std::size_t ir = 0; ir < rs.size(); ++ir)
    out[rs[ir]] = std::pow(acc[ir] / (double(np) * n3), 1.0 / rs[ir]);
  return out;
}

} // namespace

Construction2Result run_construction2(const Construction2Options &opt) {
  const auto clock0 = std::chrono::steady_clock::now();
  if (opt.order < 2 || opt.split < 1 || opt.lr_order < 1 || opt.sum_samples < 1 || opt.weak_samples < 1)
    fail_config("bad_quadrature", "construction2 quadrature settings must be positive");
  for (double r : opt.r_list)
    if (!(r >= 1.0))
      fail_config("bad_exponent", "r_list entries must be >= 1");
  for (int m : opt.m_values)
    if (m < 1)
      fail_config("bad_truncation", "truncation index m must be >= 1");

  Construction2Result res;
  res.options = opt;
  res.family = make_family(opt.blocks);
  const BlockFamily &fam = res.family;
  res.cutoffs = make_cutoffs(fam.beta, opt.eps, fam.N, fam.n_max, opt.safety, opt.c_eps);
  const CutoffSet &cut = res.cutoffs;
  const double T = cut.T;
  for (double h : opt.h_values)
    if (!(h > 0))
      fail_config("bad_h", "h values must be positive");

  // partition of unity
  for (int i = 0; i < opt.sum_samples; ++i) {
    double t = T * i / opt.sum_samples;
    res.sum_sq_defect = std::max(res.sum_sq_defect, std::abs(cut.sum_sq(t) - 1.0));
  }
  res.sum_sq_at_T = cut.sum_sq(T);

  // orthogonality of distinct blocks (dilations up to 4 fit the base grid)
  for (int n = fam.N; n <= fam.n_max; ++n)
    for (int d = 1; d <= 2 && fam.has(n + d); ++d) {
      SepTerm a{fam.packet(n), fam.planar(n)};
      SepTerm b{fam.packet(n + d), dilate(fam.planar(n + d), 1 << d)};
      res.orthogonality = std::max(res.orthogonality, std::abs(sep_inner(a, b)));
    }

  res.top_shell = fam.n_max - 1;
  std::vector<int> shell_list;
  for (int q = std::max(-1, fam.N - 2); q <= res.top_shell; ++q)
    shell_list.push_back(q);

  std::mt19937_64 rng(opt.seed);
  std::vector<TestField> tests;
  for (int j = 0; j < opt.test_fields; ++j)
    tests.push_back(make_test_field(rng));

  // pass 1: scalar data per pair
  std::vector<PairScalars> pairs;
  for (int n = fam.N; n <= fam.n_max; ++n)
    pairs.push_back(pair_scalars(fam, pair_basis(fam, n), shell_list, tests));
  auto pair_of = [&](int n) -> const PairScalars & { return pairs.at(n - fam.N); };
  const auto pieces = cut.pieces();

  auto piece_nodes = [&](const CutoffSet::Piece &pc, double a, double b, int order, int split) {
    return nodes(a, b, order, pc.transition ? split : 1);
  };

  // shells: Pi_q(T,h), Phi_q(T,h)
  for (double h : opt.h_values) {
    for (int q : shell_list) {
      ShellRow row;
      row.q = q;
      row.h = h;
      double work_q = 0.0, work = 0.0;
      for (const auto &pc : pieces) {
        const double a = std::max(pc.a, std::max(0.0, T - h)), b = pc.b;
        if (!(b > a))
          continue;
        const PairScalars &ps = pair_of(pc.n);
        const ShellData &sd = ps.shells.at(q);
        for (const Node &nd : piece_nodes(pc, a, b, opt.order, opt.split)) {
          State s = state_at(cut, pc.n, ps.has1, nd.t);
          const double c0 = s.c[0], c1 = s.c[1];
          const double pi = sd.cubic[0] * c0 * c0 * c0 + sd.cubic[1] * c0 * c0 * c1 + sd.cubic[2] * c0 * c1 * c1 +
                            sd.cubic[3] * c1 * c1 * c1;
          double dq = 0.0;
          for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
              dq += s.d[i] * sd.g[i][j] * s.c[j];
          row.pi += nd.w * pi;
          work_q += nd.w * (dq + pi);
          // past the last stored block the untruncated u keeps ||u|| = 1, so <f,u> = 0 there
          if (!(pc.transition && pc.n == fam.n_max))
            work += nd.w * quad(ps.G, f_coefs(s, 0.0), u_coefs(s));
        }
      }
      row.phi = work_q - work;
      // ||S_q u(T-h)||^2
      const double t0 = std::max(0.0, T - h);
      for (const auto &pc : pieces)
        if (t0 >= pc.a && t0 < pc.b) {
          const PairScalars &ps = pair_of(pc.n);
          State s = state_at(cut, pc.n, ps.has1, t0);
          const ShellData &sd = ps.shells.at(q);
          for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
              row.su_start += s.c[i] * sd.g[i][j] * s.c[j];
          break;
        }
      res.shells.push_back(row);
    }
    double pmax = -INFINITY, fmax = -INFINITY;
    for (const auto &row : res.shells)
      if (row.h == h && row.q > res.top_shell - 3) {
        pmax = std::max(pmax, row.pi);
        fmax = std::max(fmax, row.phi);
      }
    res.pi_amount[h] = pmax;
    res.phi_amount[h] = fmax;
  }

  // truncations
  auto grad_quad = [&](const PairScalars &ps, const State &s) {
    // -<u, Lap u> from the Laplacian terms
    Coefs lap{};
    lap[5] = lap[6] = s.c[0];
    lap[7] = lap[8] = s.c[1];
    return -quad(ps.G, u_coefs(s), lap);
  };
  auto grad_integral = [&](int top, int order, int split) {
    double g = 0.0;
    for (const auto &pc : pieces) {
      const PairScalars &ps = pair_of(pc.n);
      if (pc.n > top)
        continue;
      for (const Node &nd : piece_nodes(pc, pc.a, pc.b, order, split))
        g += nd.w * grad_quad(ps, state_at(cut, pc.n, ps.has1, nd.t, top));
    }
    return g;
  };

  // untruncated family through the analytic cutoffs
  std::vector<double> sample_t;
  for (int i = 0; i < opt.sum_samples; ++i)
    sample_t.push_back(T * i / opt.sum_samples);
  for (int k = fam.N; k <= fam.n_max + 8; ++k)
    sample_t.push_back(T - 0.5 * (cut.tau(k) + cut.tau(k + 1) + cut.ell(k + 1)));

  for (int m : opt.m_values) {
    TruncationRow tr;
    tr.m = m;
    const int top = fam.N + m;
    if (top > fam.n_max)
      fail_config("bad_truncation", "N + m exceeds n_max");
    const double g1 = grad_integral(top, opt.order, opt.split);
    tr.nu = 1.0 / (2.0 * g1);
    tr.nu_scaled = tr.nu * std::pow(fam.lambda(top), 1.0 - fam.beta / 2.0);
    const double g2 = grad_integral(top, opt.order + 16, 2 * opt.split);
    tr.dissipation_residual = std::abs(2.0 * tr.nu * g2 - 1.0);
    double zw = 0.0;
    for (const auto &pc : pieces) {
      const PairScalars &ps = pair_of(pc.n);
      if (pc.n > top)
        continue;
      for (const Node &nd : piece_nodes(pc, pc.a, pc.b, opt.order + 16, 2 * opt.split)) {
        State s = state_at(cut, pc.n, ps.has1, nd.t, top);
        zw += nd.w * quad(ps.G, f_coefs(s, tr.nu), u_coefs(s));
      }
    }
    tr.zero_work_residual = std::abs(zw);
    {
      State s = state_at(cut, fam.N, pair_of(fam.N).has1, 0.0, top);
      tr.energy_start = quad(pair_of(fam.N).G, u_coefs(s), u_coefs(s));
    }
    for (double t : sample_t) {
      double s = 0.0;
      for (int k = top + 1; k < top + 200; ++k) {
        if (T - cut.tau(k) - cut.ell(k) >= t)
          break;
        double c = cut.chi(k, t);
        s += c * c;
      }
      tr.linf_l2 = std::max(tr.linf_l2, std::sqrt(s));
    }
    double l2 = 0.0;
    for (int k = top + 1; k <= top + 40; ++k) {
      const double a = T - cut.tau(k) - cut.ell(k), b = T - cut.tau(k + 1);
      for (const Node &nd : nodes(a, b, opt.order, 4 * opt.split)) {
        double c = cut.chi(k, nd.t);
        l2 += nd.w * c * c;
      }
    }
    tr.l2_l2 = std::sqrt(l2);
    res.truncations.push_back(tr);
  }

  // weak-L1 of ||f(t)||_2
  auto weak_samples = [&](int per) {
    std::vector<double> v, w;
    for (const auto &pc : pieces) {
      const PairScalars &ps = pair_of(pc.n);
      for (int i = 0; i < per; ++i) {
        double t = pc.a + (pc.b - pc.a) * (i + 0.5) / per;
        Coefs f = f_coefs(state_at(cut, pc.n, ps.has1, t), 0.0);
        v.push_back(std::sqrt(std::max(0.0, quad(ps.G, f, f))));
        w.push_back((pc.b - pc.a) / per);
      }
    }
    return weak_l1(v, w);
  };
  res.weak_l1 = weak_samples(opt.weak_samples);
  res.weak_l1_refined = weak_samples(2 * opt.weak_samples);

  // weak residual per test field, w(t) = cos(pi t / 2T)
  std::vector<double> knots{0.0};
  for (const auto &pc : pieces) {
    if (!pc.transition) {
      knots.push_back(pc.b);
      continue;
    }
    for (int s = 1; s <= opt.split; ++s)
      knots.push_back(pc.a + (pc.b - pc.a) * s / opt.split);
  }
  knots.push_back(T);
  auto locate = [&](double t) -> const CutoffSet::Piece * {
    for (const auto &pc : pieces)
      if (t >= pc.a && t <= pc.b)
        return &pc;
    return nullptr;
  };
  TimeWeight tw{[T](double t) { return std::cos(0.5 * kPi * t / T); },
                [T](double t) { return -0.5 * kPi / T * std::sin(0.5 * kPi * t / T); }};
  for (std::size_t j = 0; j < tests.size(); ++j) {
    WeakPairings pr;
    pr.a = [&, j](double t) {
      auto pc = locate(t);
      if (!pc)
        return 0.0;
      const PairScalars &ps = pair_of(pc->n);
      State s = state_at(cut, pc->n, ps.has1, t);
      return s.c[0] * ps.upsi[j][0] + s.c[1] * ps.upsi[j][1];
    };
    pr.b = [&, j](double t) {
      auto pc = locate(t);
      if (!pc)
        return 0.0;
      const PairScalars &ps = pair_of(pc->n);
      State s = state_at(cut, pc->n, ps.has1, t);
      return s.c[0] * s.c[0] * ps.bpsi[j][0] + s.c[0] * s.c[1] * ps.bpsi[j][1] + s.c[1] * s.c[1] * ps.bpsi[j][2];
    };
    pr.c = [&, j](double t) {
      auto pc = locate(t);
      if (!pc)
        return 0.0;
      const PairScalars &ps = pair_of(pc->n);
      State s = state_at(cut, pc->n, ps.has1, t);
      return s.d[0] * ps.upsi[j][0] + s.d[1] * ps.upsi[j][1] + s.c[0] * s.c[0] * ps.apsi[j][0] +
             s.c[0] * s.c[1] * ps.apsi[j][1] + s.c[1] * s.c[1] * ps.apsi[j][2];
    };
    WeakResidualOptions wo;
    wo.knots = knots;
    res.weak_residuals.push_back(std::abs(weak_residual(pr, tw, wo)));
  }

  // pass 2: physical-space norms
  if (opt.force_norms || (opt.onsager && fam.beta == 0.0)) {
    LPBank bank(2);
    std::map<std::size_t, std::map<double, double>> f_only; // piece -> int ||f||_r
    for (auto &tr : res.truncations)
      for (double r : opt.r_list)
        tr.force_lr[r] = 0.0;
    for (int n = fam.N; n <= fam.n_max; ++n) {
      PairBasis p = pair_basis(fam, n);
      const PairScalars &ps = pair_of(n);
      if (opt.force_norms) {
        PhysicalTerms pt = physical_terms(p);
        for (std::size_t ip = 0; ip < pieces.size(); ++ip) {
          const auto &pc = pieces[ip];
          if (pc.n != n)
            continue;
          auto nds = nodes(pc.a, pc.b, opt.lr_order, 1);
          for (auto &tr : res.truncations) {
            const int top = fam.N + tr.m;
            const bool in0 = n <= top, in1 = ps.has1 && n + 1 <= top;
            if (!in0 && f_only.count(ip)) {
              for (double r : opt.r_list)
                tr.force_lr[r] += f_only[ip][r];
              continue;
            }
            std::map<double, double> acc;
            for (const Node &nd : nds) {
              State s = state_at(cut, n, ps.has1, nd.t);
              Coefs k{};
              k[0] = s.d[0] * (in0 ? 0.0 : 1.0);
              k[1] = s.d[1] * (in1 ? 0.0 : 1.0);
              k[2] = s.c[0] * s.c[0] * (in0 ? 0.0 : 1.0);
              k[3] = s.c[0] * s.c[1] * (in0 && in1 ? 0.0 : 1.0);
              k[4] = s.c[1] * s.c[1] * (in1 ? 0.0 : 1.0);
              k[5] = k[6] = in0 ? tr.nu * s.c[0] : 0.0;
              k[7] = k[8] = in1 ? tr.nu * s.c[1] : 0.0;
              for (auto &[r, v] : lr_norms(pt, k, opt.r_list))
                acc[r] += nd.w * v;
            }
            if (!in0)
              f_only[ip] = acc;
            for (double r : opt.r_list)
              tr.force_lr[r] += acc[r];
          }
        }
      }
      if (opt.onsager && fam.beta == 0.0) {
        auto rr = radial_range(p, ps.has1);
        for (int q = std::max(-1, fam.N - 2); q <= res.top_shell; ++q) {
          if (rr[1] <= 0.75 * bank.lambda(q) || rr[0] >= bank.lambda(q + 1))
            continue;
          std::vector<Samples> Y[2];
          for (int l = 0; l < 2; ++l)
            Y[l] = inverse(apply_symbol(p.U[l].h, [&](const Wave &k) {
              return bank.phi(q, p.D * std::sqrt(wave_norm2(k)));
            }));
          const std::size_t np = Y[0][0].size();
          double total = 0.0;
          for (const auto &pc : pieces) {
            if (pc.n != n)
              continue;
            for (const Node &nd : piece_nodes(pc, pc.a, pc.b, opt.order, opt.split)) {
              State s = state_at(cut, n, ps.has1, nd.t);
              double acc = 0.0;
              for (std::size_t m = 0; m < np; ++m) {
                double y0 = s.c[0] * Y[0][0][m] + s.c[1] * Y[1][0][m];
                double y1 = s.c[0] * Y[0][1][m] + s.c[1] * Y[1][1][m];
                double a2 = y0 * y0 + y1 * y1;
                acc += a2 * std::sqrt(a2);
              }
              total += nd.w * acc / np;
            }
          }
          res.onsager[q] += bank.lambda(q) * total;
        }
      }
    }
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock0).count();
  return res;
}

std::vector<VerdictRow> verdict(const Construction2Result &r, const Construction2Result *trend) {
  std::vector<VerdictRow> rows;
  auto fmt = [](double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
  };
  auto row = [&](std::string name, double measured, double tol, std::string detail) {
    VerdictRow v;
    v.name = std::move(name);
    v.measured = measured;
    v.tolerance = tol;
    v.pass = measured <= tol;
    v.detail = std::move(detail);
    rows.push_back(v);
  };
  row("sum_chi_squared", std::max(r.sum_sq_defect, r.sum_sq_at_T), 1e-12,
      "max defect on [0,T) " + fmt(r.sum_sq_defect) + ", value at T " + fmt(r.sum_sq_at_T));
  {
    double l2 = 0, div = 0, cross = 0, fdev = 0, flo = INFINITY, fhi = -INFINITY;
    const bool any = !r.family.certificates.empty();
    for (const auto &c : r.family.certificates) {
      l2 = std::max(l2, std::abs(c.l2 - 1.0));
      div = std::max(div, c.divergence);
      flo = std::min(flo, c.normalized_flux);
      fhi = std::max(fhi, c.normalized_flux);
      fdev = std::max(fdev, std::abs(c.normalized_flux - 2.0));
      for (auto &[q, v] : c.shell_flux)
        if (std::abs(q - c.n) >= 2)
          cross = std::max(cross, std::abs(v));
    }
    const double none = any ? 0.0 : NAN;
    row("block_l2", l2 + none, 1e-10, "max |  ||W_n|| - 1 |");
    row("block_divergence", div + none, 1e-12, "max relative spectral divergence");
    row("block_normalized_flux", fdev + none, 0.2, "normalized flux in [" + fmt(flo) + ", " + fmt(fhi) + "], target 2");
    row("block_cross_shell_flux", cross + none, 1e-12, "max over |q-n| >= 2");
  }
  {
    double dev = r.options.h_values.empty() ? NAN : 0.0;
    std::string d;
    for (const auto &s : r.shells)
      if (s.q == r.top_shell) {
        dev = std::max(dev, std::abs(s.pi - 0.5));
        d += "h=" + fmt(s.h) + ": Pi=" + fmt(s.pi) + " ";
      }
    row("pi_top_shell_half", dev, 0.1, "q=" + std::to_string(r.top_shell) + " " + d);
  }
  {
    // |Phi_q(T,h)| non-increasing over the shells that see u(T-h), and small at the top
    double worst = r.options.h_values.empty() ? NAN : 0.0;
    std::string d;
    for (double h : r.options.h_values) {
      double prev = INFINITY, top = NAN;
      bool mono = true;
      for (const auto &s : r.shells) {
        if (s.h != h || s.su_start <= 0.0)
          continue;
        mono = mono && std::abs(s.phi) <= prev * (1.0 + 1e-9);
        prev = std::abs(s.phi);
        if (s.q == r.top_shell)
          top = s.phi;
      }
      // a monotonicity break counts as a failure whatever the top value
      worst = std::max(worst, mono ? std::abs(top) : double(INFINITY));
      if (std::isnan(top))
        worst = NAN;
      d += "h=" + fmt(h) + ": top Phi=" + fmt(top) + (mono ? " (non-increasing) " : " (not monotone) ");
    }
    row("phi_top_shell_small", worst, 0.05, d);
  }
  {
    double dr = r.truncations.empty() ? NAN : 0.0, zw = dr;
    std::string d;
    for (const auto &t : r.truncations) {
      dr = std::max(dr, t.dissipation_residual);
      zw = std::max(zw, t.zero_work_residual);
      d += "m=" + std::to_string(t.m) + " nu=" + fmt(t.nu) + " ";
    }
    row("dissipation_normalization", dr, 1e-8, d);
    row("zero_work", zw, 1e-6, "max |int <f^nu, u^m>|");
  }
  if (r.family.beta == 0.0) {
    // recorded constant: twice the largest of the first two shells from N on
    double C = 0, hi = r.onsager.empty() ? NAN : 0.0;
    for (auto &[q, v] : r.onsager) {
      if (q >= r.family.N && q <= r.family.N + 1)
        C = std::max(C, 2.0 * v);
      hi = std::isfinite(v) ? std::max(hi, v) : double(NAN);
    }
    row("onsager_shell_bound", C > 0 ? hi : double(NAN), C, "sup over computed shells; tolerance is the recorded constant");
  }
  if (trend) {
    double breaks = trend->truncations.size() >= 2 ? 0.0 : NAN;
    std::string d = "beta=" + fmt(trend->family.beta) + ": m (Linf L2, L1 L1.9)";
    for (std::size_t i = 0; i < trend->truncations.size(); ++i) {
      const auto &t = trend->truncations[i];
      auto it = t.force_lr.find(1.9);
      double fl = it == t.force_lr.end() ? NAN : it->second;
      d += " m=" + std::to_string(t.m) + " (" + fmt(t.linf_l2) + ", " + fmt(fl) + ")";
      if (i > 0) {
        const auto &p = trend->truncations[i - 1];
        auto ip = p.force_lr.find(1.9);
        double pf = ip == p.force_lr.end() ? NAN : ip->second;
        if (!(t.linf_l2 < p.linf_l2))
          breaks += 1;
        if (!(fl < pf))
          breaks += 1;
      }
    }
    row("truncation_convergence_trend", breaks, 0, d + "; measured = monotonicity breaks");
  }
  return rows;
}

} // namespace disslab
