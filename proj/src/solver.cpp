#include "disslab/solver.hpp"

#include "disslab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace disslab {

namespace {

using CVec = std::vector<cplx>;

// moments mu_j(x) = int_0^1 s^j e^{-x s} ds, j = 0,1,2
void moments(double x, double em, double &m0, double &m1, double &m2) {
  if (x < 1.0) {
    m0 = m1 = m2 = 0.0;
    double term = 1.0; // (-x)^k / k!
    for (int k = 0; k < 30; ++k) {
      m0 += term / (k + 1);
      m1 += term / (k + 2);
      m2 += term / (k + 3);
      term *= -x / (k + 1);
      if (std::abs(term) < 1e-18)
        break;
    }
    return;
  }
  m0 = (1.0 - em) / x;
  m1 = (m0 - em) / x;
  m2 = (2.0 * m1 - em) / x;
}

struct Stepper {
  const Problem &p;
  Grid g;
  std::size_t N;
  int dim;
  std::vector<std::vector<double>> kd; // symbol of d/dx_d, Nyquist zeroed
  std::vector<double> k2;
  std::vector<char> keep;
  double k2max = 0.0;
  CVec buf, buf2;
  std::vector<Samples> vel;
  double cached_h = -1.0;
  std::vector<double> E, Eh;

  explicit Stepper(const Problem &pr) : p(pr), g(pr.datum.grid), N(g.points()), dim(g.dim) {
    kd.assign(dim, std::vector<double>(N));
    k2.resize(N);
    keep.resize(N);
    const double ks = g.kscale();
    const int kmax = g.dealias_kmax();
    for (std::size_t j = 0; j < N; ++j) {
      Wave k = g.wave(j);
      for (int d = 0; d < dim; ++d)
        kd[d][j] = std::abs(k[d]) == g.nyquist() ? 0.0 : ks * k[d];
      k2[j] = ks * ks * wave_norm2(k);
      keep[j] = wave_maxabs(k) <= kmax;
      if (keep[j])
        k2max = std::max(k2max, k2[j]);
    }
    buf.resize(N);
    buf2.resize(N);
    vel.assign(dim, Samples(N));
  }

  void multipliers(double h) {
    if (h == cached_h)
      return;
    cached_h = h;
    E.resize(N);
    Eh.resize(N);
    for (std::size_t j = 0; j < N; ++j) {
      Eh[j] = std::exp(-0.5 * p.nu * k2[j] * h);
      E[j] = Eh[j] * Eh[j];
    }
  }

  // N(t, th) = -P(v . grad th) + source
  void rhs(double t, const CVec &th, CVec &out) {
    out.assign(N, cplx(0.0, 0.0));
    if (p.drift) {
      p.drift.eval(t, vel);
      std::vector<double> acc(N, 0.0);
      int d = 0;
      for (; d + 1 < dim; d += 2) {
        for (std::size_t j = 0; j < N; ++j)
          buf[j] = cplx(0.0, kd[d][j]) * th[j] + cplx(0.0, 1.0) * cplx(0.0, kd[d + 1][j]) * th[j];
        fft_backward(g, buf.data());
        for (std::size_t j = 0; j < N; ++j)
          acc[j] += vel[d][j] * buf[j].real() + vel[d + 1][j] * buf[j].imag();
      }
      for (; d < dim; ++d) {
        for (std::size_t j = 0; j < N; ++j)
          buf[j] = cplx(0.0, kd[d][j]) * th[j];
        fft_backward(g, buf.data());
        for (std::size_t j = 0; j < N; ++j)
          acc[j] += vel[d][j] * buf[j].real();
      }
      for (std::size_t j = 0; j < N; ++j)
        buf[j] = cplx(-acc[j], 0.0);
      fft_forward(g, buf.data());
      for (std::size_t j = 0; j < N; ++j)
        out[j] = keep[j] ? buf[j] : cplx(0.0, 0.0);
    }
    if (p.source) {
      SpectralField s = p.source(t);
      for (std::size_t j = 0; j < N; ++j)
        if (keep[j])
          out[j] += s.c[0][j];
    }
  }

  double source_power(double t, const CVec &th) {
    if (!p.source)
      return 0.0;
    SpectralField s = p.source(t);
    double acc = 0.0;
    for (std::size_t j = 0; j < N; ++j)
      acc += (s.c[0][j] * std::conj(th[j])).real();
    return 2.0 * acc * g.volume();
  }
};

double energy_of(const CVec &c, double vol) {
  double s = 0.0;
  for (const auto &v : c)
    s += std::norm(v);
  return s * vol;
}

double tail_of(const CVec &c, const Grid &g) {
  const int kmax = g.dealias_kmax();
  double tot = 0.0, hi = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    double e = std::norm(c[j]);
    tot += e;
    if (2 * wave_maxabs(g.wave(j)) > kmax)
      hi += e;
  }
  return tot > 0 ? hi / tot : 0.0;
}

double sample_speed(const Drift &drift, double t, const Grid &g) {
  std::vector<Samples> v(g.dim, Samples(g.points()));
  drift.eval(t, v);
  double m = 0.0;
  for (std::size_t j = 0; j < g.points(); ++j) {
    double a = 0.0;
    for (const auto &c : v)
      a += c[j] * c[j];
    m = std::max(m, a);
  }
  return std::sqrt(m);
}

void check_drift(const Problem &p) {
  const Grid &g = p.datum.grid;
  std::vector<Samples> v(g.dim, Samples(g.points()));
  p.drift.eval(p.t0, v);
  SpectralField vf = transform(g, v);
  double div = l2_norm(divergence(vf));
  double scale = std::max(1.0, l2_norm(vf) * g.kscale() * g.nyquist());
  if (div > 1e-10 * scale) {
    std::ostringstream os;
    os << "drift divergence " << div << " exceeds 1e-10 relative";
    fail_config("drift_not_solenoidal", os.str());
  }
}

} // namespace

void EnergyBudget::push(double time, double e, double d, double w, double e0) {
  t.push_back(time);
  E.push_back(e);
  D.push_back(d);
  W.push_back(w);
  residual.push_back(e - e0 + d - w);
}

double EnergyBudget::max_abs_residual() const {
  double m = 0.0;
  for (double r : residual)
    m = std::max(m, std::abs(r));
  return m;
}

bool EnergyBudget::dissipation_monotone() const {
  for (std::size_t i = 1; i < D.size(); ++i)
    if (D[i] < D[i - 1])
      return false;
  return true;
}

std::string EnergyBudget::csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "t,E,D,W,residual\n";
  for (std::size_t i = 0; i < t.size(); ++i)
    os << t[i] << ',' << E[i] << ',' << D[i] << ',' << W[i] << ',' << residual[i] << '\n';
  return os.str();
}

SpectralField heat_multiplier(const SpectralField &f, double nu, double dt) {
  if (nu * dt < 0)
    fail_config("bad_heat_step", "heat multiplier needs nu*dt >= 0");
  const double ks2 = f.grid.kscale() * f.grid.kscale();
  return apply_symbol(f, [&](const Wave &k) { return std::exp(-nu * ks2 * wave_norm2(k) * dt); });
}

double heat_dissipation(const SpectralField &f, double nu, double dt) {
  const double ks2 = f.grid.kscale() * f.grid.kscale();
  double acc = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    double k2 = ks2 * wave_norm2(f.grid.wave(j));
    if (k2 == 0.0)
      continue;
    double loss = -std::expm1(-2.0 * nu * k2 * dt);
    for (const auto &comp : f.c)
      acc += std::norm(comp[j]) * loss;
  }
  return acc * f.grid.volume();
}

double tail_fraction(const SpectralField &f) {
  double tot = 0.0, hi = 0.0;
  for (int i = 0; i < f.ncomp; ++i) {
    double e = energy_of(f.c[i], 1.0);
    tot += e;
    hi += tail_of(f.c[i], f.grid) * e;
  }
  return tot > 0 ? hi / tot : 0.0;
}

double energy(const SpectralField &f) {
  double s = 0.0;
  for (const auto &c : f.c)
    s += energy_of(c, f.grid.volume());
  return s;
}

double dissipation_rate(const SpectralField &f, double nu) {
  double h1 = hs_norm(f, 1.0);
  return 2.0 * nu * h1 * h1;
}

Trajectory integrate(const Problem &p) {
  const SpectralField &u0 = p.datum;
  if (u0.ncomp != 1)
    fail_config("bad_problem", "the solver evolves scalar fields");
  if (p.nu < 0)
    fail_config("bad_problem", "viscosity must be nonnegative");
  if (p.kind == ProblemKind::transport && p.nu != 0.0)
    fail_config("bad_problem", "transport problems need nu = 0");
  if (!(p.t1 >= p.t0))
    fail_config("bad_problem", "empty time span");

  std::vector<double> stops;
  for (double s : p.sample_times)
    if (s > p.t0 && s < p.t1)
      stops.push_back(s);
  for (double s : p.breakpoints)
    if (s > p.t0 && s < p.t1)
      stops.push_back(s);
  stops.push_back(p.t1);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
  std::vector<double> samples = p.sample_times;
  std::sort(samples.begin(), samples.end());

  auto is_sample = [&](double t) { return std::binary_search(samples.begin(), samples.end(), t); };

  Trajectory tr;
  const double vol = u0.grid.volume();
  const double e0 = energy(u0);
  double D = 0.0, W = 0.0;
  tr.budget.push(p.t0, e0, 0.0, 0.0, e0);
  auto fire = [&](double t, const SpectralField &s) {
    for (const auto &cb : p.callbacks)
      cb(t, s);
  };
  if (is_sample(p.t0))
    fire(p.t0, u0);

  if (p.kind == ProblemKind::heat || !p.drift) {
    if (p.source)
      fail_config("bad_problem", "heat problems take no source");
    SpectralField s = u0;
    double t = p.t0;
    for (double stop : stops) {
      D += heat_dissipation(s, p.nu, stop - t);
      s = heat_multiplier(s, p.nu, stop - t);
      t = stop;
      tr.budget.push(t, energy(s), D, W, e0);
      if (is_sample(t) && t < p.t1)
        fire(t, s);
    }
    if (is_sample(p.t1))
      fire(p.t1, s);
    tr.final = s;
    return tr;
  }

  if (!u0.real)
    fail_config("bad_problem", "advected fields must be real");
  if (!is_dealiased(u0))
    fail_numeric("unresolved_datum", "datum has support beyond the dealias band");
  check_drift(p);

  Stepper st(p);
  const std::size_t N = st.N;
  CVec th = u0.c[0];
  CVec n1, n2, n3, n4, u2, u3, u4, nxt(N);
  double t = p.t0;
  bool have_n1 = false;
  double p0 = 0.0;
  bool have_p0 = false;
  const double dx = st.g.dx();
  double min_dt = 1e300;
  const double span = p.t1 - p.t0;

  std::size_t si = 0;
  while (si < stops.size()) {
    const double stop = stops[si];
    if (t >= stop) {
      ++si;
      continue;
    }
    double h = std::min(p.dt_max, stop - t);
    if (p.dt_fixed > 0) {
      h = std::min(p.dt_fixed, stop - t);
    } else {
      for (int it = 0; it < 8; ++it) {
        double vmax = p.drift.max_speed ? p.drift.max_speed(t, t + h) : sample_speed(p.drift, t, st.g);
        if (!std::isfinite(vmax))
          fail_numeric("cfl_collapse", "drift speed is not finite");
        if (vmax <= 0)
          break;
        double hc = p.cfl * dx / vmax;
        if (hc >= h)
          break;
        h = hc;
      }
      // avoid a sliver step just before a stop
      if (stop - t - h < 0.05 * h && stop - t - h > 0)
        h = 0.5 * (stop - t);
    }
    if (p.nu > 0 && st.k2max > 0)
      h = std::min(h, p.max_decay / (2.0 * p.nu * st.k2max));
    if (h < 1e-13 * std::max(1.0, span)) {
      std::ostringstream os;
      os << "time step collapsed to " << h << " at t=" << t;
      fail_numeric("cfl_collapse", os.str());
    }
    if (++tr.steps > p.max_steps)
      fail_numeric("step_budget", "step budget exhausted");
    min_dt = std::min(min_dt, h);
    const bool land = (stop - t - h) <= 1e-14 * std::max(1.0, std::abs(stop));
    const double tn = land ? stop : t + h;
    h = tn - t;

    st.multipliers(h);
    const auto &E = st.E;
    const auto &Eh = st.Eh;
    if (!have_n1)
      st.rhs(t, th, n1);
    if (!have_p0)
      p0 = st.source_power(t, th);
    u2.resize(N);
    for (std::size_t j = 0; j < N; ++j)
      u2[j] = Eh[j] * (th[j] + 0.5 * h * n1[j]);
    st.rhs(t + 0.5 * h, u2, n2);
    u3.resize(N);
    for (std::size_t j = 0; j < N; ++j)
      u3[j] = Eh[j] * th[j] + 0.5 * h * n2[j];
    st.rhs(t + 0.5 * h, u3, n3);
    u4.resize(N);
    for (std::size_t j = 0; j < N; ++j)
      u4[j] = E[j] * th[j] + h * Eh[j] * n3[j];
    st.rhs(tn, u4, n4);
    for (std::size_t j = 0; j < N; ++j)
      nxt[j] = E[j] * th[j] + h / 6.0 * (E[j] * n1[j] + 2.0 * Eh[j] * (n2[j] + n3[j]) + n4[j]);
    CVec nend;
    st.rhs(tn, nxt, nend);

    // ledger: exponentially fitted Simpson per mode on |w|^2, w = e^{nu k^2 s} theta
    double dD = 0.0;
    CVec mid(N);
    for (std::size_t j = 0; j < N; ++j) {
      const double inv = 1.0 / E[j];
      cplx w1 = nxt[j] * inv;
      cplx wm = 0.5 * (th[j] + w1) + h / 8.0 * (n1[j] - nend[j] * inv);
      mid[j] = Eh[j] * wm;
      if (p.nu == 0.0 || st.k2[j] == 0.0)
        continue;
      const double a = 2.0 * p.nu * st.k2[j];
      const double x = a * h;
      double m0, m1, m2;
      moments(x, E[j] * E[j], m0, m1, m2);
      const double w0 = 2.0 * m2 - 3.0 * m1 + m0;
      const double wmid = -4.0 * m2 + 4.0 * m1;
      const double w2 = 2.0 * m2 - m1;
      dD += a * h * (w0 * std::norm(th[j]) + wmid * std::norm(wm) + w2 * std::norm(w1));
    }
    D += dD * vol;
    double p1 = 0.0;
    if (p.source) {
      double pm = st.source_power(t + 0.5 * h, mid);
      p1 = st.source_power(tn, nxt);
      W += h / 6.0 * (p0 + 4.0 * pm + p1);
    }
    th.swap(nxt);
    n1.swap(nend);
    have_n1 = true;
    p0 = p1;
    have_p0 = static_cast<bool>(p.source);
    t = tn;

    double tail = tail_of(th, st.g);
    tr.max_tail = std::max(tr.max_tail, tail);
    if (tail > p.tail_tol) {
      std::ostringstream os;
      os << "spectral tail fraction " << tail << " exceeds " << p.tail_tol << " at t=" << t
         << " (E=" << energy_of(th, vol) << ", D=" << D << ")";
      fail_numeric("spectral_tail", os.str());
    }

    if (land) {
      ++si;
      if (is_sample(t) || t == p.t1) {
        tr.budget.push(t, energy_of(th, vol), D, W, e0);
        if (is_sample(t)) {
          SpectralField s(st.g, 1, true);
          s.c[0] = th;
          fire(t, s);
        }
      }
    }
  }
  tr.final = SpectralField(st.g, 1, true);
  tr.final.c[0] = th;
  tr.final.mean_zero = u0.mean_zero;
  tr.min_dt = min_dt == 1e300 ? 0.0 : min_dt;
  return tr;
}

// Gauss-Legendre

void gauss_legendre(int n, std::vector<double> &x, std::vector<double> &w) {
  static std::mutex mu;
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) {
    x = it->second.first;
    w = it->second.second;
    return;
  }
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-16)
        break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
  cache[n] = {x, w};
}

double integrate_gl(const std::function<double(double)> &fn, double a, double b, int n) {
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  const double c = 0.5 * (a + b), r = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    s += w[i] * fn(c + r * x[i]);
  return s * r;
}

double weak_residual(const WeakPairings &pr, const TimeWeight &tw, const WeakResidualOptions &opt) {
  if (opt.knots.size() < 2)
    fail_config("bad_quadrature", "weak residual needs at least one time segment");
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < opt.knots.size(); ++i) {
    double a = opt.knots[i], b = opt.knots[i + 1];
    if (b <= a)
      continue;
    s += integrate_gl(
        [&](double t) {
          double w = tw.w(t);
          double v = tw.dw(t) * pr.a(t);
          if (w != 0.0)
            v += w * (pr.b(t) + pr.c(t));
          return v;
        },
        a, b, opt.order);
  }
  const double t0 = opt.knots.front();
  return s + tw.w(t0) * pr.a(t0);
}

WeakPairings grid_pairings(std::function<SpectralField(double)> u, std::function<SpectralField(double)> f,
                           const SpectralField &psi) {
  WeakPairings pr;
  pr.a = [u, psi](double t) { return inner_product(u(t), psi); };
  pr.c = [f, psi](double t) { return f ? inner_product(f(t), psi) : 0.0; };
  pr.b = [u, psi](double t) {
    SpectralField uf = u(t);
    const Grid &g = uf.grid;
    auto up = inverse(uf);
    double s = 0.0;
    for (int i = 0; i < g.dim; ++i) {
      auto gp = inverse(gradient(psi.component(i)));
      for (int j = 0; j < g.dim; ++j)
        for (std::size_t k = 0; k < g.points(); ++k)
          s += up[i][k] * up[j][k] * gp[j][k];
    }
    return s * g.cell();
  };
  return pr;
}

} // namespace disslab
