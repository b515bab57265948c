#include "disslab/mixing.hpp"

#include "disslab/errors.hpp"
#include "disslab/lp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace disslab {

namespace {

double max_window() {
  static const double m = [] {
    double best = 0.0;
    for (int i = 1; i < 20000; ++i)
      best = std::max(best, smoothstep(i / 20000.0).d1);
    return best * 1.0001;
  }();
  return m;
}

int other(int axis) { return 1 - axis; }

double square_wave(double s) { return std::tanh(std::sin(s)) / std::tanh(1.0); }

} // namespace

MixingProfile MixingProfile::standard() {
  MixingProfile p;
  // stage rows from an offline greedy search on 512^2, one stage at a time
  p.amplitudes = {
      {1.6532, 1.8868, 0.3107, 1.9214, 1.3433, 1.2539, 0.6024, 1.2165},
      {1.1444, 1.4045, 1.3281, -0.0321, 2.4948, -0.2830, 2.3950, 2.2945},
      {2.6802, -0.3078, 2.7347, 2.1717, 2.1817, 2.4407, -0.7772, 2.5178},
      {0.0599, 2.3246, 0.9605, 2.6014, 4.3027, 0.3726, 4.5973, 4.3218},
      {0.1253, 2.7549, 0.6200, 3.0862, 4.0136, 5.8510, -1.2709, 6.7355},
  };
  p.phases = {
      {4.6066, 2.9939, 3.3256, 1.2369, 5.4149, 1.9041, -0.0341, 1.8117},
      {3.6807, 3.2999, -0.9068, 4.4405, 4.2487, 5.7360, 4.1079, 1.4525},
      {4.0465, 2.5922, 4.1113, 1.7697, 4.4080, 1.3143, 0.9665, 1.3455},
      {2.5933, 1.1850, 3.1749, 1.6060, 3.0208, 2.7171, 2.9359, 2.9882},
      {5.9908, 2.5367, 2.5548, 2.7818, 4.2842, 1.9447, 0.9939, 1.8901},
  };
  return p;
}

int MixerStage::active(double s) const {
  if (s < 0.0 || s > 1.0 || schedule.empty())
    return -1;
  const int J = static_cast<int>(schedule.size());
  int j = static_cast<int>(std::floor(s * J));
  return std::min(j, J - 1);
}

void MixerStage::velocity(double s, std::vector<Samples> &out) const {
  const std::size_t N = grid.points();
  out.assign(2, Samples(N, 0.0));
  int j = active(s);
  if (j < 0)
    return;
  const Shear &sh = schedule[j];
  const int J = static_cast<int>(schedule.size());
  const double b = J * smoothstep(J * s - j).d1;
  if (b == 0.0 || sh.amplitude == 0.0)
    return;
  const double h = grid.dx();
  const int ob = other(sh.axis);
  const double amp = b * sh.amplitude / sh.kappa;
  std::vector<double> prof(grid.n);
  for (int i = 0; i < grid.n; ++i)
    prof[i] = amp * std::sin(sh.kappa * h * i + sh.phase);
  for (std::size_t idx = 0; idx < N; ++idx) {
    int i0 = static_cast<int>(idx / grid.n), i1 = static_cast<int>(idx % grid.n);
    out[sh.axis][idx] = prof[ob == 0 ? i0 : i1];
  }
}

void MixerStage::velocity_dt(double s, std::vector<Samples> &out) const {
  const std::size_t N = grid.points();
  out.assign(2, Samples(N, 0.0));
  int j = active(s);
  if (j < 0)
    return;
  const Shear &sh = schedule[j];
  const int J = static_cast<int>(schedule.size());
  const double b = double(J) * J * smoothstep(J * s - j).d2;
  const double h = grid.dx();
  const int ob = other(sh.axis);
  for (std::size_t idx = 0; idx < N; ++idx) {
    int i0 = static_cast<int>(idx / grid.n), i1 = static_cast<int>(idx % grid.n);
    int i = ob == 0 ? i0 : i1;
    out[sh.axis][idx] = b * sh.amplitude / sh.kappa * std::sin(sh.kappa * h * i + sh.phase);
  }
}

double MixerStage::max_speed(double s0, double s1) const {
  double m = 0.0;
  const int J = static_cast<int>(schedule.size());
  for (int j = 0; j < J; ++j) {
    const Shear &sh = schedule[j];
    if (sh.s1 <= s0 || sh.s0 >= s1)
      continue;
    m = std::max(m, J * max_window() * std::abs(sh.amplitude) / sh.kappa);
  }
  return m;
}

double MixerStage::max_gradient(double s0, double s1) const {
  double m = 0.0;
  const int J = static_cast<int>(schedule.size());
  for (int j = 0; j < J; ++j) {
    const Shear &sh = schedule[j];
    if (sh.s1 <= s0 || sh.s0 >= s1)
      continue;
    m = std::max(m, J * max_window() * std::abs(sh.amplitude));
  }
  return m;
}

Drift MixerStage::drift() const {
  Drift d;
  MixerStage copy = *this;
  d.eval = [copy](double s, std::vector<Samples> &out) { copy.velocity(s, out); };
  d.max_speed = [copy](double a, double b) { return copy.max_speed(a, b); };
  return d;
}

SpectralField checkerboard(int lambda, const Grid &g) {
  if (g.dim != 2)
    fail_config("bad_grid", "the checkerboard lives on a 2-D grid");
  if (lambda < 1 || 2 * lambda >= g.dealias_kmax()) {
    std::ostringstream os;
    os << "checkerboard frequency " << lambda << " is not resolvable on n=" << g.n;
    fail_config("unresolved_stage", os.str());
  }
  SpectralField f = from_function(g, 1, [lambda](const std::array<double, 3> &x) {
    return std::vector<double>{square_wave(lambda * x[0]) * square_wave(lambda * x[1])};
  });
  f = dealias(f);
  f.c[0][0] = 0.0;
  f *= 1.0 / l2_norm(f);
  f.mean_zero = true;
  return f;
}

MixerStage build_stage(int n, int base, const Grid &g, const MixingProfile &profile) {
  if (g.dim != 2)
    fail_config("bad_grid", "mixer stages live on a 2-D grid");
  if (n < 0)
    fail_config("bad_stage", "stage index must be nonnegative");
  const int J = profile.substeps;
  if (J < 1 || static_cast<int>(profile.kpattern.size()) != J)
    fail_config("bad_profile", "kpattern length must equal the number of sub-steps");
  MixerStage st;
  st.n = n;
  st.base = base;
  st.lambda = std::pow(static_cast<double>(base), n);
  st.grid = g;
  double next = st.lambda * base;
  if (next >= g.dealias_kmax()) {
    std::ostringstream os;
    os << "stage " << n << " needs frequency " << next << " but the dealias band ends at " << g.dealias_kmax();
    fail_config("unresolved_stage", os.str());
  }
  std::vector<double> amp(J, 0.0), ph(J, 0.0);
  if (!profile.amplitudes.empty()) {
    int row = std::clamp(n - profile.first_stage, 0, static_cast<int>(profile.amplitudes.size()) - 1);
    amp = profile.amplitudes[row];
    if (static_cast<int>(amp.size()) != J)
      fail_config("bad_profile", "amplitude row length must equal the number of sub-steps");
    if (!profile.phases.empty()) {
      int prow = std::clamp(n - profile.first_stage, 0, static_cast<int>(profile.phases.size()) - 1);
      ph = profile.phases[prow];
      if (static_cast<int>(ph.size()) != J)
        fail_config("bad_profile", "phase row length must equal the number of sub-steps");
    }
  }
  for (int j = 0; j < J; ++j) {
    Shear sh;
    sh.axis = j % 2;
    sh.kappa = std::max(1, static_cast<int>(std::lround(st.lambda * profile.kpattern[j])));
    if (sh.kappa >= g.dealias_kmax())
      fail_config("unresolved_stage", "shear frequency beyond the dealias band");
    sh.amplitude = amp[j];
    sh.phase = ph[j];
    sh.s0 = double(j) / J;
    sh.s1 = double(j + 1) / J;
    st.schedule.push_back(sh);
  }
  return st;
}

StageBounds measure_bounds(const MixerStage &st, int samples_per_substep) {
  StageBounds b;
  const int J = static_cast<int>(st.schedule.size());
  std::vector<Samples> v, vt;
  const double lam = st.lambda;
  for (int j = 0; j < J; ++j)
    for (int i = 1; i <= samples_per_substep; ++i) {
      double s = (j + double(i) / (samples_per_substep + 1)) / J;
      st.velocity(s, v);
      SpectralField vf = transform(st.grid, v);
      b.c0 = std::max(b.c0, lp_norm_samples(v, st.grid, INFINITY) * lam);
      b.c1 = std::max(b.c1, grad_linf(vf));
      SpectralField g1(st.grid, 4, true);
      for (int c = 0; c < 2; ++c) {
        SpectralField gc = gradient(vf.component(c));
        g1.c[2 * c] = gc.c[0];
        g1.c[2 * c + 1] = gc.c[1];
      }
      b.c2 = std::max(b.c2, grad_linf(g1) / lam);
      st.velocity_dt(s, vt);
      b.c0_dt = std::max(b.c0_dt, lp_norm_samples(vt, st.grid, INFINITY) * lam);
    }
  return b;
}

SpectralField shear_map(const SpectralField &rho, const Shear &sh, double frac) {
  const Grid &g = rho.grid;
  if (g.dim != 2 || rho.ncomp != 1)
    fail_config("bad_operator", "shear maps act on 2-D scalars");
  if (frac == 0.0 || sh.amplitude == 0.0)
    return rho;
  SpectralField out = rho;
  auto &c = out.c[0];
  const int ob = other(sh.axis);
  fft_axis(g, c.data(), ob, +1);
  const double h = g.dx();
  const double amp = frac * sh.amplitude / sh.kappa;
  const double ks = g.kscale();
  for (std::size_t idx = 0; idx < g.points(); ++idx) {
    int i0 = static_cast<int>(idx / g.n), i1 = static_cast<int>(idx % g.n);
    int ia = sh.axis == 0 ? i0 : i1;
    int ib = sh.axis == 0 ? i1 : i0;
    int k = g.freq(ia);
    if (std::abs(k) == g.nyquist()) {
      c[idx] = 0.0;
      continue;
    }
    double D = amp * std::sin(sh.kappa * h * ib + sh.phase);
    c[idx] *= std::polar(1.0, -ks * k * D);
  }
  fft_axis(g, c.data(), ob, -1);
  return out;
}

SpectralField stage_map(const SpectralField &rho, const MixerStage &st, double s) {
  SpectralField r = rho;
  const int J = static_cast<int>(st.schedule.size());
  for (int j = 0; j < J; ++j) {
    double sig = std::clamp(J * s - j, 0.0, 1.0);
    if (sig <= 0.0)
      break;
    r = shear_map(r, st.schedule[j], smoothstep(sig).v);
  }
  return r;
}

std::string MixerResult::csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "t,L2,Linf,gradLinf,Hm1\n";
  for (const auto &r : history)
    os << r.t << ',' << r.l2 << ',' << r.linf << ',' << r.grad_linf << ',' << r.hm1 << '\n';
  return os.str();
}

MixerResult run_stage(const MixerStage &st, const SpectralField &rho_in, const MixingProfile &profile,
                      bool strict) {
  if (rho_in.grid != st.grid)
    fail_config("grid_mismatch", "density and stage live on different grids");
  if (std::abs(rho_in.c[0][0]) > mean_zero_tolerance())
    fail_config("nonzero_mean", "mixer input must be mean-zero");
  MixerResult res;
  const int J = static_cast<int>(st.schedule.size());
  auto record = [&](double t, const SpectralField &r) {
    NormReport nr = norms(r, {{2.0, INFINITY}, {-1.0}, true});
    NormRow row{t, nr.lp[2.0], nr.lp[INFINITY], *nr.linf_grad, nr.sobolev[-1.0]};
    res.history.push_back(row);
    res.max_linf = std::max(res.max_linf, row.linf);
    double tail = tail_fraction(r);
    res.max_tail = std::max(res.max_tail, tail);
    if (tail > profile.tail_tol || row.linf > profile.linf_cap)
      res.resolved = res.resolved && tail <= profile.tail_tol;
    if (strict && tail > profile.tail_tol) {
      std::ostringstream os;
      os << "stage " << st.n << ": spectral tail " << tail << " exceeds " << profile.tail_tol << " at t=" << t;
      fail_numeric("resolution_loss", os.str());
    }
    if (strict && row.linf > profile.linf_cap) {
      std::ostringstream os;
      os << "stage " << st.n << ": L^inf " << row.linf << " exceeds " << profile.linf_cap;
      fail_numeric("linf_breach", os.str());
    }
  };
  SpectralField r = rho_in;
  record(0.0, r);
  for (int j = 0; j < J; ++j) {
    const Shear &sh = st.schedule[j];
    record((j + 0.5) / J, shear_map(r, sh, 0.5));
    r = shear_map(r, sh, 1.0);
    record(double(j + 1) / J, r);
  }
  r.mean_zero = true;
  res.rho = r;
  const double l20 = res.history.front().l2;
  for (const auto &row : res.history)
    res.l2_drift = std::max(res.l2_drift, std::abs(row.l2 - l20) / l20);
  res.contraction = res.history.back().hm1 / res.history.front().hm1;
  return res;
}

SpectralField run_stage_solver(const MixerStage &st, const SpectralField &rho_in, double cfl) {
  Problem p;
  p.kind = ProblemKind::transport;
  p.drift = st.drift();
  p.datum = rho_in;
  p.t0 = 0.0;
  p.t1 = 1.0;
  p.cfl = cfl;
  p.tail_tol = 1.0;
  for (std::size_t j = 1; j < st.schedule.size(); ++j)
    p.breakpoints.push_back(st.schedule[j].s0);
  return integrate(p).final;
}

} // namespace disslab
