#include "disslab/construction_one.hpp"

#include "disslab/errors.hpp"
#include "disslab/storage.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

namespace disslab {

namespace {

// sigma in [0,1] with g(sigma) = y
double smoothstep_inverse(double y) {
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
    double mid = 0.5 * (lo + hi);
    (smoothstep(mid).v < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

const std::vector<double> &profile_row(const std::vector<std::vector<double>> &rows, int idx, int J) {
  if (rows.empty()) {
    static std::vector<double> zeros;
    zeros.assign(J, 0.0);
    return zeros;
  }
  return rows[std::clamp(idx, 0, static_cast<int>(rows.size()) - 1)];
}

int next_pow2(double x) {
  int n = 1;
  while (n < x)
    n *= 2;
  return n;
}

void samples_of(const ShearSum &a, const Grid &g, std::vector<Samples> &out) {
  out.assign(2, Samples(g.points(), 0.0));
  const double h = g.dx();
  const double ks = g.kscale();
  for (const auto &t : a) {
    std::vector<double> prof(g.n);
    for (int i = 0; i < g.n; ++i)
      prof[i] = t.coef * std::sin(ks * t.kappa * h * i + t.phase);
    const int ob = 1 - t.axis;
    for (std::size_t idx = 0; idx < g.points(); ++idx) {
      int i0 = static_cast<int>(idx / g.n), i1 = static_cast<int>(idx % g.n);
      out[t.axis][idx] += prof[ob == 0 ? i0 : i1];
    }
  }
}

double integrate_pieces(const std::function<double(double)> &f, const std::vector<double> &knots, int order,
                        int split = 8) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double a = knots[i], b = knots[i + 1];
    if (!(b > a))
      continue;
    for (int k = 0; k < split; ++k)
      s += integrate_gl(f, a + (b - a) * k / split, a + (b - a) * (k + 1) / split, order);
  }
  return s;
}

} // namespace

// schedule

double TimeSchedule::lambda(int n) const { return std::pow(static_cast<double>(base), n); }

double TimeSchedule::t_limit(int n) const { return 1.0 - 1.0 / (lambda(n) * weights(n)); }

TimeSchedule make_schedule(int m, const WeightSequence &a, int base, bool check) {
  if (m < 1)
    fail_config("bad_family", "family index m must be >= 1");
  if (base < 2)
    fail_config("bad_base", "frequency base must be >= 2");
  TimeSchedule s;
  s.m = m;
  s.base = base;
  s.weights = a;
  if (check) {
    auto mem = a.membership();
    if (!mem.in_class)
      fail_config("weights_not_in_class", "weight sequence " + a.name() + " fails the class membership test");
  }
  const double am = a(m), lm = s.lambda(m);
  s.tau = m / (am * am * am * lm);
  s.nu = am * am / lm;
  s.Lambda = std::sqrt(am) * lm;
  s.nodes.assign(m + 2, 0.0);
  for (int n = 1; n <= m + 1; ++n)
    s.nodes[n] = 1.0 - 1.0 / (s.lambda(n) * a(n)) - s.tau;
  std::ostringstream os;
  s.valid = true;
  if (s.nodes[1] < 0.0) {
    s.valid = false;
    os << "t_1^m = " << s.nodes[1] << " < 0 (a_1 = " << a(1) << ", lambda_1 a_1 = " << s.lambda(1) * a(1)
       << ", tau_m = " << s.tau << ")";
  }
  for (int n = 1; n <= m && s.valid; ++n)
    if (!(s.nodes[n + 1] > s.nodes[n])) {
      s.valid = false;
      os << "nodes not increasing at n=" << n;
    }
  if (s.valid && !(s.nodes[m + 1] < 1.0)) {
    s.valid = false;
    os << "t_{m+1}^m >= 1";
  }
  s.diagnostic = os.str();
  if (check && !s.valid)
    fail_config("invalid_schedule", "invalid schedule for m=" + std::to_string(m) + ": " + s.diagnostic);
  return s;
}

// reparametrization

Smooth Reparam::at(double t) const {
  Smooth r;
  const int L = static_cast<int>(nodes.size()) - 1;
  const double t1 = nodes[1];
  if (t < t1) {
    if (t1 <= 0.0)
      return r;
    Smooth g = smoothstep(t / t1);
    r.v = t1 * g.v;
    r.d1 = g.d1;
    r.d2 = g.d2 / t1;
    r.d3 = g.d3 / (t1 * t1);
    return r;
  }
  if (t >= nodes[L]) {
    r.v = nodes[L];
    return r;
  }
  int n = interval(t);
  const double d = nodes[n + 1] - nodes[n];
  Smooth g = smoothstep((t - nodes[n]) / d);
  r.v = nodes[n] + d * g.v;
  r.d1 = g.d1;
  r.d2 = g.d2 / d;
  r.d3 = g.d3 / (d * d);
  return r;
}

int Reparam::interval(double t) const {
  const int L = static_cast<int>(nodes.size()) - 1;
  if (t < nodes[1])
    return 0;
  if (t >= nodes[L])
    return -1;
  auto it = std::upper_bound(nodes.begin() + 1, nodes.end(), t);
  return static_cast<int>(it - nodes.begin()) - 1;
}

Reparam eta(const TimeSchedule &s) {
  if (!s.valid)
    fail_config("invalid_schedule", "eta needs a valid schedule: " + s.diagnostic);
  Reparam r;
  r.nodes = s.nodes;
  return r;
}

Reparam eta_limit(const WeightSequence &a, int base, int n_last) {
  Reparam r;
  r.nodes.assign(n_last + 1, 0.0);
  for (int n = 1; n <= n_last; ++n)
    r.nodes[n] = 1.0 - 1.0 / (std::pow(static_cast<double>(base), n) * a(n));
  if (r.nodes[1] < 0.0)
    fail_config("invalid_schedule", "limit schedule has t_1 < 0");
  return r;
}

// shear algebra

double shear_inner(const ShearSum &a, const ShearSum &b, double length) {
  double s = 0.0;
  for (const auto &x : a)
    for (const auto &y : b)
      if (x.axis == y.axis && x.kappa == y.kappa && x.kappa != 0)
        s += x.coef * y.coef * 0.5 * length * length * std::cos(x.phase - y.phase);
  return s;
}

double shear_l2(const ShearSum &a, double length) { return std::sqrt(std::max(0.0, shear_inner(a, a, length))); }

ShearSum shear_scaled(const ShearSum &a, double s) {
  ShearSum out = a;
  for (auto &t : out)
    t.coef *= s;
  return out;
}

ShearSum shear_laplacian(const ShearSum &a) {
  ShearSum out = a;
  for (auto &t : out)
    t.coef *= -t.kappa * t.kappa;
  return out;
}

ShearSum shear_concat(const ShearSum &a, const ShearSum &b) {
  ShearSum out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

double shear_l3_cubed(const ShearSum &a, double length) {
  if (a.empty())
    return 0.0;
  if (a.size() == 1)
    return std::pow(std::abs(a[0].coef), 3) * length * length * 4.0 / (3.0 * kPi);
  // general case: sample both components on a fine lattice
  Grid g(2, 256, length);
  std::vector<Samples> s;
  samples_of(a, g, s);
  double n3 = lp_norm_samples(s, g, 3.0);
  return n3 * n3 * n3;
}

SpectralField shear_field(const ShearSum &a, const Grid &g) {
  std::vector<Samples> s;
  samples_of(a, g, s);
  return transform(g, s);
}

// glued flow

GluedFlow::GluedFlow(Reparam r, int base, int first_stage, int last_stage, MixingProfile profile)
    : r_(std::move(r)), base_(base), first_(first_stage), last_(last_stage), profile_(std::move(profile)) {
  const int L = static_cast<int>(r_.nodes.size()) - 1;
  if (last_ > L - 1)
    fail_config("bad_family", "glued flow needs a node after its last stage");
}

int GluedFlow::stage(double t) const {
  int n = r_.interval(t);
  if (n < first_ || n > last_)
    return -1;
  return n;
}

std::pair<int, double> GluedFlow::local(double t) const {
  int n = stage(t);
  if (n < 0)
    return {-1, 0.0};
  double d = r_.nodes[n + 1] - r_.nodes[n];
  return {n, std::clamp((r_.at(t).v - r_.nodes[n]) / d, 0.0, 1.0)};
}

ShearSum GluedFlow::velocity(double t) const {
  auto [n, s] = local(t);
  if (n < 0)
    return {};
  const int J = profile_.substeps;
  const double d = r_.nodes[n + 1] - r_.nodes[n];
  const double F = r_.at(t).d1 / d;
  if (F == 0.0)
    return {};
  int j = std::min(static_cast<int>(std::floor(s * J)), J - 1);
  const auto &A = profile_row(profile_.amplitudes, n - profile_.first_stage, J);
  const auto &P = profile_row(profile_.phases, n - profile_.first_stage, J);
  ShearTerm term;
  term.axis = j % 2;
  term.kappa = std::max(1.0, std::round(std::pow(double(base_), n) * profile_.kpattern[j]));
  term.phase = P.empty() ? 0.0 : P[j];
  term.coef = F * J * smoothstep(J * s - j).d1 * A[j] / term.kappa;
  if (term.coef == 0.0)
    return {};
  return {term};
}

ShearSum GluedFlow::velocity_dt(double t) const {
  auto [n, s] = local(t);
  if (n < 0)
    return {};
  const int J = profile_.substeps;
  const double d = r_.nodes[n + 1] - r_.nodes[n];
  Smooth e = r_.at(t);
  const double F = e.d1 / d, Fd = e.d2 / d;
  int j = std::min(static_cast<int>(std::floor(s * J)), J - 1);
  const auto &A = profile_row(profile_.amplitudes, n - profile_.first_stage, J);
  const auto &P = profile_row(profile_.phases, n - profile_.first_stage, J);
  Smooth w = smoothstep(J * s - j);
  ShearTerm term;
  term.axis = j % 2;
  term.kappa = std::max(1.0, std::round(std::pow(double(base_), n) * profile_.kpattern[j]));
  term.phase = P.empty() ? 0.0 : P[j];
  term.coef = (Fd * J * w.d1 + F * F * double(J) * J * w.d2) * A[j] / term.kappa;
  if (term.coef == 0.0)
    return {};
  return {term};
}

ShearSum GluedFlow::force(double t, double nu) const {
  ShearSum dt = velocity_dt(t);
  ShearSum v = velocity(t);
  return shear_concat(dt, shear_scaled(shear_laplacian(v), -nu));
}

double GluedFlow::max_speed(double t0, double t1) const {
  // sampled sup of the single active coefficient, padded for the gaps between samples
  const int S = 32;
  double m = 0.0;
  for (int i = 0; i <= S; ++i) {
    double t = t0 + (t1 - t0) * i / S;
    for (const auto &term : velocity(t))
      m = std::max(m, std::abs(term.coef));
  }
  return 1.25 * m;
}

std::vector<double> GluedFlow::knots(double t0, double t1) const {
  std::vector<double> k{t0, t1};
  const int J = profile_.substeps;
  std::vector<double> inner;
  for (int j = 1; j < J; ++j)
    inner.push_back(smoothstep_inverse(double(j) / J));
  for (int n = first_; n <= last_ + 1; ++n) {
    double a = r_.nodes[n];
    if (a > t0 && a < t1)
      k.push_back(a);
    if (n > last_)
      continue;
    double d = r_.nodes[n + 1] - a;
    for (double sg : inner) {
      double t = a + d * sg;
      if (t > t0 && t < t1)
        k.push_back(t);
    }
  }
  std::sort(k.begin(), k.end());
  k.erase(std::unique(k.begin(), k.end()), k.end());
  return k;
}

StabilityReport stability_check(double sup_diff2, double diss_theta, double diss_rho, double slack) {
  if (diss_theta < 0 || diss_rho < 0)
    fail_config("bad_runs", "dissipation integrals must be nonnegative");
  StabilityReport r;
  r.lhs = sup_diff2;
  r.rhs = std::sqrt(diss_theta) * std::sqrt(diss_rho);
  r.holds = r.lhs <= r.rhs * (1.0 + slack) + 1e-300;
  return r;
}

int member_grid(int m, int base, const Construction1Options &opt) {
  double lam = std::pow(double(base), m + 1);
  int n = std::max(64, next_pow2(opt.resolution_factor * lam));
  return std::min(n, opt.grid_max);
}

MemberResult run_family_member(int m, const WeightSequence &a, int base, const Construction1Options &opt) {
  auto wall0 = std::chrono::steady_clock::now();
  MemberResult res;
  res.m = m;
  res.schedule = make_schedule(m, a, base, true);
  const TimeSchedule &S = res.schedule;
  const int n = member_grid(m, base, opt);
  res.grid_n = n;
  Grid g(2, n);
  if (S.lambda(m + 1) >= g.dealias_kmax() || S.Lambda >= g.nyquist()) {
    std::ostringstream os;
    os << "grid " << n << "^2 does not resolve lambda_{m+1}=" << S.lambda(m + 1) << " and Lambda_m=" << S.Lambda;
    fail_config("unresolved_stage", os.str());
  }
  const MixingProfile &prof = opt.profile;
  Reparam R = eta(S);
  GluedFlow flow(R, base, 1, m, prof);

  // density chain: rho_in = stage-0 image of the checkerboard, then stages 1..m
  std::vector<MixerStage> stages(m + 1);
  for (int k = 0; k <= m; ++k)
    stages[k] = build_stage(k, base, g, prof);
  SpectralField rho_in = stage_map(checkerboard(1, g), stages[0], 1.0);
  rho_in *= 1.0 / l2_norm(rho_in);
  rho_in.mean_zero = true;
  std::vector<SpectralField> starts(m + 2);
  starts[1] = rho_in;
  for (int k = 1; k <= m; ++k)
    starts[k + 1] = stage_map(starts[k], stages[k], 1.0);
  auto rho_at = [&](double t) -> SpectralField {
    auto [k, s] = flow.local(t);
    if (k < 0)
      return t < S.node(1) ? starts[1] : starts[m + 1];
    return stage_map(starts[k], stages[k], s);
  };
  for (int k = 1; k <= m + 1; ++k)
    res.rho_tail = std::max(res.rho_tail, tail_fraction(starts[k]));
  res.rho_l2_drift = std::abs(l2_norm(starts[m + 1]) - 1.0);

  // theta: heat on [0,t_1], advection-diffusion on [t_1, t_{m+1}], heat on [t_{m+1}, 1]
  const double t1 = S.node(1), tl = S.node(m + 1);
  double sup_diff2 = 0.0;
  LPBank sharp_bank(base);
  auto snapshot = [&](double t, const SpectralField &f) {
    if (opt.snapshot_dir.empty())
      return;
    std::filesystem::create_directories(opt.snapshot_dir);
    std::ostringstream name;
    name << opt.snapshot_dir << "/theta_m" << m << "_t" << std::fixed;
    name.precision(6);
    name << t << ".bin";
    SnapshotMeta meta;
    meta.time = t;
    meta.viscosity = S.nu;
    meta.params["m"] = std::to_string(m);
    meta.params["base"] = std::to_string(base);
    meta.params["weights"] = a.name();
    write_snapshot(name.str(), f, meta);
  };
  std::vector<double> snap_times{0.0, 1.0};
  for (int k = 1; k <= m + 1; ++k)
    snap_times.push_back(S.node(k));
  auto is_snap = [&](double t) {
    for (double s : snap_times)
      if (std::abs(s - t) < 1e-14)
        return true;
    return false;
  };
  auto observe = [&](double t, const SpectralField &th) {
    SpectralField d = th - rho_at(t);
    double e = energy(d);
    sup_diff2 = std::max(sup_diff2, e);
    if (is_snap(t))
      snapshot(t, th);
  };

  SpectralField theta0 = rho_in;
  EnergyBudget budget;
  const double e0 = energy(theta0);
  double D = 0.0;

  Problem heatA;
  heatA.kind = ProblemKind::heat;
  heatA.nu = S.nu;
  heatA.datum = theta0;
  heatA.t0 = 0.0;
  heatA.t1 = t1;
  heatA.sample_times = {0.0, t1};
  heatA.callbacks = {observe};
  Trajectory A = integrate(heatA);
  for (std::size_t i = 0; i < A.budget.t.size(); ++i)
    budget.push(A.budget.t[i], A.budget.E[i], A.budget.D[i], 0.0, e0);
  D = A.budget.D.back();

  Problem mid;
  mid.kind = ProblemKind::advection_diffusion;
  mid.nu = S.nu;
  mid.datum = dealias(A.final);
  mid.t0 = t1;
  mid.t1 = tl;
  mid.cfl = opt.cfl;
  mid.tail_tol = opt.tail_tol;
  GluedFlow fl = flow;
  mid.drift.eval = [fl, g](double t, std::vector<Samples> &out) { samples_of(fl.velocity(t), g, out); };
  mid.drift.max_speed = [fl](double a0, double b0) { return fl.max_speed(a0, b0); };
  mid.breakpoints = flow.knots(t1, tl);
  for (int i = 1; i < opt.samples; ++i)
    mid.sample_times.push_back(t1 + (tl - t1) * i / opt.samples);
  for (int k = 2; k <= m; ++k)
    mid.sample_times.push_back(S.node(k));
  mid.sample_times.push_back(tl);
  mid.callbacks = {observe};
  double last_seen = t1;
  mid.callbacks.push_back([&](double t, const SpectralField &) { last_seen = t; });
  try {
    Trajectory B = integrate(mid);
    res.theta_tail = B.max_tail;
    for (std::size_t i = 1; i < B.budget.t.size(); ++i)
      budget.push(B.budget.t[i], B.budget.E[i], D + B.budget.D[i], 0.0, e0);
    D += B.budget.D.back();
    res.low_mode = l2_norm(sharp_bank.sharp(B.final, S.Lambda));

    Problem heatC = heatA;
    heatC.datum = B.final;
    heatC.t0 = tl;
    heatC.t1 = 1.0;
    heatC.sample_times = {tl, 1.0};
    Trajectory C = integrate(heatC);
    for (std::size_t i = 1; i < C.budget.t.size(); ++i)
      budget.push(C.budget.t[i], C.budget.E[i], D + C.budget.D[i], 0.0, e0);
    D += C.budget.D.back();
    res.total_dissipation = D;
    res.final_energy = energy(C.final);
    res.high_mode2 = energy(sharp_bank.sharp_high(C.final, S.Lambda));
  } catch (const Error &e) {
    if (e.kind() != ErrorKind::numerical)
      throw;
    // partial diagnostics: closed-form quantities below are still filled in
    res.aborted = true;
    res.abort_reason = e.what();
    res.abort_time = last_seen;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    res.total_dissipation = res.final_energy = res.high_mode2 = res.low_mode = res.theta_tail = nan;
  }
  res.budget = budget;
  res.budget_residual = budget.max_abs_residual() / e0;

  // rho dissipation integral and flux integrands over the drift period
  LPBank bank(base);
  const int qtop = std::min(bank.q_max(g), m + 1);
  for (int q = 0; q <= qtop; ++q)
    res.shells.push_back(q);
  res.onsager_v.assign(res.shells.size(), 0.0);
  res.mixed.assign(res.shells.size(), 0.0);
  auto knots = flow.knots(t1, tl);
  const double grad_in = hs_norm(starts[1], 1.0), grad_out = hs_norm(starts[m + 1], 1.0);
  double grad_rho_int = t1 * grad_in * grad_in + (1.0 - tl) * grad_out * grad_out;
  std::vector<double> x, w;
  gauss_legendre(opt.gl_order, x, w);
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double ka = knots[i], kb = knots[i + 1];
    const double c = 0.5 * (ka + kb), r = 0.5 * (kb - ka);
    for (int j = 0; j < opt.gl_order; ++j) {
      const double t = c + r * x[j], wt = r * w[j];
      SpectralField rho = rho_at(t);
      double gr = hs_norm(rho, 1.0);
      grad_rho_int += wt * gr * gr;
      ShearSum v = flow.velocity(t);
      if (v.empty())
        continue;
      const double kap = v[0].kappa;
      const double l3 = shear_l3_cubed(v);
      for (std::size_t qi = 0; qi < res.shells.size(); ++qi) {
        int q = res.shells[qi];
        double ph = bank.phi(q, kap);
        if (ph == 0.0)
          continue;
        double lam = bank.lambda(q);
        double vq3 = std::abs(ph * ph * ph) * l3;
        res.onsager_v[qi] += wt * lam * vq3;
        double rq = lp_norm(bank.shell(rho, q), 3.0);
        res.mixed[qi] += wt * lam * std::cbrt(vq3) * rq * rq;
      }
    }
  }
  double diss_rho = 2.0 * S.nu * grad_rho_int;
  if (res.aborted) {
    res.stability.lhs = sup_diff2;
    res.stability.rhs = std::numeric_limits<double>::quiet_NaN();
    res.stability.holds = false;
  } else {
    res.stability = stability_check(sup_diff2, D, diss_rho);
  }

  // forces in closed form
  auto all = flow.knots(0.0, 1.0);
  res.force_l1l2 = integrate_pieces([&](double t) { return shear_l2(flow.force(t, S.nu)); }, all, 16);
  res.viscous_force_l1l2 = integrate_pieces(
      [&](double t) { return S.nu * shear_l2(shear_laplacian(flow.velocity(t))); }, all, 16);
  res.work = 2.0 * integrate_pieces(
                       [&](double t) { return shear_inner(flow.force(t, S.nu), flow.velocity(t)); }, all, 16);
  res.v_dissipation = 2.0 * S.nu * integrate_pieces(
                                       [&](double t) {
                                         ShearSum v = flow.velocity(t);
                                         return -shear_inner(v, shear_laplacian(v));
                                       },
                                       all, 16);
  const int n_last = 40;
  GluedFlow lim(eta_limit(a, base, n_last + 1), base, 1, n_last, prof);
  auto both = flow.knots(0.0, 1.0);
  auto lk = lim.knots(0.0, 1.0);
  both.insert(both.end(), lk.begin(), lk.end());
  std::sort(both.begin(), both.end());
  both.erase(std::unique(both.begin(), both.end()), both.end());
  res.force_gap = integrate_pieces(
      [&](double t) { return shear_l2(shear_concat(flow.force(t, S.nu), shear_scaled(lim.force(t, 0.0), -1.0))); },
      both, 16);

  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  return res;
}

std::vector<VerdictRow> verdict(const std::vector<MemberResult> &fam) {
  std::vector<VerdictRow> rows;
  if (fam.size() < 3)
    fail_config("bad_family", "verdict needs at least three family members");
  auto fmt = [](const std::vector<double> &v) {
    std::ostringstream os;
    os.precision(6);
    for (std::size_t i = 0; i < v.size(); ++i)
      os << (i ? "," : "") << v[i];
    return os.str();
  };
  // NaN-propagating max
  auto vmax = [](const std::vector<double> &v) {
    double m = -INFINITY;
    for (double x : v) {
      if (std::isnan(x))
        return double(NAN);
      m = std::max(m, x);
    }
    return m;
  };
  auto row = [&](std::string name, double measured, double tol, std::string detail) {
    VerdictRow r;
    r.name = std::move(name);
    r.measured = measured;
    r.tolerance = tol;
    r.pass = measured <= tol; // false for NaN
    r.detail = std::move(detail);
    rows.push_back(r);
  };
  std::vector<double> diss, fe, low, high, lowbound;
  for (const auto &r : fam) {
    diss.push_back(r.total_dissipation);
    fe.push_back(r.final_energy / r.schedule.weights(r.m));
    low.push_back(r.low_mode / std::sqrt(r.schedule.weights(r.m)));
    high.push_back(r.high_mode2);
  }
  // bounded by one constant: every ratio at most twice the first member's
  auto spread = [&](const std::vector<double> &v) {
    std::vector<double> s;
    for (double x : v)
      s.push_back(v.front() > 0 ? x / v.front() : double(NAN));
    return vmax(s);
  };
  double breaks = 0;
  for (std::size_t i = 1; i < diss.size(); ++i)
    if (!(diss[i] > diss[i - 1]))
      breaks += 1;
  row("dissipation_increasing", std::isnan(vmax(diss)) ? NAN : breaks, 0, "2nu int|grad theta|^2 = " + fmt(diss));
  row("final_energy_over_a_m_bounded", spread(fe), 2, "ratios " + fmt(fe));
  std::vector<double> hr;
  for (const auto &r : fam)
    hr.push_back(r.high_mode2 / std::exp(-2.0 * r.m));
  row("high_mode_below_exp_minus_2m", vmax(hr), 1, "values " + fmt(high));
  row("low_mode_over_sqrt_a_m_bounded", spread(low), 2, "ratios " + fmt(low));
  std::vector<double> margins;
  for (const auto &r : fam)
    margins.push_back(r.stability.rhs > 0 ? r.stability.lhs / r.stability.rhs : double(NAN));
  row("stability_inequality", vmax(margins), 1, "lhs/rhs " + fmt(margins));
  std::vector<double> ids;
  for (const auto &r : fam)
    ids.push_back(std::abs(r.schedule.identity_value() - r.m) / r.m);
  row("nu_Lambda2_tau_identity", vmax(ids), 1e-12, "relative errors " + fmt(ids));
  std::vector<double> br;
  for (const auto &r : fam)
    br.push_back(r.budget_residual);
  row("energy_budget_residual", vmax(br), 1e-6, "relative residuals " + fmt(br));
  std::vector<double> sups;
  for (const auto &r : fam)
    sups.push_back(r.mixed.empty() ? 0.0 : *std::max_element(r.mixed.begin(), r.mixed.end()));
  row("mixed_flux_bounded", spread(sups), 2, "sup_q per member " + fmt(sups));
  std::vector<double> work;
  for (const auto &r : fam)
    work.push_back(std::abs(r.work - r.v_dissipation));
  row("work_equals_v_dissipation", vmax(work), 1e-8, "|work - 2nu int|grad v|^2| " + fmt(work));
  return rows;
}

} // namespace disslab
