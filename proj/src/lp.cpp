#include "disslab/lp.hpp"

#include "disslab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace disslab {

namespace {

double radius(const Wave &k) { return std::sqrt(wave_norm2(k)); }

// logistic pieces without cancellation for large |u|
double logistic(double u) {
  if (u >= 0)
    return 1.0 / (1.0 + std::exp(-u));
  double e = std::exp(u);
  return e / (1.0 + e);
}

SpectralField multiply(const SpectralField &a, int ca, const SpectralField &b, int cb) {
  auto pa = inverse(a.component(ca));
  auto pb = inverse(b.component(cb));
  for (std::size_t j = 0; j < pa[0].size(); ++j)
    pa[0][j] *= pb[0][j];
  return transform(a.grid, pa);
}

void require_resolved_pair(const SpectralField &f) {
  const int lim = f.grid.n / 4;
  for (std::size_t j = 0; j < f.size(); ++j) {
    if (wave_maxabs(f.grid.wave(j)) < lim)
      continue;
    for (const auto &comp : f.c)
      if (std::abs(comp[j]) > 0.0)
        fail_numeric("unresolved_product", "commutator inputs must be supported below n/4");
  }
}

// sum_{n >= N+1} f(n) for a smooth decreasing power-like f via Euler-Maclaurin
template <class F> double em_tail(F f, F df, F intf, int N) {
  double x = static_cast<double>(N);
  return intf(x) - 0.5 * f(x) - df(x) / 12.0;
}

} // namespace

Smooth smoothstep(double s) {
  Smooth r;
  if (s <= 0.0)
    return r;
  if (s >= 1.0) {
    r.v = 1.0;
    return r;
  }
  const double a = 1.0 - s;
  const double u = 1.0 / a - 1.0 / s;
  r.v = logistic(u);
  if (std::abs(u) > 700.0)
    return r;
  const double e = std::exp(-std::abs(u));
  const double sp = e / ((1.0 + e) * (1.0 + e)); // sigma'
  const double sg = r.v;
  const double spp = sp * (1.0 - 2.0 * sg);
  const double sppp = sp * (1.0 - 6.0 * sg + 6.0 * sg * sg);
  const double u1 = 1.0 / (a * a) + 1.0 / (s * s);
  const double u2 = 2.0 / (a * a * a) - 2.0 / (s * s * s);
  const double u3 = 6.0 / (a * a * a * a) + 6.0 / (s * s * s * s);
  r.d1 = sp * u1;
  r.d2 = spp * u1 * u1 + sp * u2;
  r.d3 = sppp * u1 * u1 * u1 + 3.0 * spp * u1 * u2 + sp * u3;
  return r;
}

double bump(double r) { return smoothstep(4.0 * (1.0 - r)).v; }

LPBank::LPBank(int base) : base_(base) {
  if (base < 2)
    fail_config("bad_base", "frequency base must be an integer >= 2");
}

double LPBank::lambda(int q) const { return std::pow(static_cast<double>(base_), q); }

int LPBank::q_max(const Grid &g) const {
  const double lim = g.n / 3.0;
  int q = -1;
  while (lambda(q + 2) < lim)
    ++q;
  return q;
}

int LPBank::q_cover(const Grid &g) const {
  const double rmax = std::sqrt(static_cast<double>(g.dim)) * (g.n / 2);
  int q = -1;
  while (0.75 * lambda(q + 1) < rmax)
    ++q;
  return q;
}

double LPBank::phi(int q, double r) const {
  if (q < -1)
    return 0.0;
  if (q == -1)
    return bump(r);
  return bump(r / lambda(q + 1)) - bump(r / lambda(q));
}

double LPBank::low_symbol(int q, double r) const {
  if (q < -1)
    return 0.0;
  return bump(r / lambda(q + 1));
}

void LPBank::check_shell(const Grid &g, int q) const {
  if (q > q_max(g)) {
    std::ostringstream os;
    os << "shell " << q << " exceeds the resolved range (q_max " << q_max(g) << ") on n=" << g.n;
    fail_config("shell_beyond_nyquist", os.str());
  }
}

SpectralField LPBank::shell(const SpectralField &u, int q) const {
  check_shell(u.grid, q);
  SpectralField out = apply_symbol(u, [&](const Wave &k) { return phi(q, radius(k)); });
  if (q >= 0)
    out.mean_zero = true;
  return out;
}

SpectralField LPBank::low_pass(const SpectralField &u, int q) const {
  check_shell(u.grid, q);
  return apply_symbol(u, [&](const Wave &k) { return low_symbol(q, radius(k)); });
}

SpectralField LPBank::sharp(const SpectralField &u, double cutoff) const {
  if (cutoff >= u.grid.nyquist())
    fail_config("shell_beyond_nyquist", "sharp cutoff at or above Nyquist");
  return apply_symbol(u, [cutoff](const Wave &k) { return radius(k) <= cutoff ? 1.0 : 0.0; });
}

SpectralField LPBank::sharp_high(const SpectralField &u, double cutoff) const {
  if (cutoff >= u.grid.nyquist())
    fail_config("shell_beyond_nyquist", "sharp cutoff at or above Nyquist");
  SpectralField out =
      apply_symbol(u, [cutoff](const Wave &k) { return radius(k) <= cutoff ? 0.0 : 1.0; });
  out.mean_zero = true;
  return out;
}

double LPBank::partition_residual(const Grid &g) const {
  // distinct |k|^2 values on the lattice
  std::set<long> seen;
  const int h = g.n / 2;
  for (int a = 0; a <= h; ++a)
    for (int b = 0; b <= h; ++b) {
      if (g.dim == 2) {
        seen.insert(long(a) * a + long(b) * b);
        continue;
      }
      for (int c = 0; c <= h; ++c)
        seen.insert(long(a) * a + long(b) * b + long(c) * c);
    }
  const int Q = q_cover(g);
  double worst = 0.0;
  for (long k2 : seen) {
    double r = std::sqrt(static_cast<double>(k2));
    double s = 0.0;
    for (int q = -1; q <= Q; ++q)
      s += phi(q, r);
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

// weights

WeightSequence WeightSequence::inverse_square() {
  WeightSequence w;
  w.kind_ = Kind::inverse_square;
  w.name_ = "inverse_square";
  w.power_ = 2.0;
  return w;
}

WeightSequence WeightSequence::shifted_power(double scale, double shift, double power) {
  if (!(scale > 0) || !(shift > 0) || !(power > 0))
    fail_config("bad_weights", "shifted_power needs positive scale, shift and power");
  WeightSequence w;
  w.kind_ = Kind::shifted_power;
  w.scale_ = scale;
  w.shift_ = shift;
  w.power_ = power;
  std::ostringstream os;
  os << "shifted_power(" << scale << "," << shift << "," << power << ")";
  w.name_ = os.str();
  return w;
}

WeightSequence WeightSequence::table(std::vector<double> values, double tail_power) {
  if (values.empty())
    fail_config("bad_weights", "weight table is empty");
  WeightSequence w;
  w.kind_ = Kind::table;
  w.table_ = std::move(values);
  w.power_ = tail_power;
  w.name_ = "table";
  return w;
}

// "inverse_square" | "shifted_power:A,s,p" | "table:PATH[,tail_power]"
WeightSequence WeightSequence::parse(const std::string &spec) {
  if (spec == "inverse_square")
    return inverse_square();
  auto colon = spec.find(':');
  std::string head = spec.substr(0, colon);
  std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  std::vector<std::string> parts;
  std::stringstream ss(rest);
  for (std::string tok; std::getline(ss, tok, ',');)
    parts.push_back(tok);
  try {
    if (head == "shifted_power" && parts.size() == 3)
      return shifted_power(std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2]));
    if (head == "table" && !parts.empty()) {
      std::ifstream in(parts[0]);
      if (!in)
        fail_config("bad_weights", "cannot open weight table " + parts[0]);
      std::vector<double> v;
      for (double x; in >> x;)
        v.push_back(x);
      double p = parts.size() > 1 ? std::stod(parts[1]) : 2.0;
      auto w = table(v, p);
      w.name_ = "table:" + parts[0];
      return w;
    }
  } catch (const std::invalid_argument &) {
  }
  fail_config("bad_weights", "unrecognized weight sequence '" + spec + "'");
}

double WeightSequence::operator()(int n) const {
  if (n < 1)
    fail_config("bad_weights", "weights are indexed from n = 1");
  switch (kind_) {
  case Kind::inverse_square:
    return 1.0 / ((n + 1.0) * (n + 1.0));
  case Kind::shifted_power:
    return scale_ * std::pow(1.0 + (n - 1.0) / shift_, -power_);
  case Kind::table: {
    const int N = static_cast<int>(table_.size());
    if (n <= N)
      return table_[n - 1];
    return table_.back() * std::pow(static_cast<double>(N) / n, power_);
  }
  }
  return 0.0;
}

double WeightSequence::tail(int from) const {
  if (power_ <= 1.0)
    return INFINITY;
  const double p = power_;
  switch (kind_) {
  case Kind::inverse_square: {
    auto f = [](double x) { return 1.0 / ((x + 1) * (x + 1)); };
    auto df = [](double x) { return -2.0 / ((x + 1) * (x + 1) * (x + 1)); };
    auto in = [](double x) { return 1.0 / (x + 1); };
    return em_tail<double (*)(double)>(+f, +df, +in, from);
  }
  case Kind::shifted_power:
  case Kind::table: {
    // both tails are c (x + x0)^{-p}
    double c, x0;
    if (kind_ == Kind::shifted_power) {
      c = scale_ * std::pow(shift_, p);
      x0 = shift_ - 1.0;
    } else {
      c = table_.back() * std::pow(static_cast<double>(table_.size()), p);
      x0 = 0.0;
    }
    double x = from;
    double f = c * std::pow(x + x0, -p);
    double df = -p * f / (x + x0);
    double in = c * std::pow(x + x0, 1.0 - p) / (p - 1.0);
    return in - 0.5 * f - df / 12.0;
  }
  }
  return INFINITY;
}

double WeightSequence::sum() const {
  if (kind_ == Kind::inverse_square)
    return kPi * kPi / 6.0 - 1.0;
  const int N = kind_ == Kind::table ? std::max<int>(table_.size(), 1000) : 100000;
  double s = 0.0;
  for (int n = N; n >= 1; --n)
    s += (*this)(n);
  return s + tail(N);
}

WeightSequence::Membership WeightSequence::membership(int prefix, double ratio_tol) const {
  Membership m;
  m.prefix = prefix;
  m.bounds = m.decreasing = true;
  double prev_ratio = 0.0;
  bool ratio_monotone = true;
  for (int n = 1; n <= prefix; ++n) {
    double a = (*this)(n), b = (*this)(n + 1);
    if (!(a > 0 && a < 1))
      m.bounds = false;
    if (!(b < a))
      m.decreasing = false;
    double ratio = b / a;
    if (ratio < prev_ratio - 1e-14)
      ratio_monotone = false;
    prev_ratio = ratio;
  }
  m.last_gap = 1.0 - prev_ratio;
  m.ratio_to_one = ratio_monotone && m.last_gap <= ratio_tol;
  m.summable = power_ > 1.0 && std::isfinite(sum());
  m.in_class = m.bounds && m.decreasing && m.ratio_to_one && m.summable;
  return m;
}

// Besov scale

double ShellSpectrum::running_max_top3() const {
  double m = 0.0;
  const std::size_t n = value.size();
  for (std::size_t i = n >= 3 ? n - 3 : 0; i < n; ++i)
    m = std::max(m, value[i]);
  return m;
}

ShellSpectrum shell_spectrum(const SpectralField &u, double s, double p, const LPBank &bank) {
  ShellSpectrum sp;
  sp.base = bank.base();
  sp.s = s;
  sp.p = p;
  const int Q = bank.q_max(u.grid);
  for (int q = -1; q <= Q; ++q) {
    double lam = bank.lambda(q);
    sp.lambda.push_back(lam);
    sp.value.push_back(std::pow(lam, s) * lp_norm(bank.shell(u, q), p));
  }
  return sp;
}

ShellSpectrum spectrum_from_shell_norms(const std::vector<double> &norms, double s, double p, int base) {
  ShellSpectrum sp;
  sp.base = base;
  sp.s = s;
  sp.p = p;
  LPBank bank(base);
  for (std::size_t i = 0; i < norms.size(); ++i) {
    double lam = bank.lambda(static_cast<int>(i) - 1);
    if (norms[i] < 0)
      fail_config("bad_spectrum", "shell norms must be nonnegative");
    sp.lambda.push_back(lam);
    sp.value.push_back(std::pow(lam, s) * norms[i]);
  }
  return sp;
}

double besov_norm(const ShellSpectrum &sp, double r) {
  if (std::isinf(r))
    return sp.value.empty() ? 0.0 : *std::max_element(sp.value.begin(), sp.value.end());
  double acc = 0.0;
  for (double v : sp.value)
    acc += std::pow(v, r);
  return std::pow(acc, 1.0 / r);
}

double weighted_besov_norm(const ShellSpectrum &sp, const WeightSequence &a) {
  double acc = 0.0;
  for (std::size_t i = 0; i < sp.value.size(); ++i)
    acc += a(static_cast<int>(i) + 1) * sp.value[i]; // q = i-1, weight a_{q+2}
  return acc;
}

double besov_norm(const SpectralField &u, double s, double p, double r, const LPBank &bank) {
  return besov_norm(shell_spectrum(u, s, p, bank), r);
}

double weighted_besov_norm(const SpectralField &u, double s, double p, const WeightSequence &a,
                           const LPBank &bank, bool require_class) {
  if (require_class && !a.membership().in_class)
    fail_config("weights_not_in_class", "weight sequence " + a.name() + " fails the class membership test");
  return weighted_besov_norm(shell_spectrum(u, s, p, bank), a);
}

ShellSpectrum c0_tail(const SpectralField &u, double s, double p, const LPBank &bank) {
  return shell_spectrum(u, s, p, bank);
}

double inclusion_sup_constant(const WeightSequence &a, double eps, int base, int qtop) {
  double m = 0.0;
  for (int q = -1; q <= qtop; ++q)
    m = std::max(m, 1.0 / (a(q + 3) * std::pow(static_cast<double>(base), eps * q)));
  return m;
}

BernsteinReport bernstein_check(const SpectralField &u, int q, double s, double r, const LPBank &bank) {
  if (r < s)
    fail_config("bad_exponent", "Bernstein check needs r >= s");
  BernsteinReport b;
  SpectralField d = bank.shell(u, q);
  const double lam = bank.lambda(q) * u.grid.kscale();
  const int dim = u.grid.dim;
  SpectralField grad(u.grid, u.ncomp * dim, u.real);
  for (int i = 0; i < u.ncomp; ++i) {
    SpectralField gi = gradient(d.component(i));
    for (int k = 0; k < dim; ++k)
      grad.c[i * dim + k] = gi.c[k];
  }
  const double dr = lp_norm(d, r);
  b.lower = lam * dr;
  b.middle = lp_norm(grad, r);
  b.upper = std::pow(lam, 1.0 + dim * (1.0 / s - 1.0 / r)) * lp_norm(d, s);
  b.lower_ratio = b.middle > 0 ? b.lower / b.middle : 0.0;
  b.upper_ratio = b.upper > 0 ? b.middle / b.upper : 0.0;
  return b;
}

// fluxes

double flux_shell(const SpectralField &u, int q, const LPBank &bank, std::string *warning) {
  const Grid &g = u.grid;
  if (u.ncomp != g.dim)
    fail_config("bad_operator", "flux_shell expects a vector field");
  if (!is_dealiased(u))
    fail_numeric("unresolved_product", "flux input has support beyond the dealias band");
  if (warning) {
    double div = l2_norm(divergence(u));
    double scale = std::max(1.0, l2_norm(u) * g.kscale() * g.n);
    if (div > 1e-10 * scale)
      *warning = "input is not divergence-free to 1e-10";
  }
  SpectralField su = bank.low_pass(u, q);
  double total = 0.0;
  for (int i = 0; i < g.dim; ++i) {
    SpectralField gi = gradient(su.component(i));
    for (int j = 0; j < g.dim; ++j) {
      SpectralField prod = bank.low_pass(multiply(u, i, u, j), q);
      total += inner_product(prod, gi.component(j));
    }
  }
  return total;
}

double flux_shell(const SpectralField &v, const SpectralField &rho, int q, const LPBank &bank) {
  const Grid &g = v.grid;
  if (v.ncomp != g.dim || rho.ncomp != 1)
    fail_config("bad_operator", "2.5-D flux expects a planar drift and a scalar");
  if (!is_dealiased(v) || !is_dealiased(rho))
    fail_numeric("unresolved_product", "flux input has support beyond the dealias band");
  SpectralField grad = gradient(bank.low_pass(rho, q));
  double total = 0.0;
  for (int j = 0; j < g.dim; ++j)
    total += inner_product(bank.low_pass(multiply(v, j, rho, 0), q), grad.component(j));
  return total;
}

double onsager_integrand(const SpectralField &u, int q, const LPBank &bank) {
  double n3 = lp_norm(bank.shell(u, q), 3.0);
  return bank.lambda(q) * n3 * n3 * n3;
}

double mixed_integrand(const SpectralField &v, const SpectralField &rho, int q, const LPBank &bank) {
  double nv = lp_norm(bank.shell(v, q), 3.0);
  double nr = lp_norm(bank.shell(rho, q), 3.0);
  return bank.lambda(q) * nv * nr * nr;
}

SpectralField commutator_r(const SpectralField &v, const SpectralField &rho, int q, const LPBank &bank) {
  if (rho.ncomp != 1)
    fail_config("bad_operator", "commutator expects a scalar density");
  require_resolved_pair(v);
  require_resolved_pair(rho);
  SpectralField srho = bank.low_pass(rho, q);
  SpectralField sv = bank.low_pass(v, q);
  SpectralField out(v.grid, v.ncomp, v.real && rho.real);
  for (int i = 0; i < v.ncomp; ++i) {
    SpectralField vr = multiply(v, i, rho, 0);
    SpectralField term = bank.low_pass(vr, q);
    term += vr;
    term -= multiply(v, i, srho, 0);
    term -= multiply(sv, i, rho, 0);
    out.c[i] = term.c[0];
  }
  return out;
}

double identity_residual(const SpectralField &v, const SpectralField &rho, int q, const LPBank &bank) {
  SpectralField r = commutator_r(v, rho, q, bank);
  SpectralField srho = bank.low_pass(rho, q);
  SpectralField sv = bank.low_pass(v, q);
  SpectralField hrho = rho - srho;
  SpectralField hv = v - sv;
  SpectralField res(v.grid, v.ncomp, true);
  for (int i = 0; i < v.ncomp; ++i) {
    SpectralField t = bank.low_pass(multiply(v, i, rho, 0), q);
    t -= r.component(i);
    t += multiply(hv, i, hrho, 0);
    t -= multiply(sv, i, srho, 0);
    res.c[i] = t.c[0];
  }
  return l2_norm(res);
}

} // namespace disslab
