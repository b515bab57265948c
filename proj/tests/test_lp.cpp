#include "disslab/errors.hpp"
#include "disslab/lp.hpp"

#include <doctest.h>

#include <random>

using namespace disslab;

namespace {

SpectralField band_limited(const Grid &g, int ncomp, double radius, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<Samples> s(ncomp, Samples(g.points()));
  for (auto &c : s)
    for (auto &x : c)
      x = nd(rng);
  return apply_symbol(transform(g, s), [&](const Wave &k) { return std::sqrt(wave_norm2(k)) <= radius ? 1.0 : 0.0; });
}

struct Mode {
  Wave k;
  cplx a;
};

std::vector<std::vector<Mode>> modes_of(const SpectralField &f) {
  std::vector<std::vector<Mode>> out(f.ncomp);
  for (int i = 0; i < f.ncomp; ++i)
    for (std::size_t j = 0; j < f.size(); ++j)
      if (std::abs(f.c[i][j]) > 1e-13)
        out[i].push_back({f.grid.wave(j), f.c[i][j]});
  return out;
}

double radius(const Wave &k) { return std::sqrt(wave_norm2(k)); }

} // namespace

TEST_CASE("bump and smoothstep profile") {
  CHECK(bump(0.75) == 1.0);
  CHECK(bump(0.5) == 1.0);
  CHECK(bump(1.0) == 0.0);
  CHECK(bump(0.9) > 0.0);
  CHECK(bump(0.9) < 1.0);
  Smooth s = smoothstep(0.5);
  CHECK(s.v == doctest::Approx(0.5));
  CHECK(smoothstep(0.0).d1 == 0.0);
  CHECK(smoothstep(1.0).d1 == 0.0);
}

TEST_CASE("exp(7ix) lives in shell 1 for base 5") {
  Grid g(2, 128);
  LPBank bank(5);
  SpectralField u(g, 1, false);
  u.at(0, {7, 0, 0}) = 1.0;
  CHECK(bank.phi(1, 7.0) == 1.0);
  CHECK(max_abs_coeff(bank.shell(u, 1) - u) == 0.0);
  for (int q = -1; q <= bank.q_max(g); ++q)
    if (q != 1)
      CHECK(max_abs_coeff(bank.shell(u, q)) == 0.0);
}

TEST_CASE("constant field sits in the mean shell") {
  Grid g(2, 32);
  LPBank bank(2);
  SpectralField u = transform(g, {Samples(g.points(), 3.0)});
  CHECK(max_abs_coeff(bank.shell(u, -1) - u) < 1e-15);
  for (int q = 0; q <= bank.q_max(g); ++q)
    CHECK(max_abs_coeff(bank.shell(u, q)) < 1e-15);
}

TEST_CASE("partition of unity reconstructs band-limited fields") {
  Grid g(2, 64);
  for (int base : {2, 5}) {
    LPBank bank(base);
    const int Q = bank.q_max(g);
    CHECK(bank.partition_residual(g) <= 1e-14);
    SpectralField u = band_limited(g, 1, 0.75 * bank.lambda(Q + 1), 9 + base);
    SpectralField s = bank.shell(u, -1);
    for (int q = 0; q <= Q; ++q)
      s += bank.shell(u, q);
    CHECK(l2_norm(s - u) / l2_norm(u) <= 1e-12);
  }
  CHECK_THROWS_AS(LPBank(2).shell(SpectralField(g, 1), 10), Error);
}

TEST_CASE("Bernstein ratios for a single mode") {
  Grid g(2, 128);
  LPBank bank(2);
  for (int q = 1; q <= 4; ++q) {
    const int k = static_cast<int>(bank.lambda(q));
    SpectralField u = from_function(g, 1, [&](const std::array<double, 3> &X) {
      return std::vector<double>{std::cos(k * X[0])};
    });
    SpectralField d = bank.shell(u, q);
    if (l2_norm(d) == 0.0)
      continue;
    SpectralField gd = gradient(d);
    const double ratio = l2_norm(gd) / l2_norm(d);
    CHECK(ratio == doctest::Approx(double(k)).epsilon(1e-12));
    CHECK(ratio / bank.lambda(q) >= 0.75);
    CHECK(ratio / bank.lambda(q) <= 2.0);
    BernsteinReport b = bernstein_check(u, q, 2.0, 3.0, bank);
    CHECK(b.lower_ratio < 100);
    CHECK(b.upper_ratio < 100);
  }
  SpectralField zero(g, 1);
  BernsteinReport z = bernstein_check(zero, -1, 2.0, 3.0, bank);
  CHECK(z.lower == 0.0);
  CHECK(z.upper == 0.0);
}

TEST_CASE("flat synthetic spectrum and weighted norm") {
  std::vector<double> norms{0.0};
  for (int q = 0; q <= 10; ++q)
    norms.push_back(std::pow(2.0, -q / 3.0));
  ShellSpectrum sp = spectrum_from_shell_norms(norms, 1.0 / 3.0, 3.0, 2);
  CHECK(besov_norm(sp, INFINITY) == doctest::Approx(1.0).epsilon(1e-14));
  const auto a = WeightSequence::inverse_square();
  double expect = 0;
  for (int q = 0; q <= 10; ++q)
    expect += 1.0 / ((q + 3.0) * (q + 3.0));
  CHECK(weighted_besov_norm(sp, a) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(weighted_besov_norm(sp, a) <= a.sum());
  ShellSpectrum zero = spectrum_from_shell_norms(std::vector<double>(12, 0.0), 1.0 / 3.0, 3.0, 2);
  CHECK(besov_norm(zero, INFINITY) == 0.0);
  CHECK(besov_norm(zero, 2.0) == 0.0);
  CHECK(weighted_besov_norm(zero, a) == 0.0);
}

TEST_CASE("weight class membership") {
  CHECK(WeightSequence::inverse_square().membership().in_class);
  CHECK(WeightSequence::parse("shifted_power:0.95,25,1.2").membership().in_class);
  CHECK_THROWS_AS(WeightSequence::parse("nonsense"), Error);
  CHECK(WeightSequence::inverse_square().sum() == doctest::Approx(kPi * kPi / 6 - 1));
}

TEST_CASE("flux of a shear vanishes") {
  Grid g(2, 64);
  LPBank bank(2);
  SpectralField u = from_function(g, 2, [](const std::array<double, 3> &X) {
    return std::vector<double>{std::sin(X[1]), 0.0};
  });
  for (int q = -1; q <= bank.q_max(g); ++q)
    CHECK(std::abs(flux_shell(u, q, bank)) < 1e-13);
}

TEST_CASE("flux against a brute-force triad sum") {
  Grid g(2, 64);
  LPBank bank(2);
  // three divergence-free modes forming a triad k1 + k2 = k3
  const Wave ks[3] = {{3, 1, 0}, {-1, 4, 0}, {2, 5, 0}};
  const double amp[3] = {1.0, 0.7, 0.4}, ph[3] = {0.3, 1.1, -0.4};
  SpectralField u = from_function(g, 2, [&](const std::array<double, 3> &X) {
    std::vector<double> v(2, 0.0);
    for (int m = 0; m < 3; ++m) {
      const double kn = std::sqrt(wave_norm2(ks[m]));
      const double c = amp[m] * std::cos(ks[m][0] * X[0] + ks[m][1] * X[1] + ph[m]);
      v[0] += -ks[m][1] / kn * c;
      v[1] += ks[m][0] / kn * c;
    }
    return v;
  });
  auto modes = modes_of(u);
  for (int q = 0; q <= 3; ++q) {
    // sum_k sum_ij s(k) (u_i * u_j)^(k) conj(i k_j s(k) u_i^(k)), times the box area
    auto s = [&](const Wave &k) { return bank.low_symbol(q, radius(k)); };
    double brute = 0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (const auto &a : modes[i])
          for (const auto &b : modes[j]) {
            Wave k{a.k[0] + b.k[0], a.k[1] + b.k[1], 0};
            cplx uik = 0;
            for (const auto &c : modes[i])
              if (c.k == k)
                uik = c.a;
            if (uik == 0.0)
              continue;
            cplx grad = cplx(0, k[j]) * s(k) * uik;
            brute += (s(k) * a.a * b.a * std::conj(grad)).real();
          }
    brute *= g.volume();
    CHECK(std::abs(flux_shell(u, q, bank) - brute) <= 1e-12);
  }
  // everything below the shell: S_q u = u, flux zero by incompressibility
  CHECK(std::abs(flux_shell(u, 3, bank)) < 1e-12);
}

TEST_CASE("Onsager integrand localization") {
  Grid g(2, 128);
  LPBank bank(5);
  SpectralField zero(g, 1);
  CHECK(onsager_integrand(zero, 1, bank) == 0.0);
  SpectralField u = from_function(g, 1, [](const std::array<double, 3> &X) {
    return std::vector<double>{std::cos(7 * X[0])};
  });
  for (int q = -1; q <= bank.q_max(g); ++q) {
    const double v = onsager_integrand(u, q, bank);
    if (q == 1)
      CHECK(v > 0.0);
    else
      CHECK(v <= 1e-30);
    CHECK(mixed_integrand(u, u, q, bank) == doctest::Approx(v).epsilon(1e-14));
  }
}

TEST_CASE("commutator r_q against a brute-force convolution") {
  Grid g(2, 16);
  LPBank bank(2);
  SpectralField v = band_limited(g, 2, 3.0, 21), rho = band_limited(g, 1, 3.0, 22);
  auto mv = modes_of(v), mr = modes_of(rho);
  for (int q = -1; q <= 1; ++q) {
    SpectralField r = commutator_r(v, rho, q, bank);
    auto s = [&](const Wave &k) { return bank.low_symbol(q, radius(k)); };
    SpectralField oracle(g, 2, true);
    for (int i = 0; i < 2; ++i)
      for (const auto &a : mv[i])
        for (const auto &b : mr[0]) {
          Wave k{a.k[0] + b.k[0], a.k[1] + b.k[1], 0};
          oracle.at(i, k) += a.a * b.a * (s(k) - s(b.k) - s(a.k) + 1.0);
        }
    CHECK(max_abs_coeff(r - oracle) <= 1e-13);
    CHECK(identity_residual(v, rho, q, bank) <= 1e-11);
  }
}

TEST_CASE("commutator degenerate cases") {
  Grid g(2, 128);
  LPBank bank(2);
  SpectralField v = band_limited(g, 2, 10.0, 31);
  SpectralField c = transform(g, {Samples(g.points(), 2.0)});
  for (int q = 0; q <= 3; ++q)
    CHECK(l2_norm(commutator_r(v, c, q, bank)) <= 1e-12);
  // both inputs below shell q-2: the high-high factor vanishes
  SpectralField vl = band_limited(g, 2, 2.0, 32), rl = band_limited(g, 1, 2.0, 33);
  const int q = 4;
  CHECK(l2_norm(vl - bank.low_pass(vl, q)) == 0.0);
  CHECK(identity_residual(vl, rl, q, bank) <= 1e-11);
  SpectralField big = band_limited(g, 1, 60.0, 34);
  CHECK_THROWS_AS(commutator_r(v, big, 1, bank), Error);
}
