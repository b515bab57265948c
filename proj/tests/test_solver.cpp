#include "disslab/errors.hpp"
#include "disslab/solver.hpp"

#include <doctest.h>

using namespace disslab;

namespace {

SpectralField scalar(const Grid &g, auto fn) {
  return dealias(from_function(g, 1, [&](const std::array<double, 3> &X) {
    return std::vector<double>{fn(X[0], X[1])};
  }));
}

Drift constant_drift(const Grid &g, double cx, double cy) {
  Drift d;
  d.eval = [g, cx, cy](double, std::vector<Samples> &out) {
    out.assign(2, Samples(g.points()));
    std::fill(out[0].begin(), out[0].end(), cx);
    std::fill(out[1].begin(), out[1].end(), cy);
  };
  d.max_speed = [cx, cy](double, double) { return std::hypot(cx, cy); };
  return d;
}

} // namespace

TEST_CASE("heat equation decays each mode exactly") {
  Grid g(2, 64);
  Problem p;
  p.kind = ProblemKind::heat;
  p.nu = 0.02;
  p.datum = scalar(g, [](double x, double y) { return std::cos(2 * x + y); });
  p.sample_times = {0.3, 0.7, 1.0};
  Trajectory tr = integrate(p);
  for (std::size_t i = 0; i < tr.budget.t.size(); ++i) {
    const double ex = std::exp(-2 * p.nu * 5 * tr.budget.t[i]);
    CHECK(std::abs(tr.budget.E[i] / tr.budget.E[0] - ex) / ex <= 1e-10);
  }
  CHECK(tr.budget.max_abs_residual() <= 1e-12 * tr.budget.E[0]);
}

TEST_CASE("heat multiplier semigroup") {
  Grid g(2, 32);
  SpectralField f = scalar(g, [](double x, double y) { return std::sin(x) * std::cos(3 * y) + std::cos(5 * x); });
  CHECK(max_abs_coeff(heat_multiplier(f, 0.1, 0.0) - f) == 0.0);
  SpectralField a = heat_multiplier(heat_multiplier(f, 0.1, 0.2), 0.1, 0.3);
  SpectralField b = heat_multiplier(f, 0.1, 0.5);
  CHECK(max_abs_coeff(a - b) <= 1e-15);
  // dissipation ledger equals the energy drop
  CHECK(heat_dissipation(f, 0.1, 0.5) == doctest::Approx(energy(f) - energy(b)).epsilon(1e-13));
  // a single-shell high part decays with the smallest retained frequency
  SpectralField h = scalar(g, [](double x, double) { return std::cos(6 * x); });
  const double ratio = energy(heat_multiplier(h, 0.1, 0.5)) / energy(h);
  CHECK(std::abs(ratio - std::exp(-2 * 0.1 * 36 * 0.5)) <= 1e-12);
}

TEST_CASE("constant drift translates the datum") {
  Grid g(2, 64);
  auto fn = [](double x, double y) { return std::sin(x + 2 * y) + 0.5 * std::cos(3 * x - y); };
  Problem p;
  p.kind = ProblemKind::transport;
  p.drift = constant_drift(g, 1.0, 0.0);
  p.datum = scalar(g, fn);
  p.t1 = 1.0;
  p.sample_times = {0.5, 1.0};
  p.cfl = 0.1; // RK4 phase error ~ (k dt)^4
  Trajectory tr = integrate(p);
  SpectralField exact = scalar(g, [&](double x, double y) { return fn(x - 1.0, y); });
  CHECK(linf_norm(tr.final - exact) <= 1e-6);
  for (double q : {2.0, 3.0, 4.0})
    CHECK(std::abs(lp_norm(tr.final, q) - lp_norm(p.datum, q)) <= 1e-6 * lp_norm(p.datum, q));
  CHECK(tr.budget.max_abs_residual() <= 1e-6 * tr.budget.E[0]);
}

TEST_CASE("manufactured advection-diffusion solution") {
  // theta = e^{-nu t} sin(x - t) under drift (1, 0) needs no source
  Grid g(2, 128);
  const double nu = 0.05;
  Problem p;
  p.nu = nu;
  p.drift = constant_drift(g, 1.0, 0.0);
  p.datum = scalar(g, [](double x, double) { return std::sin(x); });
  Trajectory tr = integrate(p);
  SpectralField exact = scalar(g, [&](double x, double) { return std::exp(-nu) * std::sin(x - 1.0); });
  CHECK(linf_norm(tr.final - exact) <= 1e-6);
}

TEST_CASE("solver rejects bad problems") {
  Grid g(2, 32);
  Problem p;
  p.datum = scalar(g, [](double x, double) { return std::sin(x); });
  p.nu = -1;
  CHECK_THROWS_AS(integrate(p), Error);
  p.nu = 0.1;
  p.kind = ProblemKind::transport;
  CHECK_THROWS_AS(integrate(p), Error);
}

TEST_CASE("Gauss-Legendre is exact for polynomials") {
  const double v = integrate_gl([](double t) { return std::pow(t, 9) - 3 * t * t; }, 0.0, 2.0, 5);
  CHECK(v == doctest::Approx(std::pow(2.0, 10) / 10 - 8.0).epsilon(1e-14));
}

TEST_CASE("weak residual of a steady shear and of a zero test") {
  Grid g(2, 32);
  const double T = 1.0;
  SpectralField u = from_function(g, 2, [](const std::array<double, 3> &X) {
    return std::vector<double>{std::sin(X[1]), 0.0};
  });
  SpectralField psi = from_function(g, 2, [](const std::array<double, 3> &X) {
    return std::vector<double>{std::cos(X[0] + X[1]) + std::sin(X[1]), std::sin(2 * X[0])};
  });
  WeakPairings pr = grid_pairings([u](double) { return u; }, {}, psi);
  TimeWeight tw{[=](double t) { return std::cos(kPi * t / (2 * T)); },
                [=](double t) { return -kPi / (2 * T) * std::sin(kPi * t / (2 * T)); }};
  WeakResidualOptions opt;
  opt.knots = {0.0, T};
  CHECK(std::abs(weak_residual(pr, tw, opt)) <= 1e-12);
  SpectralField zero(g, 2);
  WeakPairings pz = grid_pairings([u](double) { return u; }, {}, zero);
  CHECK(weak_residual(pz, tw, opt) == 0.0);
  opt.knots = {0.0};
  CHECK_THROWS_AS(weak_residual(pr, tw, opt), Error);
}
