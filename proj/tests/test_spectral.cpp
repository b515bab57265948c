#include "disslab/spectral.hpp"
#include "disslab/errors.hpp"

#include <doctest.h>

#include <random>

using namespace disslab;

namespace {

std::vector<Samples> random_lattice(const Grid &g, int ncomp, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<Samples> s(ncomp, Samples(g.points()));
  for (auto &c : s)
    for (auto &x : c)
      x = nd(rng);
  return s;
}

SpectralField mode(const Grid &g, auto fn) {
  return from_function(g, 1, [&](const std::array<double, 3> &X) { return std::vector<double>{fn(X[0], X[1])}; });
}

} // namespace

TEST_CASE("constant lattice maps to the zero mode") {
  Grid g(2, 16);
  SpectralField f = transform(g, {Samples(g.points(), 2.5)});
  CHECK(std::abs(f.at(0, {0, 0, 0}) - cplx(2.5)) < 1e-15);
  double rest = 0;
  for (std::size_t j = 1; j < f.size(); ++j)
    rest = std::max(rest, std::abs(f.c[0][j]));
  CHECK(rest < 1e-15);
}

TEST_CASE("sin(3x) has coefficients -+i/2 at k=(+-3,0)") {
  Grid g(2, 64);
  SpectralField f = mode(g, [](double x, double) { return std::sin(3 * x); });
  CHECK(std::abs(f.at(0, {3, 0, 0}) - cplx(0, -0.5)) < 1e-14);
  CHECK(std::abs(f.at(0, {-3, 0, 0}) - cplx(0, 0.5)) < 1e-14);
  SpectralField g2 = f;
  g2.at(0, {3, 0, 0}) = 0;
  g2.at(0, {-3, 0, 0}) = 0;
  CHECK(max_abs_coeff(g2) < 1e-14);
}

TEST_CASE("round trip and Parseval on a random 32^2 lattice") {
  Grid g(2, 32);
  auto s = random_lattice(g, 1, 7);
  SpectralField f = transform(g, s);
  auto back = inverse(f);
  double err = 0, mx = 0, sum2 = 0;
  for (std::size_t j = 0; j < s[0].size(); ++j) {
    err = std::max(err, std::abs(back[0][j] - s[0][j]));
    mx = std::max(mx, std::abs(s[0][j]));
    sum2 += s[0][j] * s[0][j];
  }
  CHECK(err / mx <= 1e-13);
  const double quad = sum2 * g.cell();
  CHECK(std::abs(inner_product(f, f) - quad) / quad <= 1e-13);
}

TEST_CASE("transform rejects bad lattices") {
  CHECK_THROWS_AS(Grid(2, 24).validate(), Error);
  Grid g(2, 16);
  CHECK_THROWS_AS(transform(g, {Samples(10, 0.0)}), Error);
}

TEST_CASE("differential operators") {
  Grid g(2, 64);
  SpectralField f = mode(g, [](double x, double) { return std::sin(3 * x); });
  SpectralField lap = laplacian(f);
  CHECK(max_abs_coeff(lap + 9.0 * f) < 1e-13);
  SpectralField shear = from_function(g, 2, [](const std::array<double, 3> &X) {
    return std::vector<double>{std::sin(X[1]), 0.0};
  });
  CHECK(max_abs_coeff(divergence(shear)) < 1e-14);
  CHECK_THROWS_AS(divergence(f), Error);
}

TEST_CASE("spectral gradient against centered differences on 256^2") {
  Grid g(2, 256);
  // smooth checkerboard-like test field
  auto fn = [](double x, double y) { return std::tanh(2 * std::sin(x)) * std::tanh(2 * std::sin(y)); };
  SpectralField f = mode(g, fn);
  auto grad = inverse(gradient(f));
  const double h = g.dx();
  double num = 0, den = 0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const double x = i * h, y = j * h;
      const double fx = (fn(x + h, y) - fn(x - h, y)) / (2 * h);
      const double fy = (fn(x, y + h) - fn(x, y - h)) / (2 * h);
      const std::size_t idx = std::size_t(i) * g.n + j;
      num += std::pow(grad[0][idx] - fx, 2) + std::pow(grad[1][idx] - fy, 2);
      den += fx * fx + fy * fy;
    }
  CHECK(std::sqrt(num / den) <= 1e-3);
}

TEST_CASE("norms of closed-form fields") {
  Grid g(2, 64);
  const int k = 3;
  SpectralField f = mode(g, [&](double x, double) { return std::sin(k * x); });
  CHECK(l2_norm(f) == doctest::Approx(kPi * std::sqrt(2.0)).epsilon(1e-13));
  f.mean_zero = true;
  CHECK(hm1_norm(f) == doctest::Approx(l2_norm(f) / k).epsilon(1e-13));
  SpectralField one = mode(g, [](double, double) { return 1.0; });
  for (double p : {1.0, 2.0, 3.0})
    CHECK(lp_norm(one, p) == doctest::Approx(std::pow(kTwoPi, 2.0 / p)).epsilon(1e-13));
  CHECK_THROWS_AS(norms(one, {{2.0}, {-1.0}, false}), Error); // not mean-zero
  NormReport r = norms(f, {{2.0, 3.0}, {-1.0}, true});
  CHECK(r.sobolev.at(-1.0) == doctest::Approx(hm1_norm(f)));
  CHECK(r.linf_grad.has_value());
}

// |f|^3 is only C^2 at the zeros, so the lattice sum converges algebraically
TEST_CASE("L3 of sin(7x) on 128^2 agrees with a 1024^2 quadrature") {
  auto fn = [](double x, double) { return std::sin(7 * x); };
  const double a = lp_norm(mode(Grid(2, 128), fn), 3.0);
  const double b = lp_norm(mode(Grid(2, 1024), fn), 3.0);
  CHECK(std::abs(a - b) / b <= 1e-6);
}

TEST_CASE("dealiasing") {
  Grid g(2, 64);
  SpectralField low = mode(g, [](double x, double y) { return std::cos(5 * x + 7 * y); });
  CHECK(max_abs_coeff(dealias(low) - low) <= 1e-15);
  SpectralField high = mode(g, [&](double x, double) { return std::cos((g.n / 2 - 1) * x); });
  CHECK(max_abs_coeff(dealias(high)) <= 4e-15);
  SpectralField r = transform(g, random_lattice(g, 1, 3));
  SpectralField d = dealias(r);
  CHECK(max_abs_coeff(dealias(d) - d) == 0.0);
}

TEST_CASE("inner products") {
  Grid g(2, 32);
  SpectralField s = mode(g, [](double x, double) { return std::sin(3 * x); });
  SpectralField c = mode(g, [](double x, double) { return std::cos(3 * x); });
  CHECK(std::abs(inner_product(s, c)) < 1e-13);
  CHECK(inner_product(s, s) == doctest::Approx(std::pow(l2_norm(s), 2)).epsilon(1e-14));
  SpectralField f = transform(g, random_lattice(g, 1, 11)), h = transform(g, random_lattice(g, 1, 12));
  const double a = inner_product(f, h), b = inner_product_quadrature(f, h);
  CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)));
}

TEST_CASE("Hermitian symmetry of real fields") {
  Grid g(2, 32);
  SpectralField f = transform(g, random_lattice(g, 1, 5));
  CHECK(hermitian_defect(f) < 1e-14);
}
