#include "disslab/construction_one.hpp"
#include "disslab/errors.hpp"

#include <doctest.h>

using namespace disslab;

TEST_CASE("schedule algebra for base 5, m = 2") {
  const auto a = WeightSequence::inverse_square();
  TimeSchedule s = make_schedule(2, a, 5, false);
  CHECK(s.nu == doctest::Approx(1.0 / 2025).epsilon(1e-13));
  CHECK(s.Lambda == doctest::Approx(25.0 / 3).epsilon(1e-13));
  CHECK(s.tau == doctest::Approx(58.32).epsilon(1e-12));
  CHECK(s.identity_value() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_FALSE(s.valid);
  CHECK_THROWS_AS(make_schedule(2, a, 5, true), Error);
}

TEST_CASE("nu Lambda^2 tau = m across the family") {
  const auto a = WeightSequence::inverse_square();
  for (int base : {2, 5})
    for (int m : {2, 4, 8}) {
      TimeSchedule s = make_schedule(m, a, base, false);
      CHECK(std::abs(s.identity_value() - m) / m <= 1e-12);
    }
}

TEST_CASE("eta passes through the nodes with flat joins") {
  TimeSchedule s;
  s.m = 3;
  s.nodes = {0, 0.1, 0.3, 0.6, 0.8};
  Reparam r;
  r.nodes = s.nodes;
  for (int n = 1; n <= 4; ++n) {
    Smooth v = r.at(s.nodes[n]);
    CHECK(v.v == doctest::Approx(s.nodes[n]));
    CHECK(std::abs(v.d1) <= 1e-12);
  }
  CHECK(r.interval(0.05) == 0);
  CHECK(r.interval(0.2) == 1);
  CHECK(r.interval(0.9) == -1);
}

TEST_CASE("shear sum algebra") {
  ShearSum a{{0, 3, 0.2, 1.5}};
  CHECK(shear_l2(a) == doctest::Approx(1.5 * kTwoPi / std::sqrt(2.0)));
  ShearSum b{{0, 4, 0.0, 1.0}};
  CHECK(std::abs(shear_inner(a, b)) <= 1e-12);
  ShearSum la = shear_laplacian(a);
  CHECK(shear_inner(a, la) == doctest::Approx(-9 * shear_l2(a) * shear_l2(a)));
  // closed form L3 against the lattice (algebraic convergence, |sin|^3 is C^2)
  Grid g(2, 512);
  SpectralField f = shear_field(a, g);
  CHECK(shear_l3_cubed(a) == doctest::Approx(std::pow(lp_norm(f, 3), 3)).epsilon(1e-8));
}

TEST_CASE("stability inequality helper") {
  CHECK(stability_check(1.0, 2.0, 2.0).holds);
  CHECK_FALSE(stability_check(10.0, 0.1, 0.1).holds);
}
