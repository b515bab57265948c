#include "disslab/construction_two.hpp"
#include "disslab/errors.hpp"

#include <doctest.h>

using namespace disslab;

TEST_CASE("beta = 0 time scales") {
  CutoffSet c = make_cutoffs(0.0, 4.0, 4, 10);
  for (int n = 4; n <= 10; ++n)
    CHECK(c.tau(n) == doctest::Approx(std::ldexp(1.0, -n - 1)).epsilon(1e-15));
  CHECK(c.c_eps == doctest::Approx(32.0));
}

TEST_CASE("squared cutoffs sum to one before T and vanish at T") {
  for (double beta : {0.0, 0.5}) {
    CutoffSet c = make_cutoffs(beta, 4.0, 4, 10);
    double worst = 0;
    for (int i = 0; i < 2000; ++i) {
      const double t = c.T * i / 2000.0;
      worst = std::max(worst, std::abs(c.sum_sq(t) - 1.0));
    }
    CHECK(worst <= 1e-12);
    for (int n = 4; n <= 12; ++n)
      CHECK(c.chi(n, c.T) == 0.0);
  }
}

TEST_CASE("cutoff pieces tile the interval in order") {
  CutoffSet c = make_cutoffs(0.0, 4.0, 4, 8);
  auto p = c.pieces();
  REQUIRE(!p.empty());
  CHECK(p.front().a == 0.0);
  for (std::size_t i = 1; i < p.size(); ++i)
    CHECK(p[i].a == doctest::Approx(p[i - 1].b));
  CHECK(p.back().b <= c.T);
}

TEST_CASE("weak L1 quasi-norm") {
  CHECK(weak_l1({0, 0, 0}, {0.2, 0.3, 0.5}) == 0.0);
  CHECK(weak_l1({2, 2, 2}, {0.2, 0.3, 0.5}) == doctest::Approx(2.0));
  // level sets {v > s}: s<1 gives 1, 1<=s<3 gives 0.5 -> sup is 1.5 (approached)
  CHECK(weak_l1({1, 3}, {0.5, 0.5}) == doctest::Approx(1.5));
}
