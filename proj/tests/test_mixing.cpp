#include "disslab/mixing.hpp"

#include <doctest.h>

using namespace disslab;

TEST_CASE("checkerboard profile") {
  Grid g(2, 128);
  for (int lam : {1, 2, 4}) {
    SpectralField c = checkerboard(lam, g);
    CHECK(l2_norm(c) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(c.c[0][0]) <= 1e-15);
  }
  SpectralField c1 = checkerboard(1, g);
  c1.mean_zero = true;
  const double r = hm1_norm(c1) / l2_norm(c1);
  CHECK(r >= 0.2);
  CHECK(r <= 1.2);
}

TEST_CASE("stage schedule tiles the unit interval") {
  Grid g(2, 64);
  MixerStage st = build_stage(1, 2, g, MixingProfile::standard());
  REQUIRE(!st.schedule.empty());
  CHECK(st.schedule.front().s0 == 0.0);
  CHECK(st.schedule.back().s1 == 1.0);
  for (std::size_t i = 1; i < st.schedule.size(); ++i)
    CHECK(st.schedule[i].s0 == st.schedule[i - 1].s1);
}

TEST_CASE("zero amplitudes leave the density unchanged") {
  Grid g(2, 64);
  MixingProfile p = MixingProfile::standard();
  for (auto &row : p.amplitudes)
    std::fill(row.begin(), row.end(), 0.0);
  MixerStage st = build_stage(0, 2, g, p);
  SpectralField rho = checkerboard(1, g);
  MixerResult r = run_stage(st, rho, p, false);
  CHECK(max_abs_coeff(r.rho - rho) <= 1e-15);
  CHECK(r.contraction == doctest::Approx(1.0));
}

TEST_CASE("stage 0 halves the mix norm on 256^2 and conserves L2") {
  Grid g(2, 256);
  MixingProfile p = MixingProfile::standard();
  MixerStage st = build_stage(0, 2, g, p);
  MixerResult r = run_stage(st, checkerboard(1, g), p, false);
  CHECK(r.contraction <= 0.5);
  CHECK(r.l2_drift <= 1e-4);
  CHECK(r.max_linf <= 10.0);
}

// the lattice maps are exact line shifts, the solver truncates the product at 2/3:
// the gap is spatial (independent of dt) and shrinks fast with the grid
TEST_CASE("exact sub-step maps agree with the spectral solver") {
  MixingProfile p = MixingProfile::standard();
  double err[2];
  int i = 0;
  for (int n : {128, 256}) {
    Grid g(2, n);
    MixerStage st = build_stage(0, 2, g, p);
    SpectralField rho = from_function(g, 1, [](const std::array<double, 3> &X) {
      return std::vector<double>{std::cos(X[0]) * std::cos(X[1])};
    });
    CHECK(max_abs_coeff(stage_map(rho, st, 0.125) - shear_map(rho, st.schedule[0], 1.0)) == 0.0);
    err[i++] = l2_norm(stage_map(rho, st, 1.0) - run_stage_solver(st, rho, 0.5));
  }
  CHECK(err[1] <= 1e-2);
  CHECK(err[1] <= err[0] / 10);
}

TEST_CASE("velocity bounds collapse under the stage scaling") {
  Grid g(2, 256);
  MixingProfile p = MixingProfile::standard();
  std::vector<StageBounds> b;
  for (int n = 0; n <= 2; ++n)
    b.push_back(measure_bounds(build_stage(n, 2, g, p)));
  for (int n = 1; n <= 2; ++n) {
    CHECK(b[n].c0 <= 2.0 * b[0].c0);
    CHECK(b[n].c0 >= 0.5 * b[0].c0);
    CHECK(b[n].c1 <= 2.0 * b[0].c1);
    CHECK(b[n].c1 >= 0.5 * b[0].c1);
  }
}
