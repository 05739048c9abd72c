#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "snlab/ensemble_dynamics.hpp"
#include "snlab/errors.hpp"

using namespace snlab;

namespace {

PhysicalParams unit_params(double G) {
  PhysicalParams p;
  p.m = 1;
  p.hbar = 1;
  p.omega0 = 0.5;
  p.sigma = 1;
  p.G = G;
  p.L = std::numeric_limits<double>::infinity();
  return p;
}

SolverConfig config(double dt, int n_steps, int every) {
  SolverConfig c;
  c.dt = dt;
  c.n_steps = n_steps;
  c.diagnostics_every = every;
  return c;
}

}  // namespace

TEST_CASE("ensemble state validation") {
  const GridSpec g = GridSpec::line(64, 16.0);
  const WaveField a = WaveField::gaussian(g, 1.0, -1.0), b = WaveField::gaussian(g, 1.0, 1.0);
  CHECK_NOTHROW(EnsembleState({{0.3, a}, {0.7, b}}));
  CHECK_THROWS_AS(EnsembleState({}), std::invalid_argument);
  CHECK_THROWS_AS(EnsembleState({{-0.1, a}, {1.1, b}}), std::invalid_argument);
  CHECK_THROWS_AS(EnsembleState({{0.3, a}, {0.6, b}}), std::invalid_argument);
  CHECK_THROWS_AS(EnsembleState({{0.5, a}, {0.5, WaveField(g, 2.0 * b.amplitudes())}}), std::invalid_argument);
  CHECK_THROWS_AS(EnsembleState({{0.5, a}, {0.5, WaveField::gaussian(GridSpec::line(32, 16.0), 1.0)}}),
                  std::invalid_argument);
}

TEST_CASE("the two decompositions share one density matrix") {
  const GridSpec g = GridSpec::line(256, 32.0);
  const Eigen::ArrayXXd w = g.cell_weights();
  const EnsemblePair pair = signaling_pair(g, 1.0, 4.0);
  const auto& loc = pair.localized.members();
  const auto& sup = pair.superposed.members();
  REQUIRE(loc.size() == 2);
  REQUIRE(sup.size() == 2);
  auto dot = [&](const WaveField& x, const WaveField& y) { return (w * (x.amplitudes().conjugate() * y.amplitudes())).sum(); };
  CHECK(std::abs(dot(loc[0].psi, loc[1].psi)) < 1e-14);
  CHECK(std::abs(dot(sup[0].psi, sup[1].psi)) < 1e-14);

  Eigen::MatrixXcd r1 = Eigen::MatrixXcd::Zero(256, 256), r2 = r1;
  for (const auto& m : loc) r1 += m.p * m.psi.amplitudes().matrix() * m.psi.amplitudes().matrix().adjoint();
  for (const auto& m : sup) r2 += m.p * m.psi.amplitudes().matrix() * m.psi.amplitudes().matrix().adjoint();
  CHECK((r1 - r2).cwiseAbs().maxCoeff() < 1e-14 * r1.cwiseAbs().maxCoeff());
  CHECK(l1_distance(g, density(pair.localized), density(pair.superposed)) < 1e-14);

  // the localized members peak on opposite sides
  const Eigen::ArrayXd z = g.axis(0).coords();
  const double m0 = (w.col(0) * loc[0].psi.density().col(0) * z).sum();
  const double m1 = (w.col(0) * loc[1].psi.density().col(0) * z).sum();
  CHECK(m0 * m1 < 0);
  CHECK_THROWS_AS(signaling_pair(g, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("single-member ensembles evolve identically in both modes") {
  const GridSpec g = GridSpec::line(128, 32.0);
  const EnsembleState e({{1.0, WaveField::gaussian(g, 1.0, 0.5, 0, 0.3)}});
  const PhysicalParams p = unit_params(2.0);
  EnsembleOptions pure{EnsembleMode::pure_state_sn, 0};
  const EnsembleTrajectory a = evolve_ensemble(e, p, config(5e-3, 200, 50), pure);
  const EnsembleTrajectory b = evolve_ensemble(e, p, config(5e-3, 200, 50));
  REQUIRE(a.densities.size() == b.densities.size());
  for (std::size_t i = 0; i < a.densities.size(); ++i) CHECK((a.densities[i] - b.densities[i]).abs().maxCoeff() == 0.0);
  CHECK(a.max_norm_drift_per_step < 1e-13);
}

TEST_CASE("signaling gap: mixed mode is blind to the decomposition, pure mode is not") {
  const GridSpec g = GridSpec::line(512, 64.0);
  const PhysicalParams p = unit_params(1.0);
  const EnsemblePair pair = signaling_pair(g, 1.0, 4.0);
  const SolverConfig c = config(1.25e-3, 1600, 160);
  const GapSeries mixed = signaling_gap(pair.localized, pair.superposed, p, c, {EnsembleMode::mixed_state_sn, 0});
  const GapSeries pure = signaling_gap(pair.localized, pair.superposed, p, c, {EnsembleMode::pure_state_sn, 0});
  MESSAGE("mixed " << mixed.max() << " pure " << pure.max());
  CHECK(mixed.max() < 1e-8);
  CHECK(pure.max() > 1e-2);
  CHECK(pure.delta.front() < 1e-12);
  // the pure-mode gap grows from zero
  CHECK(pure.delta.back() > pure.delta[1]);

  const GridSpec g2 = GridSpec::line(512, 64.0);
  const EnsembleState single({{1.0, WaveField::gaussian(g2, 1.0)}});
  CHECK_THROWS_AS(signaling_gap(pair.localized, single, p, c, {}), std::invalid_argument);
}

TEST_CASE("mixed mode depends only on the density matrix") {
  const GridSpec g = GridSpec::line(256, 32.0);
  const PhysicalParams p = unit_params(2.0);
  const EnsemblePair pair = signaling_pair(g, 1.0, 4.0);
  const auto& loc = pair.localized.members();
  // equal weights: any real rotation of the members is another decomposition
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(0, 2 * M_PI);
  const SolverConfig c = config(1.25e-3, 800, 200);
  const EnsembleTrajectory ref = evolve_ensemble(pair.localized, p, c);
  for (int trial = 0; trial < 3; ++trial) {
    const double th = angle(rng);
    const Eigen::ArrayXXcd u = std::cos(th) * loc[0].psi.amplitudes() + std::sin(th) * loc[1].psi.amplitudes();
    const Eigen::ArrayXXcd v = -std::sin(th) * loc[0].psi.amplitudes() + std::cos(th) * loc[1].psi.amplitudes();
    const EnsembleState rotated({{0.5, WaveField(g, u)}, {0.5, WaveField(g, v)}});
    const EnsembleTrajectory tr = evolve_ensemble(rotated, p, c);
    for (std::size_t i = 0; i < tr.densities.size(); ++i) CHECK(l1_distance(g, tr.densities[i], ref.densities[i]) < 1e-10);
  }
}

TEST_CASE("von Neumann route agrees with the member evolution") {
  const GridSpec g = GridSpec::line(96, 24.0);
  const EnsemblePair pair = signaling_pair(g, 1.0, 4.0);

  SUBCASE("free evolution") {
    const VonNeumannReport r = von_neumann_consistency(pair.superposed, unit_params(0.0), config(5e-3, 200, 50));
    CHECK(r.deviation.size() == 5);
    CHECK(r.deviation.front() < 1e-13);
    CHECK(r.max_deviation < 1e-8);
  }
  SUBCASE("deviation vanishes under step refinement") {
    const PhysicalParams p = unit_params(1.0);
    double prev = 0;
    for (int steps : {200, 400, 800}) {
      SolverConfig c = config(1.0 / steps, steps, steps);
      c.update = NonlinearityUpdate::predictor_corrector;
      const VonNeumannReport r = von_neumann_consistency(pair.superposed, p, c);
      MESSAGE(steps << " steps: " << r.deviation.back());
      if (prev > 0) CHECK(prev / r.deviation.back() > 3);
      prev = r.deviation.back();
    }
    CHECK(prev < 1e-6);
  }
  SUBCASE("capacity and geometry") {
    CHECK_THROWS_AS(von_neumann_consistency(pair.superposed, unit_params(1.0), config(5e-3, 1, 1), 0, 64), CapacityError);
    const GridSpec cyl = GridSpec::cylinder(8, 4.0, 16, 8.0);
    CHECK_THROWS_AS(von_neumann_consistency(EnsembleState({{1.0, WaveField::gaussian(cyl, 1.0)}}), unit_params(1.0),
                                            config(1e-3, 1, 1)),
                    std::invalid_argument);
  }
}

TEST_CASE("absorbing boundaries are rejected for ensembles") {
  const GridSpec g = GridSpec::line(64, 16.0);
  SolverConfig c = config(1e-3, 1, 1);
  c.absorbing_boundary = true;
  try {
    evolve_ensemble(EnsembleState({{1.0, WaveField::gaussian(g, 1.0)}}), unit_params(1.0), c);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "absorbing_boundary");
  }
}
