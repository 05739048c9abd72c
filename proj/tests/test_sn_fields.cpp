#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "snlab/sn_fields.hpp"

using namespace snlab;

namespace {

const double inf = std::numeric_limits<double>::infinity();

// G m^2 = 1 and sigma = 1
PhysicalParams unit_params(double L = inf, double G = 1.0) {
  PhysicalParams p;
  p.m = 1;
  p.hbar = 1;
  p.omega0 = 0.5;
  p.sigma = 1;
  p.G = G;
  p.L = L;
  return p;
}

double max_error_at_origin_region(int ns) {
  const PhysicalParams p = unit_params();
  const GridSpec g = GridSpec::cylinder(ns, 8.0, 2 * ns, 16.0);
  const WaveField psi = WaveField::gaussian(g, 1.0);
  const Eigen::ArrayXXd v = effective_potential(psi, p);
  const Eigen::ArrayXd s = g.axis(0).coords(), z = g.z_axis().coords();
  double err = 0;
  for (int i = 0; i < g.rows(); ++i)
    for (int k = 0; k < g.cols(); ++k)
      err = std::max(err, std::abs(v(i, k) - erf_potential(std::hypot(s(i), z(k)), p)));
  return err;
}

}  // namespace

TEST_CASE("erf potential limits") {
  const PhysicalParams p = unit_params();
  CHECK(erf_potential(0.0, p) == doctest::Approx(-std::sqrt(2 / M_PI)).epsilon(1e-15));
  CHECK(erf_potential(1e-9, p) == doctest::Approx(-std::sqrt(2 / M_PI)).epsilon(1e-12));
  CHECK(erf_potential(100.0, p) == doctest::Approx(-0.01).epsilon(1e-6));
  CHECK(erf_potential(1.0, p) == doctest::Approx(-std::erf(1 / std::sqrt(2.0))).epsilon(1e-14));
}

TEST_CASE("erf potential matches 3D quadrature of the Gaussian cloud") {
  const PhysicalParams p = unit_params();
  for (int i = 0; i < 20; ++i) {
    const double r = 0.05 + 0.4 * i;
    CHECK(erf_potential(r, p) == doctest::Approx(-oracle::gaussian_cloud_potential(r, 1.0)).epsilon(1e-8));
  }
}

TEST_CASE("initial Hamiltonian potentials") {
  const PhysicalParams p = unit_params(20.0);
  const InitialPotentials h = initial_hamiltonian_potentials(p);
  const Eigen::Vector3d o = Eigen::Vector3d::Zero();
  CHECK(h.v1(o) == doctest::Approx(-std::sqrt(2 / M_PI) - std::erf(20 / std::sqrt(2.0)) / 20).epsilon(1e-14));
  // mutual term at the centre is the point-mass value for L = 20 sigma
  CHECK(h.v1(o) - erf_potential(0, p) == doctest::Approx(-1.0 / 20).epsilon(1e-10));
  for (double z : {-3.0, -0.5, 0.7, 2.0}) {
    CHECK(h.v1(Eigen::Vector3d(0.3, 0, z)) == doctest::Approx(h.v2(Eigen::Vector3d(0.3, 0, -z))).epsilon(1e-15));
  }
}

TEST_CASE("n-particle initial potential") {
  const PhysicalParams p = unit_params(20.0);
  const Eigen::Vector3d x(0.2, -0.4, 0.9);
  const auto one = n_particle_initial_potential({Eigen::Vector3d(1, 2, 3)}, p);
  CHECK(one.size() == 1);
  CHECK(one[0](x) == doctest::Approx(erf_potential(x.norm(), p)));

  const auto two = n_particle_initial_potential({Eigen::Vector3d::Zero(), Eigen::Vector3d(0, 0, 20)}, p);
  const InitialPotentials h = initial_hamiltonian_potentials(p);
  CHECK(two[0](x) == doctest::Approx(h.v1(x)).epsilon(1e-15));
  CHECK(two[1](x) == doctest::Approx(h.v2(x)).epsilon(1e-15));

  const auto three = n_particle_initial_potential({Eigen::Vector3d(0, 0, -5), Eigen::Vector3d::Zero(), Eigen::Vector3d(0, 0, 5)}, p);
  CHECK(three[1](Eigen::Vector3d(0.1, 0, 1.3)) == doctest::Approx(three[1](Eigen::Vector3d(0.1, 0, -1.3))).epsilon(1e-15));
}

TEST_CASE("axial kernel") {
  CHECK(axial_kernel(0.0, 2.0, 1.5) == doctest::Approx(2 * M_PI / std::hypot(2.0, 1.5)).epsilon(1e-15));
  CHECK_THROWS_AS(axial_kernel(1.0, 1.0, 0.0), std::domain_error);
  CHECK(axial_kernel(1.0, 1.0, 1.0) == doctest::Approx(oracle::ring_kernel_quadrature(1.0, 1.0, 1.0)).epsilon(1e-10));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.01, 5.0), du(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const double s = u(rng), sp = u(rng), dz = du(rng);
    const double k = axial_kernel(s, sp, dz);
    CHECK(k > 0);
    CHECK(k == doctest::Approx(axial_kernel(sp, s, dz)).epsilon(1e-14));
    CHECK(k == doctest::Approx(axial_kernel(s, sp, -dz)).epsilon(1e-15));
    if (i % 10 == 0) CHECK(k == doctest::Approx(oracle::ring_kernel_quadrature(s, sp, dz)).epsilon(1e-10));
  }
  // nearly coincident rings keep the log behaviour
  // K ~ ln(4 / kc) as kc -> 0, with kc = eps / (2 + eps) here
  const double eps = (1.0 + 1e-9) - 1.0;
  CHECK(axial_kernel(1.0, 1.0 + 1e-9, 0.0) == doctest::Approx(4 / (2 + eps) * std::log(4 * (2 + eps) / eps)).epsilon(1e-12));
}

TEST_CASE("singular cell integrals") {
  // centred square: known closed form (ln 2 + 3 - pi/2) / 2
  CHECK(log_rectangle_integral(-0.5, 0.5, -0.5, 0.5) == doctest::Approx((std::log(2.0) + 3 - M_PI / 2) / 2).epsilon(1e-13));
  using boost::math::quadrature::gauss_kronrod;
  CHECK(log_rectangle_integral(1.0, 2.0, 0.5, 1.5) ==
        doctest::Approx(gauss_kronrod<double, 61>::integrate(
                            [](double x) {
                              return gauss_kronrod<double, 61>::integrate(
                                  [x](double y) { return -0.5 * std::log(x * x + y * y); }, 0.5, 1.5, 15, 1e-13);
                            },
                            1.0, 2.0, 15, 1e-13))
            .epsilon(1e-12));

  struct Cell {
    double s, s0, s1, z0, z1;
  };
  for (const Cell& c : {Cell{1.0, 0.9, 1.1, -0.1, 0.1}, Cell{0.15, 0.1, 0.2, -0.05, 0.05}, Cell{1.0, 0.9, 1.1, 0.1, 0.3},
                        Cell{2.0, 1.8, 1.9, -0.2, 0.0}, Cell{0.5, 0.0, 0.25, -0.125, 0.125}, Cell{3.0, 1.0, 1.5, 2.0, 2.5}})
    CHECK(axial_kernel_cell_integral(c.s, c.s0, c.s1, c.z0, c.z1) ==
          doctest::Approx(oracle::axial_cell_integral(c.s, c.s0, c.s1, c.z0, c.z1)).epsilon(1e-9));
}

TEST_CASE("effective potential converges to the closed form at second order") {
  const double e16 = max_error_at_origin_region(16);
  const double e32 = max_error_at_origin_region(32);
  const double e64 = max_error_at_origin_region(64);
  MESSAGE("max errors " << e16 << " " << e32 << " " << e64);
  CHECK(std::log2(e16 / e32) >= 1.8);
  CHECK(std::log2(e32 / e64) >= 1.8);
  CHECK(e64 < 1e-3);
}

TEST_CASE("effective potential properties") {
  const GridSpec g = GridSpec::cylinder(24, 6.0, 48, 12.0);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  Eigen::ArrayXXcd a(g.rows(), g.cols());
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = {nd(rng), nd(rng)};
  WaveField psi(g, a);
  psi.normalize();

  const PhysicalParams p = unit_params(15.0);
  const Eigen::ArrayXXd v = effective_potential(psi, p);
  CHECK(v.maxCoeff() < 0);
  const Eigen::ArrayXXd v2 = effective_potential(psi, unit_params(15.0, 2.0));
  CHECK((v2 - 2 * v).abs().maxCoeff() < 1e-13 * v.abs().maxCoeff());

  // mirror: partner below for psi equals partner above for psi(s, -z), reflected
  EffectivePotentialOptions below, above;
  above.partner = PartnerSide::above;
  WaveField flipped(g, a.rowwise().reverse());
  flipped.normalize();
  const Eigen::ArrayXXd vb = effective_potential(psi, p, below);
  const Eigen::ArrayXXd va = effective_potential(flipped, p, above);
  CHECK((vb - va.rowwise().reverse()).abs().maxCoeff() < 1e-12 * vb.abs().maxCoeff());

  // cached and on-the-fly kernels agree
  EffectivePotentialOptions tiny;
  tiny.cache_budget_bytes = 1;
  EffectivePotential cached(g, p), fly(g, p, tiny);
  CHECK(cached.cached());
  CHECK_FALSE(fly.cached());
  const PotentialParts pc = cached.parts(psi.density()), pf = fly.parts(psi.density());
  CHECK((pc.self - pf.self).abs().maxCoeff() < 1e-14 * pc.self.abs().maxCoeff());
  CHECK((pc.mutual - pf.mutual).abs().maxCoeff() < 1e-14 * pc.mutual.abs().maxCoeff());

  WaveField unnormalised(g, 2.0 * psi.amplitudes());
  CHECK_THROWS_AS(effective_potential(unnormalised, p), std::invalid_argument);
  // the mirror image must not overlap the grid
  CHECK_THROWS(EffectivePotential(g, unit_params(5.0)));
}

TEST_CASE("mutual potential of a distant partner is the point-mass value") {
  const PhysicalParams p = unit_params(30.0);
  const GridSpec g = GridSpec::cylinder(32, 8.0, 64, 16.0);
  const WaveField psi = WaveField::gaussian(g, 1.0);
  EffectivePotential pot(g, p);
  const PotentialParts parts = pot.parts(psi.density());
  // partner centred at z = -L: at the grid point nearest the origin
  const int i = 0, k = 31;
  const double z = g.z_axis().coord(k), s = g.axis(0).coord(i);
  const double r = std::hypot(s, z + 30.0);
  CHECK(parts.mutual(i, k) == doctest::Approx(erf_potential(r, p)).epsilon(1e-6));
}

TEST_CASE("line convolver matches the direct sum") {
  const int n = 37;
  const double h = 0.3, shift = 2.1;
  auto kern = [](double x) { return 1 / std::sqrt(x * x + 0.25); };
  LineConvolver conv(n, h, kern, shift);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u;
  Eigen::ArrayXd in(n);
  for (int i = 0; i < n; ++i) in(i) = u(rng);
  const Eigen::ArrayXd out = conv(in);
  for (int k = 0; k < n; ++k) {
    double ref = 0;
    for (int l = 0; l < n; ++l) ref += kern((k - l) * h + shift) * in(l) * h;
    CHECK(out(k) == doctest::Approx(ref).epsilon(1e-13));
  }
  const auto soft = softened_gravity(unit_params(), 0.5);
  CHECK(soft(0.0) == doctest::Approx(-2.0));
}
