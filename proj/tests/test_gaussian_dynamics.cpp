#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>

#include "oracles.hpp"
#include "snlab/errors.hpp"
#include "snlab/gaussian_dynamics.hpp"

using namespace snlab;
using oracle::mp50;

namespace {

PhysicalParams reference_params(double T = 0) {
  return PhysicalParams::ground_state(1.11e-17, 500e-9, 2 * M_PI * 500e3, T);
}

// Worst entry error relative to sqrt(sigma_ii sigma_jj).
double max_rel_error(const Eigen::Matrix4d& a, const Eigen::Matrix<long double, 4, 4>& b) {
  double worst = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double scale = std::sqrt(double(b(i, i) * b(j, j)));
      worst = std::max(worst, std::abs(a(i, j) - double(b(i, j))) / scale);
    }
  return worst;
}

}  // namespace

TEST_CASE("series helpers agree with 50-digit direct formulas") {
  using namespace snlab::detail;
  for (double x : {1e-8, 1e-4, 3e-3, 0.1, 0.5, 0.999, 1.0, 1.5, 4.0, -0.3, -2.0}) {
    const mp50 X = x;
    const mp50 sc = sinh(X) / X;
    CAPTURE(x);
    CHECK(sinhc(x) == doctest::Approx(double(sc)).epsilon(1e-15));
    CHECK(sinhc_minus_one(x) == doctest::Approx(double(sc - 1)).epsilon(1e-14));
    CHECK(sinhc_sq_minus_one(x) == doctest::Approx(double(sc * sc - 1)).epsilon(1e-14));
    CHECK(cosh_minus_sinhc(x) == doctest::Approx(double(cosh(X) - sc)).epsilon(1e-14));
    const mp50 sh = sinh(X);
    const mp50 g = X * X * sh * sh - X * sinh(2 * X) + 2 * sh * sh;
    CHECK(mixed_growth(x) == doctest::Approx(double(g)).epsilon(1e-14));
  }
  CHECK(sinhc(0.0) == 1.0);
  CHECK(mixed_growth(0.0) == 0.0);
}

TEST_CASE("coupling frequency and phonon number") {
  const auto p = reference_params();
  CHECK(coupling_frequency(p) == doctest::Approx(std::sqrt(4 * 6.6743e-11 * 1.11e-17 / std::pow(500e-9, 3))));
  // 30-digit evaluation of sqrt(4 G m / L^3) at these inputs
  CHECK(coupling_frequency(p) == doctest::Approx(1.5397114534873084e-04).epsilon(1e-12));
  CHECK(phonon_number(p) == 0.0);
  const auto hot = reference_params(12e-6);
  const double x = hot.hbar * hot.omega0 / (hot.kB * hot.T);
  CHECK(phonon_number(hot) == doctest::Approx(1 / (std::exp(x) - 1)).epsilon(1e-13));
  PhysicalParams far = p;
  far.L = INFINITY;
  CHECK(coupling_frequency(far) == 0.0);
}

TEST_CASE("trap frequency conventions") {
  CHECK(trap_angular_frequency(500e3, FrequencyConvention::angular) == 500e3);
  CHECK(trap_angular_frequency(500e3, FrequencyConvention::cyclic) == doctest::Approx(2 * M_PI * 500e3));
}

TEST_CASE("covariance at t = 0 is the trap ground state") {
  const auto p = reference_params();
  const auto cm = covariance_at(0, p);
  const double sx = p.hbar / (2 * p.m * p.omega0);
  const double sp = p.hbar * p.m * p.omega0 / 2;
  Eigen::Matrix4d expect = Eigen::Vector4d(sx, sp, sx, sp).asDiagonal();
  CHECK((cm.entries() - expect).cwiseAbs().maxCoeff() <= 1e-15 * sp);
  CHECK(cm.invariants().det_alpha_excess == 0.0);
  CHECK(cm.invariants().seralian_pt_excess == 0.0);
}

TEST_CASE("closed form agrees with the moment ODE") {
  SUBCASE("reference parameters over two seconds") {
    const auto p = reference_params();
    for (int i = 0; i < 50; ++i) {
      const double t = 2.0 * (i + 1) / 50;
      CAPTURE(t);
      CHECK(max_rel_error(covariance_at(t, p).entries(), oracle::covariance_ode(t, p)) < 1e-8);
    }
  }
  SUBCASE("strong coupling, omega t up to 5") {
    auto p = reference_params();
    p = p.with_inflated_coupling(1e6);  // omega ~ 0.15 rad/s
    const double w = coupling_frequency(p);
    for (double wt : {0.01, 0.5, 0.99, 1.01, 2.0, 5.0}) {
      CAPTURE(wt);
      CHECK(max_rel_error(covariance_at(wt / w, p).entries(), oracle::covariance_ode(wt / w, p)) < 1e-8);
    }
  }
  SUBCASE("no gravity") {
    auto p = reference_params();
    p.G = 0;
    const auto cm = covariance_at(1.0, p);
    CHECK(max_rel_error(cm.entries(), oracle::covariance_ode(1.0, p)) < 1e-12);
    CHECK(cm(0, 2) == 0.0);
    CHECK(cm.invariants().seralian_pt_excess == 0.0);
  }
}

TEST_CASE("closed-form invariants agree with entry determinants when the latter are resolvable") {
  auto p = reference_params().with_inflated_coupling(1e9);
  p.omega0 = 1e3;
  p.sigma = p.ground_state_width();
  const double w = coupling_frequency(p);
  for (double wt : {0.3, 1.0, 2.5}) {
    const auto cm = covariance_at(wt / w, p);
    const auto raw = CovarianceMatrix::from_entries(cm.entries(), p.hbar);
    const auto& a = cm.invariants();
    const auto& b = raw.invariants();
    CAPTURE(wt);
    const double scale = a.det_alpha_excess + 0.25;
    CHECK(std::abs(a.det_alpha_excess - b.det_alpha_excess) < 1e-9 * scale);
    CHECK(std::abs(a.det_gamma - b.det_gamma) < 1e-9 * scale);
    CHECK(std::abs(a.root_det - b.root_det) < 1e-13 * (1 + scale * scale));  // 4x4 determinant cancels
    CHECK(std::abs(a.seralian_pt_excess - b.seralian_pt_excess) < 1e-8 * scale);
  }
}

TEST_CASE("thermal scaling") {
  const auto p = reference_params();
  const auto cm = covariance_at(0.5, p);
  const auto hot = thermal_scale(cm, 1.0);
  CHECK((hot.entries() - 3 * cm.entries()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(hot.invariants().root_det == doctest::Approx(9 * 0.25));
  CHECK(hot.invariants().det_alpha_excess == doctest::Approx(9 * cm.invariants().det_alpha_excess + 2));
  CHECK_THROWS_AS(thermal_scale(cm, -1.0), std::invalid_argument);
}

TEST_CASE("input validation") {
  auto p = reference_params();
  CHECK_THROWS_AS(covariance_at(-1.0, p), std::invalid_argument);
  p.m = 0;
  CHECK_THROWS_AS(covariance_at(1.0, p), std::invalid_argument);
  auto q = reference_params();
  q.sigma = 0.2 * q.L;
  CHECK(q.warnings().size() == 2);
  Eigen::Matrix4d asym = Eigen::Matrix4d::Identity();
  asym(0, 1) = 0.1;
  CHECK_THROWS_AS(CovarianceMatrix::from_entries(asym, 1.0), MalformedCovariance);
}

TEST_CASE("phonon number limits") {
  auto p = reference_params(1.0);
  p.T = p.hbar * p.omega0 / (2 * p.kB);
  CHECK(phonon_number(p) == doctest::Approx(1 / (std::exp(2.0) - 1)).epsilon(1e-13));
  CHECK(phonon_number(p) == doctest::Approx(0.156518).epsilon(1e-5));
  p.T = p.hbar * p.omega0 / (1e-6 * p.kB);
  const double x = 1e-6;
  CHECK(phonon_number(p) * x <= 1.0);
  CHECK(phonon_number(p) * x >= 1 - 1e-5);
}

TEST_CASE("coupling frequency scaling") {
  auto p = reference_params();
  const double w = coupling_frequency(p);
  p.L *= 2;
  CHECK(coupling_frequency(p) == doctest::Approx(w / std::pow(2.0, 1.5)).epsilon(1e-15));
}

TEST_CASE("thermal scaling by two") {
  const auto cm = covariance_at(0.7, reference_params());
  CHECK((thermal_scale(cm, 0.5).entries() - 2 * cm.entries()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((thermal_scale(cm, 0.0).entries() - cm.entries()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("vanishing coupling has no cancellation") {
  auto p = reference_params();
  auto q = p;
  q.G = 0;
  // choose G so that omega = 1e-12 rad/s
  p.G = 1e-24 * p.L * p.L * p.L / (4 * p.m);
  REQUIRE(coupling_frequency(p) == doctest::Approx(1e-12));
  for (double t : {0.1, 1.0, 3.0}) {
    const auto a = covariance_at(t, p).entries();
    const auto b = covariance_at(t, q).entries();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        CHECK(std::abs(a(i, j) - b(i, j)) <= 1e-9 * std::sqrt(b(i, i) * b(j, j)));
  }
}

TEST_CASE("position-momentum entry has the expected initial slope") {
  // d sigma_01 / dt at t = 0: hbar omega0 / 8 * (2 + 2 (omega0/omega + omega/omega0) omega/omega0)
  const auto p = reference_params().with_inflated_coupling(1e12);
  const double r = coupling_frequency(p) / p.omega0;
  const double h = 1e-9 / p.omega0;
  const double slope = (covariance_at(h, p)(0, 1) - covariance_at(0, p)(0, 1)) / h;
  const double expect = p.hbar * p.omega0 / 8 * (2 + 2 * (1 / r + r) * r);
  CHECK(slope == doctest::Approx(expect).epsilon(1e-6));
}
