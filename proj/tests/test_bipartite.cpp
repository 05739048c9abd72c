#include <doctest.h>

#include <cmath>
#include <limits>

#include "snlab/bipartite.hpp"
#include "snlab/correlations.hpp"
#include "snlab/errors.hpp"
#include "snlab/gaussian_dynamics.hpp"

using namespace snlab;

namespace {

PhysicalParams unit_params(double L, double G) {
  PhysicalParams p;
  p.m = 1;
  p.hbar = 1;
  p.omega0 = 0.5;
  p.sigma = 1;
  p.G = G;
  p.L = L;
  return p;
}

SolverConfig config(double dt, int n_steps, int every) {
  SolverConfig c;
  c.dt = dt;
  c.n_steps = n_steps;
  c.diagnostics_every = every;
  return c;
}

std::string config_error_field(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<none>";
}

// discretely orthonormal Hermite functions 0 and 1 on a symmetric axis
std::pair<Eigen::ArrayXd, Eigen::ArrayXd> hermite01(const Axis& a) {
  const Eigen::ArrayXd z = a.coords();
  Eigen::ArrayXd h0 = (-z.square() / 4).exp(), h1 = z * h0;
  h0 /= std::sqrt(h0.square().sum() * a.spacing);
  h1 /= std::sqrt(h1.square().sum() * a.spacing);
  return {h0, h1};
}

}  // namespace

TEST_CASE("Schmidt metrics of known states") {
  const GridSpec g = GridSpec::plane(48, 16.0, 48, 16.0);
  const auto [h0, h1] = hermite01(g.axis(0));
  CHECK(std::abs((h0 * h1).sum()) < 1e-14);

  const WaveField product = WaveField::gaussian(g, 1.0, 0.5, -1.0);
  const SchmidtMetrics pm = schmidt_metrics(product);
  CHECK(pm.purity == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pm.mutual_information < 1e-10);

  for (double c2 : {0.5, 0.8, 0.99}) {
    const Eigen::MatrixXd a = std::sqrt(c2) * h0.matrix() * h0.matrix().transpose() +
                              std::sqrt(1 - c2) * h1.matrix() * h1.matrix().transpose();
    const WaveField psi(g, a.array().cast<std::complex<double>>());
    const SchmidtMetrics m = schmidt_metrics(psi);
    const double h = -c2 * std::log2(c2) - (1 - c2) * std::log2(1 - c2);
    CHECK(m.purity == doctest::Approx(c2 * c2 + (1 - c2) * (1 - c2)).epsilon(1e-12));
    CHECK(m.mutual_information == doctest::Approx(2 * h).epsilon(1e-10));
  }
  CHECK_THROWS_AS(schmidt_metrics(WaveField::gaussian(GridSpec::line(32, 8.0), 1.0)), std::invalid_argument);
}

TEST_CASE("grid covariance of a product Gaussian") {
  const GridSpec g = GridSpec::plane(64, 20.0, 64, 20.0);
  const WaveField psi = WaveField::gaussian(g, 1.3, 0.4, -0.2);
  const Eigen::Matrix4d c = grid_covariance(psi, 1.0);
  Eigen::Matrix4d expect = Eigen::Matrix4d::Zero();
  expect.diagonal() << 1.69, 1 / (4 * 1.69), 1.69, 1 / (4 * 1.69);
  CHECK((c - expect).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("quadratic Newton coupling reproduces the Gaussian closed form") {
  const GridSpec g = GridSpec::plane(128, 24.0, 128, 24.0);
  const PhysicalParams p = unit_params(10.0, 5.0);
  BipartiteOptions opt;
  opt.kernel = BipartiteKernel::quadratic_newton;
  const BipartiteTrajectory tr = evolve_bipartite_1d(WaveField::gaussian(g, 1.0), p, config(1e-3, 2000, 500), opt);
  REQUIRE(tr.samples.size() == 5);
  for (const BipartiteSample& s : tr.samples) {
    const CovarianceMatrix exact = covariance_at(s.t, p);
    const double scale = exact.entries().cwiseAbs().maxCoeff();
    CHECK((s.covariance - exact.entries()).cwiseAbs().maxCoeff() < 1e-4 * scale);
    CHECK(s.mutual_information == doctest::Approx(mutual_information(exact)).epsilon(1e-4));
    CHECK(s.norm == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(tr.samples.back().mutual_information > 1e-2);

  const BipartiteTrajectory free = evolve_bipartite_1d(WaveField::gaussian(g, 1.0), unit_params(10.0, 0.0),
                                                       config(1e-3, 500, 100), opt);
  for (const BipartiteSample& s : free.samples) CHECK(s.mutual_information < 1e-10);
}

TEST_CASE("SN coupling keeps the two particles unentangled") {
  const GridSpec g = GridSpec::plane(64, 16.0, 64, 16.0);
  const PhysicalParams p = unit_params(10.0, 5.0);
  const BipartiteTrajectory tr = evolve_bipartite_1d(WaveField::gaussian(g, 1.0), p, config(2e-3, 500, 50));
  double min_purity = 1, max_mi = 0;
  for (const BipartiteSample& s : tr.samples) {
    min_purity = std::min(min_purity, s.purity);
    max_mi = std::max(max_mi, s.mutual_information);
  }
  CHECK(min_purity >= 1 - 1e-10);
  CHECK(max_mi < 1e-10);
  // no position correlation builds up either
  const Eigen::Matrix4d& c = tr.samples.back().covariance;
  CHECK(c(0, 2) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("bipartite configuration errors") {
  const GridSpec g = GridSpec::plane(64, 24.0, 64, 24.0);
  const WaveField psi = WaveField::gaussian(g, 1.0);
  BipartiteOptions full;
  full.kernel = BipartiteKernel::full_newton;
  CHECK(config_error_field([&] {
          evolve_bipartite_1d(psi, unit_params(std::numeric_limits<double>::infinity(), 1.0), config(1e-3, 1, 1));
        }) == "L");
  CHECK(config_error_field([&] { evolve_bipartite_1d(psi, unit_params(10.0, 1.0), config(1e-3, 1, 1), full); }) == "L");
  CHECK_NOTHROW(evolve_bipartite_1d(psi, unit_params(30.0, 1.0), config(1e-3, 1, 1), full));

  const GridSpec uneven = GridSpec::plane(64, 24.0, 32, 24.0);
  CHECK(config_error_field([&] {
          evolve_bipartite_1d(WaveField::gaussian(uneven, 1.0), unit_params(30.0, 1.0), config(1e-3, 1, 1));
        }) == "grid");
}
