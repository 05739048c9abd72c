#include "snlab/bipartite.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <memory>
#include <unsupported/Eigen/FFT>

#include "snlab/errors.hpp"
#include "snlab/propagation.hpp"
#include "snlab/sn_fields.hpp"

namespace snlab {

namespace {

void require_plane(const GridSpec& grid, const char* who) {
  if (grid.geometry() != Geometry::plane_z1z2) throw std::invalid_argument(std::string(who) + ": needs a plane_z1z2 grid");
}

// d psi / d z_axis by FFT along that axis.
Eigen::ArrayXXcd spectral_derivative(const Eigen::ArrayXXcd& psi, const Axis& ax, int axis) {
  const Eigen::ArrayXd k = fft_wavenumbers(ax.n, ax.spacing);
  Eigen::FFT<double> fft;
  Eigen::ArrayXXcd out(psi.rows(), psi.cols());
  std::vector<cplx> buf(ax.n), spec(ax.n);
  const Eigen::Index lines = axis == 0 ? psi.cols() : psi.rows();
  for (Eigen::Index l = 0; l < lines; ++l) {
    for (int i = 0; i < ax.n; ++i) buf[i] = axis == 0 ? psi(i, l) : psi(l, i);
    fft.fwd(spec.data(), buf.data(), ax.n);
    for (int i = 0; i < ax.n; ++i) spec[i] *= cplx(0, k(i));
    // the Nyquist mode has no odd partner; drop it so real fields stay real
    if (ax.n % 2 == 0) spec[ax.n / 2] = 0;
    fft.inv(buf.data(), spec.data(), ax.n);
    for (int i = 0; i < ax.n; ++i) (axis == 0 ? out(i, l) : out(l, i)) = buf[i];
  }
  return out;
}

}  // namespace

SchmidtMetrics schmidt_metrics(const WaveField& psi) {
  require_plane(psi.grid(), "schmidt_metrics");
  const GridSpec& g = psi.grid();
  const Eigen::MatrixXcd a = psi.amplitudes().matrix() * std::sqrt(g.axis(0).spacing * g.axis(1).spacing);
  const Eigen::MatrixXcd rho1 = a * a.adjoint();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho1, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("schmidt_metrics: eigensolver failed");
  const Eigen::ArrayXd p = es.eigenvalues().array().max(0.0);
  const double total = p.sum();
  double purity = 0, s = 0;
  for (double x : p) {
    const double q = x / total;
    purity += q * q;
    if (q > 0) s -= q * std::log2(q);
  }
  return {purity, 2 * s};
}

Eigen::Matrix4d grid_covariance(const WaveField& psi, double hbar) {
  require_plane(psi.grid(), "grid_covariance");
  const GridSpec& g = psi.grid();
  const Eigen::ArrayXXcd& f = psi.amplitudes();
  const double w = g.axis(0).spacing * g.axis(1).spacing;
  const Eigen::ArrayXXd z1 = g.axis(0).coords().replicate(1, g.cols());
  const Eigen::ArrayXXd z2 = g.axis(1).coords().transpose().replicate(g.rows(), 1);
  const Eigen::ArrayXXcd d1 = spectral_derivative(f, g.axis(0), 0);
  const Eigen::ArrayXXcd d2 = spectral_derivative(f, g.axis(1), 1);
  const Eigen::ArrayXXd rho = f.abs2() * w;
  const double n = rho.sum();

  const Eigen::ArrayXXd* x[2] = {&z1, &z2};
  const Eigen::ArrayXXcd* d[2] = {&d1, &d2};
  double mx[2], mp[2];
  for (int a = 0; a < 2; ++a) {
    mx[a] = (rho * *x[a]).sum() / n;
    mp[a] = hbar * w * (f.conjugate() * *d[a]).imag().sum() / n;
  }
  Eigen::Matrix4d c;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const double xx = (rho * *x[a] * *x[b]).sum() / n - mx[a] * mx[b];
      // Re <x_a p_b>; for a == b this is the symmetrised (x p + p x) / 2
      const double xp = hbar * w * (*x[a] * (f.conjugate() * *d[b]).imag()).sum() / n - mx[a] * mp[b];
      const double pp = hbar * hbar * w * (d[a]->conjugate() * *d[b]).real().sum() / n - mp[a] * mp[b];
      c(2 * a, 2 * b) = xx;
      c(2 * a, 2 * b + 1) = xp;
      c(2 * b + 1, 2 * a) = xp;
      c(2 * a + 1, 2 * b + 1) = pp;
    }
  return c;
}

BipartiteTrajectory evolve_bipartite_1d(const WaveField& psi0, const PhysicalParams& params, const SolverConfig& cfg,
                                        BipartiteOptions opt) {
  const GridSpec& g = psi0.grid();
  require_plane(g, "evolve_bipartite_1d");
  if (!std::isfinite(params.L)) throw ConfigError("bipartite evolution needs a finite separation", "L");
  const Axis& a1 = g.axis(0);
  const Axis& a2 = g.axis(1);
  const Eigen::ArrayXXd d = a2.coords().transpose().replicate(g.rows(), 1) - a1.coords().replicate(1, g.cols());
  const double gm2 = params.G * params.m * params.m;

  PotentialMap potential;
  Eigen::ArrayXXd fixed;
  std::unique_ptr<LineConvolver> self, v12, v21;
  switch (opt.kernel) {
    case BipartiteKernel::quadratic_newton: {
      const Eigen::ArrayXXd u = d / params.L;
      fixed = -gm2 / params.L * (1 - u + u.square());
      break;
    }
    case BipartiteKernel::full_newton:
      if ((params.L + d).minCoeff() <= 0)
        throw ConfigError("grid lets the particles cross; shrink the extents or increase L", "L");
      fixed = -gm2 / (params.L + d);
      break;
    case BipartiteKernel::softened_sn: {
      if (a1.n != a2.n || a1.spacing != a2.spacing || a1.origin != a2.origin)
        throw ConfigError("softened_sn needs identical axes for both particles", "grid");
      const double soft = opt.softening > 0 ? opt.softening : params.sigma / 2;
      const auto kernel = softened_gravity(params, soft);
      // V12(z1) = sum rho2(z2') K(z1 - L - z2'), V21(z2) = sum rho1(z1') K(z2 + L - z1')
      self = std::make_unique<LineConvolver>(a1.n, a1.spacing, kernel);
      v12 = std::make_unique<LineConvolver>(a1.n, a1.spacing, kernel, -params.L);
      v21 = std::make_unique<LineConvolver>(a1.n, a1.spacing, kernel, params.L);
      break;
    }
  }
  if (fixed.size())
    potential = [&fixed](const Eigen::ArrayXXd&) { return fixed; };
  else
    potential = [&](const Eigen::ArrayXXd& rho) {
      const Eigen::ArrayXd rho1 = rho.rowwise().sum() * a2.spacing;
      const Eigen::ArrayXd rho2 = rho.colwise().sum().transpose() * a1.spacing;
      const Eigen::ArrayXd v1 = (*self)(rho1) + (*v12)(rho2);
      const Eigen::ArrayXd v2 = (*self)(rho2) + (*v21)(rho1);
      return Eigen::ArrayXXd(v1.replicate(1, g.cols()) + v2.transpose().replicate(g.rows(), 1));
    };

  BipartiteTrajectory out{{}, {}, {}, psi0};
  const auto observe = [&](double t, const WaveField& psi, const Eigen::ArrayXXd&) {
    const SchmidtMetrics m = schmidt_metrics(psi);
    out.samples.push_back({t, psi.norm_squared(), m.purity, m.mutual_information, grid_covariance(psi, params.hbar)});
  };
  Trajectory tr = evolve_with(psi0, params, cfg, potential, observe);
  out.diagnostics = std::move(tr.diagnostics);
  out.warnings = std::move(tr.warnings);
  out.final_state = std::move(tr.final_state);
  return out;
}

}  // namespace snlab
