#include "snlab/sn_solver.hpp"

#include <cmath>
#include <sstream>

#include "snlab/errors.hpp"

namespace snlab {

namespace {

// Central differences along one axis of a complex field. The low end of the
// radial axis mirrors (psi is even in s); every other edge sees psi = 0 outside.
Eigen::ArrayXXcd gradient(const Eigen::ArrayXXcd& f, int axis, double h, bool radial) {
  const Eigen::Index rows = f.rows(), cols = f.cols();
  Eigen::ArrayXXcd g(rows, cols);
  const Eigen::Index n = axis == 0 ? rows : cols;
  auto at = [&](Eigen::Index i, Eigen::Index l) -> cplx {
    if (i < 0) return radial ? (axis == 0 ? f(0, l) : f(l, 0)) : cplx{};
    if (i >= n) return {};
    return axis == 0 ? f(i, l) : f(l, i);
  };
  const Eigen::Index lines = axis == 0 ? cols : rows;
  for (Eigen::Index l = 0; l < lines; ++l)
    for (Eigen::Index i = 0; i < n; ++i) {
      const cplx d = (at(i + 1, l) - at(i - 1, l)) / (2 * h);
      if (axis == 0)
        g(i, l) = d;
      else
        g(l, i) = d;
    }
  return g;
}

// Central differences of a real field, one-sided second order at the edges
// (mirrored at the cylinder axis).
Eigen::ArrayXXd gradient(const Eigen::ArrayXXd& f, int axis, double h, bool radial) {
  Eigen::ArrayXXd v = axis == 0 ? f : Eigen::ArrayXXd(f.transpose());
  const Eigen::Index n = v.rows();
  Eigen::ArrayXXd g(v.rows(), v.cols());
  if (n < 3) throw std::invalid_argument("gradient: axis needs at least 3 points");
  for (Eigen::Index i = 1; i + 1 < n; ++i) g.row(i) = (v.row(i + 1) - v.row(i - 1)) / (2 * h);
  if (radial)
    g.row(0) = (v.row(1) - v.row(0)) / (2 * h);
  else
    g.row(0) = (-3 * v.row(0) + 4 * v.row(1) - v.row(2)) / (2 * h);
  g.row(n - 1) = (3 * v.row(n - 1) - 4 * v.row(n - 2) + v.row(n - 3)) / (2 * h);
  return axis == 0 ? g : Eigen::ArrayXXd(g.transpose());
}

int z_index(const GridSpec& grid) {
  switch (grid.geometry()) {
    case Geometry::line_z: return 0;
    case Geometry::cylinder_sz: return 1;
    case Geometry::plane_z1z2: break;
  }
  throw std::invalid_argument("operation needs a line_z or cylinder_sz grid");
}

Eigen::ArrayXXd z_coords(const GridSpec& grid) {
  const Eigen::ArrayXd z = grid.z_axis().coords();
  if (grid.geometry() == Geometry::line_z) return z;
  return z.transpose().replicate(grid.rows(), 1);
}

}  // namespace

void SolverConfig::validate() const {
  if (!(dt > 0) || !std::isfinite(dt)) throw ConfigError("must be positive and finite", "dt");
  if (n_steps < 0) throw ConfigError("must be non-negative", "n_steps");
  if (absorbing_boundary && absorbing_width < 1) throw ConfigError("must be at least 1", "absorbing_width");
  if (!(absorbing_strength >= 0)) throw ConfigError("must be non-negative", "absorbing_strength");
  if (diagnostics_every < 0) throw ConfigError("must be non-negative", "diagnostics_every");
  if (snapshot_every < 0) throw ConfigError("must be non-negative", "snapshot_every");
  if (boundary_width < 1) throw ConfigError("must be at least 1", "boundary_width");
  if (!(boundary_warn > 0) || !(boundary_fail >= boundary_warn))
    throw ConfigError("need 0 < boundary_warn <= boundary_fail", "boundary_fail");
}

void check_stability(const GridSpec& grid, const PhysicalParams& params, const SolverConfig& cfg) {
  cfg.validate();
  KineticPropagator probe(grid, params.hbar / params.m, cfg.dt, cfg.scheme);
  const double r = cfg.dt * probe.max_rate();
  if (!(r < 0.5)) {
    std::ostringstream os;
    os << "dt * E_max / hbar = " << r << " exceeds 0.5; largest stable dt is " << 0.5 / probe.max_rate() << " s";
    throw ConfigError(os.str(), "dt");
  }
}

SplitStepper::SplitStepper(const GridSpec& grid, const PhysicalParams& params, const SolverConfig& cfg,
                           bool imaginary_time)
    : dt_(cfg.dt),
      hbar_(params.hbar),
      imaginary_(imaginary_time),
      kinetic_(grid, params.hbar / params.m, cfg.dt, cfg.scheme, imaginary_time) {
  if (cfg.absorbing_boundary) {
    // exp(-strength * depth^2), depth rising from 0 at the inner edge of the layer to 1 at the wall
    absorb_mask_ = Eigen::ArrayXXd::Ones(grid.rows(), grid.cols());
    const int w = cfg.absorbing_width;
    for (int layer = 0; layer < w; ++layer) {
      const double depth = double(w - layer) / w;
      const double f = std::exp(-cfg.absorbing_strength * depth * depth);
      Eigen::ArrayXXd ring = grid.boundary_mask(layer + 1) - grid.boundary_mask(layer);
      absorb_mask_ = (ring > 0).select(absorb_mask_.min(f), absorb_mask_);
    }
  }
}

void SplitStepper::potential_half(Eigen::ArrayXXcd& psi, const Eigen::ArrayXXd& v) const {
  const double a = dt_ / (2 * hbar_);
  if (imaginary_)
    psi *= (-a * v).exp();
  else
    psi *= (v * -a).unaryExpr([](double x) { return std::polar(1.0, x); });
}

void SplitStepper::step(Eigen::ArrayXXcd& psi, const Eigen::ArrayXXd& v) {
  potential_half(psi, v);
  kinetic_.apply(psi);
  potential_half(psi, v);
}

void SplitStepper::absorb(Eigen::ArrayXXcd& psi) const {
  if (absorb_mask_.size()) psi *= absorb_mask_;
}

Eigen::ArrayXXd d_dz(const GridSpec& grid, const Eigen::ArrayXXd& f) {
  const int axis = z_index(grid);
  const double h = grid.z_axis().spacing;
  Eigen::ArrayXXd v = axis == 0 ? f : Eigen::ArrayXXd(f.transpose());
  const Eigen::Index n = v.rows();
  if (n < 5) throw std::invalid_argument("d_dz: need at least 5 axial points");
  Eigen::ArrayXXd g(v.rows(), v.cols());
  for (Eigen::Index i = 2; i + 2 < n; ++i)
    g.row(i) = (v.row(i - 2) - 8 * v.row(i - 1) + 8 * v.row(i + 1) - v.row(i + 2)) / (12 * h);
  g.row(1) = (v.row(2) - v.row(0)) / (2 * h);
  g.row(n - 2) = (v.row(n - 1) - v.row(n - 3)) / (2 * h);
  g.row(0) = (-3 * v.row(0) + 4 * v.row(1) - v.row(2)) / (2 * h);
  g.row(n - 1) = (3 * v.row(n - 1) - 4 * v.row(n - 2) + v.row(n - 3)) / (2 * h);
  return axis == 0 ? g : Eigen::ArrayXXd(g.transpose());
}

namespace {

// -int j . grad V with the current j = (hbar/m) Im(psi* grad psi)
double direct_rate(const WaveField& psi, const Eigen::ArrayXXd& v, const PhysicalParams& params) {
  const GridSpec& grid = psi.grid();
  if (v.rows() != grid.rows() || v.cols() != grid.cols())
    throw std::invalid_argument("kinetic_energy_rate: potential shape does not match grid");
  const Eigen::ArrayXXcd& f = psi.amplitudes();
  const Eigen::ArrayXXd w = grid.cell_weights();
  const bool cyl = grid.geometry() == Geometry::cylinder_sz;
  double direct = 0;
  for (int a = 0; a < grid.rank(); ++a) {
    const double h = grid.axis(a).spacing;
    const bool radial = cyl && a == 0;
    const Eigen::ArrayXXd j = params.hbar / params.m * (f.conjugate() * gradient(f, a, h, radial)).imag();
    direct -= (w * j * gradient(v, a, h, radial)).sum();
  }
  return direct;
}

// -int (d rho/dt) V with d rho/dt = -(hbar/m) Im(psi* lap psi)
double continuity_rate(const WaveField& psi, const Eigen::ArrayXXcd& lap, const Eigen::ArrayXXd& v,
                       const PhysicalParams& params) {
  const Eigen::ArrayXXcd& f = psi.amplitudes();
  const Eigen::ArrayXXd rho_dot = -(params.hbar / params.m) * (f.conjugate() * lap).imag();
  return -(psi.grid().cell_weights() * rho_dot * v).sum();
}

}  // namespace

KineticEnergyRate kinetic_energy_rate(const WaveField& psi, const Eigen::ArrayXXd& v, const PhysicalParams& params,
                                      KineticScheme scheme) {
  const double direct = direct_rate(psi, v, params);
  // any dt works: only the Laplacian is used
  KineticPropagator kin(psi.grid(), params.hbar / params.m, 1.0, scheme);
  return {direct, continuity_rate(psi, kin.laplacian(psi.amplitudes()), v, params)};
}

Diagnostics diagnose(const WaveField& psi, const Eigen::ArrayXXd& v, const PhysicalParams& params, double t,
                     KineticPropagator& kinetic) {
  const GridSpec& grid = psi.grid();
  const Eigen::ArrayXXcd& f = psi.amplitudes();
  const Eigen::ArrayXXd w = grid.cell_weights();
  const Eigen::ArrayXXd rho = f.abs2() * w;
  Diagnostics d;
  d.t = t;
  d.norm = rho.sum();
  if (grid.geometry() != Geometry::plane_z1z2) {
    const Eigen::ArrayXXd z = z_coords(grid);
    d.mean_position = (rho * z).sum() / d.norm;
    d.width = std::sqrt(std::max(0.0, (rho * z.square()).sum() / d.norm - d.mean_position * d.mean_position));
    const int za = z_index(grid);
    const Eigen::ArrayXXcd dz = gradient(f, za, grid.z_axis().spacing, false);
    d.mean_momentum = params.hbar * (w * (f.conjugate() * dz).imag()).sum();
  }
  const Eigen::ArrayXXcd lap = kinetic.laplacian(f);
  d.kinetic_energy = -params.hbar * params.hbar / (2 * params.m) * (w * (f.conjugate() * lap).real()).sum();
  d.dT_dt_continuity = continuity_rate(psi, lap, v, params);
  d.dT_dt_direct = direct_rate(psi, v, params);
  return d;
}

Trajectory evolve_with(const WaveField& psi0, const PhysicalParams& params, const SolverConfig& cfg,
                       const PotentialMap& potential, const Observer& observe) {
  psi0.require_normalized();
  const GridSpec& grid = psi0.grid();
  check_stability(grid, params, cfg);
  SplitStepper stepper(grid, params, cfg);

  Trajectory out{{}, {}, psi0.warnings(), psi0, 0};
  Eigen::ArrayXXcd psi = psi0.amplitudes();
  const Eigen::ArrayXXd w = grid.cell_weights();
  const Eigen::ArrayXXd edge = w * grid.boundary_mask(cfg.boundary_width);
  double prev_norm = (psi.abs2() * w).sum();
  bool warned = false;

  for (int k = 0;; ++k) {
    const double t = k * cfg.dt;
    const Eigen::ArrayXXd rho = psi.abs2();
    const Eigen::ArrayXXd v = potential(rho);

    const double leak = (rho * edge).sum();
    if (!std::isfinite(leak)) throw InstabilityError("non-finite amplitudes at t = " + std::to_string(t) + " s");
    if (leak > cfg.boundary_fail) {
      std::ostringstream os;
      os << "boundary probability " << leak << " exceeds " << cfg.boundary_fail << " at t = " << t << " s";
      throw InstabilityError(os.str());
    }
    if (leak > cfg.boundary_warn && !warned) {
      std::ostringstream os;
      os << "boundary probability " << leak << " exceeds " << cfg.boundary_warn << " at t = " << t << " s";
      out.warnings.push_back(os.str());
      warned = true;
    }

    const bool last = k == cfg.n_steps;
    if (cfg.diagnostics_every > 0 && (k % cfg.diagnostics_every == 0 || last)) {
      const WaveField now(grid, psi);
      out.diagnostics.push_back(diagnose(now, v, params, t, stepper.kinetic()));
      if (observe) observe(t, now, v);
    }
    if (cfg.snapshot_every > 0 && (k % cfg.snapshot_every == 0 || last))
      out.snapshots.push_back({t, WaveField(grid, psi)});
    if (last) break;

    if (cfg.update == NonlinearityUpdate::per_step) {
      stepper.step(psi, v);
    } else {
      Eigen::ArrayXXcd trial = psi;
      stepper.step(trial, v);
      stepper.step(psi, potential(0.5 * (rho + trial.abs2())));
    }
    stepper.absorb(psi);

    const double n2 = (psi.abs2() * w).sum();
    out.max_norm_drift_per_step = std::max(out.max_norm_drift_per_step, std::abs(n2 - prev_norm));
    prev_norm = n2;
  }
  out.final_state = WaveField(grid, psi);
  return out;
}

Trajectory evolve_effective(const WaveField& psi0, const PhysicalParams& params, const SolverConfig& cfg,
                            EffectivePotentialOptions opt) {
  if (psi0.grid().geometry() != Geometry::cylinder_sz)
    throw std::invalid_argument("evolve_effective: needs a cylinder_sz grid");
  if (params.G == 0) {
    const Eigen::ArrayXXd zero = Eigen::ArrayXXd::Zero(psi0.grid().rows(), psi0.grid().cols());
    return evolve_with(psi0, params, cfg, [&](const Eigen::ArrayXXd&) { return zero; });
  }
  EffectivePotential pot(psi0.grid(), params, opt);
  return evolve_with(psi0, params, cfg, [&](const Eigen::ArrayXXd& rho) { return pot(rho); });
}

WaveField relax_ground_state(const WaveField& guess, const PhysicalParams& params, double dtau, int max_steps,
                             double tol, EffectivePotentialOptions opt) {
  const GridSpec& grid = guess.grid();
  if (grid.geometry() != Geometry::cylinder_sz)
    throw std::invalid_argument("relax_ground_state: needs a cylinder_sz grid");
  SolverConfig cfg;
  cfg.dt = dtau;
  check_stability(grid, params, cfg);
  SplitStepper stepper(grid, params, cfg, true);
  EffectivePotential pot(grid, params, opt);
  const Eigen::ArrayXXd w = grid.cell_weights();

  Eigen::ArrayXXcd psi = guess.amplitudes();
  psi /= std::sqrt((psi.abs2() * w).sum());
  double mu_prev = 0;
  for (int k = 0; k < max_steps; ++k) {
    const Eigen::ArrayXXd v = pot(psi.abs2());
    stepper.step(psi, v);
    // decay rate of the norm over one step is the chemical potential
    const double n2 = (psi.abs2() * w).sum();
    const double mu = -params.hbar * std::log(n2) / (2 * dtau);
    psi /= std::sqrt(n2);
    if (!std::isfinite(mu)) throw InstabilityError("relax_ground_state: non-finite chemical potential");
    if (k > 0 && std::abs(mu - mu_prev) <= tol * std::abs(mu)) break;
    mu_prev = mu;
  }
  return WaveField(grid, psi);
}

double ehrenfest_force(const WaveField& psi, const PhysicalParams& params, EffectivePotentialOptions opt) {
  psi.require_normalized();
  if (params.G == 0) return 0;
  const GridSpec& grid = psi.grid();
  EffectivePotential pot(grid, params, opt);
  const Eigen::ArrayXXd rho = psi.density();
  const PotentialParts parts = pot.parts(rho);
  return -(grid.cell_weights() * rho * d_dz(grid, parts.mutual)).sum();
}

double self_force(const WaveField& psi, const PhysicalParams& params) {
  psi.require_normalized();
  if (params.G == 0) return 0;
  const GridSpec& grid = psi.grid();
  EffectivePotentialOptions opt;
  opt.include_partner = false;
  EffectivePotential pot(grid, params, opt);
  const Eigen::ArrayXXd rho = psi.density();
  return -(grid.cell_weights() * rho * d_dz(grid, pot.parts(rho).self)).sum();
}

}  // namespace snlab
