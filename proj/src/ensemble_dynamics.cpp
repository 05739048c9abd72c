#include "snlab/ensemble_dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>

#include "snlab/errors.hpp"
#include "snlab/propagation.hpp"
#include "snlab/sn_fields.hpp"

namespace snlab {

namespace {

PotentialMap self_potential(const GridSpec& grid, const PhysicalParams& params, double softening) {
  if (params.G == 0) {
    const Eigen::ArrayXXd zero = Eigen::ArrayXXd::Zero(grid.rows(), grid.cols());
    return [zero](const Eigen::ArrayXXd&) { return zero; };
  }
  switch (grid.geometry()) {
    case Geometry::line_z: {
      const double a = softening > 0 ? softening : params.sigma / 2;
      auto conv = std::make_shared<LineConvolver>(grid.rows(), grid.axis(0).spacing, softened_gravity(params, a));
      return [conv](const Eigen::ArrayXXd& rho) { return Eigen::ArrayXXd((*conv)(rho.col(0))); };
    }
    case Geometry::cylinder_sz: {
      EffectivePotentialOptions opt;
      opt.include_partner = false;
      auto pot = std::make_shared<EffectivePotential>(grid, params, opt);
      return [pot](const Eigen::ArrayXXd& rho) { return (*pot)(rho); };
    }
    case Geometry::plane_z1z2: break;
  }
  throw std::invalid_argument("ensemble evolution needs a line_z or cylinder_sz grid");
}

Eigen::ArrayXXd weighted_density(const std::vector<double>& p, const std::vector<Eigen::ArrayXXcd>& psi) {
  Eigen::ArrayXXd rho = Eigen::ArrayXXd::Zero(psi.front().rows(), psi.front().cols());
  for (std::size_t j = 0; j < psi.size(); ++j) rho += p[j] * psi[j].abs2();
  return rho;
}

}  // namespace

EnsembleState::EnsembleState(std::vector<EnsembleMember> members) : members_(std::move(members)) {
  if (members_.empty()) throw std::invalid_argument("EnsembleState: no members");
  double total = 0;
  for (const auto& m : members_) {
    if (!(m.p >= 0) || !std::isfinite(m.p)) throw std::invalid_argument("EnsembleState: probabilities must be >= 0");
    if (!(m.psi.grid() == members_.front().psi.grid()))
      throw std::invalid_argument("EnsembleState: members live on different grids");
    m.psi.require_normalized();
    total += m.p;
  }
  if (std::abs(total - 1) > 1e-12) {
    std::ostringstream os;
    os << "EnsembleState: probabilities sum to " << total;
    throw std::invalid_argument(os.str());
  }
}

Eigen::ArrayXXd density(const EnsembleState& e) {
  Eigen::ArrayXXd rho = Eigen::ArrayXXd::Zero(e.grid().rows(), e.grid().cols());
  for (const auto& m : e.members()) rho += m.p * m.psi.density();
  return rho;
}

double l1_distance(const GridSpec& grid, const Eigen::ArrayXXd& rho_a, const Eigen::ArrayXXd& rho_b) {
  return (grid.cell_weights() * (rho_a - rho_b).abs()).sum();
}

double GapSeries::max() const { return delta.empty() ? 0 : *std::max_element(delta.begin(), delta.end()); }

EnsembleTrajectory evolve_ensemble(const EnsembleState& e0, const PhysicalParams& params, const SolverConfig& cfg,
                                   EnsembleOptions opt) {
  const GridSpec& grid = e0.grid();
  check_stability(grid, params, cfg);
  if (cfg.absorbing_boundary) throw ConfigError("not supported for ensembles", "absorbing_boundary");
  SplitStepper stepper(grid, params, cfg);
  const PotentialMap potential = self_potential(grid, params, opt.softening);

  std::vector<double> p;
  std::vector<Eigen::ArrayXXcd> psi;
  for (const auto& m : e0.members()) {
    p.push_back(m.p);
    psi.push_back(m.psi.amplitudes());
  }
  const std::size_t n = psi.size();
  const Eigen::ArrayXXd w = grid.cell_weights();
  const Eigen::ArrayXXd edge = w * grid.boundary_mask(cfg.boundary_width);
  std::vector<double> prev(n);
  for (std::size_t j = 0; j < n; ++j) prev[j] = (psi[j].abs2() * w).sum();

  EnsembleTrajectory out{{}, {}, {}, {}, {}, e0, 0};
  auto state = [&] {
    std::vector<EnsembleMember> members;
    for (std::size_t j = 0; j < n; ++j) members.push_back({p[j], WaveField(grid, psi[j])});
    return EnsembleState(std::move(members));
  };
  bool warned = false;
  const bool mixed = opt.mode == EnsembleMode::mixed_state_sn;
  const bool corrector = cfg.update == NonlinearityUpdate::predictor_corrector;

  // One step of every member: the shared potential in mixed mode, its own otherwise.
  auto advance = [&](std::vector<Eigen::ArrayXXcd>& fields, const std::vector<Eigen::ArrayXXd>& v) {
    for (std::size_t j = 0; j < n; ++j) stepper.step(fields[j], mixed ? v.front() : v[j]);
  };
  auto potentials = [&](const std::vector<Eigen::ArrayXXcd>& fields) {
    std::vector<Eigen::ArrayXXd> v;
    if (mixed)
      v.push_back(potential(weighted_density(p, fields)));
    else
      for (const auto& f : fields) v.push_back(potential(f.abs2()));
    return v;
  };

  for (int k = 0;; ++k) {
    const double t = k * cfg.dt;
    const Eigen::ArrayXXd rho = weighted_density(p, psi);
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
      out.t.push_back(t);
      out.densities.push_back(rho);
    }
    if (cfg.snapshot_every > 0 && (k % cfg.snapshot_every == 0 || last)) {
      out.snapshot_t.push_back(t);
      out.snapshots.push_back(state());
    }
    if (last) break;

    const std::vector<Eigen::ArrayXXd> v = potentials(psi);
    if (!corrector) {
      advance(psi, v);
    } else {
      std::vector<Eigen::ArrayXXcd> trial = psi;
      advance(trial, v);
      std::vector<Eigen::ArrayXXcd> mid(n);
      for (std::size_t j = 0; j < n; ++j)
        mid[j] = ((0.5 * (psi[j].abs2() + trial[j].abs2())).sqrt()).cast<cplx>();
      advance(psi, potentials(mid));
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double n2 = (psi[j].abs2() * w).sum();
      out.max_norm_drift_per_step = std::max(out.max_norm_drift_per_step, std::abs(n2 - prev[j]));
      prev[j] = n2;
    }
  }
  out.final_state = state();
  return out;
}

GapSeries signaling_gap(const EnsembleState& ea, const EnsembleState& eb, const PhysicalParams& params,
                        const SolverConfig& cfg, EnsembleOptions opt) {
  if (!(ea.grid() == eb.grid())) throw std::invalid_argument("signaling_gap: ensembles live on different grids");
  const double d0 = l1_distance(ea.grid(), density(ea), density(eb));
  if (d0 > 1e-10) {
    std::ostringstream os;
    os << "signaling_gap: initial densities differ by " << d0 << " (L1)";
    throw std::invalid_argument(os.str());
  }
  GapSeries g{{}, {}, evolve_ensemble(ea, params, cfg, opt), evolve_ensemble(eb, params, cfg, opt)};
  g.t = g.a.t;
  for (std::size_t i = 0; i < g.t.size(); ++i)
    g.delta.push_back(l1_distance(ea.grid(), g.a.densities[i], g.b.densities[i]));
  return g;
}

VonNeumannReport von_neumann_consistency(const EnsembleState& e0, const PhysicalParams& params,
                                         const SolverConfig& cfg, double softening, int max_points) {
  const GridSpec& grid = e0.grid();
  if (grid.geometry() != Geometry::line_z) throw std::invalid_argument("von_neumann_consistency: needs a line_z grid");
  const int n = grid.rows();
  if (n > max_points) {
    std::ostringstream os;
    os << "density matrix route holds " << n << "^2 entries; limit is " << max_points << " points";
    throw CapacityError(os.str());
  }
  check_stability(grid, params, cfg);
  const double h = grid.axis(0).spacing;
  const PotentialMap potential = self_potential(grid, params, softening);
  KineticPropagator kinetic(grid, params.hbar / params.m, cfg.dt, cfg.scheme);

  auto assemble = [&](const std::vector<EnsembleMember>& members) {
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& m : members) {
      const Eigen::VectorXcd v = m.psi.amplitudes().col(0).matrix();
      r += m.p * h * v * v.adjoint();
    }
    return r;
  };
  // d rho / dt = -i/hbar (H rho - rho H); H rho - rho H = X - X^dagger with X = H rho
  auto rhs = [&](const Eigen::MatrixXcd& r) {
    const Eigen::ArrayXXd dens = r.diagonal().real().array() / h;
    const Eigen::ArrayXd v = potential(dens).col(0);
    Eigen::MatrixXcd x(n, n);
    Eigen::ArrayXXcd column(n, 1);
    const double c = -params.hbar * params.hbar / (2 * params.m);
    for (int j = 0; j < n; ++j) {
      column.col(0) = r.col(j).array();
      x.col(j) = (c * kinetic.laplacian(column).col(0) + v.cast<cplx>() * column.col(0)).matrix();
    }
    return Eigen::MatrixXcd((x - x.adjoint()) * cplx(0, -1 / params.hbar));
  };
  auto trace_norm = [](const Eigen::MatrixXcd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
  };

  const int every = cfg.diagnostics_every > 0 ? cfg.diagnostics_every : std::max(cfg.n_steps, 1);
  SolverConfig member_cfg = cfg;
  member_cfg.diagnostics_every = 0;
  member_cfg.snapshot_every = every;
  const EnsembleTrajectory members =
      evolve_ensemble(e0, params, member_cfg, EnsembleOptions{EnsembleMode::mixed_state_sn, softening});

  Eigen::MatrixXcd rho = assemble(e0.members());
  VonNeumannReport rep;
  std::size_t next = 0;
  for (int k = 0;; ++k) {
    const bool last = k == cfg.n_steps;
    if (k % every == 0 || last) {
      const double dev = trace_norm(rho - assemble(members.snapshots.at(next++).members()));
      rep.t.push_back(k * cfg.dt);
      rep.deviation.push_back(dev);
      rep.max_deviation = std::max(rep.max_deviation, dev);
    }
    if (last) break;
    const double dt = cfg.dt;
    const Eigen::MatrixXcd k1 = rhs(rho);
    const Eigen::MatrixXcd k2 = rhs(rho + 0.5 * dt * k1);
    const Eigen::MatrixXcd k3 = rhs(rho + 0.5 * dt * k2);
    const Eigen::MatrixXcd k4 = rhs(rho + dt * k3);
    rho += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    if (!rho.allFinite()) throw InstabilityError("von_neumann_consistency: density matrix diverged");
  }
  return rep;
}

EnsemblePair signaling_pair(const GridSpec& grid, double sigma, double d) {
  if (grid.geometry() != Geometry::line_z) throw std::invalid_argument("signaling_pair: needs a line_z grid");
  if (!(d > 0)) throw std::invalid_argument("signaling_pair: separation must be positive");
  const Eigen::ArrayXXcd a = WaveField::gaussian(grid, sigma, d / 2).amplitudes();
  const Eigen::ArrayXXcd b = WaveField::gaussian(grid, sigma, -d / 2).amplitudes();
  const double s = (grid.cell_weights() * (a.conjugate() * b).real()).sum();
  // S^{-1/2} for the overlap matrix [[1, s], [s, 1]]
  const double up = 1 / std::sqrt(1 + s), dn = 1 / std::sqrt(1 - s);
  const double alpha = (up + dn) / 2, beta = (up - dn) / 2;
  auto field = [&](const Eigen::ArrayXXcd& f) {
    WaveField w(grid, f);
    w.normalize();
    return w;
  };
  return {EnsembleState({{0.5, field(alpha * a + beta * b)}, {0.5, field(beta * a + alpha * b)}}),
          EnsembleState({{0.5, field(a + b)}, {0.5, field(a - b)}})};
}

}  // namespace snlab
