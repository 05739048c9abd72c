#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "snlab/grid.hpp"
#include "snlab/physical_params.hpp"
#include "snlab/propagation.hpp"
#include "snlab/sn_fields.hpp"

namespace snlab {

enum class NonlinearityUpdate { per_step, predictor_corrector };

struct SolverConfig {
  double dt = 0;  // s
  int n_steps = 0;
  KineticScheme scheme = KineticScheme::split_operator;
  NonlinearityUpdate update = NonlinearityUpdate::per_step;
  bool absorbing_boundary = false;
  int absorbing_width = 8;           // cells
  double absorbing_strength = 0.05;  // damping exponent per step at the outermost cell
  int diagnostics_every = 1;         // steps; 0 disables
  int snapshot_every = 0;            // steps; 0 disables
  int boundary_width = 4;            // cells probed for leakage
  double boundary_warn = 1e-6;
  double boundary_fail = 1e-3;

  /// Throws ConfigError naming the field.
  void validate() const;
};

struct Diagnostics {
  double t = 0;                 // s
  double norm = 0;              // sum |psi|^2 dV
  double mean_position = 0;     // <z> [m]
  double width = 0;             // sqrt(<z^2> - <z>^2) [m]
  double mean_momentum = 0;     // <p_z> [kg m/s]
  double kinetic_energy = 0;    // [J]
  double dT_dt_direct = 0;      // -int j . grad V [W]
  double dT_dt_continuity = 0;  // -int (d rho/dt) V [W]
};

struct Snapshot {
  double t;
  WaveField psi;
};

struct Trajectory {
  std::vector<Diagnostics> diagnostics;
  std::vector<Snapshot> snapshots;
  std::vector<std::string> warnings;
  WaveField final_state;
  double max_norm_drift_per_step = 0;
};

/// Strang-split integrator shared by every SN evolution in the library:
///   psi <- exp(-i V dt / 2hbar) K(dt) exp(-i V dt / 2hbar) psi
/// with K the kinetic propagator. In imaginary time the phases become decays.
class SplitStepper {
 public:
  SplitStepper(const GridSpec& grid, const PhysicalParams& params, const SolverConfig& cfg,
               bool imaginary_time = false);

  /// One full step with the potential `v` frozen over the step.
  void step(Eigen::ArrayXXcd& psi, const Eigen::ArrayXXd& v);
  void absorb(Eigen::ArrayXXcd& psi) const;
  KineticPropagator& kinetic() { return kinetic_; }
  double max_rate() const { return kinetic_.max_rate(); }

 private:
  void potential_half(Eigen::ArrayXXcd& psi, const Eigen::ArrayXXd& v) const;
  double dt_, hbar_;
  bool imaginary_;
  KineticPropagator kinetic_;
  Eigen::ArrayXXd absorb_mask_;
};

/// Rejects configurations whose step exceeds dt * E_max / hbar < 0.5 (ConfigError on "dt").
void check_stability(const GridSpec& grid, const PhysicalParams& params, const SolverConfig& cfg);

/// Evolves the effective single-particle SN equation on a cylinder_sz grid, the
/// potential rebuilt from |psi|^2 (self part plus mirrored partner) every step.
/// Throws InstabilityError if the boundary layer holds more than cfg.boundary_fail.
Trajectory evolve_effective(const WaveField& psi0, const PhysicalParams& params, const SolverConfig& cfg,
                            EffectivePotentialOptions opt = {});

using PotentialMap = std::function<Eigen::ArrayXXd(const Eigen::ArrayXXd&)>;
/// Called at every diagnostics step with the time, the state and its potential.
using Observer = std::function<void(double, const WaveField&, const Eigen::ArrayXXd&)>;

/// Same integrator with an arbitrary density-to-potential map (any geometry).
Trajectory evolve_with(const WaveField& psi0, const PhysicalParams& params, const SolverConfig& cfg,
                       const PotentialMap& potential, const Observer& observe = {});

/// Imaginary-time relaxation toward the lowest state of the self-consistent SN
/// problem: renormalises after every step and stops when the chemical potential
/// changes by less than `tol` (relative) between steps or after `max_steps`.
WaveField relax_ground_state(const WaveField& guess, const PhysicalParams& params, double dtau, int max_steps,
                             double tol, EffectivePotentialOptions opt = {});

/// z-component of -int rho grad V_mutual dV [N]: the force exerted by the partner.
double ehrenfest_force(const WaveField& psi, const PhysicalParams& params, EffectivePotentialOptions opt = {});
/// z-component of -int rho grad V_self dV [N]; vanishes for any density.
double self_force(const WaveField& psi, const PhysicalParams& params);

struct KineticEnergyRate {
  double direct;      // -int j . grad V
  double continuity;  // (hbar/m) int V Im(psi* lap psi)
};

/// Two discretisations of dT/dt for state psi under potential V [W]. The
/// Laplacian in the continuity form is the solver's own (scheme-dependent).
KineticEnergyRate kinetic_energy_rate(const WaveField& psi, const Eigen::ArrayXXd& v, const PhysicalParams& params,
                                      KineticScheme scheme = KineticScheme::split_operator);

/// Snapshot diagnostics for psi under potential v at time t.
Diagnostics diagnose(const WaveField& psi, const Eigen::ArrayXXd& v, const PhysicalParams& params, double t,
                     KineticPropagator& kinetic);

/// Axial derivative (4th-order central differences, 2nd-order at the ends) of a real field.
Eigen::ArrayXXd d_dz(const GridSpec& grid, const Eigen::ArrayXXd& f);

}  // namespace snlab
