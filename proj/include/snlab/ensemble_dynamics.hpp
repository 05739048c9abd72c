#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "snlab/grid.hpp"
#include "snlab/physical_params.hpp"
#include "snlab/sn_solver.hpp"

namespace snlab {

struct EnsembleMember {
  double p;
  WaveField psi;
};

/// Statistical mixture {p_j, |psi_j>} on one shared grid.
class EnsembleState {
 public:
  /// Throws std::invalid_argument unless p_j >= 0, sum p_j = 1 within 1e-12,
  /// every member is normalised and all share one grid.
  explicit EnsembleState(std::vector<EnsembleMember> members);

  const std::vector<EnsembleMember>& members() const noexcept { return members_; }
  const GridSpec& grid() const { return members_.front().psi.grid(); }
  std::size_t size() const noexcept { return members_.size(); }

 private:
  std::vector<EnsembleMember> members_;
};

/// sum_j p_j |psi_j|^2.
Eigen::ArrayXXd density(const EnsembleState& e);

/// pure_state_sn: each member feels only its own |psi_j|^2.
/// mixed_state_sn: every member feels the potential of the ensemble density,
/// rebuilt once per step before any member advances.
enum class EnsembleMode { pure_state_sn, mixed_state_sn };

struct EnsembleOptions {
  EnsembleMode mode = EnsembleMode::mixed_state_sn;
  double softening = 0;  // line_z kernel -G m^2 / sqrt(x^2 + a^2); 0 selects sigma / 2
};

struct EnsembleTrajectory {
  std::vector<double> t;                   // one entry per diagnostics step
  std::vector<Eigen::ArrayXXd> densities;  // ensemble density at those times
  std::vector<double> snapshot_t;          // every cfg.snapshot_every steps
  std::vector<EnsembleState> snapshots;
  std::vector<std::string> warnings;
  EnsembleState final_state;
  double max_norm_drift_per_step = 0;  // worst member
};

/// Split-step evolution of every member. line_z uses the softened 1D kernel,
/// cylinder_sz the axisymmetric kernel without a partner. Absorbing boundaries
/// are rejected: members must stay normalised.
EnsembleTrajectory evolve_ensemble(const EnsembleState& e0, const PhysicalParams& params, const SolverConfig& cfg,
                                   EnsembleOptions opt = {});

/// int |rho_a - rho_b| dV.
double l1_distance(const GridSpec& grid, const Eigen::ArrayXXd& rho_a, const Eigen::ArrayXXd& rho_b);

struct GapSeries {
  std::vector<double> t;
  std::vector<double> delta;
  EnsembleTrajectory a, b;
  double max() const;
};

/// L1 distance between the densities of two ensembles evolved in the same mode.
/// Throws std::invalid_argument if their initial densities differ by more than 1e-10.
GapSeries signaling_gap(const EnsembleState& ea, const EnsembleState& eb, const PhysicalParams& params,
                        const SolverConfig& cfg, EnsembleOptions opt);

struct VonNeumannReport {
  std::vector<double> t;
  std::vector<double> deviation;  // trace norm of rho_vN - sum_j p_j |psi_j><psi_j|
  double max_deviation = 0;
};

/// Evolves rho(z, z') directly under the nonlinear von Neumann equation
/// i hbar d rho/dt = [H(rho), rho] with classical RK4 and the spectral kinetic
/// operator, and compares with the mixed-mode member evolution at every
/// diagnostics step. line_z only; grids above `max_points` raise CapacityError.
VonNeumannReport von_neumann_consistency(const EnsembleState& e0, const PhysicalParams& params,
                                         const SolverConfig& cfg, double softening = 0, int max_points = 1024);

/// The two decompositions of the same mixed state used in the signaling
/// thought experiment, on a line_z grid with Gaussian peaks at +-d/2:
///   localized:    {1/2, a'}, {1/2, b'} with (a', b') the symmetric (Lowdin)
///                 orthonormalisation of the two Gaussians
///   superposed:   {1/2, (a + b) / |a + b|}, {1/2, (a - b) / |a - b|}
/// Both have exactly the same density matrix.
struct EnsemblePair {
  EnsembleState localized;
  EnsembleState superposed;
};
EnsemblePair signaling_pair(const GridSpec& grid, double sigma, double d);

}  // namespace snlab
