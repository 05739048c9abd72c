#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "snlab/grid.hpp"
#include "snlab/physical_params.hpp"
#include "snlab/sn_solver.hpp"

namespace snlab {

/// Interaction used by the two-particle 1D evolution. Coordinates are the
/// displacements z1, z2 of each particle from its own centre; particle 2 sits
/// at +L from particle 1.
///   softened_sn       V1(z1) + V2(z2) built from the marginals with -G m^2 / sqrt(x^2 + a^2)
///   quadratic_newton  -G m^2 / L * (1 - d/L + d^2/L^2), d = z2 - z1
///   full_newton       -G m^2 / (L + d)
enum class BipartiteKernel { softened_sn, quadratic_newton, full_newton };

struct BipartiteOptions {
  BipartiteKernel kernel = BipartiteKernel::softened_sn;
  double softening = 0;  // m; 0 selects sigma / 2
};

struct BipartiteSample {
  double t = 0;
  double norm = 0;
  double purity = 0;              // Tr rho_1^2 from the Schmidt spectrum
  double mutual_information = 0;  // bits; 2 S(rho_1) for the pure global state
  Eigen::Matrix4d covariance;     // (z1, p1, z2, p2), SI, symmetrised
};

struct BipartiteTrajectory {
  std::vector<BipartiteSample> samples;  // one per diagnostics step
  std::vector<Diagnostics> diagnostics;
  std::vector<std::string> warnings;
  WaveField final_state;
};

struct SchmidtMetrics {
  double purity;
  double mutual_information;  // bits
};

/// Purity and mutual information of a pure state on a plane_z1z2 grid, from the
/// eigenvalues of the reduced density matrix of particle 1.
SchmidtMetrics schmidt_metrics(const WaveField& psi);

/// Symmetrised second moments of (z1, p1, z2, p2) with spectral momenta.
Eigen::Matrix4d grid_covariance(const WaveField& psi, double hbar);

/// Two-particle state on a plane_z1z2 grid evolved with the split-step solver.
/// softened_sn needs identical axes on both particles; full_newton needs the
/// grid to keep L + z2 - z1 positive.
BipartiteTrajectory evolve_bipartite_1d(const WaveField& psi0, const PhysicalParams& params, const SolverConfig& cfg,
                                        BipartiteOptions opt = {});

}  // namespace snlab
