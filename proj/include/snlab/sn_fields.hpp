#pragma once

#include <Eigen/Core>
#include <complex>
#include <unsupported/Eigen/FFT>
#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "snlab/grid.hpp"
#include "snlab/physical_params.hpp"

namespace snlab {

/// Potential energy [J] at distance r from the centre of a Gaussian mass
/// distribution of width sigma: -(G m^2 / r) erf(r / (sigma sqrt 2)), with the
/// finite limit -G m^2 sqrt(2/pi) / sigma at r = 0.
double erf_potential(double r, const PhysicalParams& params);

/// Potentials of the local Hamiltonian H1 + H2 at the initial time for two
/// Gaussian packets separated by `separation` (particle 2 sits at +separation
/// from particle 1). Each depends on its own particle's coordinate only,
/// measured from that particle's centre.
struct InitialPotentials {
  PhysicalParams params;
  Eigen::Vector3d separation;
  double v1(const Eigen::Vector3d& r1) const;  // erf_potential(|r1|) + erf_potential(|r1 - L|)
  double v2(const Eigen::Vector3d& r2) const;  // erf_potential(|r2|) + erf_potential(|r2 + L|)
};

/// Separation defaults to L along +z.
InitialPotentials initial_hamiltonian_potentials(const PhysicalParams& params);
InitialPotentials initial_hamiltonian_potentials(const PhysicalParams& params, const Eigen::Vector3d& separation);

/// Initial-time potential felt by each of N Gaussian packets with the given
/// centres [m]: V_j(xi) = sum_k erf_potential(|xi + c_j - c_k|), xi measured from c_j.
std::vector<std::function<double(const Eigen::Vector3d&)>> n_particle_initial_potential(
    const std::vector<Eigen::Vector3d>& centres, const PhysicalParams& params);

/// Azimuthal integral of the Coulomb kernel between rings of radii s and s'
/// separated axially by dz [1/m]:
///   4 / sqrt((s+s')^2 + dz^2) * K(sqrt(4 s s' / ((s+s')^2 + dz^2))).
/// K is evaluated from the complementary modulus, so nearly coincident rings
/// keep full accuracy. Throws std::domain_error on coincident rings.
double axial_kernel(double s, double s_prime, double dz);

/// Integral of ln(1 / sqrt(x^2 + y^2)) over the rectangle [x0, x1] x [y0, y1].
double log_rectangle_integral(double x0, double x1, double y0, double y1);

/// Integral of s' * axial_kernel(s, s', dz) over s' in [s0, s1], dz in [z0, z1]
/// [dimensionless]. Exact treatment of the logarithmic singularity at (s', dz) = (s, 0).
double axial_kernel_cell_integral(double s, double s0, double s1, double z0, double z1);

/// Where the mirror-image partner of the effective single-particle problem sits.
/// below: the partner density at z is |psi(s, -z - L)|^2 (partner centred at -L).
/// above: |psi(s, L - z)|^2 (partner centred at +L).
enum class PartnerSide { below, above };

struct EffectivePotentialOptions {
  PartnerSide partner = PartnerSide::below;
  bool include_partner = true;                   // ignored (off) when L is infinite
  std::size_t cache_budget_bytes = 512u << 20;  // kernel spectra are cached when they fit
};

struct PotentialParts {
  Eigen::ArrayXXd self;    // from the particle's own density [J]
  Eigen::ArrayXXd mutual;  // from the mirrored partner density [J]
  Eigen::ArrayXXd total() const { return self + mutual; }
};

/// Gravitational potential of an axisymmetric density on a cylinder_sz grid
/// plus that of its mirror image. The ring kernel is integrated exactly over
/// source cells within three cells of each target point and averaged with 2x2
/// Gauss points elsewhere; the z sum is an FFT convolution. The kernel depends only on the grid, so its spectra
/// are built once. Not thread-safe (owns FFT plans); use one per thread.
class EffectivePotential {
 public:
  EffectivePotential(const GridSpec& grid, const PhysicalParams& params, EffectivePotentialOptions opt = {});
  ~EffectivePotential();
  EffectivePotential(EffectivePotential&&) noexcept;
  EffectivePotential& operator=(EffectivePotential&&) noexcept;

  /// `density` is |psi|^2 [1/m^3] on the grid.
  PotentialParts parts(const Eigen::ArrayXXd& density);
  Eigen::ArrayXXd operator()(const Eigen::ArrayXXd& density) { return parts(density).total(); }
  bool cached() const;
  const GridSpec& grid() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot convenience: checks normalisation, builds the operator, evaluates it.
Eigen::ArrayXXd effective_potential(const WaveField& psi, const PhysicalParams& params,
                                    EffectivePotentialOptions opt = {});

/// Linear (non-periodic) convolution along a line grid with a fixed kernel
/// sampled at offsets m h + shift, via zero-padded FFT.
/// out(k) = sum_l kernel(z_k - z_l + shift) in(l) * h for a mirror-free kernel.
class LineConvolver {
 public:
  /// `kernel(x)` is evaluated once at x = m h + shift for |m| < n.
  LineConvolver(int n, double h, const std::function<double(double)>& kernel, double shift = 0);
  Eigen::ArrayXd operator()(const Eigen::ArrayXd& in);

 private:
  int n_;
  double h_;
  std::vector<std::complex<double>> kernel_hat_, buf_, spec_;
  Eigen::FFT<double> fft_;
};

/// Softened 1D gravity kernel -G m^2 / sqrt(x^2 + a^2) [J].
std::function<double(double)> softened_gravity(const PhysicalParams& params, double a);

}  // namespace snlab
