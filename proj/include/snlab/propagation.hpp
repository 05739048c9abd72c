#pragma once

#include <Eigen/Core>
#include <complex>
#include <unsupported/Eigen/FFT>
#include <vector>

#include "snlab/grid.hpp"

namespace snlab {

using cplx = std::complex<double>;

/// How the kinetic part of a step is applied. split_operator: spectral along every
/// Cartesian axis (the radial axis always uses Crank-Nicolson). crank_nicolson:
/// second-order finite differences and Crank-Nicolson along every axis.
enum class KineticScheme { split_operator, crank_nicolson };

/// Angular wavenumbers in FFT order for n points of spacing h.
Eigen::ArrayXd fft_wavenumbers(int n, double h);

/// Tridiagonal second-derivative operator D along one axis with Dirichlet walls.
/// The radial variant is (1/s) d/ds (s d/ds) on the staggered grid s_i = (i+1/2) h.
struct Tridiagonal {
  Eigen::ArrayXd lower, diag, upper;  // lower(0) and upper(n-1) unused
  static Tridiagonal cartesian(int n, double h);
  static Tridiagonal radial(int n, double h);
  int size() const { return int(diag.size()); }
  double spectral_bound() const;  // upper bound on |eigenvalues|
};

/// Solves (I - c D) x = (I + c D) y in place for a fixed complex c, with the LU
/// factors computed once. c = i hbar dt / (4 m) gives the Crank-Nicolson
/// kinetic step; real c gives the imaginary-time step.
class CrankNicolsonLine {
 public:
  CrankNicolsonLine() = default;
  CrankNicolsonLine(const Tridiagonal& d, cplx c);
  /// `data` points to n values spaced by `stride`.
  void apply(cplx* data, Eigen::Index stride, std::vector<cplx>& work) const;

 private:
  Tridiagonal d_;
  cplx c_{};
  std::vector<cplx> cprime_, inv_denom_;
};

/// exp(-i T dt / hbar) (or exp(-T dtau / hbar) in imaginary time) on a grid.
/// Not thread-safe: owns FFT plans and scratch space.
class KineticPropagator {
 public:
  /// `hbar_over_m` in m^2/s; `dt` in s. `imaginary_time` makes the step a decay.
  KineticPropagator(const GridSpec& grid, double hbar_over_m, double dt, KineticScheme scheme,
                    bool imaginary_time = false);

  void apply(Eigen::ArrayXXcd& psi);
  /// Laplacian of psi consistent with the scheme's discretisation [1/m^2 * psi].
  Eigen::ArrayXXcd laplacian(const Eigen::ArrayXXcd& psi);
  /// E_max / hbar for the discrete kinetic operator [1/s].
  double max_rate() const { return max_rate_; }

 private:
  struct AxisOp {
    bool spectral = true;
    Eigen::ArrayXd k2;        // spectral: wavenumber squared in FFT order
    Eigen::ArrayXcd phase;    // spectral: exp(-2 c k^2)
    Tridiagonal d;            // finite differences
    CrankNicolsonLine cn;
  };
  void apply_axis(Eigen::ArrayXXcd& psi, int axis, const AxisOp& op, bool laplacian);

  GridSpec grid_;
  std::vector<AxisOp> ops_;  // one per axis
  double max_rate_ = 0;
  Eigen::FFT<double> fft_;
  std::vector<cplx> buf_, spec_, work_;
};

}  // namespace snlab
