#pragma once

#include "snlab/covariance.hpp"
#include "snlab/physical_params.hpp"

namespace snlab {

/// Gravitational normal-mode rate omega = sqrt(4 G m / L^3) [rad/s] of the
/// quadratically truncated Newton coupling between the two masses.
double coupling_frequency(const PhysicalParams& params);

/// Bose occupation of the trap mode, 1 / (exp(hbar omega0 / kB T) - 1); exactly 0 at T = 0.
double phonon_number(const PhysicalParams& params);

/// Covariance matrix at time t >= 0 after two identical masses are released
/// from the ground states of their traps and evolve freely under the
/// quadratically truncated Newton coupling.
///
/// Evaluated in units hbar = m = omega0 = 1 and converted to SI on return.
/// Every closed-form entry that contains a cancellation of the type
/// (omega0/omega)^2 sinh^2(omega t) - omega0^2 t^2 is rewritten with a
/// power series in omega t, so G = 0 and omega t << 1 are handled without
/// loss of accuracy. The returned matrix carries its symplectic invariants
/// in closed form.
CovarianceMatrix covariance_at(double t, const PhysicalParams& params);

/// (2 nbar + 1) sigma(t): covariance of the product of thermal states.
CovarianceMatrix thermal_scale(const CovarianceMatrix& sigma_t, double nbar);

namespace detail {
// Series-stabilised building blocks, exposed for testing.
double sinhc(double x);             // sinh(x)/x
double sinhc_minus_one(double x);   // sinh(x)/x - 1
double sinhc_sq_minus_one(double x);  // (sinh(x)/x)^2 - 1
double cosh_minus_sinhc(double x);  // cosh(x) - sinh(x)/x
double mixed_growth(double x);      // x^2 sinh^2 x - x sinh 2x + 2 sinh^2 x
}  // namespace detail

}  // namespace snlab
