#pragma once

#include <string>
#include <vector>

namespace snlab {

namespace constants {
inline constexpr double G = 6.67430e-11;          // m^3 kg^-1 s^-2
inline constexpr double hbar = 1.054571817e-34;   // J s
inline constexpr double kB = 1.380649e-23;        // J / K
}  // namespace constants

/// How a quoted trap "frequency" is read: as omega0 directly, or as nu with omega0 = 2 pi nu.
enum class FrequencyConvention { angular, cyclic };

/// omega0 [rad/s] for a quoted trap frequency under the given convention.
double trap_angular_frequency(double quoted, FrequencyConvention convention);

/// Physical inputs shared by every module, in SI units.
///
/// `sigma` is the width of the initial Gaussian position amplitude
/// (|psi|^2 has standard deviation sigma per axis). For a trap ground state it
/// is tied to the trap by sigma^2 = hbar / (2 m omega0); `ground_state` derives
/// it that way. Overriding it afterwards is allowed for PDE studies and is
/// reported by `sigma_overridden()`.
///
/// `L` may be +infinity to describe an isolated packet.
struct PhysicalParams {
  double m = 0;       // kg
  double L = 0;       // m
  double omega0 = 0;  // rad/s
  double T = 0;       // K
  double G = constants::G;
  double hbar = constants::hbar;
  double kB = constants::kB;
  double sigma = 0;   // m

  static PhysicalParams ground_state(double m, double L, double omega0, double T = 0,
                                     double G = constants::G);

  /// sqrt(hbar / (2 m omega0)).
  double ground_state_width() const;
  bool sigma_overridden(double rtol = 1e-12) const;

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;
  /// Non-fatal advisories, e.g. sigma/L too large for the quadratic truncation.
  std::vector<std::string> warnings() const;

  /// Copy with G multiplied by `factor` (>= 1) to make weak couplings visible on small grids.
  PhysicalParams with_inflated_coupling(double factor) const;

  /// Dimensionless PDE coupling 2 G m^3 sigma / hbar^2 in the units length = sigma,
  /// time = 2 m sigma^2 / hbar.
  double pde_coupling() const;
  /// 2 m sigma^2 / hbar [s].
  double pde_time_unit() const;
  /// hbar^2 / (2 m sigma^2) [J].
  double pde_energy_unit() const;
};

}  // namespace snlab
