#pragma once

// Values produced by this code base on its first verified runs and frozen to
// catch regressions. Each is reproduced by the scenario described beside it.

namespace snlab::regression {

// sqrt(4 G m / L^3) for m = 1.11e-17 kg, L = 500 nm, CODATA 2018 G [rad/s].
inline constexpr double coupling_frequency_rad_s = 1.5397114534873084e-04;

// Max over t of the L1 distance between the densities of the two signaling
// ensembles in pure-state mode (scenario string below).
inline constexpr double pure_mode_signaling_gap = 0.5335276358;
inline constexpr const char* pure_mode_signaling_gap_scenario =
    "line grid 2048 points over 128 sigma, peaks 4 sigma apart, softening sigma/2, g = 2, "
    "t = 2 (2 m sigma^2 / hbar), 12000 per-step Strang steps";

// Gaussian mutual information [bits] at T = 12 uK, t = 1 s for the parameters
// above with a 500 kHz cyclic trap frequency.
inline constexpr double mutual_information_12uK_1s_bits = 2.9182854402742819e-04;

}  // namespace snlab::regression
