#pragma once

#include <cmath>
#include <concepts>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace snlab {

/// Error function erf(x) = 2/sqrt(pi) * int_0^x exp(-t^2) dt.
/// Throws std::domain_error for NaN or infinite input.
double erf(double x);

/// Modulus k of a complete elliptic integral, restricted to 0 <= k < 1.
class EllipticModulus {
 public:
  explicit EllipticModulus(double k);
  double value() const noexcept { return k_; }

 private:
  double k_;
};

namespace detail {

// Arithmetic-geometric mean of (1, kc). Quadratic convergence; the loop is
// bounded because each pass at least halves the relative gap.
template <std::floating_point Real>
Real agm_unit(Real kc) {
  Real a = 1;
  Real b = kc;
  for (int it = 0; it < 64; ++it) {
    const Real an = (a + b) / 2;
    const Real bn = std::sqrt(a * b);
    a = an;
    b = bn;
    if (std::abs(a - b) <= 4 * std::numeric_limits<Real>::epsilon() * a) break;
  }
  return (a + b) / 2;
}

}  // namespace detail

/// K expressed through the complementary modulus kc = sqrt(1 - k^2), 0 < kc <= 1.
/// Use this form when kc is available directly: it stays accurate as kc -> 0
/// where forming k first would round to 1.
template <std::floating_point Real>
Real elliptic_k_complement(Real kc) {
  if (!(kc > 0) || kc > 1) throw std::domain_error("elliptic_k_complement: kc must lie in (0, 1]");
  return std::numbers::pi_v<Real> / (2 * detail::agm_unit(kc));
}

/// Complete elliptic integral of the first kind,
///   K(k) = int_0^{pi/2} dtheta / sqrt(1 - k^2 sin^2 theta),
/// evaluated with the arithmetic-geometric mean K = pi / (2 AGM(1, sqrt(1-k^2))).
template <std::floating_point Real>
Real elliptic_k(Real k) {
  if (!(k >= 0) || !(k < 1)) throw std::domain_error("elliptic_k: modulus must satisfy 0 <= k < 1");
  return elliptic_k_complement(std::sqrt((1 - k) * (1 + k)));
}

inline double elliptic_k(EllipticModulus k) { return elliptic_k(k.value()); }

}  // namespace snlab
