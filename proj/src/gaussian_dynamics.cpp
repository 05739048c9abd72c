#include "snlab/gaussian_dynamics.hpp"

#include <Eigen/LU>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "snlab/errors.hpp"

namespace snlab {

// ---------------------------------------------------------------------------

// CovarianceMatrix

CovarianceMatrix::CovarianceMatrix(const Eigen::Matrix4d& entries, double hbar,
                                   const BlockInvariants& invariants)
    : entries_(entries), hbar_(hbar), invariants_(invariants) {}

CovarianceMatrix CovarianceMatrix::from_entries(const Eigen::Matrix4d& s, double hbar) {
  if (!(hbar > 0)) throw MalformedCovariance("hbar must be positive");
  if (!s.allFinite()) throw MalformedCovariance("covariance entries must be finite");
  for (int i = 0; i < 4; ++i) {
    if (!(s(i, i) > 0)) throw MalformedCovariance("covariance diagonal must be positive");
    for (int j = i + 1; j < 4; ++j) {
      const double scale = std::sqrt(s(i, i) * s(j, j));
      if (std::abs(s(i, j) - s(j, i)) > 1e-12 * scale) throw MalformedCovariance("covariance matrix is not symmetric");
    }
  }
  const double h2 = hbar * hbar;
  const double det_a = (s(0, 0) * s(1, 1) - s(0, 1) * s(0, 1)) / h2;
  const double det_b = (s(2, 2) * s(3, 3) - s(2, 3) * s(2, 3)) / h2;
  const double det_g = (s(0, 2) * s(1, 3) - s(0, 3) * s(1, 2)) / h2;
  double det4 = s.determinant() / (h2 * h2);
  if (det4 < 0) {
    if (det4 < -1e-12) throw MalformedCovariance("covariance determinant is negative");
    det4 = 0;
  }
  BlockInvariants inv;
  inv.det_alpha_excess = det_a - 0.25;
  inv.det_beta_excess = det_b - 0.25;
  inv.det_gamma = det_g;
  inv.root_det = std::sqrt(det4);
  inv.seralian_excess = det_a + det_b + 2 * det_g - 2 * inv.root_det;
  inv.seralian_pt_excess = det_a + det_b - 2 * det_g - 2 * inv.root_det;
  // Sigma - 2 sqrt|sigma| enters the eigenvalues under a square root, which would
  // blow rounding noise up to ~1e-8. Excesses that are not resolved by the
  // entries are zero as far as this matrix can tell.
  const double noise = 64 * std::numeric_limits<double>::epsilon() *
                       (std::abs(det_a) + std::abs(det_b) + 2 * std::abs(det_g) + 2 * inv.root_det);
  if (std::abs(inv.seralian_excess) < noise) inv.seralian_excess = 0;
  if (std::abs(inv.seralian_pt_excess) < noise) inv.seralian_pt_excess = 0;
  return CovarianceMatrix(s, hbar, inv);
}

CovarianceMatrix CovarianceMatrix::scaled(double f) const {
  if (!(f > 0)) throw std::invalid_argument("covariance scale factor must be positive");
  const double f2 = f * f;
  BlockInvariants inv;
  inv.det_alpha_excess = f2 * invariants_.det_alpha_excess + (f2 - 1) / 4;
  inv.det_beta_excess = f2 * invariants_.det_beta_excess + (f2 - 1) / 4;
  inv.det_gamma = f2 * invariants_.det_gamma;
  inv.root_det = f2 * invariants_.root_det;
  inv.seralian_excess = f2 * invariants_.seralian_excess;
  inv.seralian_pt_excess = f2 * invariants_.seralian_pt_excess;
  return CovarianceMatrix(f * entries_, hbar_, inv);
}

// ---------------------------------------------------------------------------
// Series-stabilised hyperbolic combinations. Each series is summed for
// |x| < 1 where the direct formula cancels; the terms fall faster than 4^n/(2n)!.

namespace detail {

namespace {
constexpr double kSeriesCutoff = 1.0;
constexpr double kTiny = 1e-18;
}  // namespace

double sinhc(double x) {
  if (std::abs(x) < kSeriesCutoff) return 1 + sinhc_minus_one(x);
  return std::sinh(x) / x;
}

double sinhc_minus_one(double x) {
  if (std::abs(x) >= kSeriesCutoff) return std::sinh(x) / x - 1;
  const double x2 = x * x;
  double term = x2 / 6;
  double sum = 0;
  for (int n = 1; n < 40 && term > kTiny * sum; ++n) {
    sum += term;
    term *= x2 / ((2 * n + 2) * (2 * n + 3));
  }
  return sum;
}

double sinhc_sq_minus_one(double x) {
  if (std::abs(x) >= kSeriesCutoff) {
    const double s = std::sinh(x) / x;
    return s * s - 1;
  }
  const double x2 = x * x;
  double term = x2 / 3;
  double sum = 0;
  for (int n = 2; n < 40 && term > kTiny * sum; ++n) {
    sum += term;
    term *= 4 * x2 / ((2 * n + 1) * (2 * n + 2));
  }
  return sum;
}

double cosh_minus_sinhc(double x) {
  if (std::abs(x) >= kSeriesCutoff) return std::cosh(x) - std::sinh(x) / x;
  const double x2 = x * x;
  double term = x2 / 3;
  double sum = 0;
  for (int n = 1; n < 40 && std::abs(term) > kTiny * std::abs(sum); ++n) {
    sum += term;
    term *= x2 / (2.0 * n * (2 * n + 3));
  }
  return sum;
}

double mixed_growth(double x) {
  if (std::abs(x) >= kSeriesCutoff) {
    const double sh = std::sinh(x);
    return x * x * sh * sh - x * std::sinh(2 * x) + 2 * sh * sh;
  }
  // coefficient of x^{2j}: 2^{2j-3} (4j^2 - 10j + 8) / (2j)!
  const double x2 = x * x;
  double p = x2 * x2 / 12;  // 2^{2j-3} x^{2j} / (2j)! at j = 2
  double sum = 0;
  for (int j = 2; j < 40; ++j) {
    const double term = p * (4.0 * j * j - 10.0 * j + 8.0);
    sum += term;
    if (term <= kTiny * sum) break;
    p *= 4 * x2 / ((2 * j + 1) * (2 * j + 2));
  }
  return sum;
}

}  // namespace detail

// ---------------------------------------------------------------------------

double coupling_frequency(const PhysicalParams& params) {
  params.validate();
  if (!std::isfinite(params.L)) return 0;
  return std::sqrt(4 * params.G * params.m / (params.L * params.L * params.L));
}

double phonon_number(const PhysicalParams& params) {
  if (!(params.T >= 0)) throw std::invalid_argument("phonon_number: temperature must be non-negative");
  if (params.T == 0) return 0;
  const double x = params.hbar * params.omega0 / (params.kB * params.T);
  return 1 / std::expm1(x);
}

CovarianceMatrix covariance_at(double t, const PhysicalParams& params) {
  if (!(t >= 0) || !std::isfinite(t)) throw std::invalid_argument("covariance_at: t must be finite and >= 0");
  params.validate();
  using namespace detail;

  // Units hbar = m = omega0 = 1: time tau = omega0 t, coupling r = omega / omega0.
  const double r = coupling_frequency(params) / params.omega0;
  const double tau = params.omega0 * t;
  const double x = r * tau;
  const double sh = std::sinh(x);
  const double sh2 = sh * sh;
  const double sinh2x = std::sinh(2 * x);
  const double sc = sinhc(x);

  const double s00 = 0.25 * (2 + tau * tau + sh2 + tau * tau * sc * sc);
  const double s02 = 0.25 * (-sh2 - tau * tau * sinhc_sq_minus_one(x));
  const double s11 = 0.25 * (2 + (1 + r * r) * sh2);
  const double s13 = -0.25 * (1 + r * r) * sh2;
  const double s01 = 0.125 * (2 * tau + 2 * tau * sinhc(2 * x) + r * sinh2x);
  const double s03 = 0.125 * (-2 * tau * sinhc_minus_one(2 * x) - r * sinh2x);

  // Centre-of-mass and relative modes are pure single-mode states (det = 1/4
  // each); the cross term of their mixed determinant, minus its minimum 1/2, is
  // delta = (tau^2 (cosh x - sinh x / x)^2 + mixed_growth(x) + r^2 sinh^2 x) / 4 >= 0.
  const double cms = cosh_minus_sinhc(x);
  const double delta = 0.25 * (tau * tau * cms * cms + mixed_growth(x) + r * r * sh2);

  BlockInvariants inv;
  inv.det_alpha_excess = delta / 4;
  inv.det_beta_excess = delta / 4;
  inv.det_gamma = -delta / 4;
  inv.root_det = 0.25;
  inv.seralian_excess = 0;
  inv.seralian_pt_excess = delta;

  const double xx = params.hbar / (params.m * params.omega0);
  const double pp = params.hbar * params.m * params.omega0;
  const double xp = params.hbar;
  Eigen::Matrix4d e;
  e << s00 * xx, s01 * xp, s02 * xx, s03 * xp,
       s01 * xp, s11 * pp, s03 * xp, s13 * pp,
       s02 * xx, s03 * xp, s00 * xx, s01 * xp,
       s03 * xp, s13 * pp, s01 * xp, s11 * pp;
  return CovarianceMatrix(e, params.hbar, inv);
}

CovarianceMatrix thermal_scale(const CovarianceMatrix& sigma_t, double nbar) {
  if (!(nbar >= 0) || !std::isfinite(nbar)) throw std::invalid_argument("thermal_scale: nbar must be >= 0");
  return sigma_t.scaled(2 * nbar + 1);
}

}  // namespace snlab
