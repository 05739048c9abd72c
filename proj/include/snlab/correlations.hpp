#pragma once

#include "snlab/covariance.hpp"

namespace snlab {

struct SymplecticPair {
  double nu_plus;   // J s
  double nu_minus;  // J s
};

struct CorrelationReport {
  double t = 0;               // s
  double nu_plus = 0;         // J s; hbar/2 for a pure mode
  double nu_minus = 0;        // J s
  double nu_tilde_minus = 0;  // J s, smaller eigenvalue of the partial transpose
  double E_N = 0;             // bits
  double I = 0;               // bits
};

/// Symplectic eigenvalues nu+ >= nu- of the covariance matrix, from
/// nu^2 = (Sigma +- sqrt(Sigma^2 - 4|sigma|)) / 2 with Sigma = |alpha|+|beta|+2|gamma|.
/// Throws MalformedCovariance when the discriminant is negative beyond 1e-12 (hbar^4 units).
SymplecticPair symplectic_eigenvalues(const CovarianceMatrix& cm);

/// Smaller symplectic eigenvalue of the partially transposed state (sign of |gamma| flipped).
double pt_symplectic_minus(const CovarianceMatrix& cm);

/// max(0, -log2(nu_tilde_minus / (hbar/2))), in bits.
double log_negativity(const CovarianceMatrix& cm);

/// f(|alpha|^1/2) + f(|beta|^1/2) - f(nu+) - f(nu-), in bits.
/// Throws MalformedCovariance if any argument of f lies below hbar/2 by more than 1e-12 hbar.
double mutual_information(const CovarianceMatrix& cm);

/// f(x) = (x + 1/2) log2(x + 1/2) - (x - 1/2) log2(x - 1/2) for x >= 1/2 (x in units of hbar).
/// f(1/2) = 0 exactly. Arguments within 1e-12 below 1/2 are clamped.
double symplectic_entropy(double x);

/// All quantifiers at once; `t` is only carried through.
CorrelationReport correlation_report(double t, const CovarianceMatrix& cm);

}  // namespace snlab
