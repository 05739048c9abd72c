#pragma once

#include <Eigen/Core>

namespace snlab {

/// Symplectic invariants of a two-mode covariance matrix, in units of hbar^2
/// (determinants of 2x2 blocks) so that a minimum-uncertainty block has |alpha| = 1/4.
///
/// Values that sit near a boundary are stored as excesses over that boundary.
/// States generated by weak gravitational coupling differ from the pure product
/// state by amounts far below the rounding error of the raw entries; keeping
/// the excesses lets downstream quantifiers resolve them.
struct BlockInvariants {
  double det_alpha_excess = 0;  // |alpha| - 1/4
  double det_beta_excess = 0;   // |beta| - 1/4
  double det_gamma = 0;         // |gamma|
  double root_det = 0.25;       // sqrt(|sigma|)
  double seralian_excess = 0;   // |alpha| + |beta| + 2|gamma| - 2 sqrt(|sigma|)
  double seralian_pt_excess = 0;  // |alpha| + |beta| - 2|gamma| - 2 sqrt(|sigma|)
};

/// 4x4 covariance matrix of (x_A, p_A, x_B, p_B) in SI units with blocks
/// alpha (mode A), beta (mode B) and gamma (cross).
class CovarianceMatrix {
 public:
  /// Builds the invariants from the entries with 2x2 closed-form determinants.
  /// Throws MalformedCovariance for asymmetric input or a negative determinant.
  static CovarianceMatrix from_entries(const Eigen::Matrix4d& entries, double hbar);

  /// For callers that know the invariants in closed form.
  CovarianceMatrix(const Eigen::Matrix4d& entries, double hbar, const BlockInvariants& invariants);

  const Eigen::Matrix4d& entries() const noexcept { return entries_; }
  double operator()(int i, int j) const { return entries_(i, j); }
  Eigen::Matrix2d alpha() const { return entries_.block<2, 2>(0, 0); }
  Eigen::Matrix2d beta() const { return entries_.block<2, 2>(2, 2); }
  Eigen::Matrix2d gamma() const { return entries_.block<2, 2>(0, 2); }
  double hbar() const noexcept { return hbar_; }
  const BlockInvariants& invariants() const noexcept { return invariants_; }

  /// Every entry multiplied by `factor` > 0, invariants rescaled consistently.
  CovarianceMatrix scaled(double factor) const;

 private:
  Eigen::Matrix4d entries_;
  double hbar_;
  BlockInvariants invariants_;
};

}  // namespace snlab
