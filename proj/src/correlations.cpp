#include "snlab/correlations.hpp"

#include <cmath>
#include <numbers>

#include "snlab/errors.hpp"

namespace snlab {

namespace {

constexpr double kTol = 1e-12;

// Entropy written through eta = x - 1/2 >= 0 so that nearly pure modes keep
// their relative accuracy: [(1+eta) ln(1+eta) - eta ln eta] / ln 2.
double entropy_of_excess(double eta) {
  if (eta < -kTol) throw MalformedCovariance("symplectic eigenvalue below hbar/2");
  if (eta <= 0) return 0;
  return ((1 + eta) * std::log1p(eta) - eta * std::log(eta)) / std::numbers::ln2;
}

// sqrt(1/4 + e) - 1/2 without cancellation.
double excess_to_eta(double e) { return e / (std::sqrt(0.25 + e) + 0.5); }

// sqrt(eps (eps + 4 s)) with the tolerance rule for slightly negative values.
double root_discriminant(double eps, double s) {
  const double d = eps * (eps + 4 * s);
  if (d < 0) {
    if (d < -kTol) throw MalformedCovariance("negative discriminant in symplectic eigenvalues");
    return 0;
  }
  return std::sqrt(d);
}

// nu+^2 - s in hbar^2 units, where s = sqrt|sigma| and eps = Sigma - 2 s.
double plus_lift(double eps, double s) { return eps / 2 + root_discriminant(eps, s) / 2; }

}  // namespace

double symplectic_entropy(double x) { return entropy_of_excess(x - 0.5); }

SymplecticPair symplectic_eigenvalues(const CovarianceMatrix& cm) {
  const auto& inv = cm.invariants();
  const double s = inv.root_det;
  const double nu_p2 = s + plus_lift(inv.seralian_excess, s);
  if (!(nu_p2 > 0)) throw MalformedCovariance("non-positive symplectic eigenvalue");
  const double nu_p = std::sqrt(nu_p2);
  const double nu_m = s / nu_p;
  return {nu_p * cm.hbar(), nu_m * cm.hbar()};
}

double pt_symplectic_minus(const CovarianceMatrix& cm) {
  const auto& inv = cm.invariants();
  const double s = inv.root_det;
  const double nu_p2 = s + plus_lift(inv.seralian_pt_excess, s);
  if (!(nu_p2 > 0)) throw MalformedCovariance("non-positive symplectic eigenvalue");
  return s / std::sqrt(nu_p2) * cm.hbar();
}

double log_negativity(const CovarianceMatrix& cm) {
  const auto& inv = cm.invariants();
  const double s = inv.root_det;
  if (!(s > 0)) throw MalformedCovariance("singular covariance matrix");
  const double w = plus_lift(inv.seralian_pt_excess, s) / s;
  // -log2(2 nu~-) with nu~-^2 = s / (1 + w)
  const double en = (std::log1p(w) - std::log(4 * s)) / (2 * std::numbers::ln2);
  return en > 0 ? en : 0.0;
}

double mutual_information(const CovarianceMatrix& cm) {
  const auto& inv = cm.invariants();
  const double s = inv.root_det;
  const double lift = plus_lift(inv.seralian_excess, s);
  const double nu_p2 = s + lift;
  const double nu_p = std::sqrt(nu_p2);
  const double nu_m = s / nu_p;
  const double s_excess = s - 0.25;
  const double eta_p = (s_excess + lift) / (nu_p + 0.5);
  // nu-^2 - 1/4 = (s^2 - nu+^2/4) / nu+^2 = (s (s - 1/4) - lift/4) / nu+^2
  const double eta_m = (s * s_excess - lift / 4) / nu_p2 / (nu_m + 0.5);
  const double h_local = entropy_of_excess(excess_to_eta(inv.det_alpha_excess)) +
                         entropy_of_excess(excess_to_eta(inv.det_beta_excess));
  const double h_global = entropy_of_excess(eta_p) + entropy_of_excess(eta_m);
  const double mi = h_local - h_global;
  return mi > 0 ? mi : 0.0;
}

CorrelationReport correlation_report(double t, const CovarianceMatrix& cm) {
  CorrelationReport r;
  r.t = t;
  const auto nu = symplectic_eigenvalues(cm);
  r.nu_plus = nu.nu_plus;
  r.nu_minus = nu.nu_minus;
  r.nu_tilde_minus = pt_symplectic_minus(cm);
  r.E_N = log_negativity(cm);
  r.I = mutual_information(cm);
  return r;
}

}  // namespace snlab
