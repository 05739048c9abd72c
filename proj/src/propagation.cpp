#include "snlab/propagation.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace snlab {

Eigen::ArrayXd fft_wavenumbers(int n, double h) {
  Eigen::ArrayXd k(n);
  const double dk = 2 * std::numbers::pi / (n * h);
  for (int i = 0; i < n; ++i) k(i) = dk * (i <= n / 2 ? i : i - n);
  return k;
}

Tridiagonal Tridiagonal::cartesian(int n, double h) {
  Tridiagonal t;
  const double inv = 1 / (h * h);
  t.lower = Eigen::ArrayXd::Constant(n, inv);
  t.upper = Eigen::ArrayXd::Constant(n, inv);
  t.diag = Eigen::ArrayXd::Constant(n, -2 * inv);
  return t;
}

Tridiagonal Tridiagonal::radial(int n, double h) {
  Tridiagonal t;
  t.lower.resize(n);
  t.upper.resize(n);
  t.diag.resize(n);
  for (int i = 0; i < n; ++i) {
    const double s = (i + 0.5) * h;
    const double s_lo = i * h;        // s_{i-1/2}; zero on the axis
    const double s_hi = (i + 1) * h;  // s_{i+1/2}
    t.lower(i) = s_lo / (s * h * h);
    t.upper(i) = s_hi / (s * h * h);
    t.diag(i) = -(s_lo + s_hi) / (s * h * h);
  }
  return t;
}

double Tridiagonal::spectral_bound() const {
  // Gershgorin
  double b = 0;
  for (int i = 0; i < size(); ++i) {
    double r = std::abs(diag(i));
    if (i > 0) r += std::abs(lower(i));
    if (i + 1 < size()) r += std::abs(upper(i));
    b = std::max(b, r);
  }
  return b;
}

CrankNicolsonLine::CrankNicolsonLine(const Tridiagonal& d, cplx c) : d_(d), c_(c) {
  const int n = d.size();
  cprime_.resize(n);
  inv_denom_.resize(n);
  // Thomas forward sweep on M = I - c D
  cplx prev_cp = 0;
  for (int i = 0; i < n; ++i) {
    const cplx a = i > 0 ? -c * d.lower(i) : cplx(0);
    const cplx b = 1.0 - c * d.diag(i);
    const cplx u = i + 1 < n ? -c * d.upper(i) : cplx(0);
    const cplx denom = b - a * prev_cp;
    inv_denom_[i] = 1.0 / denom;
    cprime_[i] = u * inv_denom_[i];
    prev_cp = cprime_[i];
  }
}

void CrankNicolsonLine::apply(cplx* y, Eigen::Index stride, std::vector<cplx>& work) const {
  const int n = d_.size();
  work.resize(n);
  // right-hand side (I + c D) y
  for (int i = 0; i < n; ++i) {
    cplx dy = d_.diag(i) * y[i * stride];
    if (i > 0) dy += d_.lower(i) * y[(i - 1) * stride];
    if (i + 1 < n) dy += d_.upper(i) * y[(i + 1) * stride];
    work[i] = y[i * stride] + c_ * dy;
  }
  // forward substitution, then back substitution into y
  cplx prev = 0;
  for (int i = 0; i < n; ++i) {
    const cplx a = i > 0 ? -c_ * d_.lower(i) : cplx(0);
    prev = (work[i] - a * prev) * inv_denom_[i];
    work[i] = prev;
  }
  y[(n - 1) * stride] = work[n - 1];
  for (int i = n - 2; i >= 0; --i) {
    work[i] -= cprime_[i] * work[i + 1];
    y[i * stride] = work[i];
  }
}

// ---------------------------------------------------------------------------

KineticPropagator::KineticPropagator(const GridSpec& grid, double hbar_over_m, double dt, KineticScheme scheme,
                                     bool imaginary_time)
    : grid_(grid) {
  if (!(dt > 0) || !std::isfinite(dt)) throw std::invalid_argument("KineticPropagator: dt must be positive");
  // exp(-i T dt/hbar) with T/hbar = -(hbar/2m) Laplacian: spectral factor exp(-2 c k^2)
  // and CN coefficient c = i hbar dt / (4 m).
  const cplx c = imaginary_time ? cplx(hbar_over_m * dt / 4, 0) : cplx(0, hbar_over_m * dt / 4);
  const int naxes = grid.rank();
  for (int a = 0; a < naxes; ++a) {
    const Axis& ax = grid.axis(a);
    AxisOp op;
    const bool radial = grid.geometry() == Geometry::cylinder_sz && a == 0;
    op.spectral = !radial && scheme == KineticScheme::split_operator;
    double bound;
    if (op.spectral) {
      op.k2 = fft_wavenumbers(ax.n, ax.spacing).square();
      op.phase = (-2.0 * c * op.k2.cast<cplx>()).exp();
      bound = std::pow(std::numbers::pi / ax.spacing, 2);
    } else {
      op.d = radial ? Tridiagonal::radial(ax.n, ax.spacing) : Tridiagonal::cartesian(ax.n, ax.spacing);
      op.cn = CrankNicolsonLine(op.d, c);
      bound = op.d.spectral_bound();
    }
    max_rate_ += 0.5 * hbar_over_m * bound;
    ops_.push_back(std::move(op));
  }
}

void KineticPropagator::apply_axis(Eigen::ArrayXXcd& psi, int axis, const AxisOp& op, bool laplacian) {
  const Eigen::Index rows = psi.rows(), cols = psi.cols();
  const Eigen::Index n = axis == 0 ? rows : cols;
  const Eigen::Index lines = axis == 0 ? cols : rows;
  const Eigen::Index stride = axis == 0 ? 1 : rows;
  buf_.resize(n);
  spec_.resize(n);
  for (Eigen::Index l = 0; l < lines; ++l) {
    cplx* p = axis == 0 ? psi.data() + l * rows : psi.data() + l;
    if (op.spectral) {
      for (Eigen::Index i = 0; i < n; ++i) buf_[i] = p[i * stride];
      fft_.fwd(spec_.data(), buf_.data(), n);
      if (laplacian)
        for (Eigen::Index i = 0; i < n; ++i) spec_[i] *= -op.k2(i);
      else
        for (Eigen::Index i = 0; i < n; ++i) spec_[i] *= op.phase(i);
      fft_.inv(buf_.data(), spec_.data(), n);
      for (Eigen::Index i = 0; i < n; ++i) p[i * stride] = buf_[i];
    } else if (laplacian) {
      for (Eigen::Index i = 0; i < n; ++i) buf_[i] = p[i * stride];
      for (Eigen::Index i = 0; i < n; ++i) {
        cplx v = op.d.diag(i) * buf_[i];
        if (i > 0) v += op.d.lower(i) * buf_[i - 1];
        if (i + 1 < n) v += op.d.upper(i) * buf_[i + 1];
        p[i * stride] = v;
      }
    } else {
      op.cn.apply(p, stride, work_);
    }
  }
}

void KineticPropagator::apply(Eigen::ArrayXXcd& psi) {
  if (psi.rows() != grid_.rows() || psi.cols() != grid_.cols())
    throw std::invalid_argument("KineticPropagator: field shape does not match grid");
  for (size_t a = 0; a < ops_.size(); ++a) apply_axis(psi, int(a), ops_[a], false);
}

Eigen::ArrayXXcd KineticPropagator::laplacian(const Eigen::ArrayXXcd& psi) {
  Eigen::ArrayXXcd total = Eigen::ArrayXXcd::Zero(psi.rows(), psi.cols());
  for (size_t a = 0; a < ops_.size(); ++a) {
    Eigen::ArrayXXcd part = psi;
    apply_axis(part, int(a), ops_[a], true);
    total += part;
  }
  return total;
}

}  // namespace snlab
