#include "snlab/sn_fields.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unsupported/Eigen/FFT>

#include "snlab/specfun.hpp"

namespace snlab {

using cplx = std::complex<double>;

double erf_potential(double r, const PhysicalParams& params) {
  if (!(r >= 0)) throw std::invalid_argument("erf_potential: r must be >= 0");
  if (!(params.sigma > 0)) throw std::invalid_argument("erf_potential: sigma must be positive");
  const double gm2 = params.G * params.m * params.m;
  if (std::isinf(r)) return 0;
  const double x = r / (params.sigma * std::numbers::sqrt2);
  if (x < 1e-4) {
    // erf(x)/x = 2/sqrt(pi) (1 - x^2/3 + x^4/10 - ...)
    return -gm2 / (params.sigma * std::numbers::sqrt2) * 2 * std::numbers::inv_sqrtpi * (1 - x * x / 3);
  }
  return -gm2 / r * snlab::erf(x);
}

double InitialPotentials::v1(const Eigen::Vector3d& r1) const {
  return erf_potential(r1.norm(), params) + erf_potential((r1 - separation).norm(), params);
}

double InitialPotentials::v2(const Eigen::Vector3d& r2) const {
  return erf_potential(r2.norm(), params) + erf_potential((r2 + separation).norm(), params);
}

InitialPotentials initial_hamiltonian_potentials(const PhysicalParams& params) {
  return initial_hamiltonian_potentials(params, Eigen::Vector3d(0, 0, params.L));
}

InitialPotentials initial_hamiltonian_potentials(const PhysicalParams& params, const Eigen::Vector3d& separation) {
  if (!separation.allFinite()) throw std::invalid_argument("initial_hamiltonian_potentials: separation must be finite");
  return {params, separation};
}

std::vector<std::function<double(const Eigen::Vector3d&)>> n_particle_initial_potential(
    const std::vector<Eigen::Vector3d>& centres, const PhysicalParams& params) {
  std::vector<std::function<double(const Eigen::Vector3d&)>> out;
  for (size_t j = 0; j < centres.size(); ++j) {
    out.emplace_back([centres, params, j](const Eigen::Vector3d& xi) {
      double v = 0;
      for (const auto& c : centres) v += erf_potential((xi + centres[j] - c).norm(), params);
      return v;
    });
  }
  return out;
}

double axial_kernel(double s, double sp, double dz) {
  if (!(s >= 0) || !(sp >= 0) || !std::isfinite(dz)) throw std::invalid_argument("axial_kernel: need s, s' >= 0");
  const double far2 = (s + sp) * (s + sp) + dz * dz;
  const double near2 = (s - sp) * (s - sp) + dz * dz;
  if (!(near2 > 0)) throw std::domain_error("axial_kernel: coincident rings (k = 1)");
  const double kc = std::sqrt(near2 / far2);
  return 4 / std::sqrt(far2) * elliptic_k_complement(std::min(kc, 1.0));
}

namespace {

// F(x, y) = int_0^x int_0^y ln(u^2 + v^2) dv du, odd in each argument.
double log_corner(double x, double y) {
  if (x == 0 || y == 0) return 0;
  return x * y * (std::log(x * x + y * y) - 3) + x * x * std::atan(y / x) + y * y * std::atan(x / y);
}

template <int N>
struct GaussLegendre {
  std::array<double, N> x{}, w{};
  GaussLegendre() {
    for (int i = 0; i < N; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (N + 0.5));
      double dp = 0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1, p1 = z;
        for (int k = 2; k <= N; ++k) {
          const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = N * (z * p1 - p0) / (z * z - 1);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[i] = z;
      w[i] = 2 / ((1 - z * z) * dp * dp);
    }
  }
};

const GaussLegendre<16>& gl16() {
  static const GaussLegendre<16> g;
  return g;
}

template <class F>
double gl_rectangle(const F& f, double x0, double x1, double y0, double y1) {
  const auto& g = gl16();
  const double hx = (x1 - x0) / 2, cx = (x0 + x1) / 2, hy = (y1 - y0) / 2, cy = (y0 + y1) / 2;
  double sum = 0;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) sum += g.w[i] * g.w[j] * f(cx + hx * g.x[i], cy + hy * g.x[j]);
  return sum * hx * hy;
}

}  // namespace

double log_rectangle_integral(double x0, double x1, double y0, double y1) {
  const double ln_r2 = log_corner(x1, y1) - log_corner(x0, y1) - log_corner(x1, y0) + log_corner(x0, y0);
  return -0.5 * ln_r2;
}

double axial_kernel_cell_integral(double s, double s0, double s1, double z0, double z1) {
  if (s0 < 0 && s0 > -1e-12 * (s1 - s0)) s0 = 0;  // rounding at the axis
  if (!(s1 > s0) || !(z1 > z0) || s0 < 0) throw std::invalid_argument("axial_kernel_cell_integral: empty cell");
  auto f = [s](double sp, double dz) { return sp * axial_kernel(s, sp, dz); };
  // distance from the singular point (s, 0) to the rectangle
  const double ds = std::max({s0 - s, 0.0, s - s1});
  const double dzmin = std::max({z0, 0.0, -z1});
  const double diag = std::hypot(s1 - s0, z1 - z0);
  if (std::hypot(ds, dzmin) > diag) return gl_rectangle(f, s0, s1, z0, z1);

  // Near s' = s the ring kernel behaves as s' K ~ 2 ln(1/rho) + bounded, rho the
  // distance to (s, 0); integrate the remainder numerically (split at the singular
  // point so it sits on sub-cell corners) and the logarithm exactly.
  auto remainder = [&](double sp, double dz) {
    const double rho = std::hypot(sp - s, dz);
    return f(sp, dz) + 2 * std::log(rho);
  };
  std::array<double, 3> sb{s0, std::clamp(s, s0, s1), s1};
  std::array<double, 3> zb{z0, std::clamp(0.0, z0, z1), z1};
  double total = 2 * log_rectangle_integral(s0 - s, s1 - s, z0, z1);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      if (sb[a + 1] > sb[a] && zb[b + 1] > zb[b]) total += gl_rectangle(remainder, sb[a], sb[a + 1], zb[b], zb[b + 1]);
  return total;
}

// ---------------------------------------------------------------------------

struct EffectivePotential::Impl {
  GridSpec grid;
  double gm2;
  int ns, nz, p;
  double hs, hz;
  bool partner;
  double offset;  // z_k + z_l + offset is the partner's axial distance, with l reversed
  Eigen::ArrayXd w;
  bool cache = false;
  // Source cells within this many cells of the target are integrated exactly over
  // the cell; closer in, the ring kernel changes on the cell scale (log singularity,
  // and the 1/r behaviour near the axis) and the midpoint rule drops to first order.
  int near_cells = 3;
  std::vector<Eigen::ArrayXd> d_hat;   // [i * ns + j]
  std::vector<Eigen::ArrayXcd> m_hat;  // [i * ns + j]
  Eigen::FFT<double> fft;
  std::vector<cplx> buf, spec;

  Impl(const GridSpec& g, const PhysicalParams& params, const EffectivePotentialOptions& opt) : grid(g) {
    if (g.geometry() != Geometry::cylinder_sz) throw std::invalid_argument("EffectivePotential: needs a cylinder_sz grid");
    params.validate();
    gm2 = params.G * params.m * params.m;
    ns = g.axis(0).n;
    nz = g.axis(1).n;
    p = 2 * nz;
    hs = g.axis(0).spacing;
    hz = g.axis(1).spacing;
    partner = opt.include_partner && std::isfinite(params.L);
    if (partner && params.L < nz * hz)
      throw std::invalid_argument("EffectivePotential: separation L must be at least the axial grid extent");
    offset = opt.partner == PartnerSide::below ? params.L : -params.L;
    w = g.axis(0).coords() * hs * hz;
    buf.resize(p);
    spec.resize(p);
    const std::size_t bytes = std::size_t(ns) * ns * p * (sizeof(double) + (partner ? sizeof(cplx) : 0));
    cache = bytes <= opt.cache_budget_bytes;
    if (cache) {
      d_hat.resize(std::size_t(ns) * ns);
      if (partner) m_hat.resize(std::size_t(ns) * ns);
      for (int i = 0; i < ns; ++i)
        for (int j = 0; j < ns; ++j) build_pair(i, j, d_hat[i * ns + j], partner ? &m_hat[i * ns + j] : nullptr);
    }
  }

  void build_pair(int i, int j, Eigen::ArrayXd& dh, Eigen::ArrayXcd* mh) {
    const double si = grid.axis(0).coord(i), sj = grid.axis(0).coord(j);
    std::fill(buf.begin(), buf.end(), cplx(0));
    for (int m = 0; m < nz; ++m) {
      double v;
      if (std::abs(i - j) <= near_cells && m <= near_cells) {
        v = axial_kernel_cell_integral(si, sj - hs / 2, sj + hs / 2, m * hz - hz / 2, m * hz + hz / 2) / w(j);
      } else {
        // 2x2 Gauss cell average: near the axis the kernel behaves like s'/r in the
        // (s', z') plane, which is not harmonic, and plain midpoint sampling would
        // leave an h^2 log h error.
        const double gs = hs / (2 * std::sqrt(3.0)), gz = hz / (2 * std::sqrt(3.0));
        v = 0;
        for (double a : {-gs, gs})
          for (double b : {-gz, gz}) v += (sj + a) * axial_kernel(si, sj + a, m * hz + b);
        v /= 4 * sj;
      }
      buf[m] = v;
      if (m > 0) buf[p - m] = v;
    }
    fft.fwd(spec.data(), buf.data(), p);
    dh.resize(p);
    for (int q = 0; q < p; ++q) dh(q) = spec[q].real();
    if (!mh) return;
    std::fill(buf.begin(), buf.end(), cplx(0));
    for (int m = -(nz - 1); m < nz; ++m) buf[(m + p) % p] = axial_kernel(si, sj, std::abs(m * hz + offset));
    fft.fwd(spec.data(), buf.data(), p);
    *mh = Eigen::Map<Eigen::ArrayXcd>(spec.data(), p);
  }

  PotentialParts evaluate(const Eigen::ArrayXXd& rho) {
    if (rho.rows() != ns || rho.cols() != nz) throw std::invalid_argument("EffectivePotential: density shape mismatch");
    std::vector<Eigen::ArrayXcd> rho_hat(ns), rev_hat(partner ? ns : 0);
    for (int j = 0; j < ns; ++j) {
      std::fill(buf.begin(), buf.end(), cplx(0));
      for (int l = 0; l < nz; ++l) buf[l] = w(j) * rho(j, l);
      fft.fwd(spec.data(), buf.data(), p);
      rho_hat[j] = Eigen::Map<Eigen::ArrayXcd>(spec.data(), p);
      if (partner) {
        std::fill(buf.begin(), buf.end(), cplx(0));
        for (int l = 0; l < nz; ++l) buf[l] = w(j) * rho(j, nz - 1 - l);
        fft.fwd(spec.data(), buf.data(), p);
        rev_hat[j] = Eigen::Map<Eigen::ArrayXcd>(spec.data(), p);
      }
    }
    PotentialParts out{Eigen::ArrayXXd::Zero(ns, nz), Eigen::ArrayXXd::Zero(ns, nz)};
    Eigen::ArrayXcd acc_self(p), acc_mut(p);
    Eigen::ArrayXd dh;
    Eigen::ArrayXcd mh;
    for (int i = 0; i < ns; ++i) {
      acc_self.setZero();
      acc_mut.setZero();
      for (int j = 0; j < ns; ++j) {
        const Eigen::ArrayXd* dp;
        const Eigen::ArrayXcd* mp = nullptr;
        if (cache) {
          dp = &d_hat[i * ns + j];
          if (partner) mp = &m_hat[i * ns + j];
        } else {
          build_pair(i, j, dh, partner ? &mh : nullptr);
          dp = &dh;
          if (partner) mp = &mh;
        }
        acc_self += dp->cast<cplx>() * rho_hat[j];
        if (partner) acc_mut += *mp * rev_hat[j];
      }
      std::copy(acc_self.data(), acc_self.data() + p, spec.begin());
      fft.inv(buf.data(), spec.data(), p);
      for (int k = 0; k < nz; ++k) out.self(i, k) = -gm2 * buf[k].real();
      if (partner) {
        std::copy(acc_mut.data(), acc_mut.data() + p, spec.begin());
        fft.inv(buf.data(), spec.data(), p);
        for (int k = 0; k < nz; ++k) out.mutual(i, k) = -gm2 * buf[k].real();
      }
    }
    return out;
  }
};

EffectivePotential::EffectivePotential(const GridSpec& grid, const PhysicalParams& params, EffectivePotentialOptions opt)
    : impl_(std::make_unique<Impl>(grid, params, opt)) {}
EffectivePotential::~EffectivePotential() = default;
EffectivePotential::EffectivePotential(EffectivePotential&&) noexcept = default;
EffectivePotential& EffectivePotential::operator=(EffectivePotential&&) noexcept = default;

PotentialParts EffectivePotential::parts(const Eigen::ArrayXXd& density) { return impl_->evaluate(density); }
bool EffectivePotential::cached() const { return impl_->cache; }
const GridSpec& EffectivePotential::grid() const { return impl_->grid; }

Eigen::ArrayXXd effective_potential(const WaveField& psi, const PhysicalParams& params, EffectivePotentialOptions opt) {
  psi.require_normalized();
  EffectivePotential op(psi.grid(), params, opt);
  return op(psi.density());
}

// ---------------------------------------------------------------------------

LineConvolver::LineConvolver(int n, double h, const std::function<double(double)>& kernel, double shift)
    : n_(n), h_(h) {
  if (n < 1 || !(h > 0)) throw std::invalid_argument("LineConvolver: bad grid");
  const int p = 2 * n;
  buf_.assign(p, cplx(0));
  spec_.resize(p);
  for (int m = -(n - 1); m < n; ++m) buf_[(m + p) % p] = kernel(m * h + shift);
  kernel_hat_.resize(p);
  fft_.fwd(kernel_hat_.data(), buf_.data(), p);
}

Eigen::ArrayXd LineConvolver::operator()(const Eigen::ArrayXd& in) {
  if (in.size() != n_) throw std::invalid_argument("LineConvolver: input size mismatch");
  const int p = 2 * n_;
  std::fill(buf_.begin(), buf_.end(), cplx(0));
  for (int l = 0; l < n_; ++l) buf_[l] = in(l) * h_;
  fft_.fwd(spec_.data(), buf_.data(), p);
  for (int q = 0; q < p; ++q) spec_[q] *= kernel_hat_[q];
  fft_.inv(buf_.data(), spec_.data(), p);
  Eigen::ArrayXd out(n_);
  for (int k = 0; k < n_; ++k) out(k) = buf_[k].real();
  return out;
}

std::function<double(double)> softened_gravity(const PhysicalParams& params, double a) {
  if (!(a > 0)) throw std::invalid_argument("softened_gravity: softening length must be positive");
  const double gm2 = params.G * params.m * params.m;
  return [gm2, a](double x) { return -gm2 / std::sqrt(x * x + a * a); };
}

}  // namespace snlab
