#include "snlab/grid.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace snlab {

const char* to_string(Geometry g) {
  switch (g) {
    case Geometry::line_z: return "line_z";
    case Geometry::cylinder_sz: return "cylinder_sz";
    case Geometry::plane_z1z2: return "plane_z1z2";
  }
  return "?";
}

Eigen::ArrayXd Axis::coords() const {
  Eigen::ArrayXd c(n);
  for (int i = 0; i < n; ++i) c(i) = coord(i);
  return c;
}

namespace {

Axis centred_axis(int n, double extent, const char* name) {
  if (n < 4) throw std::invalid_argument(std::string(name) + ": need at least 4 points");
  if (!(extent > 0) || !std::isfinite(extent)) throw std::invalid_argument(std::string(name) + ": extent must be positive");
  const double h = extent / n;
  return {n, h, -0.5 * (n - 1) * h};
}

}  // namespace

GridSpec::GridSpec(Geometry g, std::vector<Axis> axes) : geometry_(g), axes_(std::move(axes)) {}

GridSpec GridSpec::line(int nz, double z_extent) { return GridSpec(Geometry::line_z, {centred_axis(nz, z_extent, "z")}); }

GridSpec GridSpec::cylinder(int ns, double s_max, int nz, double z_extent) {
  if (ns < 4) throw std::invalid_argument("s: need at least 4 points");
  if (!(s_max > 0) || !std::isfinite(s_max)) throw std::invalid_argument("s: s_max must be positive");
  const double hs = s_max / ns;
  return GridSpec(Geometry::cylinder_sz, {Axis{ns, hs, 0.5 * hs}, centred_axis(nz, z_extent, "z")});
}

GridSpec GridSpec::plane(int n1, double extent1, int n2, double extent2) {
  return GridSpec(Geometry::plane_z1z2, {centred_axis(n1, extent1, "z1"), centred_axis(n2, extent2, "z2")});
}

const Axis& GridSpec::z_axis() const {
  if (geometry_ == Geometry::line_z) return axes_[0];
  if (geometry_ == Geometry::cylinder_sz) return axes_[1];
  throw std::logic_error("plane grid has two axial coordinates");
}

Eigen::ArrayXXd GridSpec::cell_weights() const {
  switch (geometry_) {
    case Geometry::line_z:
      return Eigen::ArrayXXd::Constant(rows(), 1, axes_[0].spacing);
    case Geometry::cylinder_sz: {
      const Eigen::ArrayXd s = axes_[0].coords();
      const double c = 2 * std::numbers::pi * axes_[0].spacing * axes_[1].spacing;
      return (c * s).replicate(1, cols());
    }
    case Geometry::plane_z1z2:
      return Eigen::ArrayXXd::Constant(rows(), cols(), axes_[0].spacing * axes_[1].spacing);
  }
  throw std::logic_error("unknown geometry");
}

Eigen::ArrayXXd GridSpec::boundary_mask(int width) const {
  Eigen::ArrayXXd m = Eigen::ArrayXXd::Zero(rows(), cols());
  const int r = rows(), c = cols();
  width = std::max(0, width);
  switch (geometry_) {
    case Geometry::line_z:
      m.topRows(std::min(width, r)) = 1;
      m.bottomRows(std::min(width, r)) = 1;
      break;
    case Geometry::cylinder_sz:
      m.bottomRows(std::min(width, r)) = 1;  // outer radius only
      m.leftCols(std::min(width, c)) = 1;
      m.rightCols(std::min(width, c)) = 1;
      break;
    case Geometry::plane_z1z2:
      m.topRows(std::min(width, r)) = 1;
      m.bottomRows(std::min(width, r)) = 1;
      m.leftCols(std::min(width, c)) = 1;
      m.rightCols(std::min(width, c)) = 1;
      break;
  }
  return m;
}

bool GridSpec::operator==(const GridSpec& o) const {
  if (geometry_ != o.geometry_ || axes_.size() != o.axes_.size()) return false;
  for (size_t i = 0; i < axes_.size(); ++i)
    if (axes_[i].n != o.axes_[i].n || axes_[i].spacing != o.axes_[i].spacing || axes_[i].origin != o.axes_[i].origin)
      return false;
  return true;
}

std::string GridSpec::describe() const {
  std::ostringstream os;
  os << to_string(geometry_);
  for (const auto& a : axes_) os << " [" << a.n << " x " << a.spacing << " m]";
  return os.str();
}

// ---------------------------------------------------------------------------

WaveField::WaveField(GridSpec grid, Eigen::ArrayXXcd amplitudes) : grid_(std::move(grid)), psi_(std::move(amplitudes)) {
  if (psi_.rows() != grid_.rows() || psi_.cols() != grid_.cols())
    throw std::invalid_argument("WaveField: amplitude shape does not match grid " + grid_.describe());
}

WaveField WaveField::gaussian(const GridSpec& grid, double sigma, double z0, double z1, double kz) {
  if (!(sigma > 0)) throw std::invalid_argument("WaveField::gaussian: sigma must be positive");
  const double a = 1 / (4 * sigma * sigma);
  Eigen::ArrayXXcd psi(grid.rows(), grid.cols());
  switch (grid.geometry()) {
    case Geometry::line_z: {
      const auto& z = grid.axis(0);
      for (int k = 0; k < z.n; ++k) {
        const double dz = z.coord(k) - z0;
        psi(k, 0) = std::polar(std::exp(-a * dz * dz), kz * z.coord(k));
      }
      break;
    }
    case Geometry::cylinder_sz: {
      const auto& s = grid.axis(0);
      const auto& z = grid.axis(1);
      for (int k = 0; k < z.n; ++k)
        for (int i = 0; i < s.n; ++i) {
          const double dz = z.coord(k) - z0, si = s.coord(i);
          psi(i, k) = std::polar(std::exp(-a * (si * si + dz * dz)), kz * z.coord(k));
        }
      break;
    }
    case Geometry::plane_z1z2: {
      const auto& x = grid.axis(0);
      const auto& y = grid.axis(1);
      for (int l = 0; l < y.n; ++l)
        for (int k = 0; k < x.n; ++k) {
          const double d1 = x.coord(k) - z0, d2 = y.coord(l) - z1;
          psi(k, l) = std::exp(-a * (d1 * d1 + d2 * d2));
        }
      break;
    }
  }
  WaveField w(grid, std::move(psi));
  w.normalize();
  return w;
}

double WaveField::norm_squared() const { return (psi_.abs2() * grid_.cell_weights()).sum(); }

void WaveField::normalize() {
  const double n2 = norm_squared();
  if (!(n2 > 0) || !std::isfinite(n2)) throw std::invalid_argument("WaveField: cannot normalise a zero or non-finite field");
  psi_ /= std::sqrt(n2);
}

void WaveField::require_normalized(double tol) const {
  if (!psi_.allFinite()) throw std::invalid_argument("WaveField: non-finite amplitudes");
  const double n2 = norm_squared();
  if (std::abs(n2 - 1) > tol) {
    std::ostringstream os;
    os << "WaveField: norm^2 = " << n2 << " is not 1 within " << tol;
    throw std::invalid_argument(os.str());
  }
}

double WaveField::boundary_probability(int width) const {
  return (psi_.abs2() * grid_.cell_weights() * grid_.boundary_mask(width)).sum();
}

std::vector<std::string> WaveField::warnings() const {
  std::vector<std::string> out;
  const Eigen::ArrayXXd rho = density();
  const double peak = rho.maxCoeff();
  const double edge = (rho * grid_.boundary_mask(1)).maxCoeff();
  if (edge > 1e-12 * peak) {
    std::ostringstream os;
    os << "boundary density is " << edge / peak << " of the peak (> 1e-12); enlarge the grid";
    out.push_back(os.str());
  }
  return out;
}

}  // namespace snlab
