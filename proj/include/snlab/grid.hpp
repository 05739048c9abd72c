#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace snlab {

enum class Geometry { line_z, cylinder_sz, plane_z1z2 };

const char* to_string(Geometry g);

/// One uniform axis. Coordinates are origin + i * spacing.
struct Axis {
  int n = 0;
  double spacing = 0;  // m
  double origin = 0;   // m, coordinate of index 0
  double coord(int i) const { return origin + i * spacing; }
  Eigen::ArrayXd coords() const;
};

/// Structured grid in SI units. Fields on it are stored as rows x cols arrays:
///   line_z       rows = z,   cols = 1
///   cylinder_sz  rows = s,   cols = z   (s staggered: s_i = (i + 1/2) ds)
///   plane_z1z2   rows = z1,  cols = z2
/// Axial coordinates are centred on 0: z_k = (k - (n-1)/2) dz.
class GridSpec {
 public:
  static GridSpec line(int nz, double z_extent);
  static GridSpec cylinder(int ns, double s_max, int nz, double z_extent);
  static GridSpec plane(int n1, double extent1, int n2, double extent2);

  Geometry geometry() const noexcept { return geometry_; }
  int rows() const noexcept { return axes_[0].n; }
  int cols() const noexcept { return geometry_ == Geometry::line_z ? 1 : axes_[1].n; }
  int rank() const noexcept { return geometry_ == Geometry::line_z ? 1 : 2; }
  Eigen::Index size() const noexcept { return Eigen::Index(rows()) * cols(); }
  const Axis& axis(int i) const { return axes_.at(i); }
  /// Axis along which z runs: axis 0 for line_z, axis 1 for cylinder_sz.
  const Axis& z_axis() const;

  /// Integration weight of each cell: dz (line), 2 pi s ds dz (cylinder), dz1 dz2 (plane).
  Eigen::ArrayXXd cell_weights() const;
  /// 1 on cells within `width` cells of an outer boundary (not the cylinder axis), else 0.
  Eigen::ArrayXXd boundary_mask(int width) const;

  bool operator==(const GridSpec& o) const;
  std::string describe() const;

 private:
  GridSpec(Geometry g, std::vector<Axis> axes);
  Geometry geometry_;
  std::vector<Axis> axes_;
};

/// Complex amplitudes on a grid, normalised so that sum |psi|^2 * cell_weight = 1.
class WaveField {
 public:
  WaveField(GridSpec grid, Eigen::ArrayXXcd amplitudes);

  /// Gaussian whose |psi|^2 has standard deviation sigma along every axis.
  /// line_z: centred at z0. cylinder_sz: on the axis at z0. plane_z1z2: centred at (z0, z1).
  /// An optional mean momentum kz [1/m] multiplies by exp(i kz z) (line / cylinder only).
  static WaveField gaussian(const GridSpec& grid, double sigma, double z0 = 0, double z1 = 0, double kz = 0);

  const GridSpec& grid() const noexcept { return grid_; }
  const Eigen::ArrayXXcd& amplitudes() const noexcept { return psi_; }
  Eigen::ArrayXXcd& amplitudes() noexcept { return psi_; }

  double norm_squared() const;
  void normalize();
  Eigen::ArrayXXd density() const { return psi_.abs2(); }
  /// Throws std::invalid_argument unless finite and normalised within `tol`.
  void require_normalized(double tol = 1e-10) const;
  /// Probability within `width` cells of the outer boundary.
  double boundary_probability(int width) const;
  /// Advisory messages, e.g. density at the boundary above 1e-12 of the peak.
  std::vector<std::string> warnings() const;

 private:
  GridSpec grid_;
  Eigen::ArrayXXcd psi_;
};

}  // namespace snlab
