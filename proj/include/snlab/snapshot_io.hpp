#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <json.hpp>
#include <string>

#include "snlab/grid.hpp"
#include "snlab/physical_params.hpp"

namespace snlab {

/// Field dumps as `<stem>.bin` plus `<stem>.json`.
///
/// The binary file holds little-endian IEEE-754 doubles, row-major with axis 0
/// slowest (s then z on a cylinder, z1 then z2 on a plane). Complex fields store
/// the full real plane followed by the full imaginary plane; real fields store
/// one plane. The sidecar records the grid, time, physical parameters and the
/// plane names.
void write_snapshot(const std::filesystem::path& stem, const Eigen::ArrayXXcd& field, const GridSpec& grid, double t,
                    const PhysicalParams& params, const std::string& quantity = "psi");
void write_snapshot(const std::filesystem::path& stem, const Eigen::ArrayXXd& field, const GridSpec& grid, double t,
                    const PhysicalParams& params, const std::string& quantity = "density");

struct LoadedSnapshot {
  GridSpec grid;
  double t;
  Eigen::ArrayXXcd values;  // imaginary part zero for real fields
  bool is_complex;
  nlohmann::json sidecar;
};

/// Throws std::runtime_error if the files are missing or inconsistent.
LoadedSnapshot read_snapshot(const std::filesystem::path& stem);

nlohmann::json to_json(const GridSpec& grid);
GridSpec grid_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PhysicalParams& params);

}  // namespace snlab
