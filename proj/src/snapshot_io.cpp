#include "snlab/snapshot_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <stdexcept>
#include <vector>

namespace snlab {

namespace {

void put_le(std::ofstream& os, double x) {
  std::uint64_t u;
  std::memcpy(&u, &x, 8);
  if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
  os.write(reinterpret_cast<const char*>(&u), 8);
}

double get_le(const char* p) {
  std::uint64_t u;
  std::memcpy(&u, p, 8);
  if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
  double x;
  std::memcpy(&x, &u, 8);
  return x;
}

std::filesystem::path with_ext(const std::filesystem::path& stem, const char* ext) {
  std::filesystem::path p = stem;
  p += ext;
  return p;
}

// rows x cols, row-major: row index slowest
void write_plane(std::ofstream& os, const Eigen::ArrayXXd& a) {
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index k = 0; k < a.cols(); ++k) put_le(os, a(i, k));
}

void write_files(const std::filesystem::path& stem, const std::vector<const Eigen::ArrayXXd*>& planes,
                 const std::vector<std::string>& names, const GridSpec& grid, double t, const PhysicalParams& params,
                 const std::string& quantity) {
  if (planes.front()->rows() != grid.rows() || planes.front()->cols() != grid.cols())
    throw std::invalid_argument("write_snapshot: field shape does not match grid");
  if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
  std::ofstream bin(with_ext(stem, ".bin"), std::ios::binary);
  for (const auto* p : planes) write_plane(bin, *p);
  if (!bin) throw std::runtime_error("write_snapshot: cannot write " + with_ext(stem, ".bin").string());

  nlohmann::json j;
  j["format"] = "snlab-snapshot";
  j["format_version"] = 1;
  j["quantity"] = quantity;
  j["t_s"] = t;
  j["grid"] = to_json(grid);
  j["shape"] = {grid.rows(), grid.cols()};
  j["layout"] = "row-major, axis 0 slowest, little-endian float64, planes in order";
  j["planes"] = names;
  j["params"] = to_json(params);
  std::ofstream side(with_ext(stem, ".json"));
  side << j.dump(2) << '\n';
  if (!side) throw std::runtime_error("write_snapshot: cannot write " + with_ext(stem, ".json").string());
}

}  // namespace

nlohmann::json to_json(const GridSpec& grid) {
  nlohmann::json axes = nlohmann::json::array();
  for (int a = 0; a < grid.rank(); ++a) {
    const Axis& ax = grid.axis(a);
    axes.push_back({{"n", ax.n}, {"spacing_m", ax.spacing}, {"origin_m", ax.origin}});
  }
  return {{"geometry", to_string(grid.geometry())}, {"axes", axes}};
}

GridSpec grid_from_json(const nlohmann::json& j) {
  const std::string g = j.at("geometry").get<std::string>();
  const auto& ax = j.at("axes");
  auto n = [&](int i) { return ax.at(i).at("n").get<int>(); };
  auto extent = [&](int i) { return n(i) * ax.at(i).at("spacing_m").get<double>(); };
  if (g == "line_z") return GridSpec::line(n(0), extent(0));
  if (g == "cylinder_sz") return GridSpec::cylinder(n(0), extent(0), n(1), extent(1));
  if (g == "plane_z1z2") return GridSpec::plane(n(0), extent(0), n(1), extent(1));
  throw std::runtime_error("unknown geometry '" + g + "'");
}

nlohmann::json to_json(const PhysicalParams& p) {
  // JSON has no infinity; an isolated packet is written as null
  nlohmann::json L = std::isfinite(p.L) ? nlohmann::json(p.L) : nlohmann::json(nullptr);
  return {{"mass_kg", p.m},       {"separation_m", L},   {"omega0_rad_s", p.omega0}, {"temperature_K", p.T},
          {"G_m3_kg_s2", p.G},    {"hbar_J_s", p.hbar},  {"kB_J_K", p.kB},           {"sigma_m", p.sigma},
          {"pde_coupling", p.pde_coupling()}};
}

void write_snapshot(const std::filesystem::path& stem, const Eigen::ArrayXXcd& field, const GridSpec& grid, double t,
                    const PhysicalParams& params, const std::string& quantity) {
  const Eigen::ArrayXXd re = field.real(), im = field.imag();
  write_files(stem, {&re, &im}, {"re", "im"}, grid, t, params, quantity);
}

void write_snapshot(const std::filesystem::path& stem, const Eigen::ArrayXXd& field, const GridSpec& grid, double t,
                    const PhysicalParams& params, const std::string& quantity) {
  write_files(stem, {&field}, {"value"}, grid, t, params, quantity);
}

LoadedSnapshot read_snapshot(const std::filesystem::path& stem) {
  std::ifstream side(with_ext(stem, ".json"));
  if (!side) throw std::runtime_error("read_snapshot: missing " + with_ext(stem, ".json").string());
  const nlohmann::json j = nlohmann::json::parse(side);
  const GridSpec grid = grid_from_json(j.at("grid"));
  const auto planes = j.at("planes").get<std::vector<std::string>>();
  const bool cplx_field = planes.size() == 2;

  std::ifstream bin(with_ext(stem, ".bin"), std::ios::binary);
  std::vector<char> raw((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
  const std::size_t per_plane = std::size_t(grid.size()) * 8;
  if (raw.size() != per_plane * planes.size())
    throw std::runtime_error("read_snapshot: " + with_ext(stem, ".bin").string() + " has the wrong size");

  Eigen::ArrayXXcd v(grid.rows(), grid.cols());
  std::size_t off = 0;
  for (Eigen::Index i = 0; i < grid.rows(); ++i)
    for (Eigen::Index k = 0; k < grid.cols(); ++k, off += 8) {
      const double re = get_le(raw.data() + off);
      const double im = cplx_field ? get_le(raw.data() + per_plane + off) : 0.0;
      v(i, k) = {re, im};
    }
  return {grid, j.at("t_s").get<double>(), std::move(v), cplx_field, j};
}

}  // namespace snlab
