#include "snlab/physical_params.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace snlab {

double trap_angular_frequency(double quoted, FrequencyConvention convention) {
  return convention == FrequencyConvention::cyclic ? 2 * std::numbers::pi * quoted : quoted;
}

PhysicalParams PhysicalParams::ground_state(double m, double L, double omega0, double T, double G) {
  PhysicalParams p;
  p.m = m;
  p.L = L;
  p.omega0 = omega0;
  p.T = T;
  p.G = G;
  p.sigma = p.ground_state_width();
  p.validate();
  return p;
}

double PhysicalParams::ground_state_width() const { return std::sqrt(hbar / (2 * m * omega0)); }

bool PhysicalParams::sigma_overridden(double rtol) const {
  return std::abs(sigma - ground_state_width()) > rtol * ground_state_width();
}

void PhysicalParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("PhysicalParams: ") + what);
  };
  require(std::isfinite(m) && m > 0, "m must be positive");
  require(!std::isnan(L) && L > 0, "L must be positive (or +inf)");
  require(std::isfinite(omega0) && omega0 > 0, "omega0 must be positive");
  require(std::isfinite(T) && T >= 0, "T must be non-negative");
  require(std::isfinite(G) && G >= 0, "G must be non-negative");
  require(std::isfinite(hbar) && hbar > 0, "hbar must be positive");
  require(std::isfinite(kB) && kB > 0, "kB must be positive");
  require(std::isfinite(sigma) && sigma > 0, "sigma must be positive");
}

std::vector<std::string> PhysicalParams::warnings() const {
  std::vector<std::string> out;
  if (std::isfinite(L) && sigma / L > 0.1) {
    std::ostringstream msg;
    msg << "sigma/L = " << sigma / L << " > 0.1: quadratic truncation of the Newton potential is questionable";
    out.push_back(msg.str());
  }
  if (sigma_overridden()) {
    std::ostringstream msg;
    msg << "sigma = " << sigma << " m differs from the trap ground-state width " << ground_state_width() << " m";
    out.push_back(msg.str());
  }
  return out;
}

PhysicalParams PhysicalParams::with_inflated_coupling(double factor) const {
  if (!(factor >= 1) || !std::isfinite(factor))
    throw std::invalid_argument("coupling inflation factor must be finite and >= 1");
  PhysicalParams p = *this;
  p.G *= factor;
  return p;
}

double PhysicalParams::pde_coupling() const { return 2 * G * m * m * m * sigma / (hbar * hbar); }
double PhysicalParams::pde_time_unit() const { return 2 * m * sigma * sigma / hbar; }
double PhysicalParams::pde_energy_unit() const { return hbar * hbar / (2 * m * sigma * sigma); }

}  // namespace snlab
