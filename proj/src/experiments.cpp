#include "snlab/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <locale>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "snlab/bipartite.hpp"
#include "snlab/correlations.hpp"
#include "snlab/ensemble_dynamics.hpp"
#include "snlab/errors.hpp"
#include "snlab/gaussian_dynamics.hpp"
#include "snlab/regression.hpp"
#include "snlab/snapshot_io.hpp"

#ifndef SNLAB_VERSION
#define SNLAB_VERSION "unknown"
#endif

namespace snlab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// strict config access

class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("must be an object", path_.empty() ? "<root>" : path_);
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  T get(const std::string& key) const {
    if (!j_.contains(key)) throw ConfigError("required field is missing", field(key));
    used_.insert(key);
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("wrong type: ") + e.what(), field(key));
    }
  }
  template <class T>
  T get(const std::string& key, T fallback) const {
    return j_.contains(key) ? get<T>(key) : fallback;
  }
  double positive(const std::string& key) const {
    const double v = get<double>(key);
    if (!(v > 0) || !std::isfinite(v)) throw ConfigError("must be positive and finite", field(key));
    return v;
  }
  double positive(const std::string& key, double fallback) const { return has(key) ? positive(key) : fallback; }
  int count(const std::string& key, int min) const {
    const int v = get<int>(key);
    if (v < min) throw ConfigError("must be at least " + std::to_string(min), field(key));
    return v;
  }
  int count(const std::string& key, int min, int fallback) const { return has(key) ? count(key, min) : fallback; }
  std::string choice(const std::string& key, std::initializer_list<const char*> options, const char* fallback) const {
    const std::string v = has(key) ? get<std::string>(key) : std::string(fallback);
    for (const char* o : options)
      if (v == o) return v;
    std::string list;
    for (const char* o : options) list += std::string(list.empty() ? "" : ", ") + o;
    throw ConfigError("must be one of " + list, field(key));
  }
  /// A length given either as `<base>_m` or `<base>_sigma` (never both).
  double length(const std::string& base, double sigma, double fallback = -1) const {
    const bool m = has(base + "_m"), s = has(base + "_sigma");
    if (m && s) throw ConfigError("give either " + base + "_m or " + base + "_sigma", field(base + "_m"));
    if (m) return positive(base + "_m");
    if (s) return positive(base + "_sigma") * sigma;
    if (fallback > 0) return fallback;
    throw ConfigError("required field is missing", field(base + "_m"));
  }
  Section sub(const std::string& key) const {
    if (!j_.contains(key)) throw ConfigError("required section is missing", field(key));
    used_.insert(key);
    return Section(j_.at(key), field(key));
  }
  const json& raw(const std::string& key) const {
    used_.insert(key);
    return j_.at(key);
  }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError("unknown key", field(it.key()));
  }

 private:
  const json& j_;
  std::string path_;
  mutable std::set<std::string> used_;
};

// ---------------------------------------------------------------------------
// output helpers

class Csv {
 public:
  Csv(const fs::path& path, const std::vector<std::string>& header) : os_(path) {
    if (!os_) throw std::runtime_error("cannot write " + path.string());
    os_.imbue(std::locale::classic());
    os_ << std::setprecision(17);
    for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
    os_ << '\n';
  }
  Csv& cell(double x) {
    sep();
    os_ << x;
    return *this;
  }
  Csv& cell(const std::string& s) {
    sep();
    os_ << s;
    return *this;
  }
  void end() {
    os_ << '\n';
    first_ = true;
  }

 private:
  void sep() {
    if (!first_) os_ << ',';
    first_ = false;
  }
  std::ofstream os_;
  bool first_ = true;
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  os << j.dump(2) << '\n';
  if (!os) throw std::runtime_error("cannot write " + path.string());
}

json nullable(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// ---------------------------------------------------------------------------
// shared sections

double inflation(const Section& root) {
  const double f = root.get<double>("coupling_inflation", 1.0);
  if (!(f >= 1) || !std::isfinite(f)) throw ConfigError("must be finite and >= 1", "coupling_inflation");
  return f;
}

PhysicalParams parse_physical(const Section& root) {
  const Section s = root.sub("physical");
  const double m = s.positive("mass_kg");
  double L = std::numeric_limits<double>::infinity();
  if (!s.has("separation_m")) throw ConfigError("required field is missing (null for an isolated packet)", s.field("separation_m"));
  if (!s.raw("separation_m").is_null()) L = s.positive("separation_m");
  const double quoted = s.positive("trap_frequency_per_s");
  const std::string conv = s.choice("frequency_convention", {"angular", "cyclic"}, "");
  const double omega0 =
      trap_angular_frequency(quoted, conv == "cyclic" ? FrequencyConvention::cyclic : FrequencyConvention::angular);
  const double T = s.get<double>("temperature_K", 0.0);
  if (!(T >= 0) || !std::isfinite(T)) throw ConfigError("must be >= 0", s.field("temperature_K"));
  const double G = s.get<double>("G_m3_kg_s2", constants::G);
  if (!(G >= 0) || !std::isfinite(G)) throw ConfigError("must be >= 0", s.field("G_m3_kg_s2"));

  PhysicalParams p;
  try {
    p = PhysicalParams::ground_state(m, L, omega0, T, G);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), "physical");
  }
  if (s.has("sigma_m")) p.sigma = s.positive("sigma_m");
  s.finish();
  return p.with_inflated_coupling(inflation(root));
}

SolverConfig parse_solver(const Section& root) {
  const Section s = root.sub("solver");
  SolverConfig c;
  c.dt = s.positive("dt_s");
  c.n_steps = s.count("n_steps", 1);
  c.scheme = s.choice("scheme", {"split_operator", "crank_nicolson"}, "split_operator") == "crank_nicolson"
                 ? KineticScheme::crank_nicolson
                 : KineticScheme::split_operator;
  c.update = s.choice("nonlinearity_update", {"per_step", "predictor_corrector"}, "per_step") == "predictor_corrector"
                 ? NonlinearityUpdate::predictor_corrector
                 : NonlinearityUpdate::per_step;
  c.absorbing_boundary = s.get<bool>("absorbing_boundary", false);
  c.absorbing_width = s.count("absorbing_width_cells", 1, c.absorbing_width);
  c.diagnostics_every = s.count("diagnostics_every", 0, std::max(1, c.n_steps / 100));
  c.snapshot_every = s.count("snapshot_every", 0, 0);
  s.finish();
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), "solver");
  }
  return c;
}

// Common manifest; `derived` lists the frozen regression constants the run refers to.
json manifest(const json& cfg, ExperimentKind kind, double wall, const PhysicalParams* p, json derived,
              const std::vector<std::string>& warnings) {
  json m;
  m["schema_version"] = summary_schema_version;
  m["csv_schema_version"] = csv_schema_version;
  m["code_version"] = SNLAB_VERSION;
  m["kind"] = to_string(kind);
  m["config"] = cfg;
  m["wall_time_s"] = wall;
  m["regression_constants"] = std::move(derived);
  m["warnings"] = warnings;
  if (p) {
    m["coupling_inflation"] = cfg.value("coupling_inflation", 1.0);
    m["pde_coupling_g"] = p->pde_coupling();
    m["pde_time_unit_s"] = p->pde_time_unit();
    m["sigma_m"] = p->sigma;
    m["omega0_rad_s"] = p->omega0;
  }
  return m;
}

std::vector<std::string> param_warnings(const PhysicalParams& p) {
  std::vector<std::string> w = p.warnings();
  w.push_back("pde coupling g = 2 G m^3 sigma / hbar^2 = " + std::to_string(p.pde_coupling()));
  return w;
}

// ---------------------------------------------------------------------------
// gaussian_correlations

struct GaussianPlan {
  PhysicalParams params;
  std::vector<double> temperatures;
  double t_max;
  int n_times;
  double mi_threshold, en_threshold;
};

GaussianPlan plan_gaussian(const Section& root) {
  GaussianPlan g{parse_physical(root), {}, 0, 0, 0, 0};
  const Section s = root.sub("gaussian");
  g.temperatures = s.get<std::vector<double>>("temperatures_K", {g.params.T});
  if (g.temperatures.empty()) throw ConfigError("needs at least one temperature", s.field("temperatures_K"));
  for (double T : g.temperatures)
    if (!(T >= 0) || !std::isfinite(T)) throw ConfigError("temperatures must be >= 0", s.field("temperatures_K"));
  g.t_max = s.positive("t_max_s");
  g.n_times = s.count("n_times", 2);
  g.mi_threshold = s.positive("mi_threshold_bits", 0.01);
  g.en_threshold = s.positive("en_threshold_bits", 0.001);
  s.finish();
  return g;
}

CorrelationReport report_at(double t, const PhysicalParams& p) {
  return correlation_report(t, thermal_scale(covariance_at(t, p), phonon_number(p)));
}

// First time the quantity exceeds `eps`, refined by bisection between samples; NaN if never.
double first_crossing(const std::vector<double>& t, const std::vector<double>& q, double eps,
                      const std::function<double(double)>& f) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(q[i] > eps)) continue;
    if (i == 0) return t[0];
    double lo = t[i - 1], hi = t[i];
    for (int it = 0; it < 100 && hi - lo > 1e-12 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (f(mid) > eps ? hi : lo) = mid;
    }
    return hi;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

void run_gaussian(const GaussianPlan& g, const fs::path& out, json& summary) {
  Csv csv(out / "correlations.csv",
          {"temperature_K", "t_s", "E_N_bits", "I_bits", "nu_tilde_minus_hbar", "nu_plus_hbar", "nu_minus_hbar"});
  json per_t = json::array();
  for (double T : g.temperatures) {
    PhysicalParams p = g.params;
    p.T = T;
    std::vector<double> ts, en, mi;
    for (int k = 0; k < g.n_times; ++k) {
      const double t = g.t_max * k / (g.n_times - 1);
      const CorrelationReport r = report_at(t, p);
      csv.cell(T).cell(t).cell(r.E_N).cell(r.I).cell(r.nu_tilde_minus / p.hbar).cell(r.nu_plus / p.hbar).cell(r.nu_minus / p.hbar);
      csv.end();
      ts.push_back(t);
      en.push_back(r.E_N);
      mi.push_back(r.I);
    }
    const double t_i = first_crossing(ts, mi, g.mi_threshold, [&](double t) { return report_at(t, p).I; });
    const double t_e = first_crossing(ts, en, g.en_threshold, [&](double t) { return report_at(t, p).E_N; });
    json row{{"temperature_K", T},
             {"nbar", phonon_number(p)},
             {"first_I_crossing_s", nullable(t_i)},
             {"first_E_N_crossing_s", nullable(t_e)}};
    // a crossing inside the window beats one that never happens
    if (std::isfinite(t_i))
      row["I_precedes_E_N"] = !std::isfinite(t_e) || t_i < t_e;
    else
      row["I_precedes_E_N"] = nullptr;
    per_t.push_back(row);
  }
  summary["coupling_frequency_rad_s"] = coupling_frequency(g.params);
  summary["mi_threshold_bits"] = g.mi_threshold;
  summary["en_threshold_bits"] = g.en_threshold;
  summary["temperatures"] = per_t;
}

// ---------------------------------------------------------------------------
// sn_effective

struct EffectivePlan {
  PhysicalParams params;
  SolverConfig solver;
  GridSpec grid;
  double z0, kz;
  EffectivePotentialOptions potential;
};

EffectivePlan plan_effective(const Section& root) {
  const PhysicalParams p = parse_physical(root);
  const SolverConfig c = parse_solver(root);
  const Section g = root.sub("grid");
  const GridSpec grid =
      GridSpec::cylinder(g.count("ns", 4), g.length("s_max", p.sigma), g.count("nz", 5), g.length("z_extent", p.sigma));
  g.finish();
  double z0 = 0, kz = 0;
  if (root.has("initial")) {
    const Section s = root.sub("initial");
    z0 = s.get<double>("center_m", 0.0);
    kz = s.get<double>("wavenumber_per_m", 0.0);
    s.finish();
  }
  EffectivePotentialOptions opt;
  if (root.has("partner")) {
    const Section s = root.sub("partner");
    opt.include_partner = s.get<bool>("include", true);
    opt.partner = s.choice("side", {"below", "above"}, "below") == "above" ? PartnerSide::above : PartnerSide::below;
    s.finish();
  }
  if (opt.include_partner && std::isfinite(p.L) && p.L < grid.z_axis().n * grid.z_axis().spacing)
    throw ConfigError("the partner image overlaps the grid: need separation >= axial extent", "physical.separation_m");
  return {p, c, grid, z0, kz, opt};
}

void run_effective(const EffectivePlan& e, const fs::path& out, json& summary, std::vector<std::string>& warnings) {
  const WaveField psi0 = WaveField::gaussian(e.grid, e.params.sigma, e.z0, 0, e.kz);
  const double f0 = ehrenfest_force(psi0, e.params, e.potential);
  const Trajectory tr = evolve_effective(psi0, e.params, e.solver, e.potential);
  for (const auto& w : tr.warnings) warnings.push_back(w);

  Csv csv(out / "diagnostics.csv", {"t_s", "norm", "mean_position_m", "width_m", "mean_momentum_kg_m_s",
                                     "kinetic_energy_J", "dT_dt_direct_W", "dT_dt_continuity_W"});
  double worst_rate = 0;
  for (const auto& d : tr.diagnostics) {
    csv.cell(d.t).cell(d.norm).cell(d.mean_position).cell(d.width).cell(d.mean_momentum).cell(d.kinetic_energy);
    csv.cell(d.dT_dt_direct).cell(d.dT_dt_continuity);
    csv.end();
    worst_rate = std::max({worst_rate, std::abs(d.dT_dt_direct), std::abs(d.dT_dt_continuity)});
  }
  json snaps = json::array();
  for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
    std::ostringstream name;
    name << "snapshots/psi_" << std::setw(6) << std::setfill('0') << i;
    write_snapshot(out / name.str(), tr.snapshots[i].psi.amplitudes(), e.grid, tr.snapshots[i].t, e.params);
    snaps.push_back(name.str());
  }
  const double newton = std::isfinite(e.params.L) ? e.params.G * e.params.m * e.params.m / (e.params.L * e.params.L) : 0;
  summary["grid"] = to_json(e.grid);
  summary["ehrenfest_force_initial_N"] = f0;
  summary["newton_force_magnitude_N"] = newton;
  summary["max_norm_drift_per_step"] = tr.max_norm_drift_per_step;
  summary["max_abs_dT_dt_W"] = worst_rate;
  summary["final_norm"] = tr.final_state.norm_squared();
  summary["snapshots"] = snaps;
}

// ---------------------------------------------------------------------------
// bipartite_oracle

struct BipartitePlan {
  PhysicalParams params;
  SolverConfig solver;
  GridSpec grid;
  BipartiteOptions opt;
};

BipartitePlan plan_bipartite(const Section& root) {
  const PhysicalParams p = parse_physical(root);
  if (!std::isfinite(p.L)) throw ConfigError("bipartite evolution needs a finite separation", "physical.separation_m");
  const SolverConfig c = parse_solver(root);
  const Section g = root.sub("grid");
  const int n = g.count("n", 4);
  const double ext = g.length("extent", p.sigma);
  g.finish();
  BipartiteOptions opt;
  const Section b = root.sub("bipartite");
  const std::string k = b.choice("kernel", {"softened_sn", "quadratic_newton", "full_newton"}, "softened_sn");
  opt.kernel = k == "quadratic_newton" ? BipartiteKernel::quadratic_newton
               : k == "full_newton"    ? BipartiteKernel::full_newton
                                       : BipartiteKernel::softened_sn;
  opt.softening = b.length("softening", p.sigma, p.sigma / 2);
  b.finish();
  return {p, c, GridSpec::plane(n, ext, n, ext), opt};
}

void run_bipartite(const BipartitePlan& b, const fs::path& out, json& summary, std::vector<std::string>& warnings) {
  const WaveField psi0 = WaveField::gaussian(b.grid, b.params.sigma);
  const BipartiteTrajectory tr = evolve_bipartite_1d(psi0, b.params, b.solver, b.opt);
  for (const auto& w : tr.warnings) warnings.push_back(w);
  static const char* names[] = {"z1", "p1", "z2", "p2"};
  std::vector<std::string> header{"t_s", "norm", "purity", "mutual_information_bits"};
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) header.push_back(std::string("cov_") + names[i] + names[j]);
  Csv csv(out / "bipartite.csv", header);
  double min_purity = 1, max_mi = 0, max_cov_err = 0;
  for (const auto& s : tr.samples) {
    csv.cell(s.t).cell(s.norm).cell(s.purity).cell(s.mutual_information);
    for (int i = 0; i < 4; ++i)
      for (int j = i; j < 4; ++j) csv.cell(s.covariance(i, j));
    csv.end();
    min_purity = std::min(min_purity, s.purity);
    max_mi = std::max(max_mi, s.mutual_information);
    if (b.opt.kernel == BipartiteKernel::quadratic_newton) {
      const Eigen::Matrix4d ref = covariance_at(s.t, b.params).entries();
      max_cov_err = std::max(max_cov_err, (s.covariance - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff());
    }
  }
  summary["min_purity"] = min_purity;
  summary["max_mutual_information_bits"] = max_mi;
  summary["final_mutual_information_bits"] = tr.samples.empty() ? 0.0 : tr.samples.back().mutual_information;
  if (b.opt.kernel == BipartiteKernel::quadratic_newton) summary["max_relative_covariance_error_vs_closed_form"] = max_cov_err;
}

// ---------------------------------------------------------------------------
// signaling

struct SignalingPlan {
  PhysicalParams params;
  SolverConfig solver;
  GridSpec grid;
  double d;
  std::vector<EnsembleMode> modes;
  double softening;
  bool von_neumann_check;
};

SignalingPlan plan_signaling(const Section& root) {
  const PhysicalParams p = parse_physical(root);
  const SolverConfig c = parse_solver(root);
  const Section g = root.sub("grid");
  const GridSpec grid = GridSpec::line(g.count("n", 5), g.length("extent", p.sigma));
  g.finish();
  const Section s = root.sub("signaling");
  const double d = s.length("peak_separation", p.sigma, 4 * p.sigma);
  const std::string mode = s.choice("mode", {"pure", "mixed", "both"}, "both");
  std::vector<EnsembleMode> modes;
  if (mode != "mixed") modes.push_back(EnsembleMode::pure_state_sn);
  if (mode != "pure") modes.push_back(EnsembleMode::mixed_state_sn);
  const double soft = s.length("softening", p.sigma, p.sigma / 2);
  const bool vn = s.get<bool>("von_neumann_check", false);
  s.finish();
  return {p, c, grid, d, modes, soft, vn};
}

void run_signaling(const SignalingPlan& s, const fs::path& out, json& summary, std::vector<std::string>& warnings) {
  const EnsemblePair pair = signaling_pair(s.grid, s.params.sigma, s.d);
  Csv gap(out / "signaling_gap.csv", {"mode", "t_s", "delta_L1"});
  std::vector<std::string> header{"z_m"};
  std::vector<Eigen::ArrayXXd> columns;
  json modes = json::object();
  for (EnsembleMode m : s.modes) {
    const std::string name = m == EnsembleMode::pure_state_sn ? "pure" : "mixed";
    const GapSeries g = signaling_gap(pair.localized, pair.superposed, s.params, s.solver, {m, s.softening});
    for (const auto* tr : {&g.a, &g.b})
      for (const auto& w : tr->warnings) warnings.push_back(name + ": " + w);
    for (std::size_t i = 0; i < g.t.size(); ++i) {
      gap.cell(name).cell(g.t[i]).cell(g.delta[i]);
      gap.end();
    }
    modes[name] = {{"max_delta_L1", g.max()}, {"final_delta_L1", g.delta.empty() ? 0.0 : g.delta.back()}};
    header.push_back(name + "_localized");
    header.push_back(name + "_superposed");
    columns.push_back(g.a.densities.back());
    columns.push_back(g.b.densities.back());
  }
  // G = 0 reference: both modes reduce to free spreading
  PhysicalParams free = s.params;
  free.G = 0;
  columns.push_back(evolve_ensemble(pair.localized, free, s.solver, {EnsembleMode::mixed_state_sn, s.softening}).densities.back());
  header.push_back("free_reference");

  Csv screens(out / "screens.csv", header);
  const Eigen::ArrayXd z = s.grid.axis(0).coords();
  for (int i = 0; i < s.grid.rows(); ++i) {
    screens.cell(z(i));
    for (const auto& c : columns) screens.cell(c(i, 0));
    screens.end();
  }
  summary["peak_separation_m"] = s.d;
  summary["t_final_s"] = s.solver.dt * s.solver.n_steps;
  summary["modes"] = modes;
  if (s.von_neumann_check) {
    const VonNeumannReport vn = von_neumann_consistency(pair.superposed, s.params, s.solver, s.softening);
    summary["von_neumann"] = {{"max_trace_norm_deviation", vn.max_deviation},
                              {"final_trace_norm_deviation", vn.deviation.back()}};
  }
}

// ---------------------------------------------------------------------------
// sweep

struct SweepPlan {
  json base;
  std::string pointer;
  std::vector<json> values;
  int workers;
};

void validate_single(const json& cfg);

SweepPlan plan_sweep(const Section& root) {
  const Section s = root.sub("sweep");
  SweepPlan p{s.raw("base"), s.get<std::string>("parameter"), s.get<std::vector<json>>("values"), s.count("workers", 1, 1)};
  s.finish();
  if (p.values.empty()) throw ConfigError("needs at least one value", s.field("values"));
  const ExperimentKind k = experiment_kind(p.base.value("kind", ""));
  if (k == ExperimentKind::sweep) throw ConfigError("sweeps cannot nest", s.field("base.kind"));
  json::json_pointer ptr;
  try {
    ptr = json::json_pointer(p.pointer);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("not a JSON pointer: ") + e.what(), s.field("parameter"));
  }
  for (const json& v : p.values) {
    json cfg = p.base;
    cfg[ptr] = v;
    try {
      validate_single(cfg);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("with ") + p.pointer + " = " + v.dump() + ": " + e.what(), "sweep.base");
    }
  }
  return p;
}

// ---------------------------------------------------------------------------

ExperimentKind root_kind(const Section& root) {
  return experiment_kind(root.get<std::string>("kind"));
}

void check_schema(const Section& root) {
  const int v = root.get<int>("schema_version", 1);
  if (v != 1) throw ConfigError("unsupported schema version " + std::to_string(v), "schema_version");
}

void validate_single(const json& cfg) {
  const Section root(cfg, "");
  check_schema(root);
  switch (root_kind(root)) {
    case ExperimentKind::gaussian_correlations: plan_gaussian(root); break;
    case ExperimentKind::sn_effective: plan_effective(root); break;
    case ExperimentKind::bipartite_oracle: plan_bipartite(root); break;
    case ExperimentKind::signaling: plan_signaling(root); break;
    case ExperimentKind::sweep: plan_sweep(root); break;
  }
  root.get<double>("coupling_inflation", 1.0);
  root.finish();
}

int exit_code_for(const std::exception_ptr& e, std::string& message) {
  try {
    std::rethrow_exception(e);
  } catch (const ConfigError& x) {
    message = std::string("config error: ") + x.what();
    return 2;
  } catch (const CapacityError& x) {
    message = std::string("capacity error: ") + x.what();
    return 4;
  } catch (const InstabilityError& x) {
    message = std::string("instability: ") + x.what();
    return 3;
  } catch (const std::exception& x) {
    message = std::string("runtime error: ") + x.what();
    return 3;
  }
}

// Returns the worst exit code among the runs.
int run_sweep(const SweepPlan& s, const fs::path& out, json& summary) {
  std::vector<json> results(s.values.size());
  std::atomic<std::size_t> next{0};
  const json::json_pointer ptr(s.pointer);
  auto worker = [&] {
    for (std::size_t i; (i = next++) < s.values.size();) {
      json cfg = s.base;
      cfg[ptr] = s.values[i];
      std::ostringstream dir;
      dir << "run_" << std::setw(3) << std::setfill('0') << i;
      std::string message;
      int code = 0;
      try {
        run_experiment(cfg, out / dir.str());
      } catch (...) {
        code = exit_code_for(std::current_exception(), message);
      }
      results[i] = {{"directory", dir.str()}, {"value", s.values[i]}, {"exit_code", code}, {"message", message}};
    }
  };
  const int n = std::min<int>(s.workers, int(s.values.size()));
  std::vector<std::thread> pool;
  for (int w = 0; w < n; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  summary["parameter"] = s.pointer;
  summary["runs"] = results;
  int worst = 0;
  for (const auto& r : results) worst = std::max(worst, r["exit_code"].get<int>());
  summary["worst_exit_code"] = worst;
  return worst;
}

}  // namespace

const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::gaussian_correlations: return "gaussian_correlations";
    case ExperimentKind::sn_effective: return "sn_effective";
    case ExperimentKind::bipartite_oracle: return "bipartite_oracle";
    case ExperimentKind::signaling: return "signaling";
    case ExperimentKind::sweep: return "sweep";
  }
  return "?";
}

ExperimentKind experiment_kind(const std::string& name) {
  for (auto k : {ExperimentKind::gaussian_correlations, ExperimentKind::sn_effective, ExperimentKind::bipartite_oracle,
                 ExperimentKind::signaling, ExperimentKind::sweep})
    if (name == to_string(k)) return k;
  throw ConfigError("unknown experiment kind '" + name + "'", "kind");
}

json load_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path.string(), "config");
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what(), "config");
  }
}

PhysicalParams physical_params(const json& cfg) { return parse_physical(Section(cfg, "")); }
SolverConfig solver_config(const json& cfg) { return parse_solver(Section(cfg, "")); }
void validate_config(const json& cfg) { validate_single(cfg); }

void run_experiment(const json& cfg, const fs::path& out) {
  validate_single(cfg);
  const auto start = std::chrono::steady_clock::now();
  const Section root(cfg, "");
  const ExperimentKind kind = root_kind(root);
  fs::create_directories(out);

  json summary{{"schema_version", summary_schema_version}, {"kind", to_string(kind)}};
  std::vector<std::string> warnings;
  json derived = json::object();
  std::optional<PhysicalParams> params;
  int sweep_worst = 0;
  switch (kind) {
    case ExperimentKind::gaussian_correlations: {
      const GaussianPlan g = plan_gaussian(root);
      params = g.params;
      derived["coupling_frequency_rad_s"] = regression::coupling_frequency_rad_s;
      derived["mutual_information_12uK_1s_bits"] = regression::mutual_information_12uK_1s_bits;
      run_gaussian(g, out, summary);
      break;
    }
    case ExperimentKind::sn_effective: {
      const EffectivePlan e = plan_effective(root);
      params = e.params;
      run_effective(e, out, summary, warnings);
      break;
    }
    case ExperimentKind::bipartite_oracle: {
      const BipartitePlan b = plan_bipartite(root);
      params = b.params;
      run_bipartite(b, out, summary, warnings);
      break;
    }
    case ExperimentKind::signaling: {
      const SignalingPlan s = plan_signaling(root);
      params = s.params;
      derived["pure_mode_gap_reference"] = regression::pure_mode_signaling_gap;
      derived["pure_mode_gap_reference_scenario"] = regression::pure_mode_signaling_gap_scenario;
      run_signaling(s, out, summary, warnings);
      break;
    }
    case ExperimentKind::sweep:
      sweep_worst = run_sweep(plan_sweep(root), out, summary);
      break;
  }
  if (params)
    for (const auto& w : param_warnings(*params)) warnings.insert(warnings.begin(), w);
  summary["warnings"] = warnings;
  write_json(out / "summary.json", summary);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_json(out / "manifest.json", manifest(cfg, kind, wall, params ? &*params : nullptr, derived, warnings));
  if (sweep_worst == 4) throw CapacityError("sweep: at least one run exceeded capacity; see summary.json");
  if (sweep_worst != 0) throw std::runtime_error("sweep: at least one run failed; see summary.json");
}

int run_cli(ExperimentKind expected, const fs::path& config, const fs::path& out) {
  std::string message;
  try {
    const json cfg = load_config(config);
    const ExperimentKind k = experiment_kind(Section(cfg, "").get<std::string>("kind"));
    if (k != expected)
      throw ConfigError(std::string("config describes '") + to_string(k) + "' but the subcommand runs '" +
                            to_string(expected) + "'",
                        "kind");
    run_experiment(cfg, out);
    return 0;
  } catch (...) {
    const int code = exit_code_for(std::current_exception(), message);
    std::cerr << "snlab: " << message << '\n';
    return code;
  }
}

}  // namespace snlab
