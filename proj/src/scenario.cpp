#include "fcarab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace fcarab {

using nlohmann::json;

NominalGeometry GeometryConfig::build() const {
  return NominalGeometry::at_carrier(ring1_elements, ring2_elements, ring1_radius_mm,
                                     ring2_radius_mm, carrier_hz);
}

std::vector<double> default_snr_sweep() {
  std::vector<double> out;
  for (int snr = -20; snr <= 30; snr += 5) out.push_back(snr);
  return out;
}

ACPState Scenario::presumed_acp() const {
  return ACPState::presumed(geometry.presumed_r1(), geometry.presumed_r2(), acp_error.l1_mm,
                            acp_error.l2_mm);
}

SamplingGrid Scenario::sampling_grid() const {
  return interference_grid(interferers_deg, grid.half_width_deg, grid.step_deg, grid.r1_samples,
                           grid.r2_samples);
}

std::vector<AngularSector> Scenario::complement() const {
  return complement_sectors(soi_deg, grid.half_width_deg, grid.step_deg);
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

bool finite_all(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

void Scenario::validate() const {
  require(schema == kScenarioSchema, "unsupported scenario schema " + std::to_string(schema));
  try {
    geometry.build();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("geometry: ") + e.what());
  }
  require(geometry.radius_scale > 0.0 && std::isfinite(geometry.radius_scale),
          "geometry.radius_scale must be positive");
  require(snapshots >= 1, "snapshots must be positive");
  require(trials >= 1, "trials must be positive");
  require(!snr_db.empty() && finite_all(snr_db), "snr_db must be a nonempty list of numbers");
  require(std::isfinite(inr_db), "inr_db must be finite");
  require(!interferers_deg.empty(), "at least one interferer is required");

  const auto& a = acp_error;
  require(a.l1_mm >= 0.0 && a.l2_mm >= 0.0, "ACP error bounds must be non-negative");
  require(a.l1_mm < geometry.presumed_r1() && a.l2_mm < geometry.presumed_r2(),
          "ACP error bounds must be smaller than the radii");
  if (a.kind == ErrorKind::fixed) {
    require(std::abs(a.dr1_mm) <= a.l1_mm && std::abs(a.dr2_mm) <= a.l2_mm,
            "fixed ACP errors exceed their bounds");
  }

  const auto& d = direction_error;
  require(d.max_deg >= 0.0, "direction_error.max_deg must be non-negative");
  if (d.kind == ErrorKind::fixed) {
    require(d.offsets_deg.size() == static_cast<std::size_t>(source_count()),
            "fixed direction offsets need one entry per source");
    require(finite_all(d.offsets_deg), "direction offsets must be finite");
  }
  const double spread = d.kind == ErrorKind::uniform ? d.max_deg : 0.0;
  std::vector<double> dirs = {soi_deg};
  dirs.insert(dirs.end(), interferers_deg.begin(), interferers_deg.end());
  for (std::size_t j = 0; j < dirs.size(); ++j) {
    const double off = d.kind == ErrorKind::fixed ? std::abs(d.offsets_deg[j]) : spread;
    require(dirs[j] - off >= -90.0 && dirs[j] + off <= 90.0,
            "source directions must stay within [-90, 90] degrees");
  }

  require(grid.half_width_deg > 0.0 && grid.step_deg > 0.0, "grid widths must be positive");
  require(grid.r1_samples >= 1 && grid.r2_samples >= 1, "grid ACP sample counts must be >= 1");
  for (double th : dirs) {
    require(th - grid.half_width_deg >= -90.0 && th + grid.half_width_deg <= 90.0,
            "sectors must lie within [-90, 90] degrees");
  }
  // Sectors may touch at an end point but must not share interior.
  const double soi_lo = soi_deg - grid.half_width_deg;
  const double soi_hi = soi_deg + grid.half_width_deg;
  for (double th : interferers_deg) {
    const double lo = th - grid.half_width_deg;
    const double hi = th + grid.half_width_deg;
    const double overlap = std::min(hi, soi_hi) - std::max(lo, soi_lo);
    require(!(overlap > 1e-9), "SOI sector overlaps the interference sector at " +
                                   std::to_string(th) + " degrees");
  }

  require(coupling.scale >= 0.0 && coupling.scale < 1.0, "coupling.scale must lie in [0, 1)");
  require(coupling.mode != CouplingMode::library || !coupling.library.empty(),
          "coupling.library is required in library mode");

  try {
    solver.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
  const int s = geometry.ring1_elements + geometry.ring2_elements;
  require(baselines.eigenspace_dim <= s, "eigenspace_dim exceeds the array size");
  if (baselines.dl_loading) require(*baselines.dl_loading >= 0.0, "dl_loading must be >= 0");
  if (baselines.dcrcb_uncertainty) {
    require(*baselines.dcrcb_uncertainty > 0.0 && *baselines.dcrcb_uncertainty < 2.0 * s,
            "dcrcb_uncertainty must lie in (0, 2S)");
  }
  require(!methods.empty(), "methods must not be empty");
  require(failure_threshold >= 0.0 && failure_threshold <= 1.0,
          "failure_threshold must lie in [0, 1]");
  require(std::isfinite(sweep.snr_db), "sweep.snr_db must be finite");
  for (int k : sweep.snapshots) require(k >= 1, "sweep snapshot counts must be positive");
  require(beampattern_step_deg > 0.0, "beampattern_step_deg must be positive");
}

Scenario example_scenario(int example, double spacing_wavelengths) {
  Scenario sc;
  sc.snr_db = default_snr_sweep();
  sc.snapshots = 46;
  switch (example) {
    case 1:
      sc.name = "example1";
      sc.acp_error = {ErrorKind::fixed, -0.21, 3.7, 1.0, 5.0};
      break;
    case 2:
      sc.name = "example2";
      sc.acp_error = {ErrorKind::uniform, 0.0, 0.0, 15.0, 20.0};
      sc.direction_error.kind = ErrorKind::uniform;
      sc.direction_error.max_deg = 5.0;
      break;
    case 3: {
      if (!(spacing_wavelengths > 0.0)) throw ConfigError("spacing must be positive");
      std::ostringstream name;
      name << "example3_" << spacing_wavelengths << "lambda";
      sc.name = name.str();
      sc.acp_error = {ErrorKind::uniform, 0.0, 0.0, 15.0, 20.0};
      sc.direction_error.kind = ErrorKind::uniform;
      sc.direction_error.max_deg = 5.0;
      sc.geometry.radius_scale = spacing_wavelengths / 0.5;
      sc.coupling.mode = CouplingMode::synthetic;
      break;
    }
    default:
      throw ConfigError("unknown example " + std::to_string(example) + " (expected 1, 2 or 3)");
  }
  return sc;
}

namespace {

std::string kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::none: return "none";
    case ErrorKind::fixed: return "fixed";
    case ErrorKind::uniform: return "uniform";
  }
  return "none";
}

ErrorKind kind_from(const std::string& s) {
  if (s == "none") return ErrorKind::none;
  if (s == "fixed") return ErrorKind::fixed;
  if (s == "uniform") return ErrorKind::uniform;
  throw ConfigError("unknown error model '" + s + "'");
}

std::string mode_name(CouplingMode m) {
  switch (m) {
    case CouplingMode::identity: return "identity";
    case CouplingMode::synthetic: return "synthetic";
    case CouplingMode::library: return "library";
  }
  return "identity";
}

CouplingMode mode_from(const std::string& s) {
  if (s == "identity") return CouplingMode::identity;
  if (s == "synthetic") return CouplingMode::synthetic;
  if (s == "library") return CouplingMode::library;
  throw ConfigError("unknown coupling mode '" + s + "'");
}

void check_keys(const json& obj, const std::string& where, std::set<std::string> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

template <typename T>
void read_optional(const json& obj, const char* key, std::optional<T>& out) {
  if (!obj.contains(key)) return;
  if (obj.at(key).is_null()) {
    out.reset();
  } else {
    out = obj.at(key).get<T>();
  }
}

Scenario parse(const json& j) {
  check_keys(j, "scenario",
             {"schema", "name", "geometry", "soi_deg", "interferers_deg", "inr_db", "acp_error",
              "direction_error", "snapshots", "snr_db", "trials", "seed", "coupling", "solver",
              "baselines", "grid", "methods", "failure_threshold", "sweep",
              "beampattern_step_deg"});
  if (!j.contains("schema")) throw ConfigError("missing 'schema' field");
  Scenario sc;
  sc.snr_db = default_snr_sweep();
  read(j, "schema", sc.schema);
  if (sc.schema != kScenarioSchema) {
    throw ConfigError("unsupported scenario schema " + std::to_string(sc.schema));
  }
  read(j, "name", sc.name);
  if (j.contains("geometry")) {
    const auto& g = j.at("geometry");
    check_keys(g, "geometry",
               {"ring1_elements", "ring2_elements", "ring1_radius_mm", "ring2_radius_mm",
                "carrier_hz", "radius_scale"});
    read(g, "ring1_elements", sc.geometry.ring1_elements);
    read(g, "ring2_elements", sc.geometry.ring2_elements);
    read(g, "ring1_radius_mm", sc.geometry.ring1_radius_mm);
    read(g, "ring2_radius_mm", sc.geometry.ring2_radius_mm);
    read(g, "carrier_hz", sc.geometry.carrier_hz);
    read(g, "radius_scale", sc.geometry.radius_scale);
  }
  read(j, "soi_deg", sc.soi_deg);
  read(j, "interferers_deg", sc.interferers_deg);
  read(j, "inr_db", sc.inr_db);
  if (j.contains("acp_error")) {
    const auto& a = j.at("acp_error");
    check_keys(a, "acp_error", {"model", "dr1_mm", "dr2_mm", "l1_mm", "l2_mm"});
    if (a.contains("model")) sc.acp_error.kind = kind_from(a.at("model").get<std::string>());
    read(a, "dr1_mm", sc.acp_error.dr1_mm);
    read(a, "dr2_mm", sc.acp_error.dr2_mm);
    read(a, "l1_mm", sc.acp_error.l1_mm);
    read(a, "l2_mm", sc.acp_error.l2_mm);
  }
  if (j.contains("direction_error")) {
    const auto& d = j.at("direction_error");
    check_keys(d, "direction_error", {"model", "offsets_deg", "max_deg"});
    if (d.contains("model")) {
      sc.direction_error.kind = kind_from(d.at("model").get<std::string>());
    }
    read(d, "offsets_deg", sc.direction_error.offsets_deg);
    read(d, "max_deg", sc.direction_error.max_deg);
  }
  read(j, "snapshots", sc.snapshots);
  read(j, "snr_db", sc.snr_db);
  read(j, "trials", sc.trials);
  read(j, "seed", sc.seed);
  if (j.contains("coupling")) {
    const auto& c = j.at("coupling");
    check_keys(c, "coupling",
               {"mode", "scale", "decay_mm", "library", "spacing_threshold_mm", "compensate"});
    if (c.contains("mode")) sc.coupling.mode = mode_from(c.at("mode").get<std::string>());
    read(c, "scale", sc.coupling.scale);
    read(c, "decay_mm", sc.coupling.decay_mm);
    read(c, "library", sc.coupling.library);
    read(c, "spacing_threshold_mm", sc.coupling.spacing_threshold_mm);
    read(c, "compensate", sc.coupling.compensate);
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    check_keys(s, "solver",
               {"barrier_schedule", "tau_x", "tau_y", "tau_e", "max_outer", "max_newton",
                "gradient_tol", "armijo", "shrink", "max_backtracks", "hessian_step",
                "mismatch_bound"});
    read(s, "barrier_schedule", sc.solver.barrier_schedule);
    read(s, "tau_x", sc.solver.tau_x);
    read(s, "tau_y", sc.solver.tau_y);
    read(s, "tau_e", sc.solver.tau_e);
    read(s, "max_outer", sc.solver.max_outer);
    read(s, "max_newton", sc.solver.max_newton);
    read(s, "gradient_tol", sc.solver.gradient_tol);
    read(s, "armijo", sc.solver.armijo);
    read(s, "shrink", sc.solver.shrink);
    read(s, "max_backtracks", sc.solver.max_backtracks);
    read(s, "hessian_step", sc.solver.hessian_step);
    read(s, "mismatch_bound", sc.solver.mismatch_bound);
  }
  if (j.contains("baselines")) {
    const auto& b = j.at("baselines");
    check_keys(b, "baselines",
               {"dl_loading", "eigenspace_dim", "dcrcb_uncertainty", "reconstruct_mismatch_bound"});
    read_optional(b, "dl_loading", sc.baselines.dl_loading);
    read(b, "eigenspace_dim", sc.baselines.eigenspace_dim);
    read_optional(b, "dcrcb_uncertainty", sc.baselines.dcrcb_uncertainty);
    read(b, "reconstruct_mismatch_bound", sc.baselines.reconstruct_mismatch_bound);
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    check_keys(g, "grid", {"half_width_deg", "step_deg", "r1_samples", "r2_samples"});
    read(g, "half_width_deg", sc.grid.half_width_deg);
    read(g, "step_deg", sc.grid.step_deg);
    read(g, "r1_samples", sc.grid.r1_samples);
    read(g, "r2_samples", sc.grid.r2_samples);
  }
  if (j.contains("methods")) {
    sc.methods.clear();
    for (const auto& m : j.at("methods")) sc.methods.push_back(method_from_tag(m.get<std::string>()));
  }
  read(j, "failure_threshold", sc.failure_threshold);
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    check_keys(s, "sweep", {"snr_db", "snapshots"});
    read(s, "snr_db", sc.sweep.snr_db);
    read(s, "snapshots", sc.sweep.snapshots);
  }
  read(j, "beampattern_step_deg", sc.beampattern_step_deg);
  return sc;
}

}  // namespace

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed scenario JSON: ") + e.what());
  }
  try {
    return parse(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid scenario field: ") + e.what());
  }
}

std::string scenario_to_json(const Scenario& sc) {
  json j;
  j["schema"] = sc.schema;
  j["name"] = sc.name;
  j["geometry"] = {{"ring1_elements", sc.geometry.ring1_elements},
                   {"ring2_elements", sc.geometry.ring2_elements},
                   {"ring1_radius_mm", sc.geometry.ring1_radius_mm},
                   {"ring2_radius_mm", sc.geometry.ring2_radius_mm},
                   {"carrier_hz", sc.geometry.carrier_hz},
                   {"radius_scale", sc.geometry.radius_scale}};
  j["soi_deg"] = sc.soi_deg;
  j["interferers_deg"] = sc.interferers_deg;
  j["inr_db"] = sc.inr_db;
  j["acp_error"] = {{"model", kind_name(sc.acp_error.kind)},
                    {"dr1_mm", sc.acp_error.dr1_mm},
                    {"dr2_mm", sc.acp_error.dr2_mm},
                    {"l1_mm", sc.acp_error.l1_mm},
                    {"l2_mm", sc.acp_error.l2_mm}};
  j["direction_error"] = {{"model", kind_name(sc.direction_error.kind)},
                          {"offsets_deg", sc.direction_error.offsets_deg},
                          {"max_deg", sc.direction_error.max_deg}};
  j["snapshots"] = sc.snapshots;
  j["snr_db"] = sc.snr_db;
  j["trials"] = sc.trials;
  j["seed"] = sc.seed;
  j["coupling"] = {{"mode", mode_name(sc.coupling.mode)},
                   {"scale", sc.coupling.scale},
                   {"decay_mm", sc.coupling.decay_mm},
                   {"library", sc.coupling.library},
                   {"spacing_threshold_mm", sc.coupling.spacing_threshold_mm},
                   {"compensate", sc.coupling.compensate}};
  j["solver"] = {{"barrier_schedule", sc.solver.barrier_schedule},
                 {"tau_x", sc.solver.tau_x},
                 {"tau_y", sc.solver.tau_y},
                 {"tau_e", sc.solver.tau_e},
                 {"max_outer", sc.solver.max_outer},
                 {"max_newton", sc.solver.max_newton},
                 {"gradient_tol", sc.solver.gradient_tol},
                 {"armijo", sc.solver.armijo},
                 {"shrink", sc.solver.shrink},
                 {"max_backtracks", sc.solver.max_backtracks},
                 {"hessian_step", sc.solver.hessian_step},
                 {"mismatch_bound", sc.solver.mismatch_bound}};
  json b;
  b["dl_loading"] = sc.baselines.dl_loading ? json(*sc.baselines.dl_loading) : json(nullptr);
  b["eigenspace_dim"] = sc.baselines.eigenspace_dim;
  b["dcrcb_uncertainty"] =
      sc.baselines.dcrcb_uncertainty ? json(*sc.baselines.dcrcb_uncertainty) : json(nullptr);
  b["reconstruct_mismatch_bound"] = sc.baselines.reconstruct_mismatch_bound;
  j["baselines"] = b;
  j["grid"] = {{"half_width_deg", sc.grid.half_width_deg},
               {"step_deg", sc.grid.step_deg},
               {"r1_samples", sc.grid.r1_samples},
               {"r2_samples", sc.grid.r2_samples}};
  json methods = json::array();
  for (Method m : sc.methods) methods.push_back(std::string(method_tag(m)));
  j["methods"] = methods;
  j["failure_threshold"] = sc.failure_threshold;
  j["sweep"] = {{"snr_db", sc.sweep.snr_db}, {"snapshots", sc.sweep.snapshots}};
  j["beampattern_step_deg"] = sc.beampattern_step_deg;
  return j.dump(2) + "\n";
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  Scenario sc = scenario_from_json(text.str());
  sc.base_dir = path.parent_path();
  sc.validate();
  return sc;
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write scenario file " + path.string());
  out << scenario_to_json(scenario);
  if (!out) throw ConfigError("failed writing scenario file " + path.string());
}

}  // namespace fcarab
