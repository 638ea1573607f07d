#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fcarab/acp.hpp"
#include "fcarab/beamformers.hpp"
#include "fcarab/geometry.hpp"
#include "fcarab/incm.hpp"
#include "fcarab/svest.hpp"

namespace fcarab {

inline constexpr int kScenarioSchema = 1;

struct GeometryConfig {
  int ring1_elements = 9;
  int ring2_elements = 13;
  double ring1_radius_mm = 500.0;  // nominal, fixes the central angles
  double ring2_radius_mm = 1000.0;
  double carrier_hz = 5e9;
  /// Presumed radii are radius_scale times the nominal ones, which scales
  /// the inter-element spacing by the same factor.
  double radius_scale = 1.0;

  NominalGeometry build() const;
  double presumed_r1() const { return radius_scale * ring1_radius_mm; }
  double presumed_r2() const { return radius_scale * ring2_radius_mm; }
};

enum class ErrorKind { none, fixed, uniform };

/// True radii = presumed + (dr1, dr2). Uniform draws cover [-l, l].
/// l1, l2 are the bounds handed to the estimator in either case.
struct AcpErrorModel {
  ErrorKind kind = ErrorKind::fixed;
  double dr1_mm = 0.0;
  double dr2_mm = 0.0;
  double l1_mm = 15.0;
  double l2_mm = 20.0;
};

/// True direction = presumed + offset, per source (SOI first). Fixed
/// offsets come from `offsets_deg`; uniform ones from [-max_deg, max_deg].
struct DirectionErrorModel {
  ErrorKind kind = ErrorKind::none;
  std::vector<double> offsets_deg;
  double max_deg = 0.0;
};

enum class CouplingMode { identity, synthetic, library };

struct CouplingConfig {
  CouplingMode mode = CouplingMode::identity;
  double scale = 0.25;
  double decay_mm = 0.0;  // <= 0 selects one wavelength
  std::string library;    // manifest path for library mode
  double spacing_threshold_mm = 0.0;  // <= 0 selects 2 lambda
  /// When false the beamformers are given C = I whatever the truth is.
  bool compensate = true;
};

struct BaselineConfig {
  std::optional<double> dl_loading;  // automatic when empty
  int eigenspace_dim = 0;            // <= 0 selects the source count
  std::optional<double> dcrcb_uncertainty;
  double reconstruct_mismatch_bound = 0.0;
};

struct GridConfig {
  double half_width_deg = 5.0;
  double step_deg = 0.5;
  int r1_samples = 5;
  int r2_samples = 5;
};

struct SweepConfig {
  double snr_db = 20.0;
  std::vector<int> snapshots = {11, 22, 46, 88, 176};
};

struct Scenario {
  int schema = kScenarioSchema;
  std::string name = "scenario";
  GeometryConfig geometry;
  double soi_deg = 10.0;
  std::vector<double> interferers_deg = {-20.0, -10.0, 20.0};
  double inr_db = 30.0;
  AcpErrorModel acp_error;
  DirectionErrorModel direction_error;
  int snapshots = 46;
  std::vector<double> snr_db;
  int trials = 100;
  std::uint64_t seed = 1;
  CouplingConfig coupling;
  SolverConfig solver = SolverConfig::defaults();
  BaselineConfig baselines;
  GridConfig grid;
  std::vector<Method> methods = all_methods();
  double failure_threshold = 0.05;
  SweepConfig sweep;
  double beampattern_step_deg = 0.1;
  /// Directory relative paths are resolved against; set by load_scenario().
  std::filesystem::path base_dir;

  /// ConfigError describing the first violated rule.
  void validate() const;

  ACPState presumed_acp() const;
  SamplingGrid sampling_grid() const;
  std::vector<AngularSector> complement() const;
  int source_count() const { return 1 + static_cast<int>(interferers_deg.size()); }
};

/// SNR points -20, -15, ..., 30 dB.
std::vector<double> default_snr_sweep();

/// Built-in scenarios. Example 3 takes the spacing in wavelengths
/// (0.54, 0.5 or 0.45) and realizes it through radius_scale.
Scenario example_scenario(int example, double spacing_wavelengths = 0.5);

Scenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const Scenario& scenario);
/// Reads, parses and validates; base_dir becomes the file's directory.
Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

}  // namespace fcarab
