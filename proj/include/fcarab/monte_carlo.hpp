#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fcarab/beamformers.hpp"
#include "fcarab/coupling.hpp"
#include "fcarab/scenario.hpp"
#include "fcarab/signals.hpp"

namespace fcarab {

struct SinrRecord {
  Method method;
  double snr_db;
  double mean_sinr_db;  // 10 log10 of the mean linear SINR
  double std_sinr_db;   // spread of the per-trial dB values
  int trials;
  int failures;
  int snapshots;
};

/// Worst cases of the structural checks seen during a run.
struct InvariantReport {
  double max_hermitian_defect = 0.0;
  /// min over trials of lambda_min(reconstructed INCM) - noise estimate.
  double min_incm_margin;
  double max_normalization_error = 0.0;  // |w^H s - 1|
  long weights_checked = 0;
  long nonfinite_weights = 0;

  InvariantReport();
  void merge(const InvariantReport& other);
};

/// True state of one trial. Shared by every SNR point of that trial.
struct Realization {
  int trial = 0;
  std::uint64_t key = 0;
  double r1_mm = 0.0;
  double r2_mm = 0.0;
  std::vector<double> true_deg;  // SOI first
  CouplingMatrix true_coupling;
  CouplingMatrix model_coupling;  // what the proposed method is told
};

struct MethodOutcome {
  Method method;
  bool ok = false;
  double sinr_db = 0.0;
  std::string error;
  BeamformerWeights weights;
};

struct TrialResult {
  std::vector<MethodOutcome> outcomes;  // one per scenario method
  InvariantReport invariants;
};

/// Scenario with its derived, read-only state (geometry, coupling library).
class Experiment {
 public:
  /// Validates the scenario; ConfigError on failure.
  explicit Experiment(Scenario scenario);

  const Scenario& scenario() const { return scenario_; }
  const NominalGeometry& geometry() const { return geometry_; }

  Realization realize(int trial) const;
  SignalModel signal_model(const Realization& real, double snr_db, int snapshots) const;

  /// Weights of one method from the sample covariance, using presumed
  /// knowledge only. Throws on numerical failure.
  BeamformerWeights weights(Method method, const Realization& real, const CovMatrix& r_sample,
                            double snr_db, InvariantReport* report = nullptr) const;

  /// Draws the snapshots of (trial, snr) and scores every scenario method.
  TrialResult evaluate(const Realization& real, double snr_db, int snapshots) const;

 private:
  CouplingMatrix coupling_at(double r1, double r2, bool truth) const;

  Scenario scenario_;
  NominalGeometry geometry_;
  MCMLibrary library_;
  bool has_library_ = false;
};

struct RunOptions {
  int threads = 1;  // <= 0 selects the hardware concurrency
};

struct MonteCarloResult {
  std::vector<SinrRecord> records;
  InvariantReport invariants;
  std::vector<std::string> failure_messages;  // first few, in trial order

  /// Largest failures / trials over all records.
  double worst_failure_rate() const;
};

/// Every (SNR, trial) pair of the scenario. Output is independent of the
/// thread count.
MonteCarloResult run_monte_carlo(const Scenario& scenario, const RunOptions& options = {});

/// SINR versus snapshot count at scenario.sweep.snr_db.
MonteCarloResult sweep_snapshots(const Scenario& scenario, const RunOptions& options = {});

/// Header: method,snr_db,mean_sinr_db,std_sinr_db,trials,failures, with an
/// additional leading snapshots column when `with_snapshots` is set.
void write_sinr_csv(std::ostream& out, const std::vector<SinrRecord>& records,
                    bool with_snapshots = false);

}  // namespace fcarab
