#include "fcarab/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "fcarab/linalg.hpp"
#include "fcarab/metrics.hpp"
#include "fcarab/rng.hpp"

namespace fcarab {

namespace {

constexpr std::uint64_t kTrialStream = 0x7472;
constexpr std::size_t kMaxMessages = 10;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace

InvariantReport::InvariantReport() : min_incm_margin(std::numeric_limits<double>::infinity()) {}

void InvariantReport::merge(const InvariantReport& o) {
  max_hermitian_defect = std::max(max_hermitian_defect, o.max_hermitian_defect);
  min_incm_margin = std::min(min_incm_margin, o.min_incm_margin);
  max_normalization_error = std::max(max_normalization_error, o.max_normalization_error);
  weights_checked += o.weights_checked;
  nonfinite_weights += o.nonfinite_weights;
}

Experiment::Experiment(Scenario scenario) : scenario_(std::move(scenario)) {
  scenario_.validate();
  geometry_ = scenario_.geometry.build();
  const auto& c = scenario_.coupling;
  if (c.mode == CouplingMode::library) {
    std::filesystem::path manifest(c.library);
    if (manifest.is_relative()) manifest = scenario_.base_dir / manifest;
    try {
      library_ = load_mcm_library(manifest, c.spacing_threshold_mm);
    } catch (const ParseError& e) {
      throw ConfigError(std::string("coupling library: ") + e.what());
    }
    if (library_.empty()) throw ConfigError("coupling library is empty");
    if (library_.records().front().mcm.size() != geometry_.size()) {
      throw ConfigError("coupling library dimension does not match the array");
    }
    has_library_ = true;
  } else if (c.mode == CouplingMode::synthetic) {
    // The offline measurement available to the beamformer: one matrix at the
    // presumed shape.
    const double r1 = scenario_.geometry.presumed_r1();
    const double r2 = scenario_.geometry.presumed_r2();
    library_ = MCMLibrary(c.spacing_threshold_mm);
    library_.add(r1, r2, coupling_at(r1, r2, true));
    has_library_ = true;
  }
}

CouplingMatrix Experiment::coupling_at(double r1, double r2, bool truth) const {
  const auto& c = scenario_.coupling;
  const Eigen::Index s = geometry_.size();
  switch (c.mode) {
    case CouplingMode::identity:
      return CouplingMatrix::identity(s, r1, r2);
    case CouplingMode::synthetic: {
      if (!truth) return select_mcm(library_, r1, r2, geometry_);
      const double threshold =
          c.spacing_threshold_mm > 0.0 ? c.spacing_threshold_mm : 2.0 * geometry_.wavelength_mm;
      if (min_geodesic_spacing(geometry_, r1, r2) >= threshold) {
        return CouplingMatrix::identity(s, r1, r2);
      }
      const double decay = c.decay_mm > 0.0 ? c.decay_mm : geometry_.wavelength_mm;
      return mcm_from_impedance(synthetic_impedance(geometry_, r1, r2, c.scale, decay),
                                CouplingSource::synthetic, r1, r2);
    }
    case CouplingMode::library:
      return select_mcm(library_, r1, r2, geometry_);
  }
  return CouplingMatrix::identity(s, r1, r2);
}

Realization Experiment::realize(int trial) const {
  const auto& sc = scenario_;
  Realization real;
  real.trial = trial;
  real.key = CounterRng::derive(CounterRng::derive(sc.seed, kTrialStream),
                                static_cast<std::uint64_t>(trial));
  CounterRng rng(CounterRng::derive(real.key, 1));

  double dr1 = 0.0, dr2 = 0.0;
  switch (sc.acp_error.kind) {
    case ErrorKind::none:
      break;
    case ErrorKind::fixed:
      dr1 = sc.acp_error.dr1_mm;
      dr2 = sc.acp_error.dr2_mm;
      break;
    case ErrorKind::uniform:
      dr1 = rng.uniform(-sc.acp_error.l1_mm, sc.acp_error.l1_mm);
      dr2 = rng.uniform(-sc.acp_error.l2_mm, sc.acp_error.l2_mm);
      break;
  }
  real.r1_mm = sc.geometry.presumed_r1() + dr1;
  real.r2_mm = sc.geometry.presumed_r2() + dr2;

  real.true_deg.push_back(sc.soi_deg);
  real.true_deg.insert(real.true_deg.end(), sc.interferers_deg.begin(), sc.interferers_deg.end());
  for (std::size_t j = 0; j < real.true_deg.size(); ++j) {
    if (sc.direction_error.kind == ErrorKind::fixed) {
      real.true_deg[j] += sc.direction_error.offsets_deg[j];
    } else if (sc.direction_error.kind == ErrorKind::uniform) {
      real.true_deg[j] += rng.uniform(-sc.direction_error.max_deg, sc.direction_error.max_deg);
    }
  }

  real.true_coupling = coupling_at(real.r1_mm, real.r2_mm, true);
  if (sc.coupling.compensate) {
    real.model_coupling =
        coupling_at(sc.geometry.presumed_r1(), sc.geometry.presumed_r2(), false);
  } else {
    real.model_coupling = CouplingMatrix::identity(geometry_.size());
  }
  return real;
}

SignalModel Experiment::signal_model(const Realization& real, double snr_db, int snapshots) const {
  SignalModel model;
  model.geometry = geometry_;
  model.r1_mm = real.r1_mm;
  model.r2_mm = real.r2_mm;
  model.coupling = real.true_coupling.entries;
  model.noise_power = 1.0;
  model.snapshots = snapshots;
  for (std::size_t j = 0; j < real.true_deg.size(); ++j) {
    const double db = j == 0 ? snr_db : scenario_.inr_db;
    const double presumed = j == 0 ? scenario_.soi_deg : scenario_.interferers_deg[j - 1];
    model.sources.sources.push_back({real.true_deg[j], presumed, db_to_linear(db)});
  }
  return model;
}

BeamformerWeights Experiment::weights(Method method, const Realization& real,
                                      const CovMatrix& r_sample, double /*snr_db*/,
                                      InvariantReport* report) const {
  const auto& sc = scenario_;
  const ACPState acp = sc.presumed_acp();
  const ComplexVector presumed_sv =
      steering_vector(geometry_, sc.soi_deg, acp.r1_bar, acp.r2_bar).entries;
  switch (method) {
    case Method::optimal:
      throw DomainError("optimal weights need the true state");
    case Method::proposed: {
      const double noise = noise_power_estimate(r_sample);
      const CovMatrix r_incm = reconstruct_multidomain(r_sample, real.model_coupling,
                                                       sc.sampling_grid(), geometry_, acp, noise);
      if (report) {
        const auto eig = hermitian_eigen(r_incm.value);
        report->min_incm_margin = std::min(report->min_incm_margin, eig.values[0] - noise);
        report->max_hermitian_defect =
            std::max(report->max_hermitian_defect, hermitian_defect(r_incm.value));
      }
      const SVEstimate est =
          estimate_sv(r_sample, real.model_coupling, sc.soi_deg, acp, sc.solver, geometry_);
      return proposed_weights(r_incm, real.model_coupling, est);
    }
    case Method::smi:
      return smi_weights(r_sample, presumed_sv);
    case Method::dl_smi:
      return dl_smi_weights(r_sample, presumed_sv, sc.baselines.dl_loading);
    case Method::eigenspace: {
      const int dim =
          sc.baselines.eigenspace_dim > 0 ? sc.baselines.eigenspace_dim : sc.source_count();
      return eigenspace_weights(r_sample, presumed_sv, dim);
    }
    case Method::dcrcb:
      return dcrcb_weights(r_sample, presumed_sv, sc.baselines.dcrcb_uncertainty);
    case Method::reconstruct:
      return reconstruct_weights(r_sample, CouplingMatrix::identity(geometry_.size()),
                                 sc.complement(), geometry_, sc.soi_deg, acp.r1_bar, acp.r2_bar,
                                 sc.baselines.reconstruct_mismatch_bound);
  }
  throw DomainError("unknown method");
}

TrialResult Experiment::evaluate(const Realization& real, double snr_db, int snapshots) const {
  const SignalModel model = signal_model(real, snr_db, snapshots);
  const SnapshotBlock block = generate_snapshots(model, CounterRng::derive(real.key, 2));
  const CovMatrix r_sample = sample_covariance(block);
  const CovMatrix incm = true_incm(model);
  const ComplexVector a_true = model.effective_sv(0);
  const double power = model.sources.soi().power;

  TrialResult result;
  auto& inv = result.invariants;
  inv.max_hermitian_defect =
      std::max(hermitian_defect(r_sample.value), hermitian_defect(incm.value));

  for (Method m : scenario_.methods) {
    MethodOutcome out;
    out.method = m;
    try {
      out.weights = m == Method::optimal
                        ? capon_weights(incm, a_true, model.noise_power, Method::optimal)
                        : weights(m, real, r_sample, snr_db, &inv);
      ++inv.weights_checked;
      if (!out.weights.w.allFinite()) {
        ++inv.nonfinite_weights;
        throw NumericalError("non-finite weights");
      }
      const double norm_err = std::abs(out.weights.w.dot(out.weights.steering) - 1.0);
      inv.max_normalization_error = std::max(inv.max_normalization_error, norm_err);
      out.sinr_db = output_sinr(out.weights, incm, a_true, power);
      if (!std::isfinite(out.sinr_db)) throw NumericalError("output SINR is not finite");
      out.ok = true;
    } catch (const std::exception& e) {
      out.ok = false;
      out.error = e.what();
    }
    result.outcomes.push_back(std::move(out));
  }
  return result;
}

double MonteCarloResult::worst_failure_rate() const {
  double worst = 0.0;
  for (const auto& r : records) {
    if (r.trials > 0) worst = std::max(worst, static_cast<double>(r.failures) / r.trials);
  }
  return worst;
}

namespace {

struct GridPoint {
  double snr_db;
  int snapshots;
};

// Runs every trial at every grid point. Trials are claimed dynamically by
// the workers but results land in fixed slots and are reduced in trial order.
MonteCarloResult run_points(const Scenario& scenario, const std::vector<GridPoint>& points,
                            const RunOptions& options) {
  const Experiment exp(scenario);
  const int trials = scenario.trials;
  std::vector<std::vector<TrialResult>> slots(static_cast<std::size_t>(trials));

  int threads = options.threads > 0 ? options.threads
                                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, trials);

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (;;) {
      const int t = next.fetch_add(1);
      if (t >= trials) return;
      try {
        const Realization real = exp.realize(t);
        auto& row = slots[static_cast<std::size_t>(t)];
        row.reserve(points.size());
        for (const auto& p : points) {
          TrialResult r = exp.evaluate(real, p.snr_db, p.snapshots);
          for (auto& o : r.outcomes) o.weights = {};
          row.push_back(std::move(r));
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(trials);
        return;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  MonteCarloResult result;
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (std::size_t m = 0; m < scenario.methods.size(); ++m) {
      double linear_sum = 0.0;
      std::vector<double> dbs;
      int failures = 0;
      for (int t = 0; t < trials; ++t) {
        const auto& o = slots[static_cast<std::size_t>(t)][p].outcomes[m];
        if (o.ok) {
          linear_sum += db_to_linear(o.sinr_db);
          dbs.push_back(o.sinr_db);
        } else {
          ++failures;
          if (result.failure_messages.size() < kMaxMessages) {
            std::ostringstream msg;
            msg << "trial " << t << ", snr " << points[p].snr_db << " dB, "
                << method_tag(o.method) << ": " << o.error;
            result.failure_messages.push_back(msg.str());
          }
        }
      }
      SinrRecord rec{scenario.methods[m], points[p].snr_db,
                     std::numeric_limits<double>::quiet_NaN(), 0.0, trials, failures,
                     points[p].snapshots};
      if (!dbs.empty()) {
        const double n = static_cast<double>(dbs.size());
        rec.mean_sinr_db = 10.0 * std::log10(linear_sum / n);
        double mean_db = 0.0;
        for (double v : dbs) mean_db += v;
        mean_db /= n;
        double var = 0.0;
        for (double v : dbs) var += (v - mean_db) * (v - mean_db);
        rec.std_sinr_db = dbs.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
      }
      result.records.push_back(rec);
    }
  }
  for (const auto& row : slots) {
    for (const auto& r : row) result.invariants.merge(r.invariants);
  }
  return result;
}

}  // namespace

MonteCarloResult run_monte_carlo(const Scenario& scenario, const RunOptions& options) {
  std::vector<GridPoint> points;
  for (double snr : scenario.snr_db) points.push_back({snr, scenario.snapshots});
  return run_points(scenario, points, options);
}

MonteCarloResult sweep_snapshots(const Scenario& scenario, const RunOptions& options) {
  if (scenario.sweep.snapshots.empty()) throw ConfigError("sweep.snapshots is empty");
  std::vector<GridPoint> points;
  for (int k : scenario.sweep.snapshots) points.push_back({scenario.sweep.snr_db, k});
  return run_points(scenario, points, options);
}

void write_sinr_csv(std::ostream& out, const std::vector<SinrRecord>& records,
                    bool with_snapshots) {
  if (with_snapshots) out << "snapshots,";
  out << "method,snr_db,mean_sinr_db,std_sinr_db,trials,failures\n";
  std::ostringstream line;
  line << std::fixed;
  for (const auto& r : records) {
    line.str("");
    if (with_snapshots) line << r.snapshots << ',';
    line << method_tag(r.method) << ',' << std::setprecision(2) << r.snr_db << ','
         << std::setprecision(6) << r.mean_sinr_db << ',' << r.std_sinr_db << ',' << r.trials
         << ',' << r.failures << '\n';
    out << line.str();
  }
}

}  // namespace fcarab
