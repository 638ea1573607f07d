// fcarab command-line driver: Monte-Carlo runs, beampatterns, snapshot
// sweeps and scenario files.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fcarab/metrics.hpp"
#include "fcarab/monte_carlo.hpp"
#include "fcarab/scenario.hpp"

namespace fs = std::filesystem;
using namespace fcarab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct GlobalOptions {
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  int threads = 1;
};

Scenario load_with_overrides(const std::string& file, const GlobalOptions& g) {
  Scenario sc = load_scenario(file);
  if (g.seed) sc.seed = *g.seed;
  if (g.trials) sc.trials = *g.trials;
  sc.validate();
  return sc;
}

fs::path output_path(const GlobalOptions& g, const std::string& name) {
  fs::path dir(g.out);
  fs::create_directories(dir);
  return dir / name;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

int report_failures(const MonteCarloResult& res, double threshold) {
  for (const auto& msg : res.failure_messages) std::cerr << "failure: " << msg << "\n";
  const double worst = res.worst_failure_rate();
  if (worst > threshold) {
    std::cerr << "error: failure rate " << worst << " exceeds threshold " << threshold << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_run(const std::string& file, const GlobalOptions& g) {
  const Scenario sc = load_with_overrides(file, g);
  const auto res = run_monte_carlo(sc, {g.threads});
  std::ostringstream csv;
  write_sinr_csv(csv, res.records);
  const fs::path path = output_path(g, sc.name + "_sinr.csv");
  write_file(path, csv.str());
  std::cout << "wrote " << path.string() << " (" << res.records.size() << " records)\n";
  return report_failures(res, sc.failure_threshold);
}

int cmd_sweep(const std::string& file, const GlobalOptions& g) {
  const Scenario sc = load_with_overrides(file, g);
  const auto res = sweep_snapshots(sc, {g.threads});
  std::ostringstream csv;
  write_sinr_csv(csv, res.records, true);
  const fs::path path = output_path(g, sc.name + "_snapshots.csv");
  write_file(path, csv.str());
  std::cout << "wrote " << path.string() << "\n";
  return report_failures(res, sc.failure_threshold);
}

int cmd_beampattern(const std::string& file, const std::string& tag, double snr_db, int trial,
                    const GlobalOptions& g) {
  const Scenario sc = load_with_overrides(file, g);
  const Method method = method_from_tag(tag);
  const Experiment exp(sc);
  if (trial < 0 || trial >= sc.trials) throw ConfigError("--trial outside [0, trials)");
  const Realization real = exp.realize(trial);
  const TrialResult tr = exp.evaluate(real, snr_db, sc.snapshots);
  const MethodOutcome* found = nullptr;
  for (const auto& o : tr.outcomes) {
    if (o.method == method) found = &o;
  }
  if (!found) throw ConfigError("method '" + tag + "' is not enabled in the scenario");
  if (!found->ok) {
    std::cerr << "error: " << tag << " failed: " << found->error << "\n";
    return kExitRuntime;
  }
  const auto pattern =
      beampattern(found->weights.w, exp.geometry(), real.true_coupling.entries, real.r1_mm,
                  real.r2_mm, angle_grid(-90.0, 90.0, sc.beampattern_step_deg));
  std::ostringstream csv;
  csv << "theta_deg,power_db\n" << std::fixed;
  for (const auto& p : pattern) {
    csv << std::setprecision(4) << p.theta_deg << ',' << std::setprecision(6) << p.power_db
        << '\n';
  }
  const fs::path path = output_path(g, sc.name + "_beampattern_" + tag + ".csv");
  write_file(path, csv.str());
  std::cout << "wrote " << path.string() << " (output SINR " << std::setprecision(3)
            << found->sinr_db << " dB)\n";
  return kExitOk;
}

int cmd_validate(const std::string& file) {
  const Scenario sc = load_scenario(file);
  Experiment exp(sc);
  std::cout << "ok: " << sc.name << " (S = " << exp.geometry().size() << ", "
            << sc.snr_db.size() << " SNR points, " << sc.trials << " trials)\n";
  return kExitOk;
}

int cmd_gen(int example, std::optional<double> spacing, const GlobalOptions& g) {
  std::vector<Scenario> out;
  if (example == 3 && !spacing) {
    for (double s : {0.54, 0.5, 0.45}) out.push_back(example_scenario(3, s));
  } else {
    out.push_back(example_scenario(example, spacing.value_or(0.5)));
  }
  for (auto& sc : out) {
    if (g.seed) sc.seed = *g.seed;
    if (g.trials) sc.trials = *g.trials;
    sc.validate();
    const fs::path path = output_path(g, sc.name + ".json");
    save_scenario(sc, path);
    std::cout << "wrote " << path.string() << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust beamforming experiments for a two-ring flexible conformal array"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--seed", g.seed, "Override the scenario seed");
  app.add_option("--trials", g.trials, "Override the number of trials")
      ->check(CLI::PositiveNumber);
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  std::string file;
  auto* run = app.add_subcommand("run", "Full Monte-Carlo SINR sweep, written as CSV");
  run->add_option("scenario", file, "Scenario file")->required();

  auto* bp = app.add_subcommand("beampattern", "Beampattern of one method for one trial");
  std::string tag;
  double snr_db = 10.0;
  int trial = 0;
  bp->add_option("scenario", file, "Scenario file")->required();
  bp->add_option("--method", tag, "Method tag")->required();
  bp->add_option("--snr", snr_db, "Input SNR in dB")->capture_default_str();
  bp->add_option("--trial", trial, "Trial index")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep-snapshots", "SINR versus snapshot count");
  sweep->add_option("scenario", file, "Scenario file")->required();

  auto* val = app.add_subcommand("validate", "Check a scenario file");
  val->add_option("scenario", file, "Scenario file")->required();

  auto* gen = app.add_subcommand("gen-scenario", "Write a built-in scenario file");
  int example = 1;
  std::optional<double> spacing;
  gen->add_option("--example", example, "Example number")
      ->required()
      ->check(CLI::IsMember({1, 2, 3}));
  gen->add_option("--spacing", spacing, "Example 3 element spacing in wavelengths");

  for (auto* sub : {run, bp, sweep, val, gen}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*run) return cmd_run(file, g);
    if (*bp) return cmd_beampattern(file, tag, snr_db, trial, g);
    if (*sweep) return cmd_sweep(file, g);
    if (*val) return cmd_validate(file);
    if (*gen) return cmd_gen(example, spacing, g);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
