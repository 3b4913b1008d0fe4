#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "analysis/estimators.hpp"
#include "analysis/fit.hpp"
#include "analysis/histogram.hpp"
#include "driver/config.hpp"

namespace lambdasim {

// Fitted optical-pumping time constant and the saturation parameters
// derived from it and from the configured intensity.
struct TauChain {
  FitResult fit;
  SaturationFromTau sat;
  std::optional<double> s_intensity;
  double s_intensity_sigma = 0.0;
};

struct Report {
  std::optional<Estimate> p;
  std::optional<Estimate> eta;
  TauChain chain;
  double n_sp = 0.0;  // corrected signal counts
  double n_dp = 0.0;
  std::uint64_t sp_shots = 0;
  std::uint64_t dp_shots = 0;
  double dp_background_rate = 0.0;  // per-shot counts/us from pre-probe bins
  std::string sp_file, dp_file, stray_file;
  std::string config_hash;
  std::uint64_t master_seed = 0;
  CorrectedSeries sp_corrected;
  CorrectedSeries dp_corrected;

  std::string to_json_text() const;
  // Writes sp_corrected.csv (and dp_corrected.csv when present) into dir.
  void export_corrected(const std::filesystem::path& dir) const;
};

struct SimulationOutput {
  ExperimentResult result;
  Histogram histogram;
};

// Runs the configured experiment and writes trajectory.csv, histogram.csv
// and meta.json (plus stream.csv when requested) into out_dir. All outputs
// are assembled in memory first, so a failed run leaves no partial files.
SimulationOutput run_simulate(const ExperimentConfig& cfg,
                              const std::filesystem::path& out_dir,
                              bool export_stream = false);

// Reads a pair of histograms (plus an optional stray-light reference for the
// S-P curve), subtracts backgrounds and produces the full report.
Report run_analyze(const ExperimentConfig& cfg,
                   const std::filesystem::path& sp_path,
                   const std::filesystem::path& dp_path,
                   const std::optional<std::filesystem::path>& stray_path);

// One row per grid point: simulate, subtract the matching stray reference,
// fit the tail and derive saturation parameters; also fits the noise-free
// expected curve from the master-equation solution. Writes per-point
// directories and sweep.csv.
void run_sweep(const ExperimentConfig& cfg,
               const std::filesystem::path& out_dir);

// Expected per-shot detected signal per bin (no background, no stray), with
// the Poisson uncertainty the aggregated counts would carry.
CorrectedSeries expected_signal_series(const Trajectory& traj,
                                       const DetectorModel& detector,
                                       double gamma_sp, double bin_width,
                                       std::pair<double, double> range,
                                       std::uint64_t shots);

// Per-shot constant rate estimated from bins fully before probe switch-on.
double preprobe_rate(const Histogram& hist, double probe_start);

void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

}  // namespace lambdasim
