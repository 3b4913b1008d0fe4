#include "driver/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "rng.hpp"

namespace lambdasim {

namespace fs = std::filesystem;
using nlohmann::json;

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw Error("failed writing " + path.string());
}

namespace {

json estimate_json(const Estimate& e) {
  return {{"value", e.value}, {"sigma", e.sigma}, {"degenerate", e.degenerate}};
}

Histogram read_histogram_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open histogram file");
  return read_histogram_csv(in, path.string());
}

}  // namespace

std::string Report::to_json_text() const {
  json j;
  j["p"] = p ? estimate_json(*p) : json(nullptr);
  j["eta"] = eta ? estimate_json(*eta) : json(nullptr);
  j["tau_us"] = {{"value", chain.fit.tau}, {"sigma", chain.fit.tau_sigma()}};
  j["s_from_tau"] = {{"value", chain.sat.s}, {"sigma", chain.sat.s_sigma}};
  j["rho_pp_from_tau"] = {{"value", chain.sat.rho_pp},
                          {"sigma", chain.sat.rho_pp_sigma}};
  j["s_from_intensity"] =
      chain.s_intensity ? json{{"value", *chain.s_intensity},
                               {"sigma", chain.s_intensity_sigma}}
                        : json(nullptr);
  j["fit"] = {{"n0", chain.fit.n0},
              {"tau_us", chain.fit.tau},
              {"c", chain.fit.c},
              {"window_us", {chain.fit.fit_window.first,
                             chain.fit.fit_window.second}},
              {"reduced_chi2", chain.fit.reduced_chi2},
              {"iterations", chain.fit.iterations},
              {"init_fallback", chain.fit.init_fallback}};
  j["inputs"] = {{"sp", sp_file},
                 {"dp", dp_file},
                 {"stray", stray_file.empty() ? json(nullptr) : json(stray_file)},
                 {"sp_shots", sp_shots},
                 {"dp_shots", dp_shots},
                 {"n_sp_corrected", n_sp},
                 {"n_dp_corrected", n_dp},
                 {"dp_background_rate_per_us", dp_background_rate},
                 {"config_hash", config_hash},
                 {"master_seed", master_seed}};
  return j.dump(2) + "\n";
}

void Report::export_corrected(const fs::path& dir) const {
  fs::create_directories(dir);
  std::ostringstream sp_csv;
  write_corrected_csv(sp_corrected, sp_csv);
  write_text_file(dir / "sp_corrected.csv", sp_csv.str());
  if (!dp_corrected.value.empty()) {
    std::ostringstream dp_csv;
    write_corrected_csv(dp_corrected, dp_csv);
    write_text_file(dir / "dp_corrected.csv", dp_csv.str());
  }
}

SimulationOutput run_simulate(const ExperimentConfig& cfg,
                              const fs::path& out_dir, bool export_stream) {
  SimulationOutput out;
  out.result = run_experiment(cfg.system, cfg.timeline, cfg.aom, cfg.detector,
                              cfg.master_seed);
  const auto range = std::make_pair(cfg.timeline.acquisition.front().first,
                                    cfg.timeline.acquisition.back().second);
  out.histogram = bin_timestamps(out.result.stream, cfg.bin_width, range);

  std::ostringstream traj_csv;
  write_trajectory_csv(out.result.trajectory, traj_csv);
  std::ostringstream hist_csv;
  write_histogram_csv(out.histogram, hist_csv);

  json meta;
  meta["format_version"] = 1;
  meta["protocol"] = protocol_name(cfg.protocol);
  meta["config_hash"] = cfg.hash_hex;
  meta["master_seed"] = cfg.master_seed;
  meta["repetitions"] = cfg.repetitions;
  meta["bin_width_us"] = cfg.bin_width;
  meta["events_total"] = out.result.stream.events.size();
  meta["acquisition_us"] = {range.first, range.second};

  std::ostringstream stream_csv;
  if (export_stream) {
    stream_csv << "shot_index,timestamp_us\n";
    char line[64];
    for (const auto& e : out.result.stream.events) {
      std::snprintf(line, sizeof line, "%llu,%.9f\n",
                    static_cast<unsigned long long>(e.shot), e.t);
      stream_csv << line;
    }
  }

  fs::create_directories(out_dir);
  write_text_file(out_dir / "trajectory.csv", traj_csv.str());
  write_text_file(out_dir / "histogram.csv", hist_csv.str());
  write_text_file(out_dir / "meta.json", meta.dump(2) + "\n");
  if (export_stream) write_text_file(out_dir / "stream.csv", stream_csv.str());
  return out;
}

double preprobe_rate(const Histogram& hist, double probe_start) {
  double counts = 0.0;
  std::size_t bins = 0;
  for (std::size_t k = 0; k < hist.size(); ++k) {
    if (hist.bin_start(k) + hist.bin_width > probe_start) break;
    counts += static_cast<double>(hist.counts[k]);
    ++bins;
  }
  if (bins == 0 || hist.shot_count == 0) return 0.0;
  const double duration = hist.bin_width * static_cast<double>(bins);
  return counts / (static_cast<double>(hist.shot_count) * duration);
}

namespace {

TauChain tau_chain(const CorrectedSeries& corrected,
                   const ExperimentConfig& cfg) {
  TauChain chain;
  const auto window =
      cfg.fit_window ? *cfg.fit_window : default_fit_window(corrected);
  chain.fit = fit_exponential_tail(corrected, window);
  chain.sat = s_from_tau(chain.fit.tau, cfg.system.atom.gamma_dp,
                         chain.fit.tau_sigma());
  if (cfg.doppler.intensity) {
    chain.s_intensity = s_from_intensity(*cfg.doppler.intensity, cfg.i_sat);
    chain.s_intensity_sigma = *chain.s_intensity * cfg.intensity_rel_sigma;
  }
  return chain;
}

}  // namespace

Report run_analyze(const ExperimentConfig& cfg, const fs::path& sp_path,
                   const fs::path& dp_path,
                   const std::optional<fs::path>& stray_path) {
  const Histogram sp = read_histogram_file(sp_path);
  const Histogram dp = read_histogram_file(dp_path);

  CorrectedSeries sp_corr;
  std::string stray_file;
  if (stray_path) {
    const Histogram stray = read_histogram_file(*stray_path);
    sp_corr = subtract_background(sp, stray);
    stray_file = stray_path->string();
  } else {
    sp_corr = subtract_background(sp, preprobe_rate(sp, cfg.probe_start));
  }
  const double dp_rate = preprobe_rate(dp, cfg.probe_start);
  const CorrectedSeries dp_corr = subtract_background(dp, dp_rate);

  Report rep;
  rep.sp_file = sp_path.string();
  rep.dp_file = dp_path.string();
  rep.stray_file = stray_file;
  rep.sp_shots = sp.shot_count;
  rep.dp_shots = dp.shot_count;
  rep.dp_background_rate = dp_rate;
  rep.config_hash = cfg.hash_hex;
  rep.master_seed = cfg.master_seed;

  constexpr double kFar = 1e30;
  rep.n_sp = sp_corr.total_counts(cfg.probe_start, kFar);
  rep.n_dp = dp_corr.total_counts(cfg.probe_start, kFar);
  // Branching compares equal numbers of cycles; rescale when they differ.
  const double dp_scaled =
      dp.shot_count == sp.shot_count
          ? rep.n_dp
          : rep.n_dp * static_cast<double>(sp.shot_count) /
                static_cast<double>(dp.shot_count);
  rep.p = estimate_branching(rep.n_sp, dp_scaled);
  rep.eta = estimate_efficiency(rep.n_dp, static_cast<double>(dp.shot_count));
  rep.chain = tau_chain(sp_corr, cfg);
  rep.sp_corrected = std::move(sp_corr);
  rep.dp_corrected = dp_corr;
  return rep;
}

CorrectedSeries expected_signal_series(const Trajectory& traj,
                                       const DetectorModel& detector,
                                       double gamma_sp, double bin_width,
                                       std::pair<double, double> range,
                                       std::uint64_t shots) {
  CorrectedSeries s;
  s.bin_width = bin_width;
  s.t0 = range.first;
  s.shot_count = shots;
  const auto n_bins = static_cast<std::size_t>(
      std::floor((range.second - range.first) / bin_width + 1e-9));
  s.value.resize(n_bins);
  s.sigma.resize(n_bins);
  const double scale = detector.efficiency * gamma_sp;
  for (std::size_t k = 0; k < n_bins; ++k) {
    const double a = s.t0 + bin_width * static_cast<double>(k);
    const double b = a + bin_width;
    // Trapezoid over the bin, using the trajectory grid points inside it.
    double acc = 0.0;
    double t_prev = a;
    double f_prev = traj.excited_population(a);
    const auto lo =
        std::upper_bound(traj.times.begin(), traj.times.end(), a);
    for (auto it = lo; it != traj.times.end() && *it < b; ++it) {
      const double f = traj.population(
          static_cast<std::size_t>(it - traj.times.begin()), State::P);
      acc += 0.5 * (*it - t_prev) * (f + f_prev);
      t_prev = *it;
      f_prev = f;
    }
    const double f_end = traj.excited_population(b);
    acc += 0.5 * (b - t_prev) * (f_end + f_prev);
    s.value[k] = scale * acc;
    const double agg = std::max(s.value[k] * static_cast<double>(shots), 1.0);
    s.sigma[k] = std::sqrt(agg) / static_cast<double>(shots);
  }
  return s;
}

void run_sweep(const ExperimentConfig& cfg, const fs::path& out_dir) {
  if (!cfg.sweep) throw ConfigError(cfg.origin + ": no sweep section");
  fs::create_directories(out_dir);

  std::ostringstream table;
  table << "axis,value,tau_us,tau_sigma_us,s_from_tau,s_from_tau_sigma,"
           "s_from_intensity,s_from_intensity_sigma,tau_theory_us,"
           "tau_theory_sigma_us\n";
  const char* axis_name =
      cfg.sweep->axis == SweepSettings::Axis::intensity ? "intensity_uw_um2"
                                                        : "detuning_mhz";

  for (std::size_t i = 0; i < cfg.sweep->values.size(); ++i) {
    const double v = cfg.sweep->values[i];
    ExperimentConfig point = cfg;
    point.sweep.reset();
    point.master_seed = cfg.master_seed + i;
    if (cfg.sweep->axis == SweepSettings::Axis::intensity) {
      point.doppler.intensity = v;
      point.doppler.rabi_mhz.reset();
    } else {
      point.doppler.detuning_mhz = v;
    }
    point.finalize();

    char dir_name[32];
    std::snprintf(dir_name, sizeof dir_name, "point_%02zu", i);
    const fs::path point_dir = out_dir / dir_name;
    const SimulationOutput sim = run_simulate(point, point_dir);

    ExperimentConfig stray = point;
    stray.protocol = Protocol::stray_only;
    stray.master_seed = mix64(point.master_seed ^ 0x53545241594CULL);
    stray.finalize();
    const SimulationOutput stray_sim =
        run_simulate(stray, point_dir / "stray");

    const CorrectedSeries corrected =
        subtract_background(sim.histogram, stray_sim.histogram);
    Report rep;
    rep.sp_file = (point_dir / "histogram.csv").string();
    rep.stray_file = (point_dir / "stray" / "histogram.csv").string();
    rep.sp_shots = sim.histogram.shot_count;
    rep.config_hash = cfg.hash_hex;
    rep.master_seed = point.master_seed;
    rep.n_sp = corrected.total_counts(point.probe_start, 1e30);
    rep.chain = tau_chain(corrected, point);
    rep.sp_corrected = corrected;
    rep.export_corrected(point_dir);

    // Noise-free reference: fit the expected curve on the same window.
    const CorrectedSeries theory = expected_signal_series(
        sim.result.trajectory, point.detector, point.system.atom.gamma_sp,
        point.bin_width,
        {sim.histogram.t0,
         sim.histogram.t0 +
             sim.histogram.bin_width *
                 static_cast<double>(sim.histogram.size())},
        point.repetitions);
    const FitResult theory_fit =
        fit_exponential_tail(theory, rep.chain.fit.fit_window);

    write_text_file(point_dir / "report.json", rep.to_json_text());

    char row[360];
    std::snprintf(row, sizeof row,
                  "%s,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                  axis_name, v, rep.chain.fit.tau, rep.chain.fit.tau_sigma(),
                  rep.chain.sat.s, rep.chain.sat.s_sigma,
                  rep.chain.s_intensity.value_or(
                      std::numeric_limits<double>::quiet_NaN()),
                  rep.chain.s_intensity_sigma, theory_fit.tau,
                  theory_fit.tau_sigma());
    table << row;
  }
  write_text_file(out_dir / "sweep.csv", table.str());
}

}  // namespace lambdasim
