#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"
#include "core/system.hpp"
#include "instrument/detect.hpp"
#include "instrument/timeline.hpp"

namespace lambdasim {

enum class Protocol {
  sp_transition,   // prepare S with the repump, probe with the UV laser
  dp_transition,   // prepare D with the UV laser, probe with the repump
  stationary,      // both lasers on, acquire after a settle time
  stray_only,      // UV probe timing with the ion decoupled
  background_only, // all lasers off
  custom,          // explicit segments and acquisition windows
};

const char* protocol_name(Protocol p);
Protocol protocol_from_name(const std::string& name);

// One laser as configured: ordinary frequencies in MHz, intensity in
// uW/um^2. Exactly one of intensity/rabi_mhz drives the doppler laser; the
// repump takes rabi_mhz.
struct LaserInput {
  std::optional<double> intensity;
  std::optional<double> rabi_mhz;
  double detuning_mhz = 0.0;
  double linewidth_mhz = 0.1;
};

struct SweepSettings {
  enum class Axis { intensity, detuning };
  Axis axis = Axis::intensity;
  std::vector<double> values;
};

// Parsed and validated experiment description. Mutate the input fields and
// call finalize() to refresh the derived ones.
struct ExperimentConfig {
  // atom
  double gamma_sp_mhz = 21.57;
  double gamma_dp_mhz = 1.482;
  double transition_thz = 755.222;
  LaserInput doppler;
  LaserInput repump;
  double intensity_rel_sigma = 0.02;

  // timeline
  Protocol protocol = Protocol::sp_transition;
  double pump_us = 5.0;
  double wait_us = 2.0;
  double probe_us = 5.0;
  double pump_power_scale = 3.0;
  double acquisition_lead_us = 1.5;
  double settle_us = 1.0;
  std::optional<double> shot_length_us;
  std::optional<CoolingPlan> cooling;
  std::vector<PulseSegment> explicit_segments;
  std::vector<std::pair<double, double>> explicit_acquisition;

  AomModel aom;
  DetectorModel detector{0.0014, 6.5e-4, 1.674e-3};

  // run
  std::uint64_t repetitions = 1000000;
  std::uint64_t master_seed = 1;
  double bin_width = 0.01;  // us

  std::optional<std::pair<double, double>> fit_window;  // analysis override
  std::optional<SweepSettings> sweep;

  std::string origin;    // file name for diagnostics
  std::string hash_hex;  // FNV-1a of the source text

  // derived by finalize()
  SystemParams system;
  PulseTimeline timeline;
  double probe_start = 0.0;  // logical probe switch-on, us
  double probe_end = 0.0;
  double i_sat = 0.0;  // uW/um^2

  void finalize();
};

ExperimentConfig parse_config(const std::string& text,
                              const std::string& origin);
ExperimentConfig load_config(const std::string& path);

std::string fnv1a_hex(const std::string& text);

}  // namespace lambdasim
