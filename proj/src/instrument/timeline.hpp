#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "common.hpp"
#include "core/system.hpp"
#include "integrate/evolve.hpp"

namespace lambdasim {

enum class Channel : int { doppler = 0, repump = 1 };

enum class RampShape { smoothstep, linear };

// Switching response of an acousto-optic modulator: no light for dead_time
// after the logical edge, then a finite ramp.
struct AomModel {
  double dead_time = 0.2;   // us
  double rise_time = 0.07;  // us
  RampShape ramp = RampShape::smoothstep;

  void validate() const;
};

// One logical laser pulse. power_scale multiplies the configured intensity;
// the Rabi frequency scales with its square root.
struct PulseSegment {
  Channel channel = Channel::doppler;
  double t_on = 0.0;
  double t_off = 0.0;
  double power_scale = 1.0;
  std::optional<double> detuning_override;  // rad/us

  void validate() const;
};

struct CoolingPlan {
  std::uint64_t every_n_shots = 50;
  double duration = 1000.0;  // us
};

// Full per-shot program: pulses, acquisition windows, repetition plan.
// The cooling interleave carries no acquisition; it is bookkeeping that
// keeps configurations faithful to the lab sequence.
struct PulseTimeline {
  std::vector<PulseSegment> segments;
  std::vector<std::pair<double, double>> acquisition;
  double shot_length = 0.0;           // us
  std::uint64_t repetitions = 0;
  std::optional<CoolingPlan> cooling;

  void validate() const;
};

// Intensity scale of a channel at time t: 0 during dead time, a normalized
// ramp over rise_time, power_scale on the plateau, mirrored fall after
// t_off + dead_time.
double envelope(const AomModel& aom, const PulseTimeline& timeline,
                Channel channel, double t);

// Exact maximum of the envelope over [a, b] (the envelope is monotone
// between its transition points).
double envelope_max(const AomModel& aom, const PulseTimeline& timeline,
                    Channel channel, double a, double b);

// Piecewise-constant generator schedule over [0, shot_length]: constant
// between envelope transitions, sliced at most max_ramp_slice wide inside
// ramps, with the Rabi frequencies scaled by sqrt(envelope).
GeneratorSchedule build_schedule(const SystemParams& params,
                                 const PulseTimeline& timeline,
                                 const AomModel& aom,
                                 double max_ramp_slice = 1e-3);

}  // namespace lambdasim
