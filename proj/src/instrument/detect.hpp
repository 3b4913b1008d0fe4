#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "common.hpp"
#include "core/system.hpp"
#include "instrument/timeline.hpp"
#include "integrate/evolve.hpp"
#include "rng.hpp"

namespace lambdasim {

// Detection chain: one overall efficiency, a constant dark/ambient rate and
// scattered probe light that follows the UV envelope.
struct DetectorModel {
  double efficiency = 0.0;       // photon detection probability
  double background_rate = 0.0;  // counts/us, constant
  double stray_rate_max = 0.0;   // counts/us at full UV power

  void validate() const;
};

struct TimeTagEvent {
  std::uint64_t shot;
  double t;  // us, relative to shot start
};

// Detected photons aggregated over all repetitions, ordered by
// (shot, timestamp).
struct TimeTagStream {
  std::vector<TimeTagEvent> events;
  std::uint64_t shot_count = 0;

  std::vector<double> sorted_timestamps() const;
};

// Detected count rate at time t (counts/us): fluorescence from the
// excited-state population plus background plus stray light. Only UV (S-P)
// photons reach the detector; the IR channel is filtered out. Owns copies of
// its inputs, so it outlives any temporaries used to build it.
class RateModel {
 public:
  RateModel(SystemParams params, PulseTimeline timeline, AomModel aom,
            DetectorModel detector, Trajectory traj);

  double operator()(double t) const;
  // A true upper bound of the rate over [a, b].
  double upper_bound(double a, double b) const;

 private:
  SystemParams params_;
  PulseTimeline timeline_;
  AomModel aom_;
  DetectorModel detector_;
  Trajectory traj_;
  double pp_pad_;
};

// Inhomogeneous Poisson sampling by thinning: exponential candidate gaps at
// rate_max, acceptance probability rate(t)/rate_max. rate_max must bound the
// rate over every window.
std::vector<double> simulate_shot(
    const std::function<double(double)>& rate,
    const std::vector<std::pair<double, double>>& windows, double rate_max,
    SplitMix64& rng);

struct ExperimentResult {
  TimeTagStream stream;
  Trajectory trajectory;  // one reference master-equation solution
};

// Full Monte Carlo run: solve the master equation once for the timeline,
// then draw per-shot photon events from counter-seeded streams inside the
// acquisition windows.
ExperimentResult run_experiment(
    const SystemParams& params, const PulseTimeline& timeline,
    const AomModel& aom, const DetectorModel& detector,
    std::uint64_t master_seed,
    const DensityMatrix& rho0 = DensityMatrix::ground_mixture(),
    double grid_spacing = 1e-3);

}  // namespace lambdasim
