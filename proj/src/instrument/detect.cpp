#include "instrument/detect.hpp"

#include <algorithm>
#include <cmath>

namespace lambdasim {

void DetectorModel::validate() const {
  if (efficiency < 0.0 || efficiency > 1.0)
    throw DomainError("DetectorModel: efficiency must be in [0, 1]");
  if (background_rate < 0.0 || stray_rate_max < 0.0)
    throw DomainError("DetectorModel: rates must be >= 0");
}

std::vector<double> TimeTagStream::sorted_timestamps() const {
  std::vector<double> ts;
  ts.reserve(events.size());
  for (const auto& e : events) ts.push_back(e.t);
  std::sort(ts.begin(), ts.end());
  return ts;
}

RateModel::RateModel(SystemParams params, PulseTimeline timeline, AomModel aom,
                     DetectorModel detector, Trajectory traj)
    : params_(params),
      timeline_(std::move(timeline)),
      aom_(aom),
      detector_(detector),
      traj_(std::move(traj)) {
  double scale_d = 1.0, scale_r = 1.0;
  for (const auto& seg : timeline_.segments) {
    double& s = seg.channel == Channel::doppler ? scale_d : scale_r;
    s = std::max(s, seg.power_scale);
  }
  // Bound on |d rho_PP / dt| gives a rigorous pad for values between grid
  // points.
  const double slope = params_.atom.gamma_sp + params_.atom.gamma_dp +
                       0.5 * (params_.doppler.rabi * std::sqrt(scale_d) +
                              params_.repump.rabi * std::sqrt(scale_r));
  double gap = 0.0;
  for (std::size_t i = 0; i + 1 < traj_.times.size(); ++i)
    gap = std::max(gap, traj_.times[i + 1] - traj_.times[i]);
  pp_pad_ = 0.5 * gap * slope;
}

double RateModel::operator()(double t) const {
  return detector_.efficiency * params_.atom.gamma_sp *
             traj_.excited_population(t) +
         detector_.background_rate +
         detector_.stray_rate_max *
             envelope(aom_, timeline_, Channel::doppler, t);
}

double RateModel::upper_bound(double a, double b) const {
  if (!(a < b)) throw DomainError("RateModel: empty interval");
  const auto& times = traj_.times;
  const auto lo = std::lower_bound(times.begin(), times.end(), a);
  const auto hi = std::upper_bound(times.begin(), times.end(), b);
  double pp = std::max(traj_.excited_population(a),
                       traj_.excited_population(b));
  for (auto it = lo; it != hi; ++it)
    pp = std::max(
        pp, traj_.population(static_cast<std::size_t>(it - times.begin()),
                             State::P));
  pp = std::min(1.0, pp + pp_pad_);
  return detector_.efficiency * params_.atom.gamma_sp * pp +
         detector_.background_rate +
         detector_.stray_rate_max *
             envelope_max(aom_, timeline_, Channel::doppler, a, b);
}

std::vector<double> simulate_shot(
    const std::function<double(double)>& rate,
    const std::vector<std::pair<double, double>>& windows, double rate_max,
    SplitMix64& rng) {
  std::vector<double> hits;
  if (rate_max <= 0.0) {
    for (const auto& [a, b] : windows)
      for (double t : {a, 0.5 * (a + b), b - 1e-12 * (b - a)})
        if (rate(t) > 0.0)
          throw PreconditionError(
              "simulate_shot: rate_max <= 0 with a positive rate");
    return hits;
  }
  for (const auto& [a, b] : windows) {
    double t = a;
    for (;;) {
      t += rng.exponential(rate_max);
      if (t >= b) break;
      const double r = rate(t);
      if (r > rate_max * (1.0 + 1e-9))
        throw PreconditionError("simulate_shot: rate exceeds rate_max");
      if (rng.uniform() * rate_max <= r) hits.push_back(t);
    }
  }
  return hits;
}

ExperimentResult run_experiment(const SystemParams& params,
                                const PulseTimeline& timeline,
                                const AomModel& aom,
                                const DetectorModel& detector,
                                std::uint64_t master_seed,
                                const DensityMatrix& rho0,
                                double grid_spacing) {
  detector.validate();
  const GeneratorSchedule schedule = build_schedule(params, timeline, aom);
  const auto n_points = static_cast<std::size_t>(
      std::ceil(timeline.shot_length / grid_spacing)) + 1;
  const Trajectory traj =
      evolve(rho0, schedule, uniform_grid(0.0, timeline.shot_length, n_points));

  const RateModel rate(params, timeline, aom, detector, traj);
  std::vector<double> bounds;
  bounds.reserve(timeline.acquisition.size());
  for (const auto& [a, b] : timeline.acquisition)
    bounds.push_back(rate.upper_bound(a, b));

  ExperimentResult result;
  result.trajectory = traj;
  result.stream.shot_count = timeline.repetitions;
  const auto rate_fn = [&rate](double t) { return rate(t); };
  for (std::uint64_t shot = 0; shot < timeline.repetitions; ++shot) {
    SplitMix64 rng = shot_rng(master_seed, shot);
    for (std::size_t w = 0; w < timeline.acquisition.size(); ++w) {
      if (bounds[w] <= 0.0) continue;
      for (double t :
           simulate_shot(rate_fn, {timeline.acquisition[w]}, bounds[w], rng))
        result.stream.events.push_back({shot, t});
    }
  }
  return result;
}

}  // namespace lambdasim
