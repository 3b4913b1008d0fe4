#include "instrument/timeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace lambdasim {

void AomModel::validate() const {
  if (dead_time < 0.0 || rise_time < 0.0)
    throw DomainError("AomModel: dead_time and rise_time must be >= 0");
}

void PulseSegment::validate() const {
  if (!(t_on < t_off)) throw DomainError("PulseSegment: t_on must precede t_off");
  if (power_scale < 0.0) throw DomainError("PulseSegment: power_scale must be >= 0");
}

void PulseTimeline::validate() const {
  if (!(shot_length > 0.0)) throw DomainError("PulseTimeline: shot_length must be > 0");
  for (const auto& seg : segments) seg.validate();
  for (const auto& [a, b] : acquisition) {
    if (!(a < b)) throw DomainError("PulseTimeline: empty acquisition window");
    if (a < 0.0 || b > shot_length + 1e-12)
      throw DomainError("PulseTimeline: acquisition window outside the shot");
  }
  // Per-channel segments must not overlap.
  for (Channel ch : {Channel::doppler, Channel::repump}) {
    std::vector<std::pair<double, double>> spans;
    for (const auto& seg : segments)
      if (seg.channel == ch) spans.emplace_back(seg.t_on, seg.t_off);
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 0; i + 1 < spans.size(); ++i)
      if (spans[i + 1].first < spans[i].second)
        throw DomainError("PulseTimeline: overlapping segments on one channel");
  }
}

namespace {

double ramp_shape(RampShape shape, double x) {
  x = std::clamp(x, 0.0, 1.0);
  return shape == RampShape::smoothstep ? x * x * (3.0 - 2.0 * x) : x;
}

// Normalized [0,1] contribution of one segment at time t.
double segment_shape(const AomModel& aom, const PulseSegment& seg, double t) {
  const double light_on = seg.t_on + aom.dead_time;
  const double fall_at = seg.t_off + aom.dead_time;
  if (t < light_on || t >= fall_at + aom.rise_time) return 0.0;
  if (aom.rise_time <= 0.0) return t < fall_at ? 1.0 : 0.0;
  const double up = ramp_shape(aom.ramp, (t - light_on) / aom.rise_time);
  const double down = 1.0 - ramp_shape(aom.ramp, (t - fall_at) / aom.rise_time);
  return std::min(up, down);
}

}  // namespace

double envelope(const AomModel& aom, const PulseTimeline& timeline,
                Channel channel, double t) {
  double value = 0.0;
  for (const auto& seg : timeline.segments) {
    if (seg.channel != channel) continue;
    value = std::max(value, seg.power_scale * segment_shape(aom, seg, t));
  }
  return value;
}

double envelope_max(const AomModel& aom, const PulseTimeline& timeline,
                    Channel channel, double a, double b) {
  if (!(a <= b)) throw DomainError("envelope_max: empty interval");
  std::vector<double> candidates{a, b};
  for (const auto& seg : timeline.segments) {
    if (seg.channel != channel) continue;
    const double light_on = seg.t_on + aom.dead_time;
    const double fall_at = seg.t_off + aom.dead_time;
    for (double t : {light_on, light_on + aom.rise_time, fall_at,
                     fall_at + aom.rise_time,
                     0.5 * (light_on + fall_at + aom.rise_time)})
      if (t > a && t < b) candidates.push_back(t);
  }
  double peak = 0.0;
  for (double t : candidates)
    peak = std::max(peak, envelope(aom, timeline, channel, t));
  return peak;
}

GeneratorSchedule build_schedule(const SystemParams& params,
                                 const PulseTimeline& timeline,
                                 const AomModel& aom, double max_ramp_slice) {
  params.validate();
  timeline.validate();
  aom.validate();
  if (!(max_ramp_slice > 0.0))
    throw DomainError("build_schedule: max_ramp_slice must be > 0");

  std::vector<double> points{0.0, timeline.shot_length};
  auto add_point = [&](double t) {
    if (t > 0.0 && t < timeline.shot_length) points.push_back(t);
  };
  for (const auto& seg : timeline.segments) {
    const double light_on = seg.t_on + aom.dead_time;
    const double fall_at = seg.t_off + aom.dead_time;
    for (double edge : {light_on, fall_at}) {
      add_point(edge);
      if (aom.rise_time > 0.0) {
        const auto slices = static_cast<std::size_t>(
            std::ceil(aom.rise_time / max_ramp_slice));
        for (std::size_t i = 1; i <= slices; ++i)
          add_point(edge + aom.rise_time * static_cast<double>(i) /
                               static_cast<double>(slices));
      }
    }
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end(),
                           [](double x, double y) { return y - x < 1e-12; }),
               points.end());

  GeneratorSchedule schedule;
  schedule.breakpoints = points;
  schedule.generators.reserve(points.size() - 1);
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    const double mid = 0.5 * (points[k] + points[k + 1]);
    SystemParams local = params;
    for (Channel ch : {Channel::doppler, Channel::repump}) {
      LaserParams& laser =
          ch == Channel::doppler ? local.doppler : local.repump;
      laser.rabi *= std::sqrt(envelope(aom, timeline, ch, mid));
      for (const auto& seg : timeline.segments) {
        if (seg.channel != ch || !seg.detuning_override) continue;
        if (mid >= seg.t_on && mid < seg.t_off + aom.dead_time + aom.rise_time)
          laser.detuning = *seg.detuning_override;
      }
    }
    schedule.generators.push_back(build_liouvillian(local).m);
  }
  return schedule;
}

}  // namespace lambdasim
