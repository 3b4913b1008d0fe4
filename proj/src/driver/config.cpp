#include "driver/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace lambdasim {

using nlohmann::json;

const char* protocol_name(Protocol p) {
  switch (p) {
    case Protocol::sp_transition: return "sp_transition";
    case Protocol::dp_transition: return "dp_transition";
    case Protocol::stationary: return "stationary";
    case Protocol::stray_only: return "stray_only";
    case Protocol::background_only: return "background_only";
    case Protocol::custom: return "custom";
  }
  return "?";
}

Protocol protocol_from_name(const std::string& name) {
  for (Protocol p : {Protocol::sp_transition, Protocol::dp_transition,
                     Protocol::stationary, Protocol::stray_only,
                     Protocol::background_only, Protocol::custom})
    if (name == protocol_name(p)) return p;
  throw ConfigError("unknown protocol '" + name + "'");
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& where,
                       const std::string& what) {
  throw ConfigError(origin + ": " + (where.empty() ? "" : where + ": ") + what);
}

void check_keys(const json& j, const std::string& origin,
                const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) { ok = true; break; }
    if (!ok) fail(origin, where, "unknown key '" + key + "'");
  }
}

double get_number(const json& j, const std::string& origin,
                  const std::string& where, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) fail(origin, where, std::string(key) + " must be a number");
  return j[key].get<double>();
}

std::uint64_t get_count(const json& j, const std::string& origin,
                        const std::string& where, const char* key,
                        std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_unsigned())
    fail(origin, where, std::string(key) + " must be a non-negative integer");
  return j[key].get<std::uint64_t>();
}

LaserInput parse_laser(const json& j, const std::string& origin,
                       const std::string& where) {
  check_keys(j, origin, where,
             {"intensity_uw_um2", "rabi_mhz", "detuning_mhz", "linewidth_mhz"});
  LaserInput in;
  if (j.contains("intensity_uw_um2"))
    in.intensity = get_number(j, origin, where, "intensity_uw_um2", 0.0);
  if (j.contains("rabi_mhz"))
    in.rabi_mhz = get_number(j, origin, where, "rabi_mhz", 0.0);
  in.detuning_mhz = get_number(j, origin, where, "detuning_mhz", 0.0);
  in.linewidth_mhz = get_number(j, origin, where, "linewidth_mhz", 0.1);
  return in;
}

std::size_t line_of_byte(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

}  // namespace

void ExperimentConfig::finalize() {
  const std::string& o = origin;
  if (gamma_sp_mhz <= 0.0 || gamma_dp_mhz <= 0.0)
    fail(o, "system.atom", "decay rates must be positive");

  system.atom.gamma_sp = kTwoPi * gamma_sp_mhz;
  system.atom.gamma_dp = kTwoPi * gamma_dp_mhz;
  system.atom.omega_sp = kTwoPi * transition_thz * 1e12;
  i_sat = saturation_intensity(system.atom);

  const bool ion_coupled =
      protocol != Protocol::stray_only && protocol != Protocol::background_only;
  const bool needs_doppler = ion_coupled && protocol != Protocol::custom;

  auto laser_params = [&](const LaserInput& in, const char* name,
                          bool allow_intensity, bool required) {
    LaserParams lp;
    lp.detuning = kTwoPi * in.detuning_mhz;
    lp.linewidth = kTwoPi * in.linewidth_mhz;
    if (!ion_coupled) return lp;  // rabi stays zero
    if (in.intensity && in.rabi_mhz)
      fail(o, std::string("system.") + name,
           "give either intensity_uw_um2 or rabi_mhz, not both");
    if (in.intensity) {
      if (!allow_intensity)
        fail(o, std::string("system.") + name,
             "intensity_uw_um2 is only supported for the doppler laser");
      lp.rabi = rabi_from_intensity(*in.intensity, i_sat, system.atom.gamma_sp);
    } else if (in.rabi_mhz) {
      lp.rabi = kTwoPi * *in.rabi_mhz;
    } else if (required) {
      fail(o, std::string("system.") + name,
           "one of intensity_uw_um2 or rabi_mhz is required");
    }
    return lp;
  };
  system.doppler = laser_params(doppler, "doppler", true, needs_doppler);
  system.repump = laser_params(repump, "repump", false, needs_doppler);
  system.validate();

  timeline = PulseTimeline{};
  timeline.repetitions = repetitions;
  timeline.cooling = cooling;
  switch (protocol) {
    case Protocol::sp_transition:
    case Protocol::dp_transition:
    case Protocol::stray_only: {
      probe_start = pump_us + wait_us;
      probe_end = probe_start + probe_us;
      timeline.shot_length = probe_end;
      const Channel pump_ch = protocol == Protocol::dp_transition
                                  ? Channel::doppler
                                  : Channel::repump;
      const Channel probe_ch = protocol == Protocol::dp_transition
                                   ? Channel::repump
                                   : Channel::doppler;
      timeline.segments.push_back(
          {pump_ch, 0.0, pump_us, pump_power_scale, std::nullopt});
      timeline.segments.push_back(
          {probe_ch, probe_start, probe_end, 1.0, std::nullopt});
      const double lead = std::min(acquisition_lead_us, probe_start);
      timeline.acquisition.emplace_back(probe_start - lead, probe_end);
      break;
    }
    case Protocol::stationary: {
      const double len = shot_length_us.value_or(11.0);
      if (settle_us >= len)
        fail(o, "timeline", "settle_us must be shorter than the shot");
      timeline.shot_length = len;
      timeline.segments.push_back(
          {Channel::doppler, 0.0, len, 1.0, std::nullopt});
      timeline.segments.push_back(
          {Channel::repump, 0.0, len, 1.0, std::nullopt});
      timeline.acquisition.emplace_back(settle_us, len);
      probe_start = settle_us;
      probe_end = len;
      break;
    }
    case Protocol::background_only: {
      const double len = shot_length_us.value_or(10.0);
      timeline.shot_length = len;
      timeline.acquisition.emplace_back(0.0, len);
      probe_start = 0.0;
      probe_end = len;
      break;
    }
    case Protocol::custom: {
      if (explicit_segments.empty() || explicit_acquisition.empty() ||
          !shot_length_us)
        fail(o, "timeline",
             "custom timelines need segments, acquisition and shot_length_us");
      timeline.shot_length = *shot_length_us;
      timeline.segments = explicit_segments;
      timeline.acquisition = explicit_acquisition;
      probe_start = timeline.acquisition.front().first;
      probe_end = timeline.acquisition.back().second;
      break;
    }
  }
  timeline.validate();
  aom.validate();
  detector.validate();
  if (!(bin_width > 0.0)) fail(o, "run", "bin_width must be positive");
  if (sweep) {
    if (sweep->values.empty()) fail(o, "sweep", "sweep grid is empty");
    if (protocol != Protocol::sp_transition)
      fail(o, "sweep", "sweeps are defined for the sp_transition protocol");
  }
}

ExperimentConfig parse_config(const std::string& text,
                              const std::string& origin) {
  json root;
  try {
    root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    fail(origin, "line " + std::to_string(line_of_byte(text, e.byte)),
         e.what());
  }
  if (!root.is_object()) fail(origin, "", "top level must be an object");
  check_keys(root, origin, "",
             {"system", "timeline", "aom", "detector", "run", "analysis",
              "sweep"});

  ExperimentConfig cfg;
  cfg.origin = origin;
  cfg.hash_hex = fnv1a_hex(text);

  if (root.contains("system")) {
    const json& sys = root["system"];
    check_keys(sys, origin, "system",
               {"atom", "doppler", "repump", "intensity_rel_sigma"});
    if (sys.contains("atom")) {
      const json& atom = sys["atom"];
      check_keys(atom, origin, "system.atom",
                 {"gamma_sp_mhz", "gamma_dp_mhz", "transition_thz"});
      cfg.gamma_sp_mhz = get_number(atom, origin, "system.atom",
                                    "gamma_sp_mhz", cfg.gamma_sp_mhz);
      cfg.gamma_dp_mhz = get_number(atom, origin, "system.atom",
                                    "gamma_dp_mhz", cfg.gamma_dp_mhz);
      cfg.transition_thz = get_number(atom, origin, "system.atom",
                                      "transition_thz", cfg.transition_thz);
    }
    if (sys.contains("doppler"))
      cfg.doppler = parse_laser(sys["doppler"], origin, "system.doppler");
    if (sys.contains("repump"))
      cfg.repump = parse_laser(sys["repump"], origin, "system.repump");
    cfg.intensity_rel_sigma = get_number(sys, origin, "system",
                                         "intensity_rel_sigma",
                                         cfg.intensity_rel_sigma);
  }

  if (root.contains("timeline")) {
    const json& tl = root["timeline"];
    check_keys(tl, origin, "timeline",
               {"protocol", "pump_us", "wait_us", "probe_us",
                "pump_power_scale", "acquisition_lead_us", "settle_us",
                "shot_length_us", "cooling", "segments", "acquisition"});
    if (tl.contains("protocol")) {
      if (!tl["protocol"].is_string())
        fail(origin, "timeline", "protocol must be a string");
      try {
        cfg.protocol = protocol_from_name(tl["protocol"].get<std::string>());
      } catch (const ConfigError& e) {
        fail(origin, "timeline", e.what());
      }
    } else if (tl.contains("segments")) {
      cfg.protocol = Protocol::custom;
    }
    cfg.pump_us = get_number(tl, origin, "timeline", "pump_us", cfg.pump_us);
    cfg.wait_us = get_number(tl, origin, "timeline", "wait_us", cfg.wait_us);
    cfg.probe_us = get_number(tl, origin, "timeline", "probe_us", cfg.probe_us);
    cfg.pump_power_scale = get_number(tl, origin, "timeline",
                                      "pump_power_scale", cfg.pump_power_scale);
    cfg.acquisition_lead_us =
        get_number(tl, origin, "timeline", "acquisition_lead_us",
                   cfg.acquisition_lead_us);
    cfg.settle_us = get_number(tl, origin, "timeline", "settle_us",
                               cfg.settle_us);
    if (tl.contains("shot_length_us"))
      cfg.shot_length_us = get_number(tl, origin, "timeline", "shot_length_us", 0.0);
    if (tl.contains("cooling")) {
      const json& cool = tl["cooling"];
      check_keys(cool, origin, "timeline.cooling",
                 {"every_n_shots", "duration_ms"});
      CoolingPlan plan;
      plan.every_n_shots = get_count(cool, origin, "timeline.cooling",
                                     "every_n_shots", 50);
      plan.duration = 1000.0 * get_number(cool, origin, "timeline.cooling",
                                          "duration_ms", 1.0);
      cfg.cooling = plan;
    }
    if (tl.contains("segments")) {
      if (!tl["segments"].is_array())
        fail(origin, "timeline", "segments must be an array");
      std::size_t i = 0;
      for (const json& js : tl["segments"]) {
        const std::string where = "timeline.segments[" + std::to_string(i++) + "]";
        check_keys(js, origin, where,
                   {"channel", "t_on_us", "t_off_us", "power_scale",
                    "detuning_override_mhz"});
        PulseSegment seg;
        if (!js.contains("channel") || !js["channel"].is_string())
          fail(origin, where, "channel must be 'doppler' or 'repump'");
        const std::string ch = js["channel"].get<std::string>();
        if (ch == "doppler") seg.channel = Channel::doppler;
        else if (ch == "repump") seg.channel = Channel::repump;
        else fail(origin, where, "channel must be 'doppler' or 'repump'");
        seg.t_on = get_number(js, origin, where, "t_on_us", 0.0);
        seg.t_off = get_number(js, origin, where, "t_off_us", 0.0);
        seg.power_scale = get_number(js, origin, where, "power_scale", 1.0);
        if (js.contains("detuning_override_mhz"))
          seg.detuning_override =
              kTwoPi * get_number(js, origin, where, "detuning_override_mhz", 0.0);
        cfg.explicit_segments.push_back(seg);
      }
    }
    if (tl.contains("acquisition")) {
      if (!tl["acquisition"].is_array())
        fail(origin, "timeline", "acquisition must be an array of [start, end]");
      for (const json& w : tl["acquisition"]) {
        if (!w.is_array() || w.size() != 2 || !w[0].is_number() ||
            !w[1].is_number())
          fail(origin, "timeline", "acquisition entries must be [start, end]");
        cfg.explicit_acquisition.emplace_back(w[0].get<double>(),
                                              w[1].get<double>());
      }
    }
  }

  if (root.contains("aom")) {
    const json& aom = root["aom"];
    check_keys(aom, origin, "aom", {"dead_time_us", "rise_time_us", "ramp_shape"});
    cfg.aom.dead_time = get_number(aom, origin, "aom", "dead_time_us", 0.2);
    cfg.aom.rise_time = get_number(aom, origin, "aom", "rise_time_us", 0.07);
    if (aom.contains("ramp_shape")) {
      const std::string shape = aom["ramp_shape"].get<std::string>();
      if (shape == "smoothstep") cfg.aom.ramp = RampShape::smoothstep;
      else if (shape == "linear") cfg.aom.ramp = RampShape::linear;
      else fail(origin, "aom", "ramp_shape must be 'smoothstep' or 'linear'");
    }
  }

  if (root.contains("detector")) {
    const json& det = root["detector"];
    check_keys(det, origin, "detector",
               {"efficiency", "background_rate_per_us", "stray_rate_max_per_us"});
    cfg.detector.efficiency =
        get_number(det, origin, "detector", "efficiency", cfg.detector.efficiency);
    cfg.detector.background_rate =
        get_number(det, origin, "detector", "background_rate_per_us",
                   cfg.detector.background_rate);
    cfg.detector.stray_rate_max =
        get_number(det, origin, "detector", "stray_rate_max_per_us",
                   cfg.detector.stray_rate_max);
  }

  if (root.contains("run")) {
    const json& run = root["run"];
    check_keys(run, origin, "run",
               {"repetitions", "master_seed", "bin_width_us"});
    cfg.repetitions = get_count(run, origin, "run", "repetitions",
                                cfg.repetitions);
    cfg.master_seed = get_count(run, origin, "run", "master_seed",
                                cfg.master_seed);
    cfg.bin_width = get_number(run, origin, "run", "bin_width_us",
                               cfg.bin_width);
  }

  if (root.contains("analysis")) {
    const json& an = root["analysis"];
    check_keys(an, origin, "analysis", {"fit_window_us"});
    if (an.contains("fit_window_us")) {
      const json& w = an["fit_window_us"];
      if (!w.is_array() || w.size() != 2)
        fail(origin, "analysis", "fit_window_us must be [start, end]");
      cfg.fit_window = {w[0].get<double>(), w[1].get<double>()};
    }
  }

  if (root.contains("sweep")) {
    const json& sw = root["sweep"];
    check_keys(sw, origin, "sweep", {"axis", "values"});
    SweepSettings s;
    const std::string axis = sw.value("axis", "intensity");
    if (axis == "intensity") s.axis = SweepSettings::Axis::intensity;
    else if (axis == "detuning") s.axis = SweepSettings::Axis::detuning;
    else fail(origin, "sweep", "axis must be 'intensity' or 'detuning'");
    if (!sw.contains("values") || !sw["values"].is_array())
      fail(origin, "sweep", "values must be an array of numbers");
    for (const json& v : sw["values"]) {
      if (!v.is_number()) fail(origin, "sweep", "values must be numbers");
      s.values.push_back(v.get<double>());
    }
    cfg.sweep = s;
  }

  try {
    cfg.finalize();
  } catch (const DomainError& e) {
    fail(origin, "", e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace lambdasim
