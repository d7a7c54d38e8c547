#include "ipmsm/config.hpp"

#include <fstream>
#include <set>

#include "ipmsm/errors.hpp"

namespace ipmsm {

using nlohmann::json;

namespace {

json motor_json(const MotorParams& m) {
  return {{"r_s", m.r_s},
          {"l_d", m.l_d},
          {"l_q", m.l_q},
          {"psi_f", m.psi_f},
          {"pole_pairs", m.pole_pairs},
          {"u_dc", m.u_dc},
          {"i_s_max", m.i_s_max},
          {"rated_torque", m.rated_torque},
          {"rated_speed_rpm", m.rated_speed_rpm},
          {"inertia", m.inertia},
          {"viscous", m.viscous}};
}

void check_keys(const json& obj, const std::string& section, const json& allowed) {
  if (!obj.is_object()) throw ConfigError("section '" + section + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + section + "." + key + "'");
  }
}

template <typename T>
T get(const json& obj, const std::string& section, const char* key) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + section + "." + key + "': " + e.what());
  }
}

MotorParams motor_from(const json& j, const std::string& section) {
  MotorParams m;
  m.r_s = get<double>(j, section, "r_s");
  m.l_d = get<double>(j, section, "l_d");
  m.l_q = get<double>(j, section, "l_q");
  m.psi_f = get<double>(j, section, "psi_f");
  m.pole_pairs = get<int>(j, section, "pole_pairs");
  m.u_dc = get<double>(j, section, "u_dc");
  m.i_s_max = get<double>(j, section, "i_s_max");
  m.rated_torque = get<double>(j, section, "rated_torque");
  m.rated_speed_rpm = get<double>(j, section, "rated_speed_rpm");
  m.inertia = get<double>(j, section, "inertia");
  m.viscous = get<double>(j, section, "viscous");
  return m;
}

json timeline_json(const ScenarioTimeline& tl) {
  json arr = json::array();
  for (const Segment& s : tl.segments) {
    arr.push_back({{"t_start", s.t_start},
                   {"t_end", s.t_end},
                   {"speed_rpm", s.speed_ref_rpm},
                   {"load", s.load},
                   {"mode", std::string(to_string(s.mode))},
                   {"torque_source", std::string(to_string(s.torque_source))}});
  }
  return arr;
}

}  // namespace

json to_json(const RunConfig& cfg) {
  const SimulationConfig& s = cfg.sim;
  json doc;
  doc["motor"] = motor_json(s.motor);
  doc["nominal"] = motor_json(s.nominal);
  doc["simulation"] = {{"plant_dt", s.plant_dt},
                       {"control_period", s.control_period},
                       {"divergence_factor", s.divergence_factor},
                       {"load_ramp", s.load_ramp},
                       {"initial_speed_rpm", s.initial_speed_rpm},
                       {"current_noise_std", s.current_noise_std},
                       {"seed", s.seed}};
  doc["foc"] = {{"current_bandwidth_hz", s.foc.current_bandwidth_hz},
                {"speed_bandwidth_hz", s.foc.speed_bandwidth_hz},
                {"speed_pi_zero_ratio", s.foc.speed_pi_zero_ratio}};
  doc["dcee"] = {{"k_x", s.dcee.k_x},
                 {"delta_x", s.dcee.delta_x},
                 {"saturation_tick_limit", s.dcee.saturation_tick_limit}};
  doc["bank"] = {{"count", s.bank.count},
                 {"lambda", s.bank.lambda},
                 {"psi_f_guess", s.bank.psi_f_guess},
                 {"saliency_guess", s.bank.saliency_guess},
                 {"psi_f_spread", {s.bank.psi_f_spread_lo, s.bank.psi_f_spread_hi}},
                 {"saliency_spread", {s.bank.saliency_spread_lo, s.bank.saliency_spread_hi}},
                 {"pin_first", s.bank.pin_first},
                 {"pinned_psi_f", s.bank.pinned_psi_f},
                 {"pinned_saliency", s.bank.pinned_saliency},
                 {"p0", {s.bank.p0_psi_f, s.bank.p0_saliency}}};
  doc["es"] = {{"f_inj", s.es.f_inj}, {"a_inj", s.es.a_inj}, {"k_int", s.es.k_int}};
  doc["observer"] = {{"omega_min", s.observer.omega_min},
                     {"tau_f", s.observer.tau_f},
                     {"tau_c", s.observer.tau_c},
                     {"settle_step", s.observer.settle_step}};
  doc["timeline"] = timeline_json(cfg.timeline);
  return doc;
}

json default_config_json() { return to_json(RunConfig{}); }

RunConfig run_config_from_json(const json& user) {
  if (!user.is_object()) throw ConfigError("config root must be an object");
  const json defaults = default_config_json();
  json allowed_root = defaults;
  allowed_root["sweep"] = json::object();
  check_keys(user, "<root>", allowed_root);

  json doc = defaults;
  for (const auto& [key, value] : user.items()) {
    if (key == "sweep") continue;
    if (key == "timeline") {
      doc[key] = value;
      continue;
    }
    check_keys(value, key, defaults.at(key));
    // A user "motor" without "nominal" means the controllers know the true machine.
    for (const auto& [k, v] : value.items()) doc[key][k] = v;
  }
  if (user.contains("motor") && !user.contains("nominal")) doc["nominal"] = doc["motor"];

  RunConfig cfg;
  SimulationConfig& s = cfg.sim;
  s.motor = motor_from(doc["motor"], "motor");
  s.nominal = motor_from(doc["nominal"], "nominal");

  const json& sim = doc["simulation"];
  s.plant_dt = get<double>(sim, "simulation", "plant_dt");
  s.control_period = get<double>(sim, "simulation", "control_period");
  s.divergence_factor = get<double>(sim, "simulation", "divergence_factor");
  s.load_ramp = get<double>(sim, "simulation", "load_ramp");
  s.initial_speed_rpm = get<double>(sim, "simulation", "initial_speed_rpm");
  s.current_noise_std = get<double>(sim, "simulation", "current_noise_std");
  s.seed = get<std::uint64_t>(sim, "simulation", "seed");

  const json& foc = doc["foc"];
  s.foc.current_bandwidth_hz = get<double>(foc, "foc", "current_bandwidth_hz");
  s.foc.speed_bandwidth_hz = get<double>(foc, "foc", "speed_bandwidth_hz");
  s.foc.speed_pi_zero_ratio = get<double>(foc, "foc", "speed_pi_zero_ratio");

  const json& dc = doc["dcee"];
  s.dcee.k_x = get<double>(dc, "dcee", "k_x");
  s.dcee.delta_x = get<double>(dc, "dcee", "delta_x");
  s.dcee.saturation_tick_limit = get<int>(dc, "dcee", "saturation_tick_limit");
  s.dcee.t_s = s.control_period;

  const json& bk = doc["bank"];
  s.bank.count = get<int>(bk, "bank", "count");
  s.bank.lambda = get<double>(bk, "bank", "lambda");
  s.bank.psi_f_guess = get<double>(bk, "bank", "psi_f_guess");
  s.bank.saliency_guess = get<double>(bk, "bank", "saliency_guess");
  const auto psi_spread = get<std::vector<double>>(bk, "bank", "psi_f_spread");
  const auto sal_spread = get<std::vector<double>>(bk, "bank", "saliency_spread");
  const auto p0 = get<std::vector<double>>(bk, "bank", "p0");
  if (psi_spread.size() != 2 || sal_spread.size() != 2 || p0.size() != 2) {
    throw ConfigError("bank.psi_f_spread, bank.saliency_spread and bank.p0 need two entries");
  }
  s.bank.psi_f_spread_lo = psi_spread[0];
  s.bank.psi_f_spread_hi = psi_spread[1];
  s.bank.saliency_spread_lo = sal_spread[0];
  s.bank.saliency_spread_hi = sal_spread[1];
  s.bank.pin_first = get<bool>(bk, "bank", "pin_first");
  s.bank.pinned_psi_f = get<double>(bk, "bank", "pinned_psi_f");
  s.bank.pinned_saliency = get<double>(bk, "bank", "pinned_saliency");
  s.bank.p0_psi_f = p0[0];
  s.bank.p0_saliency = p0[1];

  const json& es = doc["es"];
  s.es.f_inj = get<double>(es, "es", "f_inj");
  s.es.a_inj = get<double>(es, "es", "a_inj");
  s.es.k_int = get<double>(es, "es", "k_int");

  const json& ob = doc["observer"];
  s.observer.omega_min = get<double>(ob, "observer", "omega_min");
  s.observer.tau_f = get<double>(ob, "observer", "tau_f");
  s.observer.tau_c = get<double>(ob, "observer", "tau_c");
  s.observer.settle_step = get<double>(ob, "observer", "settle_step");

  const json& tl = doc["timeline"];
  if (!tl.is_array()) throw ConfigError("timeline must be an array of segments");
  cfg.timeline.segments.clear();
  const json seg_keys = {{"t_start", 0}, {"t_end", 0}, {"speed_rpm", 0}, {"load", 0}, {"mode", 0}, {"torque_source", 0}};
  for (const json& js : tl) {
    check_keys(js, "timeline[]", seg_keys);
    Segment seg;
    seg.t_start = get<double>(js, "timeline[]", "t_start");
    seg.t_end = get<double>(js, "timeline[]", "t_end");
    seg.speed_ref_rpm = get<double>(js, "timeline[]", "speed_rpm");
    seg.load = get<double>(js, "timeline[]", "load");
    seg.mode = parse_mode(get<std::string>(js, "timeline[]", "mode"));
    seg.torque_source = js.contains("torque_source")
                            ? parse_torque_source(get<std::string>(js, "timeline[]", "torque_source"))
                            : TorqueSource::Ideal;
    cfg.timeline.segments.push_back(seg);
  }

  cfg.timeline.validate();
  cfg.sim.validate();
  return cfg;
}

json read_config_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path.string() + "'");
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
}

void set_dotted(json& doc, const std::string& key, const json& value) {
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw ConfigError("malformed key '" + key + "'");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    if (!node->contains(part)) (*node)[part] = json::object();
    node = &(*node)[part];
    start = dot + 1;
  }
}

std::vector<SweepAxis> sweep_axes(const json& doc) {
  std::vector<SweepAxis> axes;
  if (!doc.contains("sweep")) return axes;
  const json& sw = doc.at("sweep");
  if (!sw.is_object()) throw ConfigError("sweep must be an object of key -> array");
  for (const auto& [key, values] : sw.items()) {
    if (!values.is_array() || values.empty()) throw ConfigError("sweep." + key + " must be a non-empty array");
    axes.push_back({key, std::vector<json>(values.begin(), values.end())});
  }
  return axes;
}

std::vector<std::pair<std::string, json>> expand_sweep(const json& doc) {
  const auto axes = sweep_axes(doc);
  json base = doc;
  base.erase("sweep");

  std::vector<std::pair<std::string, json>> points{{"", base}};
  for (const SweepAxis& axis : axes) {
    std::vector<std::pair<std::string, json>> next;
    for (const auto& [label, pdoc] : points) {
      for (const json& v : axis.values) {
        json d = pdoc;
        set_dotted(d, axis.key, v);
        const std::string item = axis.key + "=" + (v.is_string() ? v.get<std::string>() : v.dump());
        next.emplace_back(label.empty() ? item : label + "," + item, std::move(d));
      }
    }
    points = std::move(next);
  }
  return points;
}

}  // namespace ipmsm
