#pragma once

// Flat JSON key-value configuration of the sampler. Every field of
// SamplerConfig is addressable; unknown keys and wrongly typed values are
// errors that name the key.

#include "nlps/sampler.hpp"

#include <json.hpp>

#include <fstream>
#include <functional>
#include <map>
#include <string>

namespace nlps {

using Json = nlohmann::json;

namespace detail {

inline double json_number(const Json& v, const std::string& key) {
  if (!v.is_number()) throw Error("config key '" + key + "' must be a number");
  return v.get<double>();
}

inline int json_int(const Json& v, const std::string& key) {
  if (!v.is_number_integer()) throw Error("config key '" + key + "' must be an integer");
  return v.get<int>();
}

inline std::uint64_t json_count(const Json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    throw Error("config key '" + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

inline bool json_bool(const Json& v, const std::string& key) {
  if (!v.is_boolean()) throw Error("config key '" + key + "' must be true or false");
  return v.get<bool>();
}

inline std::string json_string(const Json& v, const std::string& key) {
  if (!v.is_string()) throw Error("config key '" + key + "' must be a string");
  return v.get<std::string>();
}

inline std::optional<double> json_opt_number(const Json& v, const std::string& key) {
  if (v.is_null()) return std::nullopt;
  return json_number(v, key);
}

using Setter = std::function<void(SamplerConfig&, const Json&, const std::string&)>;

inline const std::map<std::string, Setter>& config_setters() {
  static const std::map<std::string, Setter> setters = {
      {"seeding", [](SamplerConfig& c, const Json& v, const std::string& k) { c.seeding = parse_seeding(json_string(v, k)); }},
      {"candidates", [](SamplerConfig& c, const Json& v, const std::string& k) { c.candidates = json_int(v, k); }},
      {"K_down", [](SamplerConfig& c, const Json& v, const std::string& k) { c.K_down = json_int(v, k); }},
      {"epsilon", [](SamplerConfig& c, const Json& v, const std::string& k) { c.epsilon = json_number(v, k); }},
      {"max_samples", [](SamplerConfig& c, const Json& v, const std::string& k) { c.max_samples = json_count(v, k); }},
      {"max_evals", [](SamplerConfig& c, const Json& v, const std::string& k) { c.max_evals = json_count(v, k); }},
      {"downhill.preset",
       [](SamplerConfig& c, const Json& v, const std::string& k) {
         const auto s = json_string(v, k);
         if (s != "gn-over") throw Error("config key '" + k + "': unknown preset '" + s + "'");
         c.downhill = gn_over_preset();
       }},
      {"downhill.direction", [](SamplerConfig& c, const Json& v, const std::string& k) { c.downhill.direction = parse_direction(json_string(v, k)); }},
      {"downhill.noise", [](SamplerConfig& c, const Json& v, const std::string& k) { c.downhill.noise = parse_noise(json_string(v, k)); }},
      {"downhill.reject", [](SamplerConfig& c, const Json& v, const std::string& k) { c.downhill.reject = parse_reject(json_string(v, k)); }},
      {"downhill.alpha", [](SamplerConfig& c, const Json& v, const std::string& k) { c.downhill.alpha = json_opt_number(v, k); }},
      {"downhill.sigma", [](SamplerConfig& c, const Json& v, const std::string& k) { c.downhill.sigma = json_opt_number(v, k); }},
      {"downhill.rho", [](SamplerConfig& c, const Json& v, const std::string& k) { c.downhill.rho = json_number(v, k); }},
      {"downhill.lambda", [](SamplerConfig& c, const Json& v, const std::string& k) { c.downhill.lambda = json_number(v, k); }},
      {"downhill.delta_max", [](SamplerConfig& c, const Json& v, const std::string& k) { c.downhill.delta_max = json_opt_number(v, k); }},
      {"downhill.langevin_tied", [](SamplerConfig& c, const Json& v, const std::string& k) { c.downhill.langevin_tied = json_bool(v, k); }},
      {"interior.method", [](SamplerConfig& c, const Json& v, const std::string& k) { c.interior.method = parse_interior_method(json_string(v, k)); }},
      {"interior.K_burn", [](SamplerConfig& c, const Json& v, const std::string& k) { c.interior.K_burn = json_int(v, k); }},
      {"interior.K_sam", [](SamplerConfig& c, const Json& v, const std::string& k) { c.interior.K_sam = json_int(v, k); }},
      {"interior.delta_max", [](SamplerConfig& c, const Json& v, const std::string& k) { c.interior.delta_max = json_opt_number(v, k); }},
      {"interior.eps_margin", [](SamplerConfig& c, const Json& v, const std::string& k) { c.interior.eps_margin = json_number(v, k); }},
      {"interior.mu", [](SamplerConfig& c, const Json& v, const std::string& k) { c.interior.mu = json_number(v, k); }},
      {"interior.alpha", [](SamplerConfig& c, const Json& v, const std::string& k) { c.interior.alpha = json_opt_number(v, k); }},
      {"interior.sigma", [](SamplerConfig& c, const Json& v, const std::string& k) { c.interior.sigma = json_opt_number(v, k); }},
      {"interior.alpha_grow", [](SamplerConfig& c, const Json& v, const std::string& k) { c.interior.alpha_grow = json_opt_number(v, k); }},
      {"interior.lambda", [](SamplerConfig& c, const Json& v, const std::string& k) { c.interior.lambda = json_number(v, k); }},
      {"interior.nhr_init_clip", [](SamplerConfig& c, const Json& v, const std::string& k) { c.interior.nhr_init_clip = json_bool(v, k); }},
      {"interior.nhr_max_inner", [](SamplerConfig& c, const Json& v, const std::string& k) { c.interior.nhr_max_inner = json_int(v, k); }},
      {"interior.eps_proj", [](SamplerConfig& c, const Json& v, const std::string& k) { c.interior.eps_proj = json_number(v, k); }},
      {"slack_reduce.lambda", [](SamplerConfig& c, const Json& v, const std::string& k) { c.slack_reduce.lambda = json_number(v, k); }},
      {"slack_reduce.max_iters", [](SamplerConfig& c, const Json& v, const std::string& k) { c.slack_reduce.max_iters = json_int(v, k); }},
      {"slack_reduce.delta_max", [](SamplerConfig& c, const Json& v, const std::string& k) { c.slack_reduce.delta_max = json_opt_number(v, k); }},
  };
  return setters;
}

}  // namespace detail

/// Applies a flat JSON object on top of `base`. "downhill.preset" is applied
/// before the other keys so that they can refine it.
inline SamplerConfig apply_config(SamplerConfig base, const Json& j) {
  if (!j.is_object()) throw Error("config must be a JSON object");
  const auto& setters = detail::config_setters();
  if (j.contains("downhill.preset")) setters.at("downhill.preset")(base, j.at("downhill.preset"), "downhill.preset");
  for (const auto& [key, value] : j.items()) {
    if (key == "downhill.preset") continue;
    const auto it = setters.find(key);
    if (it == setters.end()) throw Error("unknown config key '" + key + "'");
    it->second(base, value, key);
  }
  return base;
}

inline SamplerConfig load_config(const std::string& path, SamplerConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw Error("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return apply_config(std::move(base), j);
}

/// Echo of every configuration field; unset scale-dependent values are null.
inline Json config_to_json(const SamplerConfig& c) {
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  Json j = Json::object();
  j["seeding"] = to_string(c.seeding);
  j["candidates"] = c.candidates;
  j["K_down"] = c.K_down;
  j["epsilon"] = c.epsilon;
  j["max_samples"] = c.max_samples;
  j["max_evals"] = c.max_evals;
  j["downhill.direction"] = to_string(c.downhill.direction);
  j["downhill.noise"] = to_string(c.downhill.noise);
  j["downhill.reject"] = to_string(c.downhill.reject);
  j["downhill.alpha"] = opt(c.downhill.alpha);
  j["downhill.sigma"] = opt(c.downhill.sigma);
  j["downhill.rho"] = c.downhill.rho;
  j["downhill.lambda"] = c.downhill.lambda;
  j["downhill.delta_max"] = opt(c.downhill.delta_max);
  j["downhill.langevin_tied"] = c.downhill.langevin_tied;
  j["interior.method"] = to_string(c.interior.method);
  j["interior.K_burn"] = c.interior.K_burn;
  j["interior.K_sam"] = c.interior.K_sam;
  j["interior.delta_max"] = opt(c.interior.delta_max);
  j["interior.eps_margin"] = c.interior.eps_margin;
  j["interior.mu"] = c.interior.mu;
  j["interior.alpha"] = opt(c.interior.alpha);
  j["interior.sigma"] = opt(c.interior.sigma);
  j["interior.alpha_grow"] = opt(c.interior.alpha_grow);
  j["interior.lambda"] = c.interior.lambda;
  j["interior.nhr_init_clip"] = c.interior.nhr_init_clip;
  j["interior.nhr_max_inner"] = c.interior.nhr_max_inner;
  j["interior.eps_proj"] = c.interior.eps_proj;
  j["slack_reduce.lambda"] = c.slack_reduce.lambda;
  j["slack_reduce.max_iters"] = c.slack_reduce.max_iters;
  j["slack_reduce.delta_max"] = opt(c.slack_reduce.delta_max);
  return j;
}

}  // namespace nlps
