// Copyright 2026 The volaug Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VOLAUG_CONFIG_HPP
#define VOLAUG_CONFIG_HPP

// Pipeline configuration document. Every key is optional; missing keys take
// the defaults shown by `default_config_json()`.
//
//   {
//     "modality": "ct",
//     "normalize_input": false,
//     "geometry":  {"enabled": true, "translation_vox": 20, "rotation_rad": 0.35,
//                   "scale": [0.8, 1.2], "elastic_vox": 15},
//     "intensity": {"enabled": true, "shift": 0.2, "scale_ct": [0.8, 1.2], "scale_mr": [0.6, 1.4]},
//     "src":       {"enabled": true, "blend": true, "alpha_mode": "uniform", "alpha": 1.0,
//                   "sigma": 1.0, "kernel_size": 5},
//     "sm":        {"n_bins": 2048, "range": null}
//   }

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>

#include "json.hpp"
#include "volaug/error.hpp"
#include "volaug/intensity.hpp"
#include "volaug/source_match.hpp"
#include "volaug/src_augment.hpp"

namespace volaug {

struct PipelineConfig {
  AugmentConfig augment{};
  /// Apply the modality's intensity normalization before augmentation.
  bool normalize_input = false;
  std::size_t sm_bins = kDefaultBins;
  /// Overrides the modality's default SM range when set.
  std::optional<std::array<double, 2>> sm_range;
  std::optional<std::uint64_t> seed;

  Modality modality() const { return augment.modality; }

  SMConfig sm_config() const {
    SMConfig c = SMConfig::for_modality(augment.modality, sm_bins);
    if (sm_range) {
      c.range_lo = (*sm_range)[0];
      c.range_hi = (*sm_range)[1];
    }
    return c;
  }
};

namespace detail {

inline void check_keys(const nlohmann::json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.contains(key)) throw ConfigError("unknown config key '" + where + "." + key + "'");
}

inline std::array<double, 2> read_pair(const nlohmann::json& v, const std::string& what) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ConfigError(what + " must be a two-element numeric array");
  std::array<double, 2> p{v[0].get<double>(), v[1].get<double>()};
  if (!(p[0] <= p[1])) throw ConfigError(what + " must satisfy lo <= hi");
  return p;
}

inline double read_nonneg(const nlohmann::json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError(where + "." + key + " must be a number");
  const double v = obj[key].get<double>();
  if (!(v >= 0.0)) throw ConfigError(where + "." + key + " must be >= 0");
  return v;
}

inline bool read_bool(const nlohmann::json& obj, const char* key, bool fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) throw ConfigError(where + "." + key + " must be a boolean");
  return obj[key].get<bool>();
}

}  // namespace detail

inline PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
  using detail::check_keys;
  PipelineConfig c;
  check_keys(j, {"modality", "normalize_input", "seed", "geometry", "intensity", "src", "sm"}, "config");
  try {
    if (j.contains("modality")) c.augment.modality = parse_modality(j["modality"].get<std::string>());
    c.normalize_input = detail::read_bool(j, "normalize_input", false, "config");
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();

    if (j.contains("geometry")) {
      const auto& g = j["geometry"];
      check_keys(g, {"enabled", "translation_vox", "rotation_rad", "scale", "elastic_vox"}, "geometry");
      auto& r = c.augment.geometry;
      c.augment.geometry_enabled = detail::read_bool(g, "enabled", true, "geometry");
      r.translation = detail::read_nonneg(g, "translation_vox", r.translation, "geometry");
      r.rotation = detail::read_nonneg(g, "rotation_rad", r.rotation, "geometry");
      r.elastic = detail::read_nonneg(g, "elastic_vox", r.elastic, "geometry");
      if (g.contains("scale")) {
        const auto s = detail::read_pair(g["scale"], "geometry.scale");
        if (!(s[0] > 0.0)) throw ConfigError("geometry.scale must be positive");
        r.scale_min = s[0];
        r.scale_max = s[1];
      }
    }
    if (j.contains("intensity")) {
      const auto& t = j["intensity"];
      check_keys(t, {"enabled", "shift", "scale_ct", "scale_mr"}, "intensity");
      auto& r = c.augment.jitter;
      c.augment.jitter_enabled = detail::read_bool(t, "enabled", true, "intensity");
      r.shift = detail::read_nonneg(t, "shift", r.shift, "intensity");
      if (t.contains("scale_ct")) {
        const auto s = detail::read_pair(t["scale_ct"], "intensity.scale_ct");
        r.scale_ct_min = s[0];
        r.scale_ct_max = s[1];
      }
      if (t.contains("scale_mr")) {
        const auto s = detail::read_pair(t["scale_mr"], "intensity.scale_mr");
        r.scale_mr_min = s[0];
        r.scale_mr_max = s[1];
      }
    }
    if (j.contains("src")) {
      const auto& s = j["src"];
      check_keys(s, {"enabled", "blend", "alpha_mode", "alpha", "sigma", "kernel_size"}, "src");
      c.augment.src_enabled = detail::read_bool(s, "enabled", true, "src");
      c.augment.src_blend = detail::read_bool(s, "blend", true, "src");
      if (s.contains("alpha_mode")) {
        const auto m = s["alpha_mode"].get<std::string>();
        if (m == "uniform") {
          c.augment.alpha_mode = AlphaMode::Uniform;
        } else if (m == "fixed") {
          c.augment.alpha_mode = AlphaMode::Fixed;
        } else {
          throw ConfigError("src.alpha_mode must be 'uniform' or 'fixed'");
        }
      }
      c.augment.alpha = detail::read_nonneg(s, "alpha", c.augment.alpha, "src");
      if (c.augment.alpha > 1.0) throw ConfigError("src.alpha must lie in [0, 1]");
      c.augment.kernel.sigma = detail::read_nonneg(s, "sigma", c.augment.kernel.sigma, "src");
      if (s.contains("kernel_size")) c.augment.kernel.size = s["kernel_size"].get<int>();
      try {
        c.augment.kernel.validate();
      } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("src: ") + e.what());
      }
    }
    if (j.contains("sm")) {
      const auto& s = j["sm"];
      check_keys(s, {"n_bins", "range"}, "sm");
      if (s.contains("n_bins")) c.sm_bins = s["n_bins"].get<std::size_t>();
      if (s.contains("range") && !s["range"].is_null()) c.sm_range = detail::read_pair(s["range"], "sm.range");
      try {
        c.sm_config().validate();
      } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("sm: ") + e.what());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

inline nlohmann::json to_json(const PipelineConfig& c) {
  const auto& a = c.augment;
  nlohmann::json j;
  j["modality"] = std::string(to_string(a.modality));
  j["normalize_input"] = c.normalize_input;
  if (c.seed) j["seed"] = *c.seed;
  j["geometry"] = {{"enabled", a.geometry_enabled},
                   {"translation_vox", a.geometry.translation},
                   {"rotation_rad", a.geometry.rotation},
                   {"scale", {a.geometry.scale_min, a.geometry.scale_max}},
                   {"elastic_vox", a.geometry.elastic}};
  j["intensity"] = {{"enabled", a.jitter_enabled},
                    {"shift", a.jitter.shift},
                    {"scale_ct", {a.jitter.scale_ct_min, a.jitter.scale_ct_max}},
                    {"scale_mr", {a.jitter.scale_mr_min, a.jitter.scale_mr_max}}};
  j["src"] = {{"enabled", a.src_enabled},
              {"blend", a.src_blend},
              {"alpha_mode", a.alpha_mode == AlphaMode::Uniform ? "uniform" : "fixed"},
              {"alpha", a.alpha},
              {"sigma", a.kernel.sigma},
              {"kernel_size", a.kernel.size}};
  j["sm"] = {{"n_bins", c.sm_bins},
             {"range", c.sm_range ? nlohmann::json({(*c.sm_range)[0], (*c.sm_range)[1]}) : nlohmann::json(nullptr)}};
  return j;
}

inline nlohmann::json default_config_json() { return to_json(PipelineConfig{}); }

inline PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return pipeline_config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
}

}  // namespace volaug

#endif  // VOLAUG_CONFIG_HPP
