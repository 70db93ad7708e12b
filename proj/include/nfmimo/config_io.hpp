#pragma once

// JSON forms of arrays, grids and imaging configs.
//
// Array file:  {"tx": [[x,y,z], ...], "rx": [[x,y,z], ...]}   (meters)
// Config file: {"array": <inline array object | path string | {"mills_cross": {...}}>,
//               "f_min_hz": ..., "f_max_hz": ..., "n_steps": ...,
//               "grid": {"nx","ny","nz","dx_m","dy_m","dz_m","center_m":[x,y,z]},
//               "pulse_spectrum": [[re, im], ...]   (optional)}

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <nlohmann/json.hpp>

#include "nfmimo/error.hpp"
#include "nfmimo/geometry.hpp"

namespace nfmimo {

using json = nlohmann::json;

inline json point_to_json(const Point3& p) { return json::array({p.x, p.y, p.z}); }

inline Point3 point_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number())
    throw FormatError(what + ": expected [x, y, z] in meters");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline json array_to_json(const AntennaArray& a) {
  json j;
  j["tx"] = json::array();
  j["rx"] = json::array();
  for (const Point3& p : a.tx) j["tx"].push_back(point_to_json(p));
  for (const Point3& p : a.rx) j["rx"].push_back(point_to_json(p));
  return j;
}

/// Parses an array object. z coordinates are forced to 0 (with a warning when |z| > 1e-9 m).
inline AntennaArray array_from_json(const json& j, std::ostream& warn = std::cerr) {
  if (!j.is_object()) throw FormatError("antenna array must be a JSON object");
  AntennaArray a;
  for (const char* key : {"tx", "rx"}) {
    if (!j.contains(key) || !j.at(key).is_array()) throw FormatError(std::string("antenna array needs a '") + key + "' list");
    auto& list = std::string(key) == "tx" ? a.tx : a.rx;
    std::size_t i = 0;
    for (const json& row : j.at(key)) {
      Point3 p = point_from_json(row, std::string(key) + "[" + std::to_string(i) + "]");
      if (std::abs(p.z) > 1e-9)
        warn << "warning: " << key << "[" << i << "] has z = " << p.z << " m; forcing z = 0\n";
      p.z = 0.0;
      list.push_back(p);
      ++i;
    }
    if (list.empty()) throw FormatError(std::string("antenna list '") + key + "' is empty");
  }
  try {
    a.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
  return a;
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what(), e.byte);
  }
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("short write to " + path.string());
}

inline AntennaArray load_array(const std::filesystem::path& path, std::ostream& warn = std::cerr) {
  return array_from_json(read_json_file(path), warn);
}

inline json grid_to_json(const VoxelGrid& g) {
  return {{"nx", g.nx}, {"ny", g.ny}, {"nz", g.nz}, {"dx_m", g.dx}, {"dy_m", g.dy}, {"dz_m", g.dz},
          {"center_m", point_to_json(g.center)}};
}

inline VoxelGrid grid_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("grid must be a JSON object");
  VoxelGrid g;
  try {
    g.nx = j.at("nx").get<std::size_t>();
    g.ny = j.at("ny").get<std::size_t>();
    g.nz = j.at("nz").get<std::size_t>();
    g.dx = j.at("dx_m").get<double>();
    g.dy = j.at("dy_m").get<double>();
    g.dz = j.at("dz_m").get<double>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("grid: ") + e.what());
  }
  g.center = point_from_json(j.value("center_m", json::array({0.0, 0.0, 0.0})), "grid.center_m");
  try {
    g.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
  return g;
}

inline json config_to_json(const ImagingConfig& c) {
  json j;
  j["array"] = array_to_json(c.array);
  j["f_min_hz"] = c.freqs.f_min_hz;
  j["f_max_hz"] = c.freqs.f_max_hz;
  j["n_steps"] = c.freqs.n_steps;
  j["grid"] = grid_to_json(c.grid);
  if (!c.pulse_spectrum.empty()) {
    json p = json::array();
    for (const auto& v : c.pulse_spectrum) p.push_back(json::array({v.real(), v.imag()}));
    j["pulse_spectrum"] = p;
  }
  return j;
}

/// `base_dir` resolves a relative array path.
inline ImagingConfig config_from_json(const json& j, const std::filesystem::path& base_dir = {},
                                      std::ostream& warn = std::cerr) {
  if (!j.is_object()) throw FormatError("config must be a JSON object");
  ImagingConfig c;
  if (!j.contains("array")) throw FormatError("config is missing 'array'");
  const json& a = j.at("array");
  if (a.is_string()) {
    std::filesystem::path p = a.get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    c.array = load_array(p, warn);
  } else if (a.is_object() && a.contains("mills_cross")) {
    const json& mc = a.at("mills_cross");
    try {
      c.array = mills_cross(mc.at("width_m").get<double>(), mc.at("n_tx").get<std::size_t>(),
                            mc.at("n_rx").get<std::size_t>());
    } catch (const json::exception& e) {
      throw FormatError(std::string("array.mills_cross: ") + e.what());
    }
  } else {
    c.array = array_from_json(a, warn);
  }
  try {
    c.freqs.f_min_hz = j.at("f_min_hz").get<double>();
    c.freqs.f_max_hz = j.at("f_max_hz").get<double>();
    c.freqs.n_steps = j.at("n_steps").get<std::size_t>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("config frequencies: ") + e.what());
  }
  if (!j.contains("grid")) throw FormatError("config is missing 'grid'");
  c.grid = grid_from_json(j.at("grid"));
  if (j.contains("pulse_spectrum")) {
    for (const json& v : j.at("pulse_spectrum")) {
      if (!v.is_array() || v.size() != 2) throw FormatError("pulse_spectrum entries must be [re, im]");
      c.pulse_spectrum.emplace_back(v[0].get<double>(), v[1].get<double>());
    }
  }
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("invalid config: ") + e.what());
  }
  return c;
}

inline ImagingConfig load_config(const std::filesystem::path& path, std::ostream& warn = std::cerr) {
  return config_from_json(read_json_file(path), path.parent_path(), warn);
}

/// FNV-1a 64 of the canonical JSON form, as 16 hex digits.
inline std::string config_hash(const ImagingConfig& c) {
  const std::string text = config_to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace nfmimo
