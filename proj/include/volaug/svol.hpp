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

#ifndef VOLAUG_SVOL_HPP
#define VOLAUG_SVOL_HPP

// SVOL container: `<name>.svol.json` header plus a raw little-endian payload.
//
//   {"dims":[x,y,z], "spacing_mm":[sx,sy,sz], "dtype":"f32"|"u16",
//    "byte_order":"le", "data":"<name>.svol.bin"}
//
// The payload path in "data" is resolved relative to the header's directory.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "json.hpp"
#include "volaug/error.hpp"
#include "volaug/grid.hpp"

namespace volaug {

struct SvolHeader {
  Dims dims;
  Spacing spacing{1.0, 1.0, 1.0};
  std::string dtype;
  std::string byte_order = "le";
  std::string data;
};

/** Header path for `path`: used as-is when it ends in ".svol.json", otherwise the suffix is appended. */
inline std::filesystem::path svol_header_path(const std::filesystem::path& path) {
  const std::string s = path.string();
  constexpr std::string_view suffix = ".svol.json";
  if (s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) return path;
  return std::filesystem::path(s + std::string(suffix));
}

inline nlohmann::json to_json(const SvolHeader& h) {
  nlohmann::json j;
  j["dims"] = {h.dims.x, h.dims.y, h.dims.z};
  j["spacing_mm"] = {h.spacing[0], h.spacing[1], h.spacing[2]};
  j["dtype"] = h.dtype;
  j["byte_order"] = h.byte_order;
  j["data"] = h.data;
  return j;
}

inline SvolHeader svol_header_from_json(const nlohmann::json& j) {
  SvolHeader h;
  try {
    const auto& dims = j.at("dims");
    const auto& sp = j.at("spacing_mm");
    if (!dims.is_array() || dims.size() != 3 || !sp.is_array() || sp.size() != 3)
      throw DataError("SVOL header: dims and spacing_mm must be 3-element arrays");
    for (const auto& d : dims)
      if (!d.is_number_integer() || d.get<std::int64_t>() <= 0)
        throw DataError("SVOL header: dims must be positive integers");
    h.dims = {dims[0].get<std::size_t>(), dims[1].get<std::size_t>(), dims[2].get<std::size_t>()};
    for (int a = 0; a < 3; ++a) {
      if (!sp[a].is_number()) throw DataError("SVOL header: spacing_mm must be numeric");
      h.spacing[a] = sp[a].get<double>();
      if (!(h.spacing[a] > 0.0)) throw DataError("SVOL header: spacing_mm must be positive");
    }
    h.dtype = j.at("dtype").get<std::string>();
    h.byte_order = j.at("byte_order").get<std::string>();
    h.data = j.at("data").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("SVOL header: ") + e.what());
  }
  if (h.dtype != "f32" && h.dtype != "u16") throw DataError("SVOL header: unsupported dtype '" + h.dtype + "'");
  if (h.byte_order != "le") throw DataError("SVOL header: unsupported byte_order '" + h.byte_order + "'");
  return h;
}

inline SvolHeader read_svol_header(const std::filesystem::path& path) {
  const auto header_path = svol_header_path(path);
  std::ifstream in(header_path);
  if (!in) throw IoError("cannot open SVOL header " + header_path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("SVOL header " + header_path.string() + " is not valid JSON: " + e.what());
  }
  return svol_header_from_json(j);
}

namespace detail {

template <class T>
T byteswap_value(T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  std::memcpy(&v, b, sizeof(T));
  return v;
}

template <class T>
std::vector<T> read_payload(const std::filesystem::path& header_path, const SvolHeader& h) {
  const auto payload = header_path.parent_path() / h.data;
  std::ifstream in(payload, std::ios::binary);
  if (!in) throw IoError("cannot open SVOL payload " + payload.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::size_t expected = h.dims.voxels() * sizeof(T);
  if (bytes.size() != expected)
    throw DataError("SVOL payload " + payload.string() + " has " + std::to_string(bytes.size()) +
                    " bytes, header declares " + std::to_string(expected));
  std::vector<T> values(h.dims.voxels());
  std::memcpy(values.data(), bytes.data(), expected);
  if constexpr (std::endian::native == std::endian::big)
    for (auto& v : values) v = byteswap_value(v);
  return values;
}

template <class T>
void write_svol(const std::filesystem::path& path, Dims dims, Spacing spacing, const char* dtype,
                std::span<const T> values) {
  const auto header_path = svol_header_path(path);
  std::string stem = header_path.filename().string();
  stem.resize(stem.size() - std::string_view(".svol.json").size());
  SvolHeader h{dims, spacing, dtype, "le", stem + ".svol.bin"};
  {
    std::ofstream out(header_path.parent_path() / h.data, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write SVOL payload for " + header_path.string());
    if constexpr (std::endian::native == std::endian::big) {
      for (T v : values) {
        const T le = byteswap_value(v);
        out.write(reinterpret_cast<const char*>(&le), sizeof(T));
      }
    } else {
      out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
    }
    if (!out) throw IoError("failed writing SVOL payload for " + header_path.string());
  }
  std::ofstream out(header_path, std::ios::trunc);
  if (!out) throw IoError("cannot write SVOL header " + header_path.string());
  out << to_json(h).dump(2) << '\n';
  if (!out) throw IoError("failed writing SVOL header " + header_path.string());
}

}  // namespace detail

inline Volume load_volume(const std::filesystem::path& path) {
  const auto header_path = svol_header_path(path);
  const SvolHeader h = read_svol_header(header_path);
  if (h.dtype != "f32") throw DataError("load_volume: expected dtype f32, got " + h.dtype);
  auto values = detail::read_payload<float>(header_path, h);
  for (float v : values)
    if (!std::isfinite(v)) throw DataError("load_volume: payload contains non-finite values");
  return Volume(h.dims, h.spacing, std::move(values));
}

inline void save_volume(const Volume& vol, const std::filesystem::path& path) {
  detail::write_svol<float>(path, vol.dims(), vol.spacing(), "f32", vol.data());
}

inline LabelMap load_labels(const std::filesystem::path& path) {
  const auto header_path = svol_header_path(path);
  const SvolHeader h = read_svol_header(header_path);
  if (h.dtype != "u16") throw DataError("load_labels: expected dtype u16, got " + h.dtype);
  return LabelMap(h.dims, h.spacing, detail::read_payload<std::uint16_t>(header_path, h));
}

inline void save_labels(const LabelMap& labels, const std::filesystem::path& path) {
  detail::write_svol<std::uint16_t>(path, labels.dims(), labels.spacing(), "u16", labels.data());
}

}  // namespace volaug

#endif  // VOLAUG_SVOL_HPP
