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

#ifndef VOLAUG_GRID_HPP
#define VOLAUG_GRID_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "volaug/error.hpp"

namespace volaug {

/** Voxel extents of a grid. Linear index is x + dims.x * (y + dims.y * z). */
struct Dims {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t z = 0;

  constexpr std::size_t voxels() const { return x * y * z; }
  constexpr std::size_t index(std::size_t i, std::size_t j, std::size_t k) const { return i + x * (j + y * k); }
  constexpr std::size_t operator[](std::size_t axis) const { return axis == 0 ? x : axis == 1 ? y : z; }
  constexpr bool all_at_least(std::size_t n) const { return x >= n && y >= n && z >= n; }

  friend constexpr bool operator==(const Dims&, const Dims&) = default;
};

inline std::string to_string(const Dims& d) {
  return std::to_string(d.x) + "x" + std::to_string(d.y) + "x" + std::to_string(d.z);
}

/** Physical voxel size in mm per axis. */
using Spacing = std::array<double, 3>;

/** A physical point in mm; voxel (i, j, k) sits at (i*sx, j*sy, k*sz). */
using Point3 = std::array<double, 3>;

/**
 * Dense immutable 3D grid of scalars with physical spacing.
 *
 * Floating-point grids reject NaN/Inf at construction, so every Grid<float>
 * that exists is finite.
 */
template <class T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;

  Grid(Dims dims, Spacing spacing, std::vector<T> data)
      : dims_(dims), spacing_(spacing), data_(std::move(data)) {
    validate();
  }

  Grid(Dims dims, Spacing spacing, T fill) : Grid(dims, spacing, std::vector<T>(dims.voxels(), fill)) {}

  const Dims& dims() const { return dims_; }
  const Spacing& spacing() const { return spacing_; }
  std::size_t size() const { return data_.size(); }
  std::span<const T> data() const { return data_; }
  const std::vector<T>& values() const { return data_; }

  const T& operator[](std::size_t i) const { return data_[i]; }
  const T& at(std::size_t i, std::size_t j, std::size_t k) const { return data_[dims_.index(i, j, k)]; }

  /** True when dims and spacing are both identical. */
  template <class U>
  bool same_geometry(const Grid<U>& other) const {
    return dims_ == other.dims() && spacing_ == other.spacing();
  }

 private:
  void validate() const {
    if (dims_.x == 0 || dims_.y == 0 || dims_.z == 0)
      throw InvalidArgument("grid dims must be positive, got " + to_string(dims_));
    for (double s : spacing_)
      if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("grid spacing must be positive and finite");
    if (data_.size() != dims_.voxels())
      throw InvalidArgument("grid data length " + std::to_string(data_.size()) + " does not match dims " +
                            to_string(dims_));
    if constexpr (std::is_floating_point_v<T>) {
      for (T v : data_)
        if (!std::isfinite(v)) throw DataError("grid contains non-finite values");
    }
  }

  Dims dims_{};
  Spacing spacing_{1.0, 1.0, 1.0};
  std::vector<T> data_;
};

/** The image x: 32-bit float intensities. */
using Volume = Grid<float>;

/** Binary mask (0 or 1 per voxel). */
using Mask = Grid<std::uint8_t>;

/**
 * Integer label map. label_set() lists the distinct labels present, sorted;
 * background 0 is an ordinary member when present.
 */
class LabelMap : public Grid<std::uint16_t> {
 public:
  LabelMap() = default;

  LabelMap(Dims dims, Spacing spacing, std::vector<std::uint16_t> labels)
      : Grid<std::uint16_t>(dims, spacing, std::move(labels)) {
    std::vector<bool> seen(std::numeric_limits<std::uint16_t>::max() + 1, false);
    for (auto v : data()) seen[v] = true;
    for (std::size_t l = 0; l < seen.size(); ++l)
      if (seen[l]) label_set_.push_back(static_cast<std::uint16_t>(l));
  }

  LabelMap(Dims dims, Spacing spacing, std::uint16_t fill)
      : LabelMap(dims, spacing, std::vector<std::uint16_t>(dims.voxels(), fill)) {}

  const std::vector<std::uint16_t>& label_set() const { return label_set_; }

  bool contains(std::uint16_t label) const {
    return std::binary_search(label_set_.begin(), label_set_.end(), label);
  }

  Mask mask(std::uint16_t label) const {
    std::vector<std::uint8_t> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = (*this)[i] == label ? 1 : 0;
    return Mask(dims(), spacing(), std::move(out));
  }

 private:
  std::vector<std::uint16_t> label_set_;
};

/** Builds a LabelMap from wide integers, rejecting values outside the 16-bit label range. */
template <class Int>
  requires std::is_integral_v<Int>
LabelMap make_label_map(Dims dims, Spacing spacing, std::span<const Int> values) {
  std::vector<std::uint16_t> labels(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto v = values[i];
    if (v < 0 || static_cast<std::uint64_t>(v) > std::numeric_limits<std::uint16_t>::max())
      throw DataError("label value " + std::to_string(v) + " overflows the u16 label range");
    labels[i] = static_cast<std::uint16_t>(v);
  }
  return LabelMap(dims, spacing, std::move(labels));
}

/** Throws InvalidArgument unless the two grids share dims (and spacing when `check_spacing`). */
template <class A, class B>
void require_same_geometry(const Grid<A>& a, const Grid<B>& b, const char* what, bool check_spacing = true) {
  if (a.dims() != b.dims())
    throw InvalidArgument(std::string(what) + ": dims mismatch " + to_string(a.dims()) + " vs " + to_string(b.dims()));
  if (check_spacing && a.spacing() != b.spacing()) throw InvalidArgument(std::string(what) + ": spacing mismatch");
}

}  // namespace volaug

#endif  // VOLAUG_GRID_HPP
