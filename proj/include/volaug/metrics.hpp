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

#ifndef VOLAUG_METRICS_HPP
#define VOLAUG_METRICS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "volaug/error.hpp"
#include "volaug/grid.hpp"
#include "volaug/parallel.hpp"

namespace volaug {

// ---------------------------------------------------------------------------
// Overlap

/** Dice of one label; a label absent from both maps scores 1. */
inline double dice(const LabelMap& pred, const LabelMap& gt, std::uint16_t label) {
  require_same_geometry(pred, gt, "dice", false);
  std::size_t p = 0, g = 0, both = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool in_p = pred[i] == label, in_g = gt[i] == label;
    p += in_p;
    g += in_g;
    both += in_p && in_g;
  }
  if (p + g == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(p + g);
}

/** Dice for every label present in either map (background included). */
inline std::map<std::uint16_t, double> dice_per_label(const LabelMap& pred, const LabelMap& gt) {
  require_same_geometry(pred, gt, "dice_per_label", false);
  std::vector<std::uint16_t> labels;
  std::set_union(pred.label_set().begin(), pred.label_set().end(), gt.label_set().begin(), gt.label_set().end(),
                 std::back_inserter(labels));
  std::map<std::uint16_t, double> out;
  for (auto l : labels) out[l] = dice(pred, gt, l);
  return out;
}

// ---------------------------------------------------------------------------
// Surfaces and distances

struct SurfacePoint {
  std::array<std::int32_t, 3> voxel;
  std::array<double, 3> position_mm;
};

using SurfacePointSet = std::vector<SurfacePoint>;

/**
 * Foreground voxels with at least one 6-neighbour that is background or
 * outside the volume, in linear index order.
 */
inline SurfacePointSet extract_surface(const Mask& mask) {
  const Dims& d = mask.dims();
  const Spacing& sp = mask.spacing();
  SurfacePointSet out;
  for (std::size_t z = 0; z < d.z; ++z)
    for (std::size_t y = 0; y < d.y; ++y)
      for (std::size_t x = 0; x < d.x; ++x) {
        if (!mask.at(x, y, z)) continue;
        const bool border = x == 0 || y == 0 || z == 0 || x + 1 == d.x || y + 1 == d.y || z + 1 == d.z ||
                            !mask.at(x - 1, y, z) || !mask.at(x + 1, y, z) || !mask.at(x, y - 1, z) ||
                            !mask.at(x, y + 1, z) || !mask.at(x, y, z - 1) || !mask.at(x, y, z + 1);
        if (!border) continue;
        SurfacePoint p;
        p.voxel = {static_cast<std::int32_t>(x), static_cast<std::int32_t>(y), static_cast<std::int32_t>(z)};
        p.position_mm = {static_cast<double>(x) * sp[0], static_cast<double>(y) * sp[1], static_cast<double>(z) * sp[2]};
        out.push_back(p);
      }
  return out;
}

/** Squared physical distance between voxels, evaluated as sum over x, y, z of (delta * spacing)^2. */
inline double squared_distance_mm(const std::array<std::int32_t, 3>& a, const std::array<std::int32_t, 3>& b,
                                  const Spacing& sp) {
  const double dx = static_cast<double>(a[0] - b[0]) * sp[0];
  const double dy = static_cast<double>(a[1] - b[1]) * sp[1];
  const double dz = static_cast<double>(a[2] - b[2]) * sp[2];
  return dx * dx + dy * dy + dz * dz;
}

/**
 * Exact nearest-neighbour queries over a surface point set, bucketed into
 * cubic cells. Rings of cells are visited outward until no unvisited cell can
 * beat the current best, so results equal an exhaustive search.
 */
class SurfaceIndex {
 public:
  SurfaceIndex(const SurfacePointSet& points, Dims dims, Spacing spacing)
      : points_(points), spacing_(spacing), min_spacing_(std::min({spacing[0], spacing[1], spacing[2]})) {
    if (points_.empty()) throw UndefinedMetric("surface index over an empty surface");
    for (std::size_t a = 0; a < 3; ++a)
      cells_[a] = static_cast<std::int64_t>((dims[a] + kCell - 1) / kCell);
    buckets_.resize(static_cast<std::size_t>(cells_[0] * cells_[1] * cells_[2]));
    for (std::size_t i = 0; i < points_.size(); ++i) buckets_[cell_of(points_[i].voxel)].push_back(i);
  }

  double nearest_squared(const std::array<std::int32_t, 3>& q) const {
    std::array<std::int64_t, 3> qc{};
    for (int a = 0; a < 3; ++a) qc[a] = std::clamp<std::int64_t>(q[a] / kCell, 0, cells_[a] - 1);
    const std::int64_t max_ring = std::max({cells_[0], cells_[1], cells_[2]});
    double best = std::numeric_limits<double>::infinity();
    for (std::int64_t r = 0; r <= max_ring; ++r) {
      for (std::int64_t cz = qc[2] - r; cz <= qc[2] + r; ++cz) {
        if (cz < 0 || cz >= cells_[2]) continue;
        for (std::int64_t cy = qc[1] - r; cy <= qc[1] + r; ++cy) {
          if (cy < 0 || cy >= cells_[1]) continue;
          for (std::int64_t cx = qc[0] - r; cx <= qc[0] + r; ++cx) {
            if (cx < 0 || cx >= cells_[0]) continue;
            const std::int64_t ring = std::max({std::abs(cx - qc[0]), std::abs(cy - qc[1]), std::abs(cz - qc[2])});
            if (ring != r) continue;
            for (std::size_t i : buckets_[static_cast<std::size_t>(cx + cells_[0] * (cy + cells_[1] * cz))])
              best = std::min(best, squared_distance_mm(q, points_[i].voxel, spacing_));
          }
        }
      }
      // Any point in ring r+1 or beyond is at least r*kCell+1 voxels away along some axis.
      const double bound = static_cast<double>(r * kCell + 1) * min_spacing_;
      if (best <= bound * bound) break;
    }
    return best;
  }

 private:
  static constexpr std::int64_t kCell = 4;

  std::size_t cell_of(const std::array<std::int32_t, 3>& v) const {
    return static_cast<std::size_t>(v[0] / kCell + cells_[0] * (v[1] / kCell + cells_[1] * (v[2] / kCell)));
  }

  const SurfacePointSet& points_;
  Spacing spacing_;
  double min_spacing_;
  std::array<std::int64_t, 3> cells_{};
  std::vector<std::vector<std::size_t>> buckets_;
};

/** Distance from every point of `from` to its nearest point in `to`, in `from` order. */
inline std::vector<double> directed_surface_distances(const SurfacePointSet& from, const SurfacePointSet& to,
                                                      Dims dims, Spacing spacing) {
  const SurfaceIndex index(to, dims, spacing);
  std::vector<double> out(from.size());
  constexpr std::size_t kBlock = 256;
  parallel_for((from.size() + kBlock - 1) / kBlock, [&](std::size_t b) {
    const std::size_t end = std::min(from.size(), (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) out[i] = std::sqrt(index.nearest_squared(from[i].voxel));
  });
  return out;
}

namespace detail {
// Both directed distance lists: pred -> gt, then gt -> pred.
inline std::pair<std::vector<double>, std::vector<double>> directed_pair(const Mask& pred, const Mask& gt) {
  require_same_geometry(pred, gt, "surface distance");
  const auto sp = extract_surface(pred);
  const auto sg = extract_surface(gt);
  if (sp.empty() || sg.empty()) throw UndefinedMetric("surface distance undefined for an empty mask");
  return {directed_surface_distances(sp, sg, pred.dims(), pred.spacing()),
          directed_surface_distances(sg, sp, pred.dims(), pred.spacing())};
}

// Each direction is summed on its own and the two totals added, so swapping
// the arguments gives the bitwise-identical mean.
inline double symmetric_mean(const std::vector<double>& forward, const std::vector<double>& backward) {
  double a = 0.0, b = 0.0;
  for (double v : forward) a += v;
  for (double v : backward) b += v;
  return (a + b) / static_cast<double>(forward.size() + backward.size());
}
}  // namespace detail

/** Pooled distances: pred -> gt surface distances followed by gt -> pred. */
inline std::vector<double> pooled_surface_distances(const Mask& pred, const Mask& gt) {
  auto [out, back] = detail::directed_pair(pred, gt);
  out.insert(out.end(), back.begin(), back.end());
  return out;
}

/** Average symmetric surface distance in mm: the mean of the pooled distances. */
inline double assd(const Mask& pred, const Mask& gt) {
  const auto [forward, backward] = detail::directed_pair(pred, gt);
  return detail::symmetric_mean(forward, backward);
}

/** Nearest-rank percentile: the ceil(pct/100 * n)-th smallest value (1-based). */
inline double nearest_rank_percentile(std::vector<double> values, unsigned pct) {
  if (values.empty()) throw InvalidArgument("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  std::size_t rank = (pct * n + 99) / 100;
  rank = std::clamp<std::size_t>(rank, 1, n);
  return values[rank - 1];
}

/** 95th-percentile Hausdorff distance in mm over the pooled distances. */
inline double hd95(const Mask& pred, const Mask& gt) {
  return nearest_rank_percentile(pooled_surface_distances(pred, gt), 95);
}

// ---------------------------------------------------------------------------
// Reports

struct LabelScores {
  double dsc = 0.0;
  std::optional<double> assd_mm;
  std::optional<double> hd95_mm;
};

struct MeanScores {
  std::optional<double> dsc;
  std::optional<double> assd_mm;
  std::optional<double> hd95_mm;
};

struct MetricReport {
  std::map<std::uint16_t, LabelScores> per_label;
  MeanScores mean;
};

/**
 * Label means of each metric, background (label 0) excluded. Distance means
 * skip labels where the distance is undefined.
 */
inline MetricReport mean_report(std::map<std::uint16_t, LabelScores> per_label) {
  MetricReport r;
  r.per_label = std::move(per_label);
  double dsc = 0.0, assd_sum = 0.0, hd_sum = 0.0;
  std::size_t n = 0, n_assd = 0, n_hd = 0;
  for (const auto& [label, s] : r.per_label) {
    if (label == 0) continue;
    dsc += s.dsc;
    ++n;
    if (s.assd_mm) {
      assd_sum += *s.assd_mm;
      ++n_assd;
    }
    if (s.hd95_mm) {
      hd_sum += *s.hd95_mm;
      ++n_hd;
    }
  }
  if (n) r.mean.dsc = dsc / static_cast<double>(n);
  if (n_assd) r.mean.assd_mm = assd_sum / static_cast<double>(n_assd);
  if (n_hd) r.mean.hd95_mm = hd_sum / static_cast<double>(n_hd);
  return r;
}

/** Full report over the foreground labels of either map. Distances are null when a mask is empty. */
inline MetricReport evaluate(const LabelMap& pred, const LabelMap& gt) {
  require_same_geometry(pred, gt, "evaluate");
  std::map<std::uint16_t, LabelScores> per_label;
  for (const auto& [label, d] : dice_per_label(pred, gt)) {
    if (label == 0) continue;
    LabelScores s;
    s.dsc = d;
    const Mask mp = pred.mask(label), mg = gt.mask(label);
    if (pred.contains(label) && gt.contains(label)) {
      auto [forward, backward] = detail::directed_pair(mp, mg);
      s.assd_mm = detail::symmetric_mean(forward, backward);
      forward.insert(forward.end(), backward.begin(), backward.end());
      s.hd95_mm = nearest_rank_percentile(std::move(forward), 95);
    }
    per_label[label] = s;
  }
  return mean_report(std::move(per_label));
}

inline nlohmann::json to_json(const MetricReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json j;
  j["per_label"] = nlohmann::json::object();
  for (const auto& [label, s] : r.per_label)
    j["per_label"][std::to_string(label)] = {{"dsc", s.dsc}, {"assd_mm", opt(s.assd_mm)}, {"hd95_mm", opt(s.hd95_mm)}};
  j["mean"] = {{"dsc", opt(r.mean.dsc)}, {"assd_mm", opt(r.mean.assd_mm)}, {"hd95_mm", opt(r.mean.hd95_mm)}};
  return j;
}

/**
 * Structural check of a report document. Returns an empty string when valid,
 * otherwise a description of the first problem.
 */
inline std::string validate_report_json(const nlohmann::json& j) {
  auto metric_ok = [](const nlohmann::json& v, bool nullable, bool fraction) {
    if (v.is_null()) return nullable;
    if (!v.is_number()) return false;
    const double x = v.get<double>();
    return x >= 0.0 && (!fraction || x <= 1.0);
  };
  auto scores_ok = [&](const nlohmann::json& s, bool dsc_nullable) -> std::string {
    if (!s.is_object()) return "scores must be an object";
    for (const char* key : {"dsc", "assd_mm", "hd95_mm"})
      if (!s.contains(key)) return std::string("missing key ") + key;
    if (s.size() != 3) return "unexpected keys in scores";
    if (!metric_ok(s["dsc"], dsc_nullable, true)) return "dsc must be a fraction in [0, 1]";
    if (!metric_ok(s["assd_mm"], true, false)) return "assd_mm must be null or >= 0";
    if (!metric_ok(s["hd95_mm"], true, false)) return "hd95_mm must be null or >= 0";
    return {};
  };
  if (!j.is_object() || !j.contains("per_label") || !j.contains("mean") || j.size() != 2)
    return "report must be an object with exactly per_label and mean";
  if (!j["per_label"].is_object()) return "per_label must be an object";
  for (const auto& [key, s] : j["per_label"].items()) {
    if (key.empty() || !std::all_of(key.begin(), key.end(), [](char c) { return c >= '0' && c <= '9'; }))
      return "per_label keys must be label integers";
    if (auto e = scores_ok(s, false); !e.empty()) return "label " + key + ": " + e;
  }
  if (auto e = scores_ok(j["mean"], true); !e.empty()) return "mean: " + e;
  return {};
}

// ---------------------------------------------------------------------------
// Generalized Dice loss

/** Class scores s[c][p], stored class-major: scores[c * voxels + p]. */
struct SoftPrediction {
  std::size_t n_classes = 0;
  Dims dims;
  std::vector<double> scores;

  std::size_t voxels() const { return dims.voxels(); }
  double at(std::size_t c, std::size_t p) const { return scores[c * voxels() + p]; }

  /** Throws unless every voxel's scores lie in [0, 1] and sum to 1 within `tol`. */
  void check_simplex(double tol = 1e-5) const {
    for (std::size_t p = 0; p < voxels(); ++p) {
      double s = 0.0;
      for (std::size_t c = 0; c < n_classes; ++c) {
        const double v = at(c, p);
        if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("soft prediction scores must lie in [0, 1]");
        s += v;
      }
      if (std::abs(s - 1.0) > tol) throw InvalidArgument("soft prediction scores must sum to 1 per voxel");
    }
  }
};

struct DiceLoss {
  double loss = 0.0;
  std::vector<double> gradient;  ///< same layout as SoftPrediction::scores
};

/**
 * Generalized Dice loss
 *
 *     L = 1 - 2 * sum_c w_c sum_p r_cp s_cp / sum_c w_c sum_p (r_cp^2 + s_cp^2)
 *
 * with one-hot ground truth r, w_c = 1 / (sum_p r_cp)^2 and w_c = 0 for
 * classes absent from the ground truth. The gradient is analytic:
 *
 *     dL/ds_cp = -2 w_c (r_cp * D - 2 * N * s_cp) / D^2.
 *
 * Ground-truth labels index the classes directly.
 */
inline DiceLoss generalized_dice_loss(const SoftPrediction& pred, const LabelMap& gt, bool check_simplex = true) {
  if (pred.dims != gt.dims()) throw InvalidArgument("generalized_dice_loss: dims mismatch");
  if (pred.scores.size() != pred.n_classes * pred.voxels())
    throw InvalidArgument("generalized_dice_loss: score buffer has the wrong size");
  if (pred.n_classes == 0) throw UndefinedMetric("generalized_dice_loss: no classes");
  if (check_simplex) pred.check_simplex();
  const std::size_t n = pred.voxels(), C = pred.n_classes;
  std::vector<double> volume(C, 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    if (gt[p] >= C) throw InvalidArgument("generalized_dice_loss: ground-truth label exceeds class count");
    volume[gt[p]] += 1.0;
  }
  std::vector<double> w(C, 0.0);
  bool any = false;
  for (std::size_t c = 0; c < C; ++c)
    if (volume[c] > 0.0) {
      w[c] = 1.0 / (volume[c] * volume[c]);
      any = true;
    }
  if (!any) throw UndefinedMetric("generalized_dice_loss: ground truth has no labels");

  double num = 0.0, den = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    if (w[c] == 0.0) continue;
    double inter = 0.0, squares = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      const double s = pred.at(c, p);
      const double r = gt[p] == c ? 1.0 : 0.0;
      inter += r * s;
      squares += r * r + s * s;
    }
    num += w[c] * inter;
    den += w[c] * squares;
  }
  DiceLoss out;
  out.loss = 1.0 - 2.0 * num / den;
  out.gradient.assign(pred.scores.size(), 0.0);
  const double den2 = den * den;
  for (std::size_t c = 0; c < C; ++c) {
    if (w[c] == 0.0) continue;
    for (std::size_t p = 0; p < n; ++p) {
      const double r = gt[p] == c ? 1.0 : 0.0;
      out.gradient[c * n + p] = -2.0 * w[c] * (r * den - 2.0 * num * pred.at(c, p)) / den2;
    }
  }
  return out;
}

}  // namespace volaug

#endif  // VOLAUG_METRICS_HPP
