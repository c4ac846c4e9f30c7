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

// Acceptance runner. Each criterion prints one [PASS]/[FAIL] line; the exit
// status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "test_support.hpp"

namespace {

using namespace volaug;
namespace vt = volaug::testing;

const std::string kCli = VOLAUG_CLI_PATH;

// A failed check inside a criterion.
struct CheckFailed {
  std::string what;
};

void check(bool ok, const std::string& what) {
  if (!ok) throw CheckFailed{what};
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double max_rel_diff(const std::vector<double>& got, const std::vector<double>& ref) {
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    err = std::max(err, std::abs(got[i] - ref[i]));
    scale = std::max(scale, std::abs(ref[i]));
  }
  return scale > 0.0 ? err / scale : err;
}

std::vector<double> as_double(const Volume& v) { return {v.data().begin(), v.data().end()}; }

PhantomSpec random_spec(Rng& rng, std::uint64_t seed, std::size_t max_dim, int max_labels) {
  PhantomSpec s;
  s.seed = seed;
  s.dims = vt::random_dims(rng, 16, max_dim);
  s.n_labels = 2 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(max_labels - 1));
  s.shape_mode = rng.coin() ? ShapeMode::NestedEllipsoids : ShapeMode::Blobs;
  for (int i = 0; i < s.n_labels; ++i) s.intensity_table.push_back({rng.uniform(-1, 1), rng.uniform(0, 0.2)});
  return s;
}

// ---------------------------------------------------------------------------

std::string partition_of_unity() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1001);
  double worst = 0.0;
  std::size_t voxels = 0;
  for (std::uint64_t k = 0; k < 50; ++k) {
    PhantomSpec spec = random_spec(rng, k, 64, 8);
    if (k < 5) spec.dims = {64, 64, 64};
    Phantom ph;
    try {
      ph = make_phantom(spec);
    } catch (const DataError&) {
      // Some random specs cannot fit every label; fall back to a satisfiable shape.
      spec.shape_mode = ShapeMode::NestedEllipsoids;
      spec.dims = {64, 64, 64};
      ph = make_phantom(spec);
    }
    const auto maps = smooth_masks(ph.labels);
    check(maps.maps.size() == ph.labels.label_set().size(), "one map per label");
    for (std::size_t p = 0; p < ph.labels.size(); ++p) {
      double total = 0.0;
      for (const auto& m : maps.maps) {
        check(m[p] >= 0.0f && m[p] <= 1.0f, "map value outside [0, 1]");
        total += m[p];
      }
      worst = std::max(worst, std::abs(total - 1.0));
    }
    voxels += ph.labels.size();
  }
  const double elapsed = seconds_since(t0);
  check(worst <= 1e-5, "max |sum - 1| = " + fmt(worst));
  check(elapsed <= 30.0, "runtime " + fmt(elapsed) + " s");
  return "50 phantoms, " + std::to_string(voxels) + " voxels, max |sum-1| = " + fmt(worst) + ", " + fmt(elapsed) + " s";
}

std::string src_collapse_laws() {
  double worst_single = 0.0, worst_equal = 0.0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    Rng rng = Rng::stream(2002, k);
    const Dims d = vt::random_dims(rng, 6, 16);
    const Volume v = vt::random_volume(rng, d);
    const LabelMap many = vt::random_labels(rng, d, 2 + static_cast<int>(k % 6));
    const LabelMap single(d, {1, 1, 1}, static_cast<std::uint16_t>(k % 4));
    const auto net = sample_randconv(rng);
    const auto ref = as_double(apply_randconv(net, v));

    const NetsByLabel one{{single.label_set()[0], net}};
    worst_single = std::max(worst_single, max_rel_diff(as_double(src_blend(v, smooth_masks(single), one)), ref));
    worst_single = std::max(worst_single, max_rel_diff(as_double(src_binary(v, single, one)), ref));

    NetsByLabel same, random;
    for (auto l : many.label_set()) {
      same.emplace(l, net);
      random.emplace(l, sample_randconv(rng));
    }
    worst_equal = std::max(worst_equal, max_rel_diff(as_double(src_blend(v, smooth_masks(many), same)), ref));
    worst_equal = std::max(worst_equal, max_rel_diff(as_double(src_binary(v, many, same)), ref));

    const Volume hard = src_blend(v, smooth_masks(many, GaussianKernelSpec{1.0, 1}), random);
    const Volume binary = src_binary(v, many, random);
    for (std::size_t i = 0; i < v.size(); ++i) check(hard[i] == binary[i], "hard-mask blend differs from binary");
  }
  check(worst_single <= 1e-5, "single-label rel err " + fmt(worst_single));
  check(worst_equal <= 1e-5, "equal-nets rel err " + fmt(worst_equal));
  return "20 cases, single-label " + fmt(worst_single) + ", equal-nets " + fmt(worst_equal) + ", hard==binary exact";
}

std::string frobenius_preservation() {
  PhantomSpec spec;
  spec.dims = {32, 28, 24};
  spec.n_labels = 4;
  spec.intensity_table = {{-0.8, 0.05}, {-0.1, 0.05}, {0.3, 0.05}, {0.7, 0.05}};
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    spec.seed = s;
    const Phantom ph = make_phantom(spec);
    Rng rng = Rng::stream(3003, s);
    const auto r = augment_sample(ph.image, ph.labels, rng, AugmentConfig{});
    const double ref = frobenius_norm(r.post_cda);
    worst = std::max(worst, std::abs(frobenius_norm(r.image) - ref) / ref);
  }
  check(worst <= 1e-6, "rel err " + fmt(worst));
  return "20 seeds, max rel err " + fmt(worst);
}

std::string randconv_oracle() {
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    Rng rng = Rng::stream(4004, s);
    const auto net = sample_randconv(rng);
    const Volume v = vt::random_volume(rng, Dims{8, 8, 8});
    worst = std::max(worst, max_rel_diff(as_double(apply_randconv(net, v)), oracle::randconv(net, v)));
  }
  check(worst <= 1e-5, "rel err " + fmt(worst));
  return "10 inputs 8^3, max rel err " + fmt(worst);
}

Volume ct_phantom(std::uint64_t seed, Dims d, std::vector<TissueIntensity> table) {
  PhantomSpec spec;
  spec.seed = seed;
  spec.dims = d;
  spec.n_labels = static_cast<int>(table.size());
  spec.intensity_table = std::move(table);
  return preclip_ct(make_phantom(spec).image);
}

std::string sm_properties() {
  const SMConfig cfg = SMConfig::for_modality(Modality::CT);
  const Dims big{64, 64, 64};
  const std::vector<Volume> sources{ct_phantom(1, big, {{-500, 120}, {40, 90}, {450, 140}}),
                                    ct_phantom(2, big, {{-450, 110}, {80, 100}, {500, 120}})};
  const auto hist = fit_source_histogram(sources, cfg);

  // Monotonicity over 10^4 random ordered pairs inside one target image.
  Rng rng(5005);
  std::vector<float> pairs(20000);
  for (auto& v : pairs) v = static_cast<float>(rng.uniform(-1023, 1024));
  for (std::size_t i = 0; i < pairs.size(); i += 2)
    if (pairs[i] > pairs[i + 1]) std::swap(pairs[i], pairs[i + 1]);
  const Volume pv(Dims{100, 100, 2}, {1, 1, 1}, pairs);
  const Volume pm = apply_sm(pv, hist, cfg);
  for (std::size_t i = 0; i < pairs.size(); i += 2) check(pm[i] <= pm[i + 1], "monotonicity violated");

  // Self-match.
  const std::vector<Volume> self{sources[0]};
  const Volume sm_self = apply_sm(sources[0], fit_source_histogram(self, cfg), cfg);
  double self_dev = 0.0;
  for (std::size_t i = 0; i < sm_self.size(); ++i)
    self_dev = std::max(self_dev, std::abs(double{sm_self[i]} - sources[0][i]));
  const double width = hist.bin_width();
  check(self_dev <= width, "self-match deviation " + fmt(self_dev));

  // Distribution alignment on a continuous target: every tissue sits >= 4 sigma
  // inside the clip range so no mass piles up in the boundary bins.
  const Volume target = ct_phantom(3, big, {{-600, 100}, {-150, 130}, {350, 90}});
  const Volume matched = apply_sm(target, hist, cfg);
  const auto mc = compute_image_cdf(matched, cfg);
  double ks = 0.0;
  for (std::size_t i = 0; i < cfg.n_bins; ++i) ks = std::max(ks, std::abs(mc[i] - hist[i]));
  const double bound = 3.0 / static_cast<double>(cfg.n_bins) + 3.0 * std::sqrt(1.0 / static_cast<double>(target.size()));
  check(ks <= bound, "KS " + fmt(ks) + " > " + fmt(bound));

  // Worked example.
  const IntensityHistogram h({Modality::CT, 4, -0.5, 3.5}, {0.25, 0.5, 0.75, 1.0});
  check(inverse_quantile_index(h, 0.6) == 1 && inverse_quantile(h, 0.6) == 1.0, "worked example");
  return "10^4 pairs monotone, self-match " + fmt(self_dev) + " <= " + fmt(width) + ", KS " + fmt(ks) + " <= " +
         fmt(bound) + ", worked example bin 1";
}

int run(const std::string& cmd) { return vt::run_command(cmd).exit_code; }

// Monotone intensity remap between the two synthetic modalities; slope in [0.64, 1.14] on the source range.
double remap(double v) { return 100.0 + 0.9 * v + 0.0002 * v * v; }

std::string cross_modality_end_to_end() {
  const auto t0 = std::chrono::steady_clock::now();
  vt::TempDir tmp;
  vt::write_file(tmp / "spec.json", R"({"seed": 21, "dims": [48, 48, 48], "spacing_mm": [1, 1, 1], "n_labels": 3,
    "shape_mode": "nested-ellipsoids",
    "intensity_table": [{"mean": -400, "std": 60}, {"mean": 0, "std": 50}, {"mean": 350, "std": 60}]})");
  check(run(kCli + " synth --spec " + (tmp / "spec.json") + " --out " + (tmp / "src")) == 0, "synth failed");
  const Volume src = load_volume(tmp / "src_image.svol.json");
  const LabelMap labels = load_labels(tmp / "src_labels.svol.json");
  std::vector<float> t(src.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(remap(src[i]));
  save_volume(Volume(src.dims(), src.spacing(), t), tmp / "tgt");

  vt::write_file(tmp / "list.txt", "src_image.svol.json\n");
  check(run(kCli + " --modality ct fit-hist --list " + (tmp / "list.txt") + " --out " + (tmp / "h.json")) == 0,
        "fit-hist failed");
  check(run(kCli + " --modality ct match --image " + (tmp / "tgt.svol.json") + " --hist " + (tmp / "h.json") +
            " --out " + (tmp / "matched")) == 0,
        "match failed");
  const Volume matched = load_volume(tmp / "matched.svol.json");
  const Volume src_clipped = preclip_ct(src);

  double worst = 0.0;
  for (std::uint16_t c = 0; c < 3; ++c) {
    double ms = 0.0, mm = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) {
        ms += src_clipped[i];
        mm += matched[i];
        ++n;
      }
    worst = std::max(worst, std::abs(ms - mm) / static_cast<double>(n));
  }
  const double width = load_histogram(tmp / "h.json").bin_width();
  const double elapsed = seconds_since(t0);
  check(worst <= 2.0 * width, "per-tissue mean error " + fmt(worst));
  check(elapsed <= 60.0, "runtime " + fmt(elapsed) + " s");
  return "max per-tissue mean error " + fmt(worst) + " (bin width " + fmt(width) + "), " + fmt(elapsed) + " s";
}

Mask speckle(Rng& rng, Dims d, Spacing sp, double density) {
  std::vector<std::uint8_t> m(d.voxels());
  for (auto& v : m) v = rng.uniform01() < density;
  m[rng.next() % m.size()] = 1;
  return Mask(d, sp, m);
}

std::string metric_oracles() {
  Rng rng(7007);
  for (int k = 0; k < 100; ++k) {
    const Dims d = vt::random_dims(rng, 1, 12);
    const Spacing sp{rng.uniform(0.3, 3.0), rng.uniform(0.3, 3.0), rng.uniform(0.3, 3.0)};
    const Mask a = k % 3 ? vt::random_mask(rng, d, sp) : speckle(rng, d, sp, 0.1);
    const Mask b = k % 5 ? vt::random_mask(rng, d, sp) : speckle(rng, d, sp, 0.3);
    check(assd(a, b) == oracle::assd(a, b), "assd differs from oracle on pair " + std::to_string(k));
    check(hd95(a, b) == oracle::hd95(a, b), "hd95 differs from oracle on pair " + std::to_string(k));
  }

  const Dims d{6, 6, 6};
  std::vector<std::uint16_t> p(d.voxels(), 0), g(d.voxels(), 0);
  for (std::size_t z = 0; z < 2; ++z)
    for (std::size_t y = 0; y < 2; ++y)
      for (std::size_t x = 0; x < 2; ++x) {
        p[d.index(x, y, z)] = 1;
        g[d.index(x + 1, y, z)] = 1;
      }
  const LabelMap lp(d, {1, 1, 1}, p), lg(d, {1, 1, 1}, g);
  check(dice(lp, lg, 1) == 0.5, "shifted-cube DSC " + fmt(dice(lp, lg, 1)));

  for (int k = 0; k < 20; ++k) {
    const Dims dd = vt::random_dims(rng, 3, 12);
    const Spacing sp{rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)};
    const Mask a = vt::random_mask(rng, dd, sp), b = vt::random_mask(rng, dd, sp);
    for (double f : {2.0, 0.5}) {
      const Spacing s2{sp[0] * f, sp[1] * f, sp[2] * f};
      const Mask a2(dd, s2, a.values()), b2(dd, s2, b.values());
      check(assd(a2, b2) == f * assd(a, b), "ASSD spacing scaling");
      check(hd95(a2, b2) == f * hd95(a, b), "HD95 spacing scaling");
    }
  }
  return "100 pairs exact, shifted-cube DSC 0.5, spacing law exact for k in {2, 0.5}";
}

std::string gdl_gradient() {
  Rng rng(8008);
  double worst = 0.0;
  const Dims d{4, 4, 4};
  for (int k = 0; k < 20; ++k) {
    const LabelMap gt = vt::random_labels(rng, d, 3);
    SoftPrediction s{3, d, std::vector<double>(3 * d.voxels())};
    for (std::size_t p = 0; p < d.voxels(); ++p) {
      double total = 0.0;
      for (std::size_t c = 0; c < 3; ++c) total += s.scores[c * d.voxels() + p] = rng.uniform(0.05, 1.0);
      for (std::size_t c = 0; c < 3; ++c) s.scores[c * d.voxels() + p] /= total;
    }
    const auto g = generalized_dice_loss(s, gt).gradient;
    const auto fd = oracle::central_difference(
        [&](const std::vector<double>& x) { return generalized_dice_loss(SoftPrediction{3, d, x}, gt, false).loss; },
        s.scores, 1e-4);
    worst = std::max(worst, max_rel_diff(g, fd));
  }
  check(worst <= 1e-4, "FD rel err " + fmt(worst));
  const LabelMap gt(Dims{4, 2, 1}, {1, 1, 1}, std::vector<std::uint16_t>{0, 0, 0, 0, 1, 1, 1, 1});
  const double loss = generalized_dice_loss(SoftPrediction{2, gt.dims(), std::vector<double>(16, 0.5)}, gt).loss;
  check(std::abs(loss - 1.0 / 3.0) <= 1e-6, "uniform fixture loss " + fmt(loss));
  return "20 instances, max FD rel err " + fmt(worst) + ", uniform fixture " + fmt(loss);
}

// Runs every command in `dir` with relative paths; returns the concatenated outputs.
std::string cli_session(const vt::TempDir& dir, unsigned threads) {
  const std::string pre = "cd " + dir.path().string() + " && " + kCli + " --threads " + std::to_string(threads) + " ";
  vt::write_file(dir / "spec.json", R"({"seed": 4, "dims": [32, 28, 24], "spacing_mm": [1, 1, 2], "n_labels": 4,
    "shape_mode": "blobs", "intensity_table": [{"mean": -700, "std": 50}, {"mean": -50, "std": 40},
    {"mean": 200, "std": 60}, {"mean": 650, "std": 80}]})");
  vt::write_file(dir / "list.txt", "a_image.svol.json\nb_image.svol.json\n");
  const std::vector<std::string> cmds{
      "synth --spec spec.json --out a",
      "--seed 9 synth --spec spec.json --out b",
      "--seed 77 augment --image a_image.svol.json --labels a_labels.svol.json -n 2 --out aug",
      "fit-hist --list list.txt --out h.json",
      "match --image aug_0_image.svol.json --hist h.json --out m",
      "evaluate --pred aug_1_labels.svol.json --gt a_labels.svol.json --out r.json",
  };
  for (const auto& c : cmds) check(run(pre + c) == 0, "command failed: " + c);
  const auto inspect = vt::run_command(pre + "inspect a_image.svol.json b_labels.svol.json h.json r.json");
  check(inspect.exit_code == 0, "inspect failed");
  std::string all;
  for (const char* f : {"a_image.svol.json", "a_image.svol.bin", "a_labels.svol.json", "a_labels.svol.bin",
                        "b_image.svol.bin", "b_labels.svol.bin", "aug_0_image.svol.bin", "aug_0_labels.svol.bin",
                        "aug_1_image.svol.bin", "aug_1_labels.svol.bin", "aug_1_image.svol.json", "h.json",
                        "m.svol.json", "m.svol.bin", "r.json"}) {
    const std::string content = vt::read_file(dir.path() / f);
    check(!content.empty(), std::string("missing output ") + f);
    all += std::string(f) + '\n' + content;
  }
  return all + "inspect\n" + inspect.stdout_text;
}

std::string determinism() {
  std::vector<std::string> outputs;
  for (unsigned threads : {1u, 1u, 1u, 8u, 8u, 8u}) {
    vt::TempDir dir;
    outputs.push_back(cli_session(dir, threads));
  }
  for (std::size_t i = 1; i < outputs.size(); ++i)
    check(outputs[i] == outputs[0], "run " + std::to_string(i) + " differs from run 0");
  return "synth, augment, fit-hist, match, evaluate, inspect: 3 runs x {--threads 1, --threads 8} byte-identical";
}

std::string normalization_fixtures() {
  const Volume ct(Dims{5, 1, 1}, {1, 1, 1}, std::vector<float>{2048, -4096, 0, 1024, 9999});
  const Volume n = normalize_ct(ct);
  check(n[0] == 1.0f && n[1] == -1.0f && n[2] == 0.0f && n[3] == 0.5f && n[4] == 1.0f, "CT normalization");

  std::vector<float> mr;
  for (int i = 0; i <= 10; ++i) mr.push_back(static_cast<float>(50 * i));
  const Volume m = normalize_mr(Volume(Dims{11, 1, 1}, {1, 1, 1}, mr));
  check(m[1] == -1.0f && m[9] == 1.0f && m[5] == 0.0f, "MR p10/p90 endpoints");

  const Volume pc = preclip_ct(Volume(Dims{6, 1, 1}, {1, 1, 1}, std::vector<float>{-1024, -1023, 0, 1024, 1025, -3000}));
  check(pc[0] == -1023.0f && pc[1] == -1023.0f && pc[2] == 0.0f && pc[3] == 1024.0f && pc[4] == 1024.0f &&
            pc[5] == -1023.0f,
        "CT preclip boundaries");

  // Min 0 and 0.9 quantile 100 (sorted x[9]); 100 -> 2047, above clips, 0 stays 0.
  const Volume pm = preclip_mr(
      Volume(Dims{11, 1, 1}, {1, 1, 1}, std::vector<float>{0, 10, 20, 30, 40, 50, 60, 70, 80, 100, 400}));
  check(pm[0] == 0.0f && pm[9] == 2047.0f && pm[10] == 2047.0f, "MR preclip boundaries");
  const Volume neg = preclip_mr(
      Volume(Dims{11, 1, 1}, {1, 1, 1}, std::vector<float>{-100, -90, -80, -70, -60, -50, -40, -30, -20, 0, 50}));
  check(neg[0] == 0.0f && neg[9] == 2047.0f && neg[10] == 2047.0f, "MR preclip with negative minimum");
  return "CT 2048->1, -4096->-1; MR p10->-1, p90->1; CT/MR preclip boundaries exact";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<std::string()>>> criteria{
      {"partition of unity", partition_of_unity},
      {"SRC collapse laws", src_collapse_laws},
      {"Frobenius preservation", frobenius_preservation},
      {"random-conv oracle", randconv_oracle},
      {"SM properties", sm_properties},
      {"cross-modality phantom end-to-end", cross_modality_end_to_end},
      {"metric oracles", metric_oracles},
      {"GDL gradient", gdl_gradient},
      {"CLI determinism", determinism},
      {"normalization fixtures", normalization_fixtures},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    std::string detail;
    bool ok = false;
    try {
      detail = fn();
      ok = true;
    } catch (const CheckFailed& e) {
      detail = e.what;
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << ": " << detail << std::endl;
    failed += !ok;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
